#pragma once

#include "revsmell/corpus.hpp"
#include "revsmell/prompt.hpp"
#include "revsmell/taxonomy.hpp"

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revsmell::gateway {

struct ChatRequest {
    std::string model;
    std::string system;
    std::string user;
    std::optional<double> temperature;
    std::chrono::milliseconds timeout{60'000};
};

/// A chat-completion service: a system+user message pair in, text out.
/// Transport or authentication failures throw Error(BackendError).
/// Implementations must accept concurrent calls.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Connection details for an OpenAI-compatible chat-completions endpoint.
struct BackendProfile {
    std::string id;
    std::string base_url;          // may be overridden by `base_url_env`
    std::string base_url_env;
    std::string path = "/v1/chat/completions";
    std::string credential_env;
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    bool exposes_temperature = true;
    bool json_schema_response_format = true;
};

/// Built-in profiles: "stub", "openai", "together", "compat".
const BackendProfile* find_profile(std::string_view backend_id);
std::vector<std::string> backend_ids();

struct ModelConfig {
    std::string backend_id = "stub";
    std::string model_name = "stub";
    std::optional<double> temperature;
    unsigned max_attempts = 3;
    std::chrono::milliseconds request_timeout{60'000};

    /// Throws Error(ConfigError) on an unknown backend, max_attempts == 0 or a
    /// temperature outside [0, 2].
    void validate() const;
};

/// Temperature 0.0 for backends that expose it; absent otherwise.
ModelConfig default_config(std::string_view backend_id, std::string_view model_name);

enum class Status { Ok, Unresolved, BackendError };

std::string_view status_name(Status s) noexcept;

struct Prediction {
    std::string item_id;
    std::optional<Label> label;
    Status status = Status::Unresolved;
    unsigned attempts = 0;
    std::vector<std::string> raw_responses;
    std::chrono::milliseconds latency{0};
    std::string error;  // backend failure message, if any

    /// Equality ignores latency, which is never reproducible.
    friend bool operator==(const Prediction& a, const Prediction& b) {
        return a.item_id == b.item_id && a.label == b.label && a.status == b.status &&
               a.attempts == b.attempts && a.raw_responses == b.raw_responses && a.error == b.error;
    }
};

/// Strict single-field contract check; throws prompt::ContractViolation.
Label parse_response(std::string_view raw);

/// Submits the bundle, re-submitting the identical prompt after each
/// contract violation until max_attempts. Never throws for per-item failures.
Prediction classify_item(std::string_view item_id, const prompt::PromptBundle& bundle,
                         const ModelConfig& config, ChatBackend& backend);

// --- backends ----------------------------------------------------------------

using StubRules = std::vector<std::pair<std::string, Label>>;

/// Deterministic keyword matcher. Looks only inside the last comment fence of
/// the prompt (the item under classification) when one is present, matches
/// rules case-insensitively in order, and falls back to Actionable.
class StubBackend final : public ChatBackend {
public:
    explicit StubBackend(StubRules rules) : rules_(std::move(rules)) {}
    std::string complete(const ChatRequest& request) override;

private:
    StubRules rules_;
};

StubRules default_stub_rules();
/// JSON array of [keyword, label] pairs.
StubRules parse_stub_rules(std::string_view json_text);
std::unique_ptr<ChatBackend> stub_backend(StubRules rules);

/// Replays canned outcomes in call order, shared across callers. Each entry is
/// a response text, or nullopt for a transport failure. Runs out -> BackendError.
class ScriptedBackend final : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<std::optional<std::string>> script);
    std::string complete(const ChatRequest& request) override;

    std::vector<ChatRequest> requests() const;

private:
    mutable std::mutex mutex_;
    std::deque<std::optional<std::string>> script_;
    std::vector<ChatRequest> requests_;
};

/// OpenAI-compatible HTTP adapter.
class RemoteChatBackend final : public ChatBackend {
public:
    RemoteChatBackend(BackendProfile profile, std::string base_url, std::string api_key);
    std::string complete(const ChatRequest& request) override;

    /// Request body as sent; exposed for tests.
    std::string request_body(const ChatRequest& request) const;

private:
    BackendProfile profile_;
    std::string base_url_;
    std::string api_key_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Builds the backend named by config.backend_id. Remote backends read their
/// credential (and optionally base URL) from the environment; a missing
/// credential throws Error(ConfigError).
std::unique_ptr<ChatBackend> make_backend(const ModelConfig& config, const EnvLookup& env = process_env,
                                          StubRules stub_rules = default_stub_rules());

// --- batches -------------------------------------------------------------------------

struct RunRecord {
    std::string run_id;
    ModelConfig config;
    prompt::Mode mode = prompt::Mode::ZeroShot;
    std::string template_version;
    std::string template_hash;
    std::vector<std::string> exemplar_ids;
    bool exemplar_hunks = true;
    unsigned parallelism = 1;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::size_t item_count = 0;
    std::size_t ok = 0;
    std::size_t unresolved = 0;
    std::size_t backend_error = 0;
    std::map<std::string, long long> latency_ms;
};

std::string run_record_to_json(const RunRecord& record);

struct BatchSpec {
    prompt::Mode mode = prompt::Mode::ZeroShot;
    const prompt::ExemplarBlock* exemplars = nullptr;
    prompt::RenderOptions render;
    std::string run_id;
    std::uint64_t seed = 0;
};

struct BatchResult {
    std::vector<Prediction> predictions;  // sorted by item_id
    RunRecord record;
};

/// Classifies every item with at most `parallelism` requests in flight.
/// Configuration problems (bad config, duplicate ids, prompt errors) throw
/// before any request is issued; per-item failures land in the predictions.
BatchResult run_batch(std::span<const corpus::CorpusItem> items, const BatchSpec& spec,
                      const ModelConfig& config, ChatBackend& backend, unsigned parallelism);

/// Key-sorted line records: item_id, label (when ok), status, attempts, raw_responses.
std::string predictions_to_jsonl(std::span<const Prediction> predictions);
std::vector<Prediction> predictions_from_jsonl(std::string_view text);

} // namespace revsmell::gateway
