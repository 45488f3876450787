#include "revsmell/gateway.hpp"

#include "http_util.hpp"
#include "json_util.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <ctime>
#include <set>
#include <thread>

namespace revsmell::gateway {

using detail::json;
using detail::RecordReader;

namespace {

const std::vector<BackendProfile>& profiles() {
    static const std::vector<BackendProfile> all = [] {
        std::vector<BackendProfile> v;
        BackendProfile stub;
        stub.id = "stub";
        stub.exposes_temperature = false;
        v.push_back(stub);

        BackendProfile openai;
        openai.id = "openai";
        openai.base_url = "https://api.openai.com";
        openai.base_url_env = "OPENAI_BASE_URL";
        openai.credential_env = "OPENAI_API_KEY";
        // Reasoning-class models reject a temperature parameter.
        openai.exposes_temperature = false;
        v.push_back(openai);

        BackendProfile together;
        together.id = "together";
        together.base_url = "https://api.together.xyz";
        together.base_url_env = "TOGETHER_BASE_URL";
        together.credential_env = "TOGETHER_API_KEY";
        v.push_back(together);

        BackendProfile compat;
        compat.id = "compat";
        compat.base_url = "http://127.0.0.1:8000";
        compat.base_url_env = "REVSMELL_COMPAT_BASE_URL";
        compat.credential_env = "REVSMELL_COMPAT_API_KEY";
        v.push_back(compat);
        return v;
    }();
    return all;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string label_response(Label label) {
    return "{\"label\":\"" + std::string(taxonomy::name(label)) + "\"}";
}

} // namespace

const BackendProfile* find_profile(std::string_view backend_id) {
    for (const auto& p : profiles()) {
        if (p.id == backend_id) return &p;
    }
    return nullptr;
}

std::vector<std::string> backend_ids() {
    std::vector<std::string> ids;
    for (const auto& p : profiles()) ids.push_back(p.id);
    return ids;
}

void ModelConfig::validate() const {
    if (find_profile(backend_id) == nullptr)
        throw Error(Errc::ConfigError, "unknown backend '" + backend_id + "'");
    if (max_attempts < 1) throw Error(Errc::ConfigError, "max_attempts must be at least 1");
    if (temperature && (*temperature < 0.0 || *temperature > 2.0))
        throw Error(Errc::ConfigError, "temperature must lie in [0, 2]");
    if (request_timeout.count() <= 0) throw Error(Errc::ConfigError, "request timeout must be positive");
}

ModelConfig default_config(std::string_view backend_id, std::string_view model_name) {
    ModelConfig config;
    config.backend_id = std::string(backend_id);
    config.model_name = std::string(model_name);
    const auto* profile = find_profile(backend_id);
    if (profile != nullptr && profile->exposes_temperature) config.temperature = 0.0;
    return config;
}

std::string_view status_name(Status s) noexcept {
    switch (s) {
    case Status::Ok: return "ok";
    case Status::Unresolved: return "unresolved";
    case Status::BackendError: return "backend_error";
    }
    return "unknown";
}

Label parse_response(std::string_view raw) { return prompt::check_response(raw); }

Prediction classify_item(std::string_view item_id, const prompt::PromptBundle& bundle,
                         const ModelConfig& config, ChatBackend& backend) {
    const ChatRequest request{config.model_name, bundle.system, bundle.rendered, config.temperature,
                              config.request_timeout};
    Prediction p;
    p.item_id = std::string(item_id);
    const auto started = std::chrono::steady_clock::now();
    auto finish = [&](Status status) {
        p.status = status;
        p.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        return p;
    };
    for (unsigned attempt = 1; attempt <= config.max_attempts; ++attempt) {
        p.attempts = attempt;
        std::string raw;
        try {
            raw = backend.complete(request);
        } catch (const std::exception& e) {
            p.error = e.what();
            return finish(Status::BackendError);
        }
        p.raw_responses.push_back(raw);
        try {
            p.label = parse_response(raw);
            return finish(Status::Ok);
        } catch (const prompt::ContractViolation&) {
        }
    }
    return finish(Status::Unresolved);
}

// --- stub ----------------------------------------------------------------------------

std::string StubBackend::complete(const ChatRequest& request) {
    std::string_view region = request.user;
    const auto open = region.rfind(prompt::Fences::comment_open);
    if (open != std::string_view::npos) {
        region.remove_prefix(open + prompt::Fences::comment_open.size());
        const auto close = region.find(prompt::Fences::comment_close);
        if (close != std::string_view::npos) region = region.substr(0, close);
    }
    const std::string haystack = lowercase(region);
    for (const auto& [keyword, label] : rules_) {
        if (haystack.find(lowercase(keyword)) != std::string::npos) return label_response(label);
    }
    return label_response(Label::Actionable);
}

StubRules default_stub_rules() {
    return {
        {"thank", Label::Praise},       {"nice", Label::Praise},
        {"lgtm", Label::Praise},        {"great", Label::Praise},
        {"ugh", Label::Toxic},          {"terrible", Label::Toxic},
        {"whoops", Label::Vague},       {"hmm", Label::Vague},
        {"weird", Label::Redundant},    {"?", Label::Question},
        {"because", Label::Clarification}, {"fyi", Label::Clarification},
    };
}

StubRules parse_stub_rules(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigError, std::string("stub rules: ") + e.what());
    }
    if (!j.is_array()) throw Error(Errc::ConfigError, "stub rules must be a JSON array");
    StubRules rules;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string())
            throw Error(Errc::ConfigError, "stub rule entries must be [keyword, label] string pairs");
        try {
            rules.emplace_back(entry[0].get<std::string>(),
                               taxonomy::parse_label(entry[1].get<std::string>()));
        } catch (const Error& e) {
            throw Error(Errc::ConfigError, std::string("stub rules: ") + e.what());
        }
    }
    return rules;
}

std::unique_ptr<ChatBackend> stub_backend(StubRules rules) {
    return std::make_unique<StubBackend>(std::move(rules));
}

// --- scripted -------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<std::optional<std::string>> script)
    : script_(script.begin(), script.end()) {}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    if (script_.empty()) throw Error(Errc::BackendError, "script exhausted");
    auto next = std::move(script_.front());
    script_.pop_front();
    if (!next) throw Error(Errc::BackendError, "scripted transport failure");
    return *next;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

// --- remote ----------------------------------------------------------------------------

RemoteChatBackend::RemoteChatBackend(BackendProfile profile, std::string base_url, std::string api_key)
    : profile_(std::move(profile)), base_url_(std::move(base_url)), api_key_(std::move(api_key)) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string RemoteChatBackend::request_body(const ChatRequest& request) const {
    nlohmann::ordered_json body = {
        {"model", request.model},
        {"messages",
         {{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}}},
    };
    if (request.temperature && profile_.exposes_temperature) body["temperature"] = *request.temperature;
    if (profile_.json_schema_response_format) {
        body["response_format"] = {
            {"type", "json_schema"},
            {"json_schema",
             {{"name", "review_comment_label"},
              {"strict", true},
              {"schema", nlohmann::ordered_json::parse(prompt::output_contract())}}},
        };
    }
    return body.dump();
}

std::string RemoteChatBackend::complete(const ChatRequest& request) {
    std::map<std::string, std::string> headers;
    if (!api_key_.empty()) headers[profile_.auth_header] = profile_.auth_prefix + api_key_;
    detail::HttpResponse res;
    try {
        res = detail::http_request("POST", base_url_ + profile_.path, headers, request_body(request),
                                   "application/json", request.timeout);
    } catch (const std::exception& e) {
        throw Error(Errc::BackendError, e.what());
    }
    if (res.status != 200) {
        throw Error(Errc::BackendError, profile_.id + " returned HTTP " + std::to_string(res.status) +
                                            ": " + res.body.substr(0, 200));
    }
    json j;
    try {
        j = json::parse(res.body);
    } catch (const json::parse_error&) {
        throw Error(Errc::BackendError, profile_.id + " returned a non-JSON body");
    }
    const auto* content = j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()
                              ? &j["choices"][0]
                              : nullptr;
    if (content == nullptr || !content->contains("message") || !(*content)["message"].contains("content"))
        throw Error(Errc::BackendError, profile_.id + " response has no choices[0].message.content");
    const auto& text = (*content)["message"]["content"];
    return text.is_string() ? text.get<std::string>() : text.dump();
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

std::unique_ptr<ChatBackend> make_backend(const ModelConfig& config, const EnvLookup& env,
                                          StubRules stub_rules) {
    config.validate();
    const BackendProfile& profile = *find_profile(config.backend_id);
    if (profile.id == "stub") return stub_backend(std::move(stub_rules));
    const auto key = env(profile.credential_env);
    if (!key || key->empty()) {
        throw Error(Errc::ConfigError, "backend '" + profile.id + "' needs credentials in $" +
                                           profile.credential_env);
    }
    std::string base = profile.base_url;
    if (!profile.base_url_env.empty()) {
        if (auto override_url = env(profile.base_url_env); override_url && !override_url->empty())
            base = *override_url;
    }
    return std::make_unique<RemoteChatBackend>(profile, base, *key);
}

// --- batches ----------------------------------------------------------------------------

BatchResult run_batch(std::span<const corpus::CorpusItem> items, const BatchSpec& spec,
                      const ModelConfig& config, ChatBackend& backend, unsigned parallelism) {
    config.validate();
    if (parallelism < 1) throw Error(Errc::ConfigError, "parallelism must be at least 1");
    std::set<std::string_view> ids;
    for (const auto& item : items) {
        if (!ids.insert(item.id).second) throw Error(Errc::ConfigError, "duplicate item id " + item.id);
    }

    std::vector<prompt::PromptBundle> bundles;
    bundles.reserve(items.size());
    for (const auto& item : items)
        bundles.push_back(prompt::render_prompt(item, spec.mode, spec.exemplars, spec.render));

    BatchResult result;
    RunRecord& rec = result.record;
    rec.run_id = spec.run_id;
    rec.config = config;
    rec.mode = spec.mode;
    rec.template_version = spec.render.tmpl->version;
    rec.template_hash = spec.render.tmpl->hash();
    if (spec.exemplars != nullptr) rec.exemplar_ids = spec.exemplars->ids();
    rec.exemplar_hunks = spec.render.exemplar_hunks;
    rec.parallelism = parallelism;
    rec.seed = spec.seed;
    rec.item_count = items.size();
    rec.started_at = utc_now();

    result.predictions.resize(items.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++)
            result.predictions[i] = classify_item(items[i].id, bundles[i], config, backend);
    };
    {
        const auto n = std::min<std::size_t>(parallelism, items.size());
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }

    std::sort(result.predictions.begin(), result.predictions.end(),
              [](const Prediction& a, const Prediction& b) { return a.item_id < b.item_id; });
    for (const auto& p : result.predictions) {
        switch (p.status) {
        case Status::Ok: ++rec.ok; break;
        case Status::Unresolved: ++rec.unresolved; break;
        case Status::BackendError: ++rec.backend_error; break;
        }
        rec.latency_ms[p.item_id] = p.latency.count();
    }
    rec.finished_at = utc_now();
    return result;
}

std::string run_record_to_json(const RunRecord& r) {
    json config = {{"backend_id", r.config.backend_id},
                   {"model_name", r.config.model_name},
                   {"max_attempts", r.config.max_attempts},
                   {"request_timeout_ms", r.config.request_timeout.count()}};
    if (r.config.temperature) config["temperature"] = *r.config.temperature;
    json j = {
        {"run_id", r.run_id},
        {"config", config},
        {"mode", prompt::mode_name(r.mode)},
        {"template_version", r.template_version},
        {"template_hash", r.template_hash},
        {"exemplar_ids", r.exemplar_ids},
        {"exemplar_hunks", r.exemplar_hunks},
        {"parallelism", r.parallelism},
        {"seed", r.seed},
        {"started_at", r.started_at},
        {"finished_at", r.finished_at},
        {"item_count", r.item_count},
        {"status_counts",
         {{"ok", r.ok}, {"unresolved", r.unresolved}, {"backend_error", r.backend_error}}},
        {"latency_ms", r.latency_ms},
    };
    return j.dump(2) + "\n";
}

std::string predictions_to_jsonl(std::span<const Prediction> predictions) {
    std::string out;
    for (const auto& p : predictions) {
        json j = {{"item_id", p.item_id},
                  {"status", status_name(p.status)},
                  {"attempts", p.attempts},
                  {"raw_responses", p.raw_responses}};
        if (p.label) j["label"] = taxonomy::name(*p.label);
        if (!p.error.empty()) j["error"] = p.error;
        out += detail::canonical(j);
        out += '\n';
    }
    return out;
}

std::vector<Prediction> predictions_from_jsonl(std::string_view text) {
    std::vector<Prediction> out;
    detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (line.empty()) return;
        const json j = detail::parse_line(line, line_no);
        RecordReader r(j, line_no);
        r.allow_only({"item_id", "label", "status", "attempts", "raw_responses", "error"});
        Prediction p;
        p.item_id = r.nonempty_string("item_id");
        const auto status = r.string("status");
        if (status == "ok") p.status = Status::Ok;
        else if (status == "unresolved") p.status = Status::Unresolved;
        else if (status == "backend_error") p.status = Status::BackendError;
        else throw detail::schema_error(line_no, "status", "unknown status '" + status + "'");
        p.attempts = static_cast<unsigned>(r.uint("attempts"));
        for (const auto& raw : r.at("raw_responses")) {
            if (!raw.is_string()) throw detail::schema_error(line_no, "raw_responses", "expected strings");
            p.raw_responses.push_back(raw.get<std::string>());
        }
        if (r.has("label")) {
            try {
                p.label = taxonomy::parse_label(r.string("label"));
            } catch (const Error&) {
                throw detail::schema_error(line_no, "label", "not a taxonomy label");
            }
        }
        if (r.has("error")) p.error = r.string("error");
        if ((p.status == Status::Ok) != p.label.has_value())
            throw detail::schema_error(line_no, "label", "present exactly when status is ok");
        out.push_back(std::move(p));
    });
    return out;
}

} // namespace revsmell::gateway
