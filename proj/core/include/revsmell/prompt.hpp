#pragma once

#include "revsmell/corpus.hpp"
#include "revsmell/error.hpp"
#include "revsmell/taxonomy.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revsmell::prompt {

enum class Mode { ZeroShot, OneShot };

std::string_view mode_name(Mode mode) noexcept;
/// Accepts "zero"/"one" and "zero_shot"/"one_shot".
Mode parse_mode(std::string_view text);

/// Versioned prompt wording. Only the section skeleton is fixed in code; the
/// prose lives in template files. `{labels}` and `{schema}` in the
/// instructions are substituted at render time.
struct PromptTemplate {
    std::string version;
    std::string system;
    std::string task_description;
    std::string instructions;
    std::string exemplars_intro;
    std::string input_intro;

    /// The template shipped as templates/prompt_v1.json, compiled in.
    static const PromptTemplate& builtin();
    static PromptTemplate from_json(std::string_view text);
    static PromptTemplate load(const std::filesystem::path& path);

    std::string to_json() const;
    /// SHA-256 (hex) of the canonical JSON form; recorded with every run.
    std::string hash() const;
};

struct Fences {
    static constexpr std::string_view comment_open = "<<<COMMENT>>>";
    static constexpr std::string_view comment_close = "<<<END_COMMENT>>>";
    static constexpr std::string_view hunk_open = "<<<DIFF_HUNK>>>";
    static constexpr std::string_view hunk_close = "<<<END_DIFF_HUNK>>>";
};

struct ExemplarEntry {
    std::string item_id;
    Label label;
    std::string comment_text;
    std::string hunk_text;
};

/// One entry per label in canonical order.
class ExemplarBlock {
public:
    /// Throws Error(IncompleteExemplars) unless the items carry exactly one
    /// gold label each and cover all nine labels once.
    static ExemplarBlock from_items(std::span<const corpus::CorpusItem> items);

    const std::vector<ExemplarEntry>& entries() const noexcept { return entries_; }
    std::vector<std::string> ids() const;
    bool contains(std::string_view item_id) const;

private:
    std::vector<ExemplarEntry> entries_;
};

struct RenderOptions {
    const PromptTemplate* tmpl = &PromptTemplate::builtin();
    bool exemplar_hunks = true;
};

struct PromptBundle {
    Mode mode = Mode::ZeroShot;
    std::string system;
    std::vector<std::pair<std::string, std::string>> sections;
    std::string rendered;
};

/// Renders the fixed layout: task_description, instructions, taxonomy,
/// exemplars (one-shot only), input.
///
/// Throws Error(IncompleteExemplars) when one-shot lacks a block and
/// Error(ExemplarLeak) when the item is itself an exemplar.
PromptBundle render_prompt(const corpus::CorpusItem& item, Mode mode,
                           const ExemplarBlock* exemplars, const RenderOptions& options = {});

// --- response contract ----------------------------------------------------------

enum class ViolationKind { NotObject, ExtraFields, MissingLabel, UnknownLabel };

std::string_view violation_name(ViolationKind kind) noexcept;

class ContractViolation : public Error {
public:
    ContractViolation(ViolationKind kind, const std::string& detail)
        : Error(Errc::ContractViolation,
                std::string(violation_name(kind)) + ": " + detail),
          kind_(kind) {}

    ViolationKind kind() const noexcept { return kind_; }

private:
    ViolationKind kind_;
};

/// JSON Schema of the only acceptable model response: an object with the
/// single key "label" naming one of the nine labels.
std::string output_contract();

/// Validates a raw response against the contract; throws ContractViolation.
Label check_response(std::string_view raw);

} // namespace revsmell::prompt
