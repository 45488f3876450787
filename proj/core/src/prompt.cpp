#include "revsmell/prompt.hpp"

#include "json_util.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

namespace revsmell::prompt {

namespace detail {
extern const std::string_view kBuiltinTemplateJson;
}

using revsmell::detail::json;
using revsmell::detail::RecordReader;

namespace {

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

void append_block(std::string& out, std::string_view text) {
    out += text;
    if (text.empty() || text.back() != '\n') out += '\n';
}

void append_fenced(std::string& out, std::string_view open, std::string_view body,
                   std::string_view close) {
    out += open;
    out += '\n';
    append_block(out, body);
    out += close;
    out += '\n';
}

std::string section_title(std::string_view name) {
    if (name == "task_description") return "TASK DESCRIPTION";
    if (name == "instructions") return "INSTRUCTIONS";
    if (name == "taxonomy") return "TAXONOMY";
    if (name == "exemplars") return "EXEMPLARS";
    return "INPUT";
}

std::string label_list() {
    std::string out;
    for (auto label : taxonomy::label_set()) {
        if (!out.empty()) out += ", ";
        out += taxonomy::name(label);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error(Errc::ConfigError, "SHA-256 digest failed");
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

} // namespace

std::string_view mode_name(Mode mode) noexcept {
    return mode == Mode::ZeroShot ? "zero_shot" : "one_shot";
}

Mode parse_mode(std::string_view text) {
    if (text == "zero" || text == "zero_shot") return Mode::ZeroShot;
    if (text == "one" || text == "one_shot") return Mode::OneShot;
    throw Error(Errc::ConfigError, "mode must be 'zero' or 'one', got '" + std::string(text) + "'");
}

// --- template ---------------------------------------------------------------------

const PromptTemplate& PromptTemplate::builtin() {
    static const PromptTemplate tmpl = from_json(detail::kBuiltinTemplateJson);
    return tmpl;
}

PromptTemplate PromptTemplate::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigError, std::string("prompt template: ") + e.what());
    }
    try {
        RecordReader r(j, 1);
        r.allow_only({"version", "system", "task_description", "instructions", "exemplars_intro",
                      "input_intro"});
        return PromptTemplate{r.nonempty_string("version"),      r.string("system"),
                              r.nonempty_string("task_description"), r.nonempty_string("instructions"),
                              r.string("exemplars_intro"),       r.string("input_intro")};
    } catch (const Error& e) {
        throw Error(Errc::ConfigError, std::string("prompt template: ") + e.what());
    }
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
    return from_json(revsmell::detail::read_file(path.string()));
}

std::string PromptTemplate::to_json() const {
    return revsmell::detail::canonical(json{{"version", version},
                                            {"system", system},
                                            {"task_description", task_description},
                                            {"instructions", instructions},
                                            {"exemplars_intro", exemplars_intro},
                                            {"input_intro", input_intro}});
}

std::string PromptTemplate::hash() const { return sha256_hex(to_json()); }

// --- exemplars ----------------------------------------------------------------------

ExemplarBlock ExemplarBlock::from_items(std::span<const corpus::CorpusItem> items) {
    std::array<const corpus::CorpusItem*, kLabelCount> slots{};
    for (const auto& item : items) {
        if (!item.gold_label)
            throw Error(Errc::IncompleteExemplars, "exemplar " + item.id + " has no gold label");
        auto& slot = slots[index_of(*item.gold_label)];
        if (slot != nullptr) {
            throw Error(Errc::IncompleteExemplars,
                        "two exemplars for " + std::string(taxonomy::name(*item.gold_label)));
        }
        slot = &item;
    }
    ExemplarBlock block;
    for (auto label : taxonomy::label_set()) {
        const auto* item = slots[index_of(label)];
        if (item == nullptr) {
            throw Error(Errc::IncompleteExemplars,
                        "missing exemplar for " + std::string(taxonomy::name(label)));
        }
        block.entries_.push_back({item->id, label, item->comment_text, item->hunk_text});
    }
    return block;
}

std::vector<std::string> ExemplarBlock::ids() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.item_id);
    return out;
}

bool ExemplarBlock::contains(std::string_view item_id) const {
    for (const auto& e : entries_) {
        if (e.item_id == item_id) return true;
    }
    return false;
}

// --- rendering ------------------------------------------------------------------------

PromptBundle render_prompt(const corpus::CorpusItem& item, Mode mode,
                           const ExemplarBlock* exemplars, const RenderOptions& options) {
    const PromptTemplate& tmpl = *options.tmpl;
    if (mode == Mode::OneShot && (exemplars == nullptr || exemplars->entries().size() != kLabelCount))
        throw Error(Errc::IncompleteExemplars, "one-shot prompts need one exemplar per label");
    if (item.is_exemplar || (exemplars != nullptr && exemplars->contains(item.id)))
        throw Error(Errc::ExemplarLeak, "item " + item.id + " is an exemplar");

    PromptBundle bundle;
    bundle.mode = mode;
    bundle.system = tmpl.system;
    bundle.sections.emplace_back("task_description", tmpl.task_description);
    bundle.sections.emplace_back(
        "instructions",
        replace_all(replace_all(tmpl.instructions, "{labels}", label_list()), "{schema}",
                    output_contract()));
    bundle.sections.emplace_back("taxonomy", taxonomy::definitions_text());

    if (mode == Mode::OneShot) {
        std::string block;
        append_block(block, tmpl.exemplars_intro);
        int n = 0;
        for (const auto& entry : exemplars->entries()) {
            block += '\n';
            block += "Example " + std::to_string(++n) + "\n";
            append_fenced(block, Fences::comment_open, entry.comment_text, Fences::comment_close);
            if (options.exemplar_hunks)
                append_fenced(block, Fences::hunk_open, entry.hunk_text, Fences::hunk_close);
            block += "Answer: {\"label\":\"";
            block += taxonomy::name(entry.label);
            block += "\"}\n";
        }
        bundle.sections.emplace_back("exemplars", std::move(block));
    }

    std::string input;
    append_block(input, tmpl.input_intro);
    append_fenced(input, Fences::comment_open, item.comment_text, Fences::comment_close);
    append_fenced(input, Fences::hunk_open, item.hunk_text, Fences::hunk_close);
    bundle.sections.emplace_back("input", std::move(input));

    for (std::size_t k = 0; k < bundle.sections.size(); ++k) {
        if (k > 0) bundle.rendered += '\n';
        bundle.rendered += "### " + section_title(bundle.sections[k].first) + "\n";
        append_block(bundle.rendered, bundle.sections[k].second);
    }
    return bundle;
}

// --- contract ---------------------------------------------------------------------------

std::string_view violation_name(ViolationKind kind) noexcept {
    switch (kind) {
    case ViolationKind::NotObject: return "not_object";
    case ViolationKind::ExtraFields: return "extra_fields";
    case ViolationKind::MissingLabel: return "missing_label";
    case ViolationKind::UnknownLabel: return "unknown_label";
    }
    return "unknown";
}

std::string output_contract() {
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (auto label : taxonomy::label_set()) labels.push_back(taxonomy::name(label));
    nlohmann::ordered_json schema = {
        {"type", "object"},
        {"properties", {{"label", {{"type", "string"}, {"enum", labels}}}}},
        {"required", {"label"}},
        {"additionalProperties", false},
    };
    return schema.dump();
}

Label check_response(std::string_view raw) {
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::parse_error&) {
        throw ContractViolation(ViolationKind::NotObject, "response is not JSON");
    }
    if (!j.is_object()) throw ContractViolation(ViolationKind::NotObject, "response is not a JSON object");
    const auto it = j.find("label");
    if (it == j.end()) throw ContractViolation(ViolationKind::MissingLabel, "no \"label\" field");
    if (j.size() != 1) throw ContractViolation(ViolationKind::ExtraFields, "fields other than \"label\"");
    if (!it->is_string()) throw ContractViolation(ViolationKind::UnknownLabel, "label is not a string");
    try {
        return taxonomy::parse_label(it->get<std::string>());
    } catch (const Error&) {
        throw ContractViolation(ViolationKind::UnknownLabel, "'" + it->get<std::string>() + "'");
    }
}

} // namespace revsmell::prompt
