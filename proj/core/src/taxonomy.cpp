#include "revsmell/taxonomy.hpp"

#include "revsmell/error.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

namespace revsmell::taxonomy {
namespace {

constexpr std::array<LabelInfo, kLabelCount> kInfo{{
    {Label::Incorrect, "Incorrect",
     "Claims a specific problem in the code, but that claim is false for the current patch.",
     true, "there should be 'True'?", 19},
    {Label::Toxic, "Toxic",
     "Uses hostile, rude, or mocking language instead of a professional tone.", true,
     "ugh. this kind of embedded tribal knowledge is just terrible and is an example of why "
     "the PCI module is so hard to work with :(",
     10},
    {Label::Unrelated, "Unrelated", "Unrelated to the current diff or PR scope.", true,
     "Tolkien would be proud", 8},
    {Label::Vague, "Vague",
     "Hints at an issue but does not clearly state what/where/why, so it is hard to act on.",
     true, "Whoops", 13},
    {Label::Redundant, "Redundant",
     "Restates information already obvious from the code, adding no new insight or request.",
     true, "weird that this even existed in the first place", 39},
    {Label::Praise, "Praise",
     "Primarily praises the code change without suggesting any changes.", true,
     "thank you for making this into something somewhat understandable with some code "
     "comments.",
     70},
    {Label::Question, "Question",
     "Primarily asks for clarification about this change, without directly requesting a code "
     "change.",
     false, "Why do you need this mock?", 50},
    {Label::Actionable, "Actionable", "Explains a concern and recommends a code change.", false,
     "you can use decorator instead of this.", 176},
    {Label::Clarification, "Clarification",
     "Adds helpful context/explanation about the code change; does not request a code change.",
     false,
     "I guess this works to fail scheduling because we don't use the PlacementFixture.", 63},
}};

constexpr std::array<Label, kLabelCount> kOrder{
    Label::Incorrect, Label::Toxic,    Label::Unrelated,  Label::Vague,        Label::Redundant,
    Label::Praise,    Label::Question, Label::Actionable, Label::Clarification,
};

constexpr unsigned kUsefulParentCount = 289;

constexpr bool table_consistent() {
    unsigned total = 0;
    unsigned useful = 0;
    for (std::size_t i = 0; i < kInfo.size(); ++i) {
        if (index_of(kInfo[i].label) != i || kOrder[i] != kInfo[i].label) return false;
        if (kInfo[i].exemplar_comment.empty()) return false;
        total += kInfo[i].corpus_count;
        if (!kInfo[i].smell) useful += kInfo[i].corpus_count;
    }
    return total == 448 && useful == kUsefulParentCount;
}
static_assert(table_consistent(), "label table counts or ordering are inconsistent");

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

} // namespace

const std::array<Label, kLabelCount>& label_set() noexcept { return kOrder; }

const LabelInfo& info(Label label) noexcept { return kInfo[index_of(label)]; }

std::string_view name(Label label) noexcept { return info(label).name; }

bool is_smell(Label label) noexcept { return info(label).smell; }

Label parse_label(std::string_view text) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::string_view trimmed = text;
    while (!trimmed.empty() && is_space(trimmed.front())) trimmed.remove_prefix(1);
    while (!trimmed.empty() && is_space(trimmed.back())) trimmed.remove_suffix(1);
    for (const auto& entry : kInfo) {
        if (iequals(entry.name, trimmed)) return entry.label;
    }
    throw Error(Errc::UnknownLabel, "unknown label: '" + std::string(text) + "'");
}

unsigned useful_group_count() noexcept { return kUsefulParentCount; }

std::string export_json() {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& entry : kInfo) {
        out.push_back({{"name", entry.name},
                       {"definition", entry.definition},
                       {"smell", entry.smell},
                       {"exemplar", entry.exemplar_comment}});
    }
    return out.dump();
}

std::string definitions_text() {
    std::string out;
    for (const auto& entry : kInfo) {
        out += "- ";
        out += entry.name;
        out += entry.smell ? " (smell): " : " (useful): ";
        out += entry.definition;
        out += '\n';
    }
    return out;
}

} // namespace revsmell::taxonomy
