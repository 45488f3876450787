#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace revsmell {

/// The closed set of review-comment labels. Enumerator order is the
/// canonical order used for every matrix index in the toolkit.
enum class Label : std::uint8_t {
    Incorrect,
    Toxic,
    Unrelated,
    Vague,
    Redundant,
    Praise,
    Question,
    Actionable,
    Clarification,
};

inline constexpr std::size_t kLabelCount = 9;

constexpr std::size_t index_of(Label label) noexcept {
    return static_cast<std::size_t>(label);
}

struct LabelInfo {
    Label label;
    std::string_view name;
    std::string_view definition;
    bool smell;
    std::string_view exemplar_comment;
    unsigned corpus_count;
};

namespace taxonomy {

/// All nine labels in canonical order.
const std::array<Label, kLabelCount>& label_set() noexcept;

const LabelInfo& info(Label label) noexcept;

std::string_view name(Label label) noexcept;

bool is_smell(Label label) noexcept;

/// Trims surrounding whitespace and matches case-insensitively against the
/// canonical names. Throws Error(UnknownLabel) otherwise.
Label parse_label(std::string_view text);

/// Size of the "Useful" grouping (the non-smell labels) in the labeled corpus.
unsigned useful_group_count() noexcept;

/// UTF-8 JSON array, canonical order: {name, definition, smell, exemplar}.
std::string export_json();

/// One "- Name: definition" line per label. This is what prompts embed;
/// exemplars are deliberately absent.
std::string definitions_text();

} // namespace taxonomy
} // namespace revsmell
