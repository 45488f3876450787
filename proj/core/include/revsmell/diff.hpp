#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revsmell::diff {

enum class Side { Old, New };

std::string_view side_name(Side side) noexcept;
/// Accepts "old" / "new". Throws Error(SchemaViolation) otherwise.
Side parse_side(std::string_view text);

enum class LineKind { Context, Added, Removed };

struct DiffLine {
    LineKind kind = LineKind::Context;
    std::string content;  // without the leading marker character
    std::optional<unsigned> old_line;
    std::optional<unsigned> new_line;
    // A "\ No newline at end of file" line that followed this one, verbatim.
    std::optional<std::string> eol_marker;
    // Context line whose leading space was stripped by the producing tool.
    bool bare = false;

    friend bool operator==(const DiffLine&, const DiffLine&) = default;
};

struct DiffHunk {
    unsigned old_start = 0;
    unsigned old_len = 0;
    unsigned new_start = 0;
    unsigned new_len = 0;
    // "@@ -3 +3 @@" omits lengths of one; remembered for byte-exact output.
    bool old_len_explicit = true;
    bool new_len_explicit = true;
    std::string section;  // trailing text after the closing "@@"
    std::vector<DiffLine> lines;

    bool covers(Side side, unsigned line) const noexcept;
    unsigned start(Side side) const noexcept { return side == Side::Old ? old_start : new_start; }
    unsigned length(Side side) const noexcept { return side == Side::Old ? old_len : new_len; }

    friend bool operator==(const DiffHunk&, const DiffHunk&) = default;
};

struct FileDiff {
    std::string old_path;
    std::string new_path;
    std::vector<std::string> header;   // raw lines preceding the first hunk
    std::vector<DiffHunk> hunks;
    std::vector<std::string> trailer;  // raw lines after the last hunk of the document

    friend bool operator==(const FileDiff&, const FileDiff&) = default;
};

struct AnchoredSpan {
    Side side = Side::New;
    unsigned start_line = 1;
    unsigned end_line = 1;

    friend bool operator==(const AnchoredSpan&, const AnchoredSpan&) = default;
};

struct SpanMarkers {
    std::string open = "<<<REVIEW_SPAN>>>";
    std::string close = "<<<END_REVIEW_SPAN>>>";
};

/// Parses a unified diff. Every emitted line is '\n'-terminated on
/// re-serialization, so a document without a final newline gains one.
///
/// Throws Error(MalformedHunkHeader) for unparsable "@@" lines or hunks out of
/// order, Error(LineCountMismatch) when a hunk body disagrees with its header.
std::vector<FileDiff> parse_unified_diff(std::string_view text);

std::string serialize(const DiffHunk& hunk);
std::string serialize(const FileDiff& file);
std::string serialize(std::span<const FileDiff> files);

/// Returns the unique hunk whose range on `side` covers `line` in the file
/// named `path`. Throws Error(NotAnchored) when there is none.
const DiffHunk& anchor_comment(std::span<const FileDiff> files, std::string_view path,
                               unsigned line, Side side);

/// Serializes `hunk` with marker lines around the lines of `span`.
/// Throws Error(SpanOutsideHunk).
std::string mark_span(const DiffHunk& hunk, const AnchoredSpan& span,
                      const SpanMarkers& markers = {});

} // namespace revsmell::diff
