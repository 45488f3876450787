#include "revsmell/diff.hpp"

#include "revsmell/error.hpp"

#include <charconv>

namespace revsmell::diff {
namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

bool parse_uint(std::string_view& s, unsigned& out) {
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr == begin) return false;
    s.remove_prefix(static_cast<std::size_t>(ptr - begin));
    return true;
}

// "-12,3" or "-12" (length omitted means one line).
bool parse_range(std::string_view& s, char sign, unsigned& start, unsigned& len, bool& explicit_len) {
    if (s.empty() || s.front() != sign) return false;
    s.remove_prefix(1);
    if (!parse_uint(s, start)) return false;
    explicit_len = !s.empty() && s.front() == ',';
    len = 1;
    if (explicit_len) {
        s.remove_prefix(1);
        if (!parse_uint(s, len)) return false;
    }
    return true;
}

Error malformed(std::size_t line_no, std::string_view why) {
    return Error(Errc::MalformedHunkHeader,
                 "line " + std::to_string(line_no) + ": " + std::string(why));
}

DiffHunk parse_header(std::string_view line, std::size_t line_no) {
    DiffHunk hunk;
    std::string_view s = line;
    if (!starts_with(s, "@@ ")) throw malformed(line_no, "expected '@@ '");
    s.remove_prefix(3);
    if (!parse_range(s, '-', hunk.old_start, hunk.old_len, hunk.old_len_explicit))
        throw malformed(line_no, "bad old range");
    if (!starts_with(s, " ")) throw malformed(line_no, "missing space between ranges");
    s.remove_prefix(1);
    if (!parse_range(s, '+', hunk.new_start, hunk.new_len, hunk.new_len_explicit))
        throw malformed(line_no, "bad new range");
    if (!starts_with(s, " @@")) throw malformed(line_no, "missing closing '@@'");
    s.remove_prefix(3);
    hunk.section = std::string(s);
    if ((hunk.old_start == 0 && hunk.old_len != 0) || (hunk.new_start == 0 && hunk.new_len != 0))
        throw malformed(line_no, "zero start line with nonzero length");
    return hunk;
}

std::string strip_path(std::string_view raw) {
    if (const auto tab = raw.find('\t'); tab != std::string_view::npos) raw = raw.substr(0, tab);
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') raw = raw.substr(1, raw.size() - 2);
    if (starts_with(raw, "a/") || starts_with(raw, "b/")) raw.remove_prefix(2);
    return std::string(raw);
}

bool is_file_start(std::string_view line) {
    return starts_with(line, "diff ") || starts_with(line, "Index: ") || starts_with(line, "--- ");
}

bool header_opens_file(const std::vector<std::string>& header) {
    for (const auto& h : header) {
        if (is_file_start(h)) return true;
    }
    return false;
}

bool header_has(const std::vector<std::string>& header, std::string_view prefix) {
    for (const auto& h : header) {
        if (starts_with(h, prefix)) return true;
    }
    return false;
}

void assign_paths(FileDiff& file) {
    for (const auto& h : file.header) {
        if (starts_with(h, "--- ")) file.old_path = strip_path(std::string_view(h).substr(4));
        else if (starts_with(h, "+++ ")) file.new_path = strip_path(std::string_view(h).substr(4));
    }
    if (!file.old_path.empty() || !file.new_path.empty()) return;
    for (const auto& h : file.header) {
        if (!starts_with(h, "diff --git ")) continue;
        std::string_view rest = std::string_view(h).substr(11);
        const auto sep = rest.find(" b/");
        if (sep == std::string_view::npos) continue;
        file.old_path = strip_path(rest.substr(0, sep));
        file.new_path = strip_path(rest.substr(sep + 1));
    }
}

Error count_mismatch(std::size_t hunk_line_no, const DiffHunk& hunk, unsigned old_seen,
                     unsigned new_seen) {
    return Error(Errc::LineCountMismatch,
                 "hunk at line " + std::to_string(hunk_line_no) + ": expected old=" +
                     std::to_string(hunk.old_len) + " new=" + std::to_string(hunk.new_len) +
                     ", got old=" + std::to_string(old_seen) + " new=" + std::to_string(new_seen));
}

bool looks_like_body_line(std::string_view line) {
    if (line.empty()) return false;
    switch (line.front()) {
    case ' ': return true;
    case '+': return !starts_with(line, "+++ ");
    case '-': return !starts_with(line, "--- ");
    default: return false;
    }
}

// Parses the hunk whose header is lines[i]; returns the index past its body.
std::size_t parse_hunk(const std::vector<std::string_view>& lines, std::size_t i, DiffHunk& hunk) {
    const std::size_t header_no = i + 1;
    hunk = parse_header(lines[i], header_no);
    unsigned old_seen = 0;
    unsigned new_seen = 0;
    unsigned old_cur = hunk.old_start;
    unsigned new_cur = hunk.new_start;
    ++i;
    auto attach_marker = [&](std::string_view line) {
        if (hunk.lines.empty()) throw malformed(i + 1, "no-newline marker without a preceding line");
        hunk.lines.back().eol_marker = std::string(line);
    };
    while (old_seen < hunk.old_len || new_seen < hunk.new_len) {
        if (i >= lines.size()) throw count_mismatch(header_no, hunk, old_seen, new_seen);
        const std::string_view line = lines[i];
        DiffLine dl;
        if (line.empty()) {
            dl.bare = true;
        } else if (line.front() == '\\') {
            attach_marker(line);
            ++i;
            continue;
        } else if (line.front() == ' ') {
            dl.content = std::string(line.substr(1));
        } else if (line.front() == '-') {
            dl.kind = LineKind::Removed;
            dl.content = std::string(line.substr(1));
        } else if (line.front() == '+') {
            dl.kind = LineKind::Added;
            dl.content = std::string(line.substr(1));
        } else {
            throw count_mismatch(header_no, hunk, old_seen, new_seen);
        }
        const bool uses_old = dl.kind != LineKind::Added;
        const bool uses_new = dl.kind != LineKind::Removed;
        if ((uses_old && old_seen >= hunk.old_len) || (uses_new && new_seen >= hunk.new_len))
            throw count_mismatch(header_no, hunk, old_seen + uses_old, new_seen + uses_new);
        if (uses_old) {
            dl.old_line = old_cur++;
            ++old_seen;
        }
        if (uses_new) {
            dl.new_line = new_cur++;
            ++new_seen;
        }
        hunk.lines.push_back(std::move(dl));
        ++i;
    }
    while (i < lines.size() && starts_with(lines[i], "\\")) {
        attach_marker(lines[i]);
        ++i;
    }
    if (i < lines.size() && looks_like_body_line(lines[i])) {
        const bool removed = lines[i].front() == '-';
        const bool added = lines[i].front() == '+';
        throw count_mismatch(header_no, hunk, old_seen + !added, new_seen + !removed);
    }
    return i;
}

void append_line(std::string& out, std::string_view line) {
    out += line;
    out += '\n';
}

void append_body_line(std::string& out, const DiffLine& line) {
    if (!line.bare) {
        switch (line.kind) {
        case LineKind::Context: out += ' '; break;
        case LineKind::Added: out += '+'; break;
        case LineKind::Removed: out += '-'; break;
        }
    }
    append_line(out, line.content);
    if (line.eol_marker) append_line(out, *line.eol_marker);
}

std::string header_text(const DiffHunk& hunk) {
    std::string out = "@@ -" + std::to_string(hunk.old_start);
    if (hunk.old_len_explicit) out += "," + std::to_string(hunk.old_len);
    out += " +" + std::to_string(hunk.new_start);
    if (hunk.new_len_explicit) out += "," + std::to_string(hunk.new_len);
    out += " @@";
    out += hunk.section;
    out += '\n';
    return out;
}

std::optional<unsigned> line_on(const DiffLine& line, Side side) {
    return side == Side::Old ? line.old_line : line.new_line;
}

} // namespace

std::string_view side_name(Side side) noexcept { return side == Side::Old ? "old" : "new"; }

Side parse_side(std::string_view text) {
    if (text == "old") return Side::Old;
    if (text == "new") return Side::New;
    throw Error(Errc::SchemaViolation, "side must be 'old' or 'new', got '" + std::string(text) + "'");
}

bool DiffHunk::covers(Side side, unsigned line) const noexcept {
    const unsigned first = start(side);
    const unsigned len = length(side);
    return len > 0 && line >= first && line - first < len;
}

std::vector<FileDiff> parse_unified_diff(std::string_view text) {
    const auto lines = split_lines(text);
    std::vector<FileDiff> files;
    FileDiff pending;

    auto flush = [&] {
        assign_paths(pending);
        files.push_back(std::move(pending));
        pending = FileDiff{};
    };

    std::size_t i = 0;
    while (i < lines.size()) {
        const std::string_view line = lines[i];
        if (starts_with(line, "@@")) {
            DiffHunk hunk;
            const std::size_t header_no = i + 1;
            i = parse_hunk(lines, i, hunk);
            if (!pending.hunks.empty() && hunk.new_start < pending.hunks.back().new_start)
                throw malformed(header_no, "hunks out of order");
            pending.hunks.push_back(std::move(hunk));
            continue;
        }
        if (!pending.hunks.empty()) {
            flush();
        } else if (header_opens_file(pending.header) &&
                   (starts_with(line, "diff ") || starts_with(line, "Index: ") ||
                    (starts_with(line, "--- ") && header_has(pending.header, "--- ")))) {
            flush();
        }
        pending.header.emplace_back(line);
        ++i;
    }

    if (!pending.hunks.empty() || header_opens_file(pending.header)) {
        flush();
    } else if (!pending.header.empty()) {
        if (files.empty()) {
            flush();
        } else {
            files.back().trailer = std::move(pending.header);
        }
    }
    return files;
}

std::string serialize(const DiffHunk& hunk) {
    std::string out = header_text(hunk);
    for (const auto& line : hunk.lines) append_body_line(out, line);
    return out;
}

std::string serialize(const FileDiff& file) {
    std::string out;
    for (const auto& h : file.header) append_line(out, h);
    for (const auto& hunk : file.hunks) out += serialize(hunk);
    for (const auto& t : file.trailer) append_line(out, t);
    return out;
}

std::string serialize(std::span<const FileDiff> files) {
    std::string out;
    for (const auto& f : files) out += serialize(f);
    return out;
}

const DiffHunk& anchor_comment(std::span<const FileDiff> files, std::string_view path,
                               unsigned line, Side side) {
    for (const auto& file : files) {
        if (file.new_path != path && file.old_path != path) continue;
        for (const auto& hunk : file.hunks) {
            if (hunk.covers(side, line)) return hunk;
        }
    }
    throw Error(Errc::NotAnchored, std::string(path) + ":" + std::to_string(line) + " (" +
                                       std::string(side_name(side)) + ") is not inside any hunk");
}

std::string mark_span(const DiffHunk& hunk, const AnchoredSpan& span, const SpanMarkers& markers) {
    const unsigned first = hunk.start(span.side);
    const unsigned len = hunk.length(span.side);
    if (span.start_line > span.end_line || len == 0 || span.start_line < first ||
        span.end_line - first >= len) {
        throw Error(Errc::SpanOutsideHunk,
                    "span " + std::to_string(span.start_line) + "-" + std::to_string(span.end_line) +
                        " (" + std::string(side_name(span.side)) + ") outside hunk range " +
                        std::to_string(first) + "+" + std::to_string(len));
    }
    std::size_t open_at = hunk.lines.size();
    std::size_t close_after = 0;
    for (std::size_t k = 0; k < hunk.lines.size(); ++k) {
        const auto n = line_on(hunk.lines[k], span.side);
        if (!n || *n < span.start_line || *n > span.end_line) continue;
        if (open_at == hunk.lines.size()) open_at = k;
        close_after = k;
    }
    std::string out = header_text(hunk);
    for (std::size_t k = 0; k < hunk.lines.size(); ++k) {
        if (k == open_at) append_line(out, markers.open);
        append_body_line(out, hunk.lines[k]);
        if (k == close_after) append_line(out, markers.close);
    }
    return out;
}

} // namespace revsmell::diff
