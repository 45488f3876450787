#pragma once

#include "revsmell/diff.hpp"
#include "revsmell/taxonomy.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace revsmell::corpus {

/// A comment as it appears in the upstream review-comment dataset.
struct UpstreamRecord {
    std::string id;
    std::string comment_text;
    std::string upstream_category;
    std::optional<std::string> upstream_subcategory;
    std::string patchset_url;
    std::string file_path;
    unsigned line = 1;
    diff::Side side = diff::Side::New;
    std::optional<unsigned> end_line;  // multi-line comments only

    friend bool operator==(const UpstreamRecord&, const UpstreamRecord&) = default;
};

enum class Provenance { SmellCandidate, BalancedSample };

std::string_view provenance_name(Provenance p) noexcept;

struct CorpusItem {
    std::string id;
    std::string comment_text;
    std::string hunk_text;  // hunk serialization with span marker lines
    diff::AnchoredSpan span;
    std::string discussion_url;
    std::optional<Label> gold_label;
    bool is_exemplar = false;
    Provenance provenance = Provenance::SmellCandidate;

    friend bool operator==(const CorpusItem&, const CorpusItem&) = default;
};

using LabelCounts = std::array<unsigned, kLabelCount>;

struct CorpusManifest {
    std::vector<CorpusItem> items;
    std::uint64_t seed = 0;
    diff::SpanMarkers markers;

    /// Gold-label tallies in canonical order; unlabeled items are not counted.
    LabelCounts counts_by_label() const;
    const CorpusItem* find(std::string_view id) const;

    friend bool operator==(const CorpusManifest& a, const CorpusManifest& b) {
        return a.items == b.items && a.seed == b.seed && a.markers.open == b.markers.open &&
               a.markers.close == b.markers.close;
    }
};

// --- upstream records -------------------------------------------------------

/// One JSON object per line. Throws Error(SchemaViolation) naming the line
/// and field on any structural problem, duplicate id or empty patchset_url.
std::vector<UpstreamRecord> parse_upstream(std::string_view jsonl);
std::vector<UpstreamRecord> load_upstream(const std::filesystem::path& path);
std::string upstream_to_jsonl(std::span<const UpstreamRecord> records);

bool is_smell_candidate(const UpstreamRecord& record) noexcept;

/// Records labeled "False Positive", or "Discussion" with subcategory
/// "Praise", in input order.
std::vector<UpstreamRecord> select_smell_candidates(std::span<const UpstreamRecord> records);

// --- sampling ---------------------------------------------------------------

/// A permutation of [0, n) from a forward Fisher-Yates shuffle driven by
/// std::mt19937_64(seed). Prefixes are uniform samples without replacement.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// n records drawn uniformly without replacement, in draw order.
/// Throws Error(InsufficientPopulation) when n > rest.size().
std::vector<UpstreamRecord> sample_balanced(std::span<const UpstreamRecord> rest, std::size_t n,
                                            std::uint64_t seed);

// --- exemplar split -----------------------------------------------------------

struct ExemplarSplit {
    std::vector<CorpusItem> exemplars;  // canonical label order
    std::vector<CorpusItem> eval_set;   // manifest order
};

/// Partitions the manifest into one exemplar per label and the evaluation
/// set. Items are copied unchanged.
ExemplarSplit split_exemplars(const CorpusManifest& manifest,
                              std::span<const std::string> exemplar_ids);

/// Ids from a plain list file: one per line, blank lines and '#' comments skipped.
std::vector<std::string> read_id_list(const std::filesystem::path& path);

// --- manifest persistence -------------------------------------------------------

/// Canonical text: a header line followed by one key-sorted JSON object per item.
std::string manifest_to_jsonl(const CorpusManifest& manifest);
CorpusManifest manifest_from_jsonl(std::string_view text);

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path);

// --- construction -----------------------------------------------------------------

/// Supplies unified-diff text for a patchset URL. Failures throw
/// Error(IngestionError); an empty diff is never returned in place of one.
class DiffSource {
public:
    virtual ~DiffSource() = default;
    virtual std::string fetch(const std::string& url) = 0;
};

/// file:// URLs read from disk; http(s):// URLs use a plain GET. When a cache
/// directory is set, `<dir>/<sanitized url>.diff` is consulted first and
/// successful downloads are written there.
class UrlDiffSource final : public DiffSource {
public:
    explicit UrlDiffSource(std::optional<std::filesystem::path> cache_dir = std::nullopt,
                           int timeout_seconds = 30);
    std::string fetch(const std::string& url) override;

    static std::string cache_name(std::string_view url);

private:
    std::optional<std::filesystem::path> cache_dir_;
    int timeout_seconds_;
};

/// In-memory URL -> diff map, for tests and replays.
class MapDiffSource final : public DiffSource {
public:
    explicit MapDiffSource(std::map<std::string, std::string> diffs) : diffs_(std::move(diffs)) {}
    std::string fetch(const std::string& url) override;

private:
    std::map<std::string, std::string> diffs_;
};

struct RejectEntry {
    std::string id;
    std::string reason;  // error code name, e.g. "NotAnchored"
    std::string detail;
    Provenance stage = Provenance::SmellCandidate;
};

std::string rejects_to_jsonl(std::span<const RejectEntry> rejects);

struct BuildOptions {
    std::uint64_t seed = 0;
    // Size of the random non-candidate sample; defaults to the number of
    // anchored smell candidates.
    std::optional<std::size_t> sample_size;
    diff::SpanMarkers markers;
};

struct BuildResult {
    CorpusManifest manifest;
    std::vector<RejectEntry> rejects;
    std::size_t smell_candidates = 0;  // before anchoring
    std::size_t attempted = 0;         // records that went through anchoring

    double reject_rate() const noexcept {
        return attempted == 0 ? 0.0 : static_cast<double>(rejects.size()) / attempted;
    }
};

/// Anchors a record's comment to its hunk and renders the marked hunk.
/// Throws Error(NotAnchored) / Error(SpanOutsideHunk) when the item must be dropped.
CorpusItem anchor_record(const UpstreamRecord& record, std::span<const diff::FileDiff> files,
                         Provenance provenance, const diff::SpanMarkers& markers);

/// Smell candidates plus a seeded balanced sample of the remainder. Records
/// that fail anchoring go to the reject list; rejected sample draws are
/// replaced by the next draw of the same seeded permutation.
BuildResult build_corpus(std::span<const UpstreamRecord> records, const BuildOptions& options,
                         DiffSource& source);

} // namespace revsmell::corpus
