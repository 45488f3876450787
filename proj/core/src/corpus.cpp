#include "revsmell/corpus.hpp"

#include "http_util.hpp"
#include "json_util.hpp"
#include "revsmell/error.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace revsmell::corpus {

using detail::json;
using detail::RecordReader;

namespace {

constexpr std::string_view kManifestFormat = "revsmell-manifest/1";

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

Provenance parse_provenance(std::string_view s, std::size_t line_no) {
    if (s == "smell_candidate") return Provenance::SmellCandidate;
    if (s == "balanced_sample") return Provenance::BalancedSample;
    throw detail::schema_error(line_no, "provenance", "unknown value '" + std::string(s) + "'");
}

unsigned count_marker_lines(std::string_view text, std::string_view marker) {
    unsigned n = 0;
    detail::for_each_line(text, [&](std::string_view line, std::size_t) {
        if (line == marker) ++n;
    });
    return n;
}

json item_to_json(const CorpusItem& item) {
    json j = {
        {"id", item.id},
        {"comment_text", item.comment_text},
        {"hunk_text", item.hunk_text},
        {"span",
         {{"side", diff::side_name(item.span.side)},
          {"start_line", item.span.start_line},
          {"end_line", item.span.end_line}}},
        {"discussion_url", item.discussion_url},
        {"is_exemplar", item.is_exemplar},
        {"provenance", provenance_name(item.provenance)},
    };
    if (item.gold_label) j["gold_label"] = taxonomy::name(*item.gold_label);
    return j;
}

CorpusItem item_from_json(const json& j, std::size_t line_no, const diff::SpanMarkers& markers) {
    RecordReader r(j, line_no);
    r.allow_only({"id", "comment_text", "hunk_text", "span", "discussion_url", "gold_label",
                  "is_exemplar", "provenance"});
    CorpusItem item;
    item.id = r.nonempty_string("id");
    item.comment_text = r.string("comment_text");
    item.hunk_text = r.string("hunk_text");
    item.discussion_url = r.nonempty_string("discussion_url");
    item.is_exemplar = r.boolean("is_exemplar");
    item.provenance = parse_provenance(r.string("provenance"), line_no);
    if (r.has("gold_label")) {
        try {
            item.gold_label = taxonomy::parse_label(r.string("gold_label"));
        } catch (const Error&) {
            throw detail::schema_error(line_no, "gold_label", "not a taxonomy label");
        }
    }
    RecordReader span(r.at("span"), line_no);
    span.allow_only({"side", "start_line", "end_line"});
    try {
        item.span.side = diff::parse_side(span.string("side"));
    } catch (const Error&) {
        throw detail::schema_error(line_no, "span.side", "expected 'old' or 'new'");
    }
    item.span.start_line = span.positive("start_line");
    item.span.end_line = span.positive("end_line");
    if (item.span.start_line > item.span.end_line)
        throw detail::schema_error(line_no, "span", "start_line after end_line");
    if (item.is_exemplar && !item.gold_label)
        throw detail::schema_error(line_no, "gold_label", "exemplars must carry a gold label");
    if (count_marker_lines(item.hunk_text, markers.open) != 1 ||
        count_marker_lines(item.hunk_text, markers.close) != 1)
        throw detail::schema_error(line_no, "hunk_text",
                                   "expected exactly one open and one close span marker line");
    return item;
}

json counts_json(const LabelCounts& counts) {
    json j = json::object();
    for (auto label : taxonomy::label_set()) j[std::string(taxonomy::name(label))] = counts[index_of(label)];
    return j;
}

} // namespace

std::string_view provenance_name(Provenance p) noexcept {
    return p == Provenance::SmellCandidate ? "smell_candidate" : "balanced_sample";
}

LabelCounts CorpusManifest::counts_by_label() const {
    LabelCounts counts{};
    for (const auto& item : items) {
        if (item.gold_label) ++counts[index_of(*item.gold_label)];
    }
    return counts;
}

const CorpusItem* CorpusManifest::find(std::string_view id) const {
    for (const auto& item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

// --- upstream ----------------------------------------------------------------

std::vector<UpstreamRecord> parse_upstream(std::string_view jsonl) {
    std::vector<UpstreamRecord> out;
    std::set<std::string, std::less<>> seen;
    detail::for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
        if (line.empty()) return;
        const json j = detail::parse_line(line, line_no);
        RecordReader r(j, line_no);
        r.allow_only({"id", "comment_text", "upstream_category", "upstream_subcategory",
                      "patchset_url", "file_path", "line", "side", "end_line"});
        UpstreamRecord rec;
        rec.id = r.nonempty_string("id");
        rec.comment_text = r.string("comment_text");
        rec.upstream_category = r.nonempty_string("upstream_category");
        if (r.has("upstream_subcategory")) rec.upstream_subcategory = r.string("upstream_subcategory");
        rec.patchset_url = r.nonempty_string("patchset_url");
        rec.file_path = r.nonempty_string("file_path");
        rec.line = r.positive("line");
        if (r.has("side")) {
            try {
                rec.side = diff::parse_side(r.string("side"));
            } catch (const Error&) {
                throw detail::schema_error(line_no, "side", "expected 'old' or 'new'");
            }
        }
        if (r.has("end_line")) {
            rec.end_line = r.positive("end_line");
            if (*rec.end_line < rec.line) throw detail::schema_error(line_no, "end_line", "before line");
        }
        if (!seen.insert(rec.id).second) throw detail::schema_error(line_no, "id", "duplicate id");
        out.push_back(std::move(rec));
    });
    return out;
}

std::vector<UpstreamRecord> load_upstream(const std::filesystem::path& path) {
    return parse_upstream(detail::read_file(path.string()));
}

std::string upstream_to_jsonl(std::span<const UpstreamRecord> records) {
    std::string out;
    for (const auto& r : records) {
        json j = {{"id", r.id},
                  {"comment_text", r.comment_text},
                  {"upstream_category", r.upstream_category},
                  {"patchset_url", r.patchset_url},
                  {"file_path", r.file_path},
                  {"line", r.line},
                  {"side", diff::side_name(r.side)}};
        if (r.upstream_subcategory) j["upstream_subcategory"] = *r.upstream_subcategory;
        if (r.end_line) j["end_line"] = *r.end_line;
        out += detail::canonical(j);
        out += '\n';
    }
    return out;
}

bool is_smell_candidate(const UpstreamRecord& record) noexcept {
    if (record.upstream_category == "False Positive") return true;
    return record.upstream_category == "Discussion" && record.upstream_subcategory &&
           *record.upstream_subcategory == "Praise";
}

std::vector<UpstreamRecord> select_smell_candidates(std::span<const UpstreamRecord> records) {
    std::vector<UpstreamRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), is_smell_candidate);
    return out;
}

// --- sampling ------------------------------------------------------------------

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, n - i));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

std::vector<UpstreamRecord> sample_balanced(std::span<const UpstreamRecord> rest, std::size_t n,
                                            std::uint64_t seed) {
    if (n > rest.size()) {
        throw Error(Errc::InsufficientPopulation, "requested " + std::to_string(n) +
                                                      " records from a population of " +
                                                      std::to_string(rest.size()));
    }
    const auto perm = seeded_permutation(rest.size(), seed);
    std::vector<UpstreamRecord> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(rest[perm[k]]);
    return out;
}

// --- exemplars -------------------------------------------------------------------

ExemplarSplit split_exemplars(const CorpusManifest& manifest,
                              std::span<const std::string> exemplar_ids) {
    std::array<const CorpusItem*, kLabelCount> by_label{};
    std::set<std::string, std::less<>> ids;
    for (const auto& id : exemplar_ids) {
        const CorpusItem* item = manifest.find(id);
        if (item == nullptr) throw Error(Errc::UnknownExemplar, "exemplar id not in manifest: " + id);
        if (!item->gold_label)
            throw Error(Errc::UnknownExemplar, "exemplar " + id + " has no gold label");
        auto& slot = by_label[index_of(*item->gold_label)];
        if (slot != nullptr) {
            throw Error(Errc::DuplicateExemplarLabel,
                        "exemplars " + slot->id + " and " + id + " are both labeled " +
                            std::string(taxonomy::name(*item->gold_label)));
        }
        slot = item;
        ids.insert(id);
    }
    ExemplarSplit split;
    for (auto label : taxonomy::label_set()) {
        const CorpusItem* item = by_label[index_of(label)];
        if (item == nullptr) {
            throw Error(Errc::MissingExemplarForLabel,
                        "no exemplar for label " + std::string(taxonomy::name(label)));
        }
        split.exemplars.push_back(*item);
    }
    for (const auto& item : manifest.items) {
        if (!ids.contains(item.id)) split.eval_set.push_back(item);
    }
    return split;
}

std::vector<std::string> read_id_list(const std::filesystem::path& path) {
    std::vector<std::string> ids;
    detail::for_each_line(detail::read_file(path.string()), [&](std::string_view line, std::size_t) {
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        if (line.empty() || line.front() == '#') return;
        ids.emplace_back(line);
    });
    return ids;
}

// --- manifest persistence ----------------------------------------------------------

std::string manifest_to_jsonl(const CorpusManifest& manifest) {
    const json header = {
        {"format", kManifestFormat},
        {"seed", manifest.seed},
        {"item_count", manifest.items.size()},
        {"counts_by_label", counts_json(manifest.counts_by_label())},
        {"span_markers", {{"open", manifest.markers.open}, {"close", manifest.markers.close}}},
    };
    std::string out = detail::canonical(header);
    out += '\n';
    for (const auto& item : manifest.items) {
        out += detail::canonical(item_to_json(item));
        out += '\n';
    }
    return out;
}

CorpusManifest manifest_from_jsonl(std::string_view text) {
    CorpusManifest manifest;
    bool have_header = false;
    std::uint64_t declared_items = 0;
    json declared_counts;
    std::set<std::string, std::less<>> ids;
    detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
        if (line.empty()) return;
        const json j = detail::parse_line(line, line_no);
        if (!have_header) {
            RecordReader r(j, line_no);
            r.allow_only({"format", "seed", "item_count", "counts_by_label", "span_markers"});
            if (r.string("format") != kManifestFormat)
                throw detail::schema_error(line_no, "format", "unsupported manifest format");
            manifest.seed = r.uint("seed");
            declared_items = r.uint("item_count");
            declared_counts = r.at("counts_by_label");
            RecordReader markers(r.at("span_markers"), line_no);
            markers.allow_only({"open", "close"});
            manifest.markers.open = markers.nonempty_string("open");
            manifest.markers.close = markers.nonempty_string("close");
            have_header = true;
            return;
        }
        CorpusItem item = item_from_json(j, line_no, manifest.markers);
        if (!ids.insert(item.id).second) throw detail::schema_error(line_no, "id", "duplicate id");
        manifest.items.push_back(std::move(item));
    });
    if (!have_header) throw detail::schema_error(1, "format", "missing manifest header");
    if (declared_items != manifest.items.size())
        throw detail::schema_error(1, "item_count", "does not match the number of item records");
    if (declared_counts != counts_json(manifest.counts_by_label()))
        throw detail::schema_error(1, "counts_by_label", "inconsistent with item gold labels");
    return manifest;
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
    detail::write_file(path.string(), manifest_to_jsonl(manifest));
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    return manifest_from_jsonl(detail::read_file(path.string()));
}

// --- diff sources --------------------------------------------------------------------

UrlDiffSource::UrlDiffSource(std::optional<std::filesystem::path> cache_dir, int timeout_seconds)
    : cache_dir_(std::move(cache_dir)), timeout_seconds_(timeout_seconds) {}

std::string UrlDiffSource::cache_name(std::string_view url) {
    std::string name;
    for (char c : url) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                          c == '.' || c == '-' || c == '_';
        name += safe ? c : '_';
    }
    return name + ".diff";
}

std::string UrlDiffSource::fetch(const std::string& url) {
    if (url.rfind("file://", 0) == 0) {
        try {
            return detail::read_file(url.substr(7));
        } catch (const Error& e) {
            throw Error(Errc::IngestionError, e.what());
        }
    }
    std::optional<std::filesystem::path> cached;
    if (cache_dir_) {
        cached = *cache_dir_ / cache_name(url);
        if (std::filesystem::exists(*cached)) return detail::read_file(cached->string());
    }
    if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0)
        throw Error(Errc::IngestionError, "unsupported URL scheme: " + url);
    detail::HttpResponse res;
    try {
        res = detail::http_request("GET", url, {}, "", "", std::chrono::seconds(timeout_seconds_));
    } catch (const std::exception& e) {
        throw Error(Errc::IngestionError, e.what());
    }
    if (res.status != 200)
        throw Error(Errc::IngestionError, "GET " + url + " returned HTTP " + std::to_string(res.status));
    if (res.body.empty()) throw Error(Errc::IngestionError, "GET " + url + " returned an empty body");
    if (cached) {
        std::filesystem::create_directories(*cache_dir_);
        detail::write_file(cached->string(), res.body);
    }
    return res.body;
}

std::string MapDiffSource::fetch(const std::string& url) {
    const auto it = diffs_.find(url);
    if (it == diffs_.end()) throw Error(Errc::IngestionError, "no diff for " + url);
    return it->second;
}

// --- construction ----------------------------------------------------------------------

std::string rejects_to_jsonl(std::span<const RejectEntry> rejects) {
    std::string out;
    for (const auto& r : rejects) {
        out += detail::canonical(json{{"id", r.id},
                                      {"reason", r.reason},
                                      {"detail", r.detail},
                                      {"stage", provenance_name(r.stage)}});
        out += '\n';
    }
    return out;
}

CorpusItem anchor_record(const UpstreamRecord& record, std::span<const diff::FileDiff> files,
                         Provenance provenance, const diff::SpanMarkers& markers) {
    const diff::AnchoredSpan span{record.side, record.line, record.end_line.value_or(record.line)};
    const diff::DiffHunk& hunk = diff::anchor_comment(files, record.file_path, record.line, record.side);
    if (!hunk.covers(span.side, span.end_line)) {
        throw Error(Errc::SpanOutsideHunk,
                    record.id + ": span " + std::to_string(span.start_line) + "-" +
                        std::to_string(span.end_line) + " crosses a hunk boundary");
    }
    CorpusItem item;
    item.id = record.id;
    item.comment_text = record.comment_text;
    item.hunk_text = diff::mark_span(hunk, span, markers);
    item.span = span;
    item.discussion_url = record.patchset_url;
    item.provenance = provenance;
    return item;
}

BuildResult build_corpus(std::span<const UpstreamRecord> records, const BuildOptions& options,
                         DiffSource& source) {
    std::map<std::string, std::vector<diff::FileDiff>> parsed;
    BuildResult result;
    result.manifest.seed = options.seed;
    result.manifest.markers = options.markers;

    // Returns the anchored item, or nullopt after logging a reject.
    auto try_anchor = [&](const UpstreamRecord& rec, Provenance stage) -> std::optional<CorpusItem> {
        ++result.attempted;
        try {
            auto it = parsed.find(rec.patchset_url);
            if (it == parsed.end()) {
                it = parsed.emplace(rec.patchset_url,
                                    diff::parse_unified_diff(source.fetch(rec.patchset_url)))
                         .first;
            }
            return anchor_record(rec, it->second, stage, options.markers);
        } catch (const Error& e) {
            if (e.code() == Errc::IngestionError) throw;
            result.rejects.push_back({rec.id, std::string(errc_name(e.code())), e.what(), stage});
            return std::nullopt;
        }
    };

    std::vector<UpstreamRecord> rest;
    for (const auto& rec : records) {
        if (is_smell_candidate(rec)) {
            ++result.smell_candidates;
            if (auto item = try_anchor(rec, Provenance::SmellCandidate))
                result.manifest.items.push_back(std::move(*item));
        } else {
            rest.push_back(rec);
        }
    }

    const std::size_t target = options.sample_size.value_or(result.manifest.items.size());
    if (target > rest.size()) {
        throw Error(Errc::InsufficientPopulation, "requested " + std::to_string(target) +
                                                      " records from a population of " +
                                                      std::to_string(rest.size()));
    }
    const auto perm = seeded_permutation(rest.size(), options.seed);
    std::size_t taken = 0;
    for (std::size_t k = 0; k < perm.size() && taken < target; ++k) {
        if (auto item = try_anchor(rest[perm[k]], Provenance::BalancedSample)) {
            result.manifest.items.push_back(std::move(*item));
            ++taken;
        }
    }
    if (taken < target) {
        throw Error(Errc::InsufficientPopulation,
                    "only " + std::to_string(taken) + " anchored records available for a sample of " +
                        std::to_string(target));
    }
    return result;
}

} // namespace revsmell::corpus
