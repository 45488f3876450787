#include "revsmell/annotation.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

namespace revsmell::annotation {

using detail::json;

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t session_seed(std::uint64_t base, std::string_view annotator, Round round) {
    std::string key(annotator);
    key += '/';
    key += round_name(round);
    return (base * 0x9e3779b97f4a7c15ull) ^ fnv1a(key);
}

} // namespace

std::string_view round_name(Round round) noexcept {
    switch (round) {
    case Round::Pilot: return "pilot";
    case Round::Main: return "main";
    case Round::Reconciliation: return "reconciliation";
    case Round::Adjudication: return "adjudication";
    }
    return "unknown";
}

Round parse_round(std::string_view text) {
    for (auto r : {Round::Pilot, Round::Main, Round::Reconciliation, Round::Adjudication}) {
        if (round_name(r) == text) return r;
    }
    throw Error(Errc::NotFound, "unknown round '" + std::string(text) + "'");
}

std::string_view resolution_name(Resolution r) noexcept {
    switch (r) {
    case Resolution::Agreement: return "agreement";
    case Resolution::Reconciliation: return "reconciliation";
    case Resolution::Adjudication: return "adjudication";
    }
    return "unknown";
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string record_to_json(const AnnotationRecord& r) {
    json j = {{"item_id", r.item_id},
              {"annotator_id", r.annotator_id},
              {"round", round_name(r.round)},
              {"label", taxonomy::name(r.label)},
              {"timestamp", r.timestamp}};
    if (!r.note.empty()) j["note"] = r.note;
    return detail::canonical(j);
}

AnnotationRecord record_from_json(std::string_view line, std::size_t line_no) {
    const json j = detail::parse_line(line, line_no);
    detail::RecordReader r(j, line_no);
    r.allow_only({"item_id", "annotator_id", "round", "label", "timestamp", "note"});
    AnnotationRecord rec;
    rec.item_id = r.nonempty_string("item_id");
    rec.annotator_id = r.nonempty_string("annotator_id");
    try {
        rec.round = parse_round(r.string("round"));
        rec.label = taxonomy::parse_label(r.string("label"));
    } catch (const Error& e) {
        throw detail::schema_error(line_no, "round/label", e.what());
    }
    rec.timestamp = r.string("timestamp");
    if (r.has("note")) rec.note = r.string("note");
    return rec;
}

AnnotationService::AnnotationService(corpus::CorpusManifest corpus, ProtocolConfig config,
                                     std::optional<std::filesystem::path> log_path, TimestampFn clock)
    : corpus_(std::move(corpus)),
      config_(std::move(config)),
      log_path_(std::move(log_path)),
      clock_(std::move(clock)) {
    if (config_.annotator_a.empty() || config_.annotator_b.empty() ||
        config_.annotator_a == config_.annotator_b)
        throw Error(Errc::ConfigError, "two distinct annotators are required");
    const auto n = std::min(config_.pilot_size, corpus_.items.size());
    const auto perm = corpus::seeded_permutation(corpus_.items.size(), config_.seed);
    std::vector<std::size_t> picked(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(picked.begin(), picked.end());
    for (auto k : picked) pilot_ids_.push_back(corpus_.items[k].id);

    if (log_path_ && std::filesystem::exists(*log_path_)) {
        const std::string text = detail::read_file(log_path_->string());
        detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
            if (line.empty()) return;
            apply(record_from_json(line, line_no), false);
        });
    }
}

void AnnotationService::require_annotator(std::string_view annotator) const {
    if (annotator != config_.annotator_a && annotator != config_.annotator_b)
        throw Error(Errc::NotFound, "unknown annotator '" + std::string(annotator) + "'");
}

std::optional<Label> AnnotationService::label_of(std::string_view item, std::string_view annotator,
                                                 Round round) const {
    const auto it = index_.find(Key{std::string(item), std::string(annotator), round});
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<Label> AnnotationService::effective_label(std::string_view item,
                                                        std::string_view annotator) const {
    if (auto l = label_of(item, annotator, Round::Reconciliation)) return l;
    return label_of(item, annotator, Round::Main);
}

bool AnnotationService::round_complete(std::string_view annotator, Round round) const {
    const auto it = done_.find({std::string(annotator), round});
    const std::size_t done = it == done_.end() ? 0 : it->second;
    return done == round_items_locked(round).size();
}

std::vector<std::string> AnnotationService::round_items_locked(Round round) const {
    switch (round) {
    case Round::Pilot: return pilot_ids_;
    case Round::Main: {
        std::vector<std::string> ids;
        for (const auto& item : corpus_.items) ids.push_back(item.id);
        return ids;
    }
    case Round::Reconciliation: {
        if (!round_complete(config_.annotator_a, Round::Main) ||
            !round_complete(config_.annotator_b, Round::Main))
            throw Error(Errc::IncompleteRound, "reconciliation opens once both annotators finish the main round");
        std::vector<std::string> ids;
        for (const auto& item : corpus_.items) {
            if (label_of(item.id, config_.annotator_a, Round::Main) !=
                label_of(item.id, config_.annotator_b, Round::Main))
                ids.push_back(item.id);
        }
        return ids;
    }
    case Round::Adjudication: {
        std::vector<std::string> ids;
        for (const auto& d : disputes_locked()) ids.push_back(d.item_id);
        return ids;
    }
    }
    return {};
}

std::vector<std::string> AnnotationService::round_items(Round round) const {
    std::shared_lock lock(mutex_);
    return round_items_locked(round);
}

LabelingSession AnnotationService::session_locked(std::string_view annotator, Round round) const {
    require_annotator(annotator);
    if (round == Round::Adjudication)
        throw Error(Errc::NotFound, "adjudication has no labeling sessions; use the dispute queue");
    LabelingSession s;
    s.annotator_id = std::string(annotator);
    s.round = round;
    const auto items = round_items_locked(round);
    const auto perm = corpus::seeded_permutation(items.size(), session_seed(config_.seed, annotator, round));
    for (auto k : perm) s.item_order.push_back(items[k]);
    const auto it = done_.find({std::string(annotator), round});
    s.cursor = it == done_.end() ? 0 : it->second;
    return s;
}

LabelingSession AnnotationService::session(std::string_view annotator, Round round) const {
    std::shared_lock lock(mutex_);
    return session_locked(annotator, round);
}

ItemView AnnotationService::next_item(std::string_view annotator, Round round) const {
    std::shared_lock lock(mutex_);
    const auto s = session_locked(annotator, round);
    if (s.cursor >= s.item_order.size())
        throw Error(Errc::SessionComplete, std::string(round_name(round)) + " session of " +
                                               std::string(annotator) + " is complete");
    const auto* item = corpus_.find(s.item_order[s.cursor]);
    ItemView view{item->id, item->comment_text, item->hunk_text, item->discussion_url,
                  s.cursor, s.item_order.size(), {}};
    if (round == Round::Reconciliation) {
        for (const auto& who : {config_.annotator_a, config_.annotator_b}) {
            if (auto l = label_of(item->id, who, Round::Main)) view.prior_labels.emplace_back(who, *l);
        }
    }
    return view;
}

void AnnotationService::apply(AnnotationRecord record, bool persist) {
    if (corpus_.find(record.item_id) == nullptr)
        throw Error(Errc::NotFound, "unknown item '" + record.item_id + "'");
    const Key key{record.item_id, record.annotator_id, record.round};
    if (index_.contains(key)) {
        throw Error(Errc::DuplicateRecord, record.annotator_id + " already labeled " + record.item_id +
                                               " in the " + std::string(round_name(record.round)) + " round");
    }
    if (record.round == Round::Adjudication) {
        const auto queue = disputes_locked();
        const bool queued = std::any_of(queue.begin(), queue.end(),
                                        [&](const Dispute& d) { return d.item_id == record.item_id; });
        if (!queued) throw Error(Errc::NotInDisputeQueue, record.item_id + " is not disputed");
        if (!config_.arbiters.empty() &&
            std::find(config_.arbiters.begin(), config_.arbiters.end(), record.annotator_id) ==
                config_.arbiters.end())
            throw Error(Errc::Unauthorized, record.annotator_id + " is not an arbiter");
    } else {
        const auto s = session_locked(record.annotator_id, record.round);
        if (s.cursor >= s.item_order.size())
            throw Error(Errc::SessionComplete, "session is complete");
        if (s.item_order[s.cursor] != record.item_id) {
            throw Error(Errc::OutOfOrderSubmission,
                        "expected " + s.item_order[s.cursor] + ", got " + record.item_id);
        }
    }
    if (persist && log_path_) {
        std::ofstream out(*log_path_, std::ios::app | std::ios::binary);
        out << record_to_json(record) << '\n';
        out.flush();
        if (!out) throw Error(Errc::IoError, "cannot append to " + log_path_->string());
    }
    index_.emplace(key, record.label);
    if (record.round != Round::Adjudication) ++done_[{record.annotator_id, record.round}];
    records_.push_back(std::move(record));
}

std::size_t AnnotationService::submit_label(std::string_view annotator, Round round,
                                            std::string_view item_id, Label label, std::string note) {
    std::unique_lock lock(mutex_);
    require_annotator(annotator);
    if (round == Round::Adjudication)
        throw Error(Errc::NotFound, "adjudication decisions go through adjudicate()");
    apply(AnnotationRecord{std::string(item_id), std::string(annotator), round, label, clock_(),
                           std::move(note)},
          true);
    return done_[{std::string(annotator), round}];
}

RoundAgreement AnnotationService::agreement(Round round, std::string_view a, std::string_view b) const {
    std::shared_lock lock(mutex_);
    require_annotator(a);
    require_annotator(b);
    if (round == Round::Adjudication)
        throw Error(Errc::NotFound, "agreement is defined for pilot, main and reconciliation rounds");
    const Round basis = round == Round::Reconciliation ? Round::Main : round;
    if (round == Round::Reconciliation &&
        (!round_complete(a, Round::Reconciliation) || !round_complete(b, Round::Reconciliation)))
        throw Error(Errc::IncompleteRound, "reconciliation round is not complete for both annotators");
    const auto items = round_items_locked(basis);
    std::vector<Label> la, lb;
    for (const auto& id : items) {
        const auto x = round == Round::Reconciliation ? effective_label(id, a) : label_of(id, a, basis);
        const auto y = round == Round::Reconciliation ? effective_label(id, b) : label_of(id, b, basis);
        if (!x || !y) {
            throw Error(Errc::IncompleteRound, std::string(round_name(round)) +
                                                   " round is missing labels for item " + id);
        }
        la.push_back(*x);
        lb.push_back(*y);
    }
    if (items.empty()) throw Error(Errc::IncompleteRound, "round has no items");
    RoundAgreement out{metrics::cohen_kappa(la, lb), {}};
    for (auto k : out.report.disagreements) out.disagreement_ids.push_back(items[k]);
    return out;
}

std::vector<Dispute> AnnotationService::disputes_locked() const {
    std::vector<Dispute> out;
    const auto& a = config_.annotator_a;
    const auto& b = config_.annotator_b;
    for (const auto& item : corpus_.items) {
        const auto ra = label_of(item.id, a, Round::Reconciliation);
        const auto rb = label_of(item.id, b, Round::Reconciliation);
        if (!ra || !rb || *ra == *rb) continue;
        bool adjudicated = false;
        for (const auto& arbiter : config_.arbiters)
            adjudicated = adjudicated || label_of(item.id, arbiter, Round::Adjudication).has_value();
        if (adjudicated) continue;
        out.push_back({item.id, {{a, *ra}, {b, *rb}}});
    }
    return out;
}

std::vector<Dispute> AnnotationService::disputes() const {
    std::shared_lock lock(mutex_);
    return disputes_locked();
}

FinalLabelDecision AnnotationService::adjudicate(std::string_view item_id, std::string_view arbiter_id,
                                                 Label label) {
    std::unique_lock lock(mutex_);
    apply(AnnotationRecord{std::string(item_id), std::string(arbiter_id), Round::Adjudication, label,
                           clock_(), {}},
          true);
    return {std::string(item_id), label, Resolution::Adjudication};
}

std::vector<FinalLabelDecision> AnnotationService::final_labels() const {
    std::shared_lock lock(mutex_);
    std::vector<FinalLabelDecision> out;
    const auto& a = config_.annotator_a;
    const auto& b = config_.annotator_b;
    for (const auto& item : corpus_.items) {
        const auto ma = label_of(item.id, a, Round::Main);
        const auto mb = label_of(item.id, b, Round::Main);
        if (ma && mb && *ma == *mb) {
            out.push_back({item.id, *ma, Resolution::Agreement});
            continue;
        }
        const auto ra = label_of(item.id, a, Round::Reconciliation);
        const auto rb = label_of(item.id, b, Round::Reconciliation);
        if (ra && rb && *ra == *rb) {
            out.push_back({item.id, *ra, Resolution::Reconciliation});
            continue;
        }
        for (const auto& arbiter : config_.arbiters) {
            if (auto l = label_of(item.id, arbiter, Round::Adjudication)) {
                out.push_back({item.id, *l, Resolution::Adjudication});
                break;
            }
        }
    }
    return out;
}

corpus::CorpusManifest AnnotationService::labeled_corpus() const {
    const auto decisions = final_labels();
    std::shared_lock lock(mutex_);
    corpus::CorpusManifest out = corpus_;
    std::map<std::string, Label, std::less<>> by_id;
    for (const auto& d : decisions) by_id.emplace(d.item_id, d.label);
    for (auto& item : out.items) {
        if (const auto it = by_id.find(item.id); it != by_id.end()) item.gold_label = it->second;
    }
    return out;
}

std::vector<AnnotationRecord> AnnotationService::records() const {
    std::shared_lock lock(mutex_);
    return records_;
}

std::vector<std::pair<std::string, std::size_t>> AnnotationService::progress(Round round) const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& who : {config_.annotator_a, config_.annotator_b}) {
        const auto it = done_.find({who, round});
        out.emplace_back(who, it == done_.end() ? 0 : it->second);
    }
    return out;
}

} // namespace revsmell::annotation
