#pragma once

#include "revsmell/corpus.hpp"
#include "revsmell/metrics.hpp"
#include "revsmell/taxonomy.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace revsmell::annotation {

enum class Round { Pilot, Main, Reconciliation, Adjudication };

std::string_view round_name(Round round) noexcept;
/// Throws Error(NotFound) for an unknown round name.
Round parse_round(std::string_view text);

struct AnnotationRecord {
    std::string item_id;
    std::string annotator_id;
    Round round = Round::Main;
    Label label = Label::Actionable;
    std::string timestamp;
    std::string note;  // optional secondary issues; never used in metrics

    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

enum class Resolution { Agreement, Reconciliation, Adjudication };

std::string_view resolution_name(Resolution r) noexcept;

struct FinalLabelDecision {
    std::string item_id;
    Label label = Label::Actionable;
    Resolution resolved_by = Resolution::Agreement;

    friend bool operator==(const FinalLabelDecision&, const FinalLabelDecision&) = default;
};

struct LabelingSession {
    std::string annotator_id;
    Round round = Round::Main;
    std::vector<std::string> item_order;
    std::size_t cursor = 0;
};

struct ItemView {
    std::string item_id;
    std::string comment_text;
    std::string hunk_text;
    std::string discussion_url;
    std::size_t position = 0;  // 0-based cursor
    std::size_t total = 0;
    // Both annotators' main-round labels; filled only in the reconciliation round.
    std::vector<std::pair<std::string, Label>> prior_labels;
};

struct RoundAgreement {
    metrics::AgreementReport report;
    std::vector<std::string> disagreement_ids;
};

struct Dispute {
    std::string item_id;
    std::vector<std::pair<std::string, Label>> labels;  // post-reconciliation labels
};

struct ProtocolConfig {
    std::string annotator_a = "A1";
    std::string annotator_b = "A2";
    std::vector<std::string> arbiters{"A3"};
    std::size_t pilot_size = 10;
    std::uint64_t seed = 0;
};

using TimestampFn = std::function<std::string()>;
std::string utc_timestamp();

/// The double-annotation protocol: a seeded pilot sample, a main round over
/// the whole corpus, a reconciliation round over main-round disagreements and
/// arbiter adjudication of whatever remains. State is an append-only record
/// log; sessions, agreement and final labels are derived from it.
class AnnotationService {
public:
    /// Replays `log_path` when it exists and appends new records to it.
    AnnotationService(corpus::CorpusManifest corpus, ProtocolConfig config,
                      std::optional<std::filesystem::path> log_path = std::nullopt,
                      TimestampFn clock = utc_timestamp);

    const ProtocolConfig& config() const noexcept { return config_; }

    /// Items of a round in corpus order. The reconciliation round needs both
    /// annotators to have finished the main round (Error(IncompleteRound)).
    std::vector<std::string> round_items(Round round) const;

    LabelingSession session(std::string_view annotator, Round round) const;

    /// Throws Error(SessionComplete) when the cursor is at the end.
    ItemView next_item(std::string_view annotator, Round round) const;

    /// Returns the new cursor. Throws Error(DuplicateRecord) or
    /// Error(OutOfOrderSubmission).
    std::size_t submit_label(std::string_view annotator, Round round, std::string_view item_id,
                             Label label, std::string note = {});

    /// Pilot and main compare round labels; reconciliation compares
    /// post-reconciliation labels over the main round.
    RoundAgreement agreement(Round round, std::string_view a, std::string_view b) const;

    std::vector<Dispute> disputes() const;

    /// Throws Error(NotInDisputeQueue) unless the item is still disputed after
    /// reconciliation.
    FinalLabelDecision adjudicate(std::string_view item_id, std::string_view arbiter_id, Label label);

    /// Decisions for every item resolved so far, in corpus order.
    std::vector<FinalLabelDecision> final_labels() const;

    /// The corpus with gold labels set from final decisions.
    corpus::CorpusManifest labeled_corpus() const;

    std::vector<AnnotationRecord> records() const;

    /// Per-annotator completed counts for a round.
    std::vector<std::pair<std::string, std::size_t>> progress(Round round) const;

private:
    using Key = std::tuple<std::string, std::string, Round>;  // item, annotator, round

    void require_annotator(std::string_view annotator) const;
    std::vector<std::string> round_items_locked(Round round) const;
    LabelingSession session_locked(std::string_view annotator, Round round) const;
    std::optional<Label> label_of(std::string_view item, std::string_view annotator, Round round) const;
    std::optional<Label> effective_label(std::string_view item, std::string_view annotator) const;
    bool round_complete(std::string_view annotator, Round round) const;
    std::vector<Dispute> disputes_locked() const;
    void apply(AnnotationRecord record, bool persist);

    corpus::CorpusManifest corpus_;
    ProtocolConfig config_;
    std::optional<std::filesystem::path> log_path_;
    TimestampFn clock_;
    std::vector<std::string> pilot_ids_;

    mutable std::shared_mutex mutex_;
    std::vector<AnnotationRecord> records_;
    std::map<Key, Label> index_;
    std::map<std::pair<std::string, Round>, std::size_t> done_;
};

std::string record_to_json(const AnnotationRecord& record);
/// Throws Error(SchemaViolation).
AnnotationRecord record_from_json(std::string_view line, std::size_t line_no);

} // namespace revsmell::annotation
