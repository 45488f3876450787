#pragma once

#include "revsmell/taxonomy.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revsmell::metrics {

/// Square count grid indexed [gold][predicted].
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::vector<std::string> labels);

    /// Zero matrix over the nine labels in canonical order.
    static ConfusionMatrix full();
    /// Zero matrix over {NotSmell, Smell}.
    static ConfusionMatrix binary();

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    bool is_full_taxonomy() const;

    std::uint64_t at(std::size_t gold, std::size_t pred) const { return counts_[gold * size() + pred]; }
    std::uint64_t& at(std::size_t gold, std::size_t pred) { return counts_[gold * size() + pred]; }
    void add(Label gold, Label pred, std::uint64_t n = 1) { at(index_of(gold), index_of(pred)) += n; }

    std::uint64_t total() const noexcept;
    std::uint64_t trace() const noexcept;
    std::uint64_t row_sum(std::size_t gold) const noexcept;
    std::uint64_t col_sum(std::size_t pred) const noexcept;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<std::string> labels_;
    std::vector<std::uint64_t> counts_;
};

using LabelPair = std::pair<Label, Label>;  // (gold, predicted)

ConfusionMatrix confusion(std::span<const LabelPair> pairs);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
};

/// Per-class scores in matrix label order. Any zero denominator yields 0.0.
std::vector<ClassScores> per_class(const ConfusionMatrix& matrix);

/// Multiclass Matthews correlation; 0 when either variance factor vanishes.
/// Throws Error(EmptyMatrix) on an all-zero matrix.
double mcc(const ConfusionMatrix& matrix);

/// Regroups a nine-label matrix into {NotSmell, Smell} via the taxonomy.
ConfusionMatrix collapse_binary(const ConfusionMatrix& matrix);

struct BinaryScores {
    ConfusionMatrix matrix = ConfusionMatrix::binary();
    ClassScores smell;  // Smell taken as the positive class
};

struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    double mcc = 0.0;
    std::uint64_t total = 0;
    std::vector<ClassScores> per_class;
    std::optional<BinaryScores> binary;  // present for nine-label matrices
};

/// Throws Error(EmptyMatrix) when the matrix has no counts.
MetricsReport summarize(const ConfusionMatrix& matrix);

struct AgreementReport {
    double observed = 0.0;  // p_o
    double expected = 0.0;  // p_e
    double kappa = 0.0;
    std::size_t n = 0;
    std::vector<std::size_t> disagreements;  // positions where a[i] != b[i]
};

/// Unweighted two-rater Cohen's kappa. Throws Error(LengthMismatch) or
/// Error(EmptyInput).
AgreementReport cohen_kappa(std::span<const Label> a, std::span<const Label> b);

/// Half-up rounding to three decimals, formatted ("0.623").
std::string round3(double value);

/// {"labels": [...], "counts": [[...], ...]} with labels in any order; the
/// result is reordered to canonical order. Throws Error(SchemaViolation).
ConfusionMatrix matrix_from_json(std::string_view text);
std::string matrix_to_json(const ConfusionMatrix& matrix);

} // namespace revsmell::metrics
