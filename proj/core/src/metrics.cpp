#include "revsmell/metrics.hpp"

#include "json_util.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace revsmell::metrics {

namespace {

std::vector<std::string> canonical_names() {
    std::vector<std::string> names;
    for (auto label : taxonomy::label_set()) names.emplace_back(taxonomy::name(label));
    return names;
}

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

} // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

ConfusionMatrix ConfusionMatrix::full() { return ConfusionMatrix(canonical_names()); }

ConfusionMatrix ConfusionMatrix::binary() { return ConfusionMatrix({"NotSmell", "Smell"}); }

bool ConfusionMatrix::is_full_taxonomy() const { return labels_ == canonical_names(); }

std::uint64_t ConfusionMatrix::total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < size(); ++k) t += at(k, k);
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t gold) const noexcept {
    std::uint64_t t = 0;
    for (std::size_t p = 0; p < size(); ++p) t += at(gold, p);
    return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t pred) const noexcept {
    std::uint64_t t = 0;
    for (std::size_t g = 0; g < size(); ++g) t += at(g, pred);
    return t;
}

ConfusionMatrix confusion(std::span<const LabelPair> pairs) {
    auto m = ConfusionMatrix::full();
    for (const auto& [gold, pred] : pairs) m.add(gold, pred);
    return m;
}

std::vector<ClassScores> per_class(const ConfusionMatrix& matrix) {
    std::vector<ClassScores> out(matrix.size());
    for (std::size_t k = 0; k < matrix.size(); ++k) {
        auto& s = out[k];
        s.support = matrix.row_sum(k);
        s.precision = ratio(matrix.at(k, k), matrix.col_sum(k));
        s.recall = ratio(matrix.at(k, k), s.support);
        s.f1 = harmonic(s.precision, s.recall);
    }
    return out;
}

double mcc(const ConfusionMatrix& matrix) {
    const double s = static_cast<double>(matrix.total());
    if (s == 0.0) throw Error(Errc::EmptyMatrix, "MCC of an empty confusion matrix");
    const double c = static_cast<double>(matrix.trace());
    double tp = 0.0, pp = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < matrix.size(); ++k) {
        const double t = static_cast<double>(matrix.row_sum(k));
        const double p = static_cast<double>(matrix.col_sum(k));
        tp += t * p;
        pp += p * p;
        tt += t * t;
    }
    const double pred_var = s * s - pp;
    const double gold_var = s * s - tt;
    if (pred_var == 0.0 || gold_var == 0.0) return 0.0;
    return (c * s - tp) / std::sqrt(pred_var * gold_var);
}

ConfusionMatrix collapse_binary(const ConfusionMatrix& matrix) {
    if (!matrix.is_full_taxonomy())
        throw Error(Errc::ConfigError, "binary collapse needs a nine-label matrix in canonical order");
    auto out = ConfusionMatrix::binary();
    const auto& labels = taxonomy::label_set();
    for (std::size_t g = 0; g < matrix.size(); ++g) {
        for (std::size_t p = 0; p < matrix.size(); ++p) {
            out.at(taxonomy::is_smell(labels[g]) ? 1 : 0, taxonomy::is_smell(labels[p]) ? 1 : 0) +=
                matrix.at(g, p);
        }
    }
    return out;
}

MetricsReport summarize(const ConfusionMatrix& matrix) {
    MetricsReport r;
    r.total = matrix.total();
    if (r.total == 0) throw Error(Errc::EmptyMatrix, "cannot summarize an empty confusion matrix");
    r.per_class = per_class(matrix);
    r.accuracy = ratio(matrix.trace(), r.total);
    const double k = static_cast<double>(matrix.size());
    double weighted = 0.0;
    for (const auto& s : r.per_class) {
        r.macro_precision += s.precision;
        r.macro_recall += s.recall;
        r.macro_f1 += s.f1;
        weighted += static_cast<double>(s.support) * s.f1;
    }
    r.macro_precision /= k;
    r.macro_recall /= k;
    r.macro_f1 /= k;
    r.weighted_f1 = weighted / static_cast<double>(r.total);
    r.mcc = mcc(matrix);
    if (matrix.is_full_taxonomy()) {
        BinaryScores b;
        b.matrix = collapse_binary(matrix);
        b.smell = per_class(b.matrix)[1];
        r.binary = std::move(b);
    }
    return r;
}

AgreementReport cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() != b.size())
        throw Error(Errc::LengthMismatch, "label vectors differ in length (" + std::to_string(a.size()) +
                                              " vs " + std::to_string(b.size()) + ")");
    if (a.empty()) throw Error(Errc::EmptyInput, "kappa of empty label vectors");
    AgreementReport r;
    r.n = a.size();
    std::array<std::size_t, kLabelCount> freq_a{}, freq_b{};
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++freq_a[index_of(a[i])];
        ++freq_b[index_of(b[i])];
        if (a[i] == b[i]) ++agree;
        else r.disagreements.push_back(i);
    }
    const double n = static_cast<double>(r.n);
    r.observed = static_cast<double>(agree) / n;
    for (std::size_t k = 0; k < kLabelCount; ++k)
        r.expected += (static_cast<double>(freq_a[k]) / n) * (static_cast<double>(freq_b[k]) / n);
    r.kappa = r.expected >= 1.0 ? 1.0 : (r.observed - r.expected) / (1.0 - r.expected);
    return r;
}

std::string round3(double value) {
    const double rounded = std::floor(value * 1000.0 + 0.5) / 1000.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", rounded == 0.0 ? 0.0 : rounded);
    return buf;
}

ConfusionMatrix matrix_from_json(std::string_view text) {
    const auto j = detail::parse_line(text, 1);
    detail::RecordReader r(j, 1);
    r.allow_only({"labels", "counts", "description"});
    const auto& labels = r.at("labels");
    const auto& counts = r.at("counts");
    if (!labels.is_array() || labels.size() != kLabelCount)
        throw detail::schema_error(1, "labels", "expected the nine taxonomy labels");
    std::vector<std::size_t> to_canonical;
    std::array<bool, kLabelCount> seen{};
    for (const auto& l : labels) {
        if (!l.is_string()) throw detail::schema_error(1, "labels", "expected strings");
        Label label;
        try {
            label = taxonomy::parse_label(l.get<std::string>());
        } catch (const Error&) {
            throw detail::schema_error(1, "labels", "unknown label '" + l.get<std::string>() + "'");
        }
        if (seen[index_of(label)]) throw detail::schema_error(1, "labels", "duplicate label");
        seen[index_of(label)] = true;
        to_canonical.push_back(index_of(label));
    }
    if (!counts.is_array() || counts.size() != kLabelCount)
        throw detail::schema_error(1, "counts", "expected 9 rows");
    auto m = ConfusionMatrix::full();
    for (std::size_t g = 0; g < kLabelCount; ++g) {
        const auto& row = counts[g];
        if (!row.is_array() || row.size() != kLabelCount)
            throw detail::schema_error(1, "counts", "expected 9 columns per row");
        for (std::size_t p = 0; p < kLabelCount; ++p) {
            if (!row[p].is_number_unsigned())
                throw detail::schema_error(1, "counts", "expected non-negative integers");
            m.at(to_canonical[g], to_canonical[p]) = row[p].get<std::uint64_t>();
        }
    }
    return m;
}

std::string matrix_to_json(const ConfusionMatrix& matrix) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < matrix.size(); ++g) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < matrix.size(); ++p) row.push_back(matrix.at(g, p));
        rows.push_back(std::move(row));
    }
    return nlohmann::ordered_json{{"labels", matrix.labels()}, {"counts", rows}}.dump();
}

} // namespace revsmell::metrics
