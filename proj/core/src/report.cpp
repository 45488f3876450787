#include "revsmell/report.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <sstream>

namespace revsmell::report {

using metrics::round3;

namespace {

class Table {
public:
    explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string str() const {
        std::vector<std::size_t> width;
        for (const auto& row : rows_) {
            width.resize(std::max(width.size(), row.size()), 0);
            for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
        }
        std::ostringstream out;
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            for (std::size_t c = 0; c < rows_[r].size(); ++c) {
                const auto& cell = rows_[r][c];
                const std::string pad(width[c] - cell.size(), ' ');
                // First column left-aligned, numbers right-aligned.
                out << (c == 0 ? cell + pad : pad + cell) << (c + 1 < rows_[r].size() ? "  " : "");
            }
            out << '\n';
            if (r == 0) {
                std::size_t total = 0;
                for (auto w : width) total += w + 2;
                out << std::string(total - 2, '-') << '\n';
            }
        }
        return out.str();
    }

private:
    std::vector<std::vector<std::string>> rows_;
};

} // namespace

std::string overall_table(const std::vector<std::pair<std::string, metrics::MetricsReport>>& rows) {
    Table t({"Setting", "Acc.", "Macro-P", "Macro-R", "Macro-F1", "W-F1", "MCC"});
    for (const auto& [name, r] : rows) {
        t.add({name, round3(r.accuracy), round3(r.macro_precision), round3(r.macro_recall),
               round3(r.macro_f1), round3(r.weighted_f1), round3(r.mcc)});
    }
    return t.str();
}

std::string per_class_table(const metrics::ConfusionMatrix& matrix,
                            const metrics::MetricsReport& report) {
    Table t({"Label", "P", "R", "F1", "Support"});
    for (std::size_t k = 0; k < matrix.size(); ++k) {
        const auto& s = report.per_class[k];
        t.add({matrix.labels()[k], round3(s.precision), round3(s.recall), round3(s.f1),
               std::to_string(s.support)});
    }
    return t.str();
}

std::string matrix_table(const metrics::ConfusionMatrix& matrix) {
    std::vector<std::string> header{"Gold \\ Pred"};
    for (const auto& l : matrix.labels()) header.push_back(l);
    Table t(header);
    for (std::size_t g = 0; g < matrix.size(); ++g) {
        std::vector<std::string> row{matrix.labels()[g]};
        for (std::size_t p = 0; p < matrix.size(); ++p) row.push_back(std::to_string(matrix.at(g, p)));
        t.add(std::move(row));
    }
    return t.str();
}

std::string binary_table(const metrics::BinaryScores& binary) {
    std::string out = matrix_table(binary.matrix);
    out += "Smell class: P " + round3(binary.smell.precision) + "  R " + round3(binary.smell.recall) +
           "  F1 " + round3(binary.smell.f1) + "\n";
    return out;
}

std::string full_text(const std::string& setting, const metrics::ConfusionMatrix& matrix,
                      const metrics::MetricsReport& report, const RunCounts& counts) {
    std::string out;
    out += "Overall\n" + overall_table({{setting, report}}) + "\n";
    out += "Per category\n" + per_class_table(matrix, report) + "\n";
    out += "Confusion matrix\n" + matrix_table(matrix) + "\n";
    if (report.binary) out += "Smell vs NotSmell\n" + binary_table(*report.binary) + "\n";
    out += "Evaluated " + std::to_string(counts.evaluated) + ", unresolved " +
           std::to_string(counts.unresolved) + ", backend errors " + std::to_string(counts.backend_error) +
           "\n";
    return out;
}

std::string to_jsonl(const std::string& setting, const metrics::ConfusionMatrix& matrix,
                     const metrics::MetricsReport& report, const RunCounts& counts) {
    using detail::json;
    std::string out;
    auto emit = [&](const json& j) {
        out += detail::canonical(j);
        out += '\n';
    };
    emit({{"kind", "overall"},
          {"setting", setting},
          {"accuracy", report.accuracy},
          {"macro_precision", report.macro_precision},
          {"macro_recall", report.macro_recall},
          {"macro_f1", report.macro_f1},
          {"weighted_f1", report.weighted_f1},
          {"mcc", report.mcc},
          {"total", report.total}});
    for (std::size_t k = 0; k < matrix.size(); ++k) {
        const auto& s = report.per_class[k];
        emit({{"kind", "class"},
              {"label", matrix.labels()[k]},
              {"precision", s.precision},
              {"recall", s.recall},
              {"f1", s.f1},
              {"support", s.support}});
    }
    for (std::size_t g = 0; g < matrix.size(); ++g) {
        std::vector<std::uint64_t> row;
        for (std::size_t p = 0; p < matrix.size(); ++p) row.push_back(matrix.at(g, p));
        emit({{"kind", "confusion_row"}, {"gold", matrix.labels()[g]}, {"counts", row}});
    }
    if (report.binary) {
        const auto& b = *report.binary;
        emit({{"kind", "binary"},
              {"matrix", {{b.matrix.at(0, 0), b.matrix.at(0, 1)}, {b.matrix.at(1, 0), b.matrix.at(1, 1)}}},
              {"smell_precision", b.smell.precision},
              {"smell_recall", b.smell.recall},
              {"smell_f1", b.smell.f1}});
    }
    emit({{"kind", "counts"},
          {"evaluated", counts.evaluated},
          {"unresolved", counts.unresolved},
          {"backend_error", counts.backend_error}});
    return out;
}

} // namespace revsmell::report
