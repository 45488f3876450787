#pragma once

#include "revsmell/metrics.hpp"

#include <string>
#include <utility>
#include <vector>

namespace revsmell::report {

/// Rows of setting name -> report, rendered as an aligned overall-score table.
std::string overall_table(const std::vector<std::pair<std::string, metrics::MetricsReport>>& rows);

std::string per_class_table(const metrics::ConfusionMatrix& matrix,
                            const metrics::MetricsReport& report);

std::string matrix_table(const metrics::ConfusionMatrix& matrix);

/// The 2x2 smell collapse plus smell-class precision, recall and F1.
std::string binary_table(const metrics::BinaryScores& binary);

struct RunCounts {
    std::size_t evaluated = 0;
    std::size_t unresolved = 0;
    std::size_t backend_error = 0;
};

/// All of the above for one setting.
std::string full_text(const std::string& setting, const metrics::ConfusionMatrix& matrix,
                      const metrics::MetricsReport& report, const RunCounts& counts);

/// Machine-readable line records (key-sorted JSON), full precision.
std::string to_jsonl(const std::string& setting, const metrics::ConfusionMatrix& matrix,
                     const metrics::MetricsReport& report, const RunCounts& counts);

} // namespace revsmell::report
