#pragma once

#include <cstdint>
#include <vector>

namespace ttlm {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct MetricsSummary {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::int64_t total = 0;
};

// counts[g][p]: gold class g, predicted column p. The matrix may be wider
// than tall: columns beyond the class count collect predictions that match
// no class (unparseable completions, failed calls). Any zero denominator
// yields 0 rather than NaN. Weighted averages are support-weighted.
MetricsSummary metrics_from_confusion(const std::vector<std::vector<std::int64_t>>& counts);

}  // namespace ttlm
