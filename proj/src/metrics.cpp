#include "ttlm/metrics.hpp"

#include "ttlm/errors.hpp"

namespace ttlm {

MetricsSummary metrics_from_confusion(const std::vector<std::vector<std::int64_t>>& counts) {
  const std::size_t c = counts.size();
  if (c == 0) throw DataError("confusion matrix is empty");
  const std::size_t p = counts[0].size();
  if (p < c) {
    throw DataError("confusion matrix has fewer prediction columns (" + std::to_string(p) +
                    ") than classes (" + std::to_string(c) + ")");
  }
  for (const auto& row : counts) {
    if (row.size() != p) throw DataError("confusion matrix rows have uneven lengths");
    for (std::int64_t v : row) {
      if (v < 0) throw DataError("confusion matrix counts must be non-negative");
    }
  }

  MetricsSummary s;
  std::int64_t diag = 0;
  std::vector<std::int64_t> col_sums(p, 0);
  for (std::size_t g = 0; g < c; ++g) {
    for (std::size_t j = 0; j < p; ++j) {
      s.total += counts[g][j];
      col_sums[j] += counts[g][j];
    }
    diag += counts[g][g];
  }
  if (s.total == 0) throw DataError("confusion matrix counts sum to zero");
  s.accuracy = static_cast<double>(diag) / static_cast<double>(s.total);

  std::int64_t support_total = 0;
  for (std::size_t g = 0; g < c; ++g) {
    ClassMetrics m;
    const std::int64_t tp = counts[g][g];
    for (std::int64_t v : counts[g]) m.support += v;
    const std::int64_t predicted = col_sums[g];
    m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    m.recall = m.support == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(m.support);
    m.f1 = (m.precision + m.recall) == 0.0
               ? 0.0
               : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    support_total += m.support;

    s.macro_precision += m.precision;
    s.macro_recall += m.recall;
    s.macro_f1 += m.f1;
    s.weighted_precision += static_cast<double>(m.support) * m.precision;
    s.weighted_recall += static_cast<double>(m.support) * m.recall;
    s.weighted_f1 += static_cast<double>(m.support) * m.f1;
    s.per_class.push_back(m);
  }
  s.macro_precision /= static_cast<double>(c);
  s.macro_recall /= static_cast<double>(c);
  s.macro_f1 /= static_cast<double>(c);
  if (support_total > 0) {
    s.weighted_precision /= static_cast<double>(support_total);
    s.weighted_recall /= static_cast<double>(support_total);
    s.weighted_f1 /= static_cast<double>(support_total);
  } else {
    s.weighted_precision = s.weighted_recall = s.weighted_f1 = 0.0;
  }
  return s;
}

}  // namespace ttlm
