#include "goodset/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "goodset/error.hpp"

namespace goodset {

double mse(std::span<const double> preds, std::span<const double> outcomes) {
  if (preds.empty() || preds.size() != outcomes.size()) fail(Errc::size, "mse: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - outcomes[i];
    s += d * d;
  }
  return s / static_cast<double>(preds.size());
}

bool labels_binary(std::span<const double> labels) {
  for (double y : labels)
    if (y != 0.0 && y != 1.0) return false;
  return true;
}

double rank_auc(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size()) fail(Errc::size, "rank_auc: size mismatch");
  if (!labels_binary(labels)) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = preds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return preds[a] < preds[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && preds[order[j]] == preds[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1.0) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
  const double u = rank_sum_pos - 0.5 * n_pos * (n_pos + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace goodset
