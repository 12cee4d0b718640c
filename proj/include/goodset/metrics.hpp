#pragma once

#include <span>

namespace goodset {

double mse(std::span<const double> preds, std::span<const double> outcomes);

// Rank-based AUC with ties averaged; requires binary labels with both classes
// present (NaN otherwise).
double rank_auc(std::span<const double> preds, std::span<const double> labels);

bool labels_binary(std::span<const double> labels);

}  // namespace goodset
