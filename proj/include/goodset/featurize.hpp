#pragma once

#include <string>
#include <vector>

#include "goodset/dataset.hpp"
#include "goodset/matrix.hpp"

namespace goodset {

struct FeaturizerSpec {
  std::vector<std::string> columns;  // empty means all dataset features
  int degree = 1;                    // 1 or 2
  bool standardize = false;
  bool intercept = true;
};

// Fitted feature map: polynomial expansion plus standardization parameters
// learnt on the fitting data only, reusable on held-out data.
struct FeatureMap {
  FeaturizerSpec spec;
  std::vector<std::size_t> col_idx;
  std::vector<std::string> names;   // expanded column names, intercept first
  std::vector<double> means;        // per expanded non-intercept column
  std::vector<double> scales;

  static FeatureMap fit(const Dataset& ds, const FeaturizerSpec& spec);
  Matrix apply(const Dataset& ds) const;
  std::size_t dim() const { return names.size(); }

  // Re-resolve column indices by name against another dataset of the same schema.
  void bind(const Dataset& ds);
};

}  // namespace goodset
