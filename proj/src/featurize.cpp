#include "goodset/featurize.hpp"

#include <algorithm>
#include <cmath>

#include "goodset/error.hpp"

namespace goodset {

namespace {

// Raw expansion (no intercept, no standardization): linear terms in spec order,
// then for degree 2 the upper triangle x_i*x_j with i<=j.
void expand_row(std::span<const double> src, const std::vector<std::size_t>& cols, int degree,
                std::vector<double>& out) {
  out.clear();
  for (std::size_t c : cols) out.push_back(src[c]);
  if (degree == 2) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      for (std::size_t j = i; j < cols.size(); ++j) out.push_back(src[cols[i]] * src[cols[j]]);
  }
}

}  // namespace

void FeatureMap::bind(const Dataset& ds) {
  std::vector<std::string> cols = spec.columns;
  if (cols.empty()) cols = ds.feature_names();
  col_idx.clear();
  for (const auto& name : cols) {
    auto it = std::find(ds.feature_names().begin(), ds.feature_names().end(), name);
    if (it == ds.feature_names().end()) fail(Errc::schema, "featurizer: no column '" + name + "'");
    col_idx.push_back(static_cast<std::size_t>(it - ds.feature_names().begin()));
  }
}

FeatureMap FeatureMap::fit(const Dataset& ds, const FeaturizerSpec& spec) {
  if (spec.degree != 1 && spec.degree != 2)
    fail(Errc::config, "featurizer: degree must be 1 or 2");
  FeatureMap m;
  m.spec = spec;
  if (m.spec.columns.empty()) m.spec.columns = ds.feature_names();
  m.bind(ds);
  const std::vector<std::string>& cols = m.spec.columns;

  if (spec.intercept) m.names.push_back("(intercept)");
  for (const auto& name : cols) m.names.push_back(name);
  if (spec.degree == 2) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      for (std::size_t j = i; j < cols.size(); ++j) m.names.push_back(cols[i] + "*" + cols[j]);
  }

  const std::size_t k_exp = m.names.size() - (spec.intercept ? 1 : 0);
  m.means.assign(k_exp, 0.0);
  m.scales.assign(k_exp, 1.0);
  if (spec.standardize) {
    const std::size_t n = ds.n();
    if (n < 2) fail(Errc::size, "featurizer: standardization needs at least 2 rows");
    std::vector<double> row;
    std::vector<double> sum(k_exp, 0.0), sumsq(k_exp, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      expand_row(ds.features().row(i), m.col_idx, spec.degree, row);
      for (std::size_t j = 0; j < k_exp; ++j) {
        sum[j] += row[j];
        sumsq[j] += row[j] * row[j];
      }
    }
    for (std::size_t j = 0; j < k_exp; ++j) {
      m.means[j] = sum[j] / n;
      const double var = (sumsq[j] - n * m.means[j] * m.means[j]) / (n - 1);
      if (!(var > 0.0)) {
        const std::string& name = m.names[j + (spec.intercept ? 1 : 0)];
        fail(Errc::zero_variance, "featurizer: column '" + name + "' has zero variance");
      }
      m.scales[j] = std::sqrt(var);
    }
  }
  return m;
}

Matrix FeatureMap::apply(const Dataset& ds) const {
  Matrix X(ds.n(), dim());
  std::vector<double> row;
  const std::size_t off = spec.intercept ? 1 : 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    expand_row(ds.features().row(i), col_idx, spec.degree, row);
    if (spec.intercept) X.at(i, 0) = 1.0;
    for (std::size_t j = 0; j < row.size(); ++j)
      X.at(i, j + off) = (row[j] - means[j]) / scales[j];
  }
  return X;
}

}  // namespace goodset
