#include "goodset/scorer.hpp"

#include <cmath>

#include "goodset/error.hpp"

namespace goodset {

double Scorer::predict(std::span<const double> x) const {
  if (x.size() != weights.size()) fail(Errc::size, "Scorer::predict: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
  if (link == Link::sigmoid) return 1.0 / (1.0 + std::exp(-s));
  if (s < 0.0) return 0.0;
  if (s > 1.0) return 1.0;
  return s;
}

std::vector<double> Scorer::predict_all(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = predict(X.row(i));
  return out;
}

StochasticModel StochasticModel::point(Scorer f) {
  StochasticModel q;
  q.weights = {1.0};
  q.support = {std::move(f)};
  return q;
}

void StochasticModel::validate() const {
  if (weights.size() != support.size() || support.empty())
    fail(Errc::size, "StochasticModel: weights/support mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (w < -1e-12) fail(Errc::domain, "StochasticModel: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-9) fail(Errc::domain, "StochasticModel: weights do not sum to 1");
}

std::vector<double> StochasticModel::mean_predictions(const Matrix& X) const {
  validate();
  std::vector<double> out(X.rows, 0.0);
  for (std::size_t q = 0; q < support.size(); ++q) {
    if (weights[q] == 0.0) continue;
    for (std::size_t i = 0; i < X.rows; ++i) out[i] += weights[q] * support[q].predict(X.row(i));
  }
  return out;
}

}  // namespace goodset
