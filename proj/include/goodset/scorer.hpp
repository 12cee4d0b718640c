#pragma once

#include <span>
#include <vector>

#include "goodset/matrix.hpp"

namespace goodset {

enum class Link { identity_clipped, sigmoid };

// Deterministic prediction function over featurized columns; output always in [0,1].
struct Scorer {
  std::vector<double> weights;
  Link link = Link::identity_clipped;

  double predict(std::span<const double> x) const;
  std::vector<double> predict_all(const Matrix& X) const;
};

// Finite mixture over scorers, weights on the simplex.
struct StochasticModel {
  std::vector<double> weights;
  std::vector<Scorer> support;

  static StochasticModel point(Scorer f);

  // Mixture-averaged predictions (the randomized score's mean).
  std::vector<double> mean_predictions(const Matrix& X) const;
  void validate() const;
};

}  // namespace goodset
