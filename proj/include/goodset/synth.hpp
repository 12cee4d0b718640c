#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "goodset/dataset.hpp"

namespace goodset {

// Parametric ground-truth probability over named base columns (plus "a" for
// the attribute): link(intercept + sum w_c * x_c).
struct LinearForm {
  enum class LinkKind { logistic, identity };
  LinkKind link = LinkKind::logistic;
  double intercept = 0.0;
  std::vector<std::pair<std::string, double>> coefs;

  double eval(const Dataset& ds, std::size_t row) const;
};

struct SynthDgpConfig {
  LinearForm pi;  // decision probability; must stay in (0,1]
  LinearForm mu;  // outcome probability; must stay in [0,1]
  std::uint64_t seed = 0;
};

// Ground truth retained for evaluation code only; never feeds training paths.
struct SealedTruth {
  std::vector<double> y_star;
  std::vector<double> mu;
  std::vector<double> pi;
};

struct BaseSamplerConfig {
  std::size_t n = 1000;
  int num_features = 2;
  double a_prob = 0.5;
  double group_shift = 0.0;  // added to x1 for rows with a=1
  std::uint64_t seed = 0;
};

// Standard-normal features x1..xk with an optional mean shift on x1 by group.
Dataset sample_base(const BaseSamplerConfig& cfg);

// d ~ Bernoulli(pi(x)), y* ~ Bernoulli(mu(x)); returned Dataset is selective
// with y masked where d=0, ground truth sealed alongside.
std::pair<Dataset, SealedTruth> generate_synthetic(const SynthDgpConfig& cfg, const Dataset& base);

}  // namespace goodset
