#include "goodset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "goodset/error.hpp"
#include "goodset/rng.hpp"

namespace goodset {

double LinearForm::eval(const Dataset& ds, std::size_t row) const {
  double s = intercept;
  for (const auto& [name, w] : coefs) {
    if (name == "a") {
      s += w * ds.attribute()[row];
      continue;
    }
    auto it = std::find(ds.feature_names().begin(), ds.feature_names().end(), name);
    if (it == ds.feature_names().end())
      fail(Errc::config, "synthetic form references unknown column '" + name + "'");
    s += w * ds.features().at(row, static_cast<std::size_t>(it - ds.feature_names().begin()));
  }
  if (link == LinkKind::logistic) return 1.0 / (1.0 + std::exp(-s));
  return s;
}

Dataset sample_base(const BaseSamplerConfig& cfg) {
  if (cfg.n == 0 || cfg.num_features < 1) fail(Errc::config, "sample_base: bad dimensions");
  Rng rng(cfg.seed);
  Matrix X(cfg.n, static_cast<std::size_t>(cfg.num_features));
  std::vector<int> a(cfg.n), d(cfg.n, 1);
  std::vector<double> y(cfg.n, 0.0);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    a[i] = rng.bernoulli(cfg.a_prob) ? 1 : 0;
    for (int j = 0; j < cfg.num_features; ++j) {
      double v = rng.normal();
      if (j == 0 && a[i] == 1) v += cfg.group_shift;
      X.at(i, static_cast<std::size_t>(j)) = v;
    }
  }
  std::vector<std::string> names;
  for (int j = 0; j < cfg.num_features; ++j) names.push_back("x" + std::to_string(j + 1));
  return Dataset(LabelMode::full, std::move(names), std::move(X), std::move(a), std::move(d),
                 std::move(y), {});
}

std::pair<Dataset, SealedTruth> generate_synthetic(const SynthDgpConfig& cfg,
                                                   const Dataset& base) {
  const std::size_t n = base.n();
  Rng rng(cfg.seed);
  SealedTruth truth;
  truth.y_star.resize(n);
  truth.mu.resize(n);
  truth.pi.resize(n);

  std::vector<int> d(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = cfg.pi.eval(base, i);
    const double mu = cfg.mu.eval(base, i);
    if (!(pi > 0.0 && pi <= 1.0))
      fail(Errc::positivity, "generate_synthetic: pi(x) outside (0,1] at row " + std::to_string(i));
    if (!(mu >= 0.0 && mu <= 1.0))
      fail(Errc::domain, "generate_synthetic: mu(x) outside [0,1] at row " + std::to_string(i));
    truth.pi[i] = pi;
    truth.mu[i] = mu;
    // Fixed draw order per row keeps the stream independent of earlier outcomes.
    const bool funded = rng.bernoulli(pi);
    const bool event = rng.bernoulli(mu);
    truth.y_star[i] = event ? 1.0 : 0.0;
    d[i] = funded ? 1 : 0;
    y[i] = funded ? truth.y_star[i] : std::numeric_limits<double>::quiet_NaN();
  }

  Matrix X = base.features();
  Dataset ds(LabelMode::selective, base.feature_names(), std::move(X),
             std::vector<int>(base.attribute()), std::move(d), std::move(y), {});
  return {std::move(ds), std::move(truth)};
}

}  // namespace goodset
