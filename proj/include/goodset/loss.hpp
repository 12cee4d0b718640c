#pragma once

#include <functional>
#include <span>
#include <vector>

#include "goodset/error.hpp"

namespace goodset {

// Prediction losses on [0,1]x[0,1], normalized so values stay in [0,1].
// The logistic kind is log(1+e^{-C(2y-1)(2u-1)}) / log(1+e^C).
struct LossSpec {
  enum class Kind { squared, logistic, custom };

  Kind kind = Kind::squared;
  double C = 5.0;
  // Extension point (API only): a user loss must come with its own declared
  // Lipschitz constant in u; it is spot-checked numerically, never verified.
  std::function<double(double, double)> custom_fn;
  double custom_lipschitz = 0.0;

  static LossSpec squared() { return LossSpec{Kind::squared, 0.0, {}, 0.0}; }
  static LossSpec logistic(double C);
  static LossSpec custom(std::function<double(double, double)> fn, double lipschitz);

  // Loss evaluated on the extended second argument [0, 1+alpha/2] used by the
  // discretization; callers wanting domain checks go through loss_value().
  double value_ext(double y, double u) const;

  // Lipschitz constant in u (2 for squared on [0,1]; 2C/log(1+e^C) for logistic;
  // as declared for custom losses).
  double lipschitz() const;
};

// Discretization grid of size N over [0,1]: levels j/N for j=1..N, outcome
// cover at cell midpoints (k+1/2)/N for k=0..N-1.
struct Grid {
  int N = 40;
  double alpha = 1.0 / 40.0;

  static Grid make(int N);

  double level(int j) const { return static_cast<double>(j) / N; }          // j in 1..N
  double midpoint(int j) const { return (static_cast<double>(j) + 0.5) / N; }  // j in 0..N
  double cover_point(int k) const { return midpoint(k); }                   // k in 0..N-1

  // Index k of the smallest cover point within alpha/2 of y (ties go down).
  int snap_index(double y) const;

  // #{ j in 1..N : level(j) <= u }, i.e. the index of [u]_alpha.
  int levels_leq(double u) const;
};

double loss_value(const LossSpec& spec, double y, double u);

// Smallest cover point within alpha/2 of y.
double snap_outcome(const Grid& grid, double y);

// l_alpha(y,u) = l(snap(y), [u]_alpha + alpha/2).
double discretized_loss(const LossSpec& spec, const Grid& grid, double y, double u);

// c(y,z) = N * ( l(y, z+alpha/2) - l(y, z-alpha/2) ) for z on the grid.
// For the squared loss this is -2(y-z) identically.
double cost_weight(const LossSpec& spec, const Grid& grid, double y, double z);

// Mean over rows of l(snap(y), alpha/2); the constant tying classifier cost to
// discretized prediction loss.
double c0_hat(const LossSpec& spec, const Grid& grid, std::span<const double> outcomes);

// Empirical mean of l(y_i, pred_i).
double avg_loss(const LossSpec& spec, std::span<const double> outcomes,
                std::span<const double> preds);

// Empirical mean of (1/N) sum_{z<=pred} c(snap(y), z), summed literally over
// grid levels so the telescoping identity against c0_hat stays a real check.
double avg_cost(const LossSpec& spec, const Grid& grid, std::span<const double> outcomes,
                std::span<const double> preds);

// Mean of l_alpha(y_i, pred_i).
double avg_discretized_loss(const LossSpec& spec, const Grid& grid,
                            std::span<const double> outcomes, std::span<const double> preds);

}  // namespace goodset
