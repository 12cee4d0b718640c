#include "goodset/loss.hpp"

#include <algorithm>
#include <cmath>

namespace goodset {

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) {
  if (t > 30.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

}  // namespace

LossSpec LossSpec::logistic(double C) {
  if (!(C > 0.0)) fail(Errc::domain, "logistic loss requires C > 0");
  return LossSpec{Kind::logistic, C, {}, 0.0};
}

LossSpec LossSpec::custom(std::function<double(double, double)> fn, double lipschitz) {
  if (!fn) fail(Errc::domain, "custom loss requires a function");
  if (!(lipschitz > 0.0)) fail(Errc::domain, "custom loss requires a declared Lipschitz constant");
  LossSpec spec{Kind::custom, 0.0, std::move(fn), lipschitz};
  // Numeric spot check of the declared constant on a coarse grid.
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double y = i / 10.0, u0 = j / 10.0, u1 = (j + 1) / 10.0;
      if (std::abs(spec.custom_fn(y, u1) - spec.custom_fn(y, u0)) > lipschitz * 0.1 + 1e-12)
        fail(Errc::domain, "custom loss violates its declared Lipschitz constant");
    }
  }
  return spec;
}

double LossSpec::value_ext(double y, double u) const {
  if (kind == Kind::squared) {
    const double d = y - u;
    return d * d;
  }
  if (kind == Kind::custom) return custom_fn(y, u);
  const double t = -C * (2.0 * y - 1.0) * (2.0 * u - 1.0);
  return softplus(t) / softplus(C);
}

double LossSpec::lipschitz() const {
  if (kind == Kind::squared) return 2.0;
  if (kind == Kind::custom) return custom_lipschitz;
  return 2.0 * C / softplus(C);
}

Grid Grid::make(int N) {
  if (N < 1) fail(Errc::domain, "grid size N must be >= 1");
  Grid g;
  g.N = N;
  g.alpha = 1.0 / static_cast<double>(N);
  return g;
}

int Grid::snap_index(double y) const {
  if (y <= 0.0) return 0;
  // Nearest cover point, ties to the smaller index. Scan the neighbouring
  // cells instead of trusting y*N, whose product rounding can flip a tie.
  int k = std::clamp(static_cast<int>(std::floor(y * N)), 0, N - 1);
  int best = -1;
  double best_dist = 0.0;
  for (int c = std::max(0, k - 1); c <= std::min(N - 1, k + 1); ++c) {
    const double dist = std::abs(y - cover_point(c));
    if (best < 0 || dist < best_dist - 1e-12) {
      best = c;
      best_dist = dist;
    }
  }
  return best;
}

int Grid::levels_leq(double u) const {
  if (u < level(1)) return 0;
  if (u >= 1.0) return N;
  // levels are exact double divisions j/N; count by comparison to stay
  // consistent with any test that enumerates the same values.
  int lo = 1, hi = N;  // invariant: level(lo) <= u < level(hi+... ) handled below
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (level(mid) <= u)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

double loss_value(const LossSpec& spec, double y, double u) {
  if (!(y >= 0.0 && y <= 1.0)) fail(Errc::domain, "loss_value: y outside [0,1]");
  if (!(u >= 0.0 && u <= 1.0)) fail(Errc::domain, "loss_value: u outside [0,1]");
  return spec.value_ext(y, u);
}

double snap_outcome(const Grid& grid, double y) { return grid.cover_point(grid.snap_index(y)); }

double discretized_loss(const LossSpec& spec, const Grid& grid, double y, double u) {
  const double ysnap = snap_outcome(grid, y);
  return spec.value_ext(ysnap, grid.midpoint(grid.levels_leq(u)));
}

double cost_weight(const LossSpec& spec, const Grid& grid, double y, double z) {
  int j = grid.levels_leq(z);
  if (j < 1 || std::abs(grid.level(j) - z) > 1e-12)
    fail(Errc::domain, "cost_weight: z is not a grid level");
  return grid.N * (spec.value_ext(y, grid.midpoint(j)) - spec.value_ext(y, grid.midpoint(j - 1)));
}

double c0_hat(const LossSpec& spec, const Grid& grid, std::span<const double> outcomes) {
  if (outcomes.empty()) fail(Errc::size, "c0_hat: empty outcome vector");
  const double m0 = grid.midpoint(0);
  double sum = 0.0;
  for (double y : outcomes) {
    if (std::isnan(y)) fail(Errc::missing_label, "c0_hat: missing outcome (pseudo-label first)");
    sum += spec.value_ext(snap_outcome(grid, y), m0);
  }
  return sum / static_cast<double>(outcomes.size());
}

double avg_loss(const LossSpec& spec, std::span<const double> outcomes,
                std::span<const double> preds) {
  if (outcomes.empty()) fail(Errc::size, "avg_loss: empty dataset");
  if (outcomes.size() != preds.size()) fail(Errc::size, "avg_loss: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (std::isnan(outcomes[i])) fail(Errc::missing_label, "avg_loss: missing outcome");
    sum += spec.value_ext(outcomes[i], preds[i]);
  }
  return sum / static_cast<double>(outcomes.size());
}

double avg_cost(const LossSpec& spec, const Grid& grid, std::span<const double> outcomes,
                std::span<const double> preds) {
  if (outcomes.empty()) fail(Errc::size, "avg_cost: empty dataset");
  if (outcomes.size() != preds.size()) fail(Errc::size, "avg_cost: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (std::isnan(outcomes[i])) fail(Errc::missing_label, "avg_cost: missing outcome");
    const double ysnap = snap_outcome(grid, outcomes[i]);
    const int J = grid.levels_leq(preds[i]);
    double row = 0.0;
    for (int j = 1; j <= J; ++j)
      row += grid.N * (spec.value_ext(ysnap, grid.midpoint(j)) -
                       spec.value_ext(ysnap, grid.midpoint(j - 1)));
    total += row / grid.N;
  }
  return total / static_cast<double>(outcomes.size());
}

double avg_discretized_loss(const LossSpec& spec, const Grid& grid,
                            std::span<const double> outcomes, std::span<const double> preds) {
  if (outcomes.empty()) fail(Errc::size, "avg_discretized_loss: empty dataset");
  if (outcomes.size() != preds.size()) fail(Errc::size, "avg_discretized_loss: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (std::isnan(outcomes[i])) fail(Errc::missing_label, "avg_discretized_loss: missing outcome");
    sum += discretized_loss(spec, grid, outcomes[i], preds[i]);
  }
  return sum / static_cast<double>(outcomes.size());
}

}  // namespace goodset
