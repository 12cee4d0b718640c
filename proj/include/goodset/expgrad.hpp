#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "goodset/oracle.hpp"

namespace goodset {

struct ExpGradConfig {
  double B_lambda = 0.0;  // 0: sqrt(n) for max problems, sqrt(n)/2 for min problems
  double nu = 0.0;        // 0: 1/sqrt(n)
  double eta = 2.0;
  bool eta_theory = false;  // eta = nu / (2 rho^2 B_lambda), rho = 1
  int max_iter = 500;
  double eps_hat = std::numeric_limits<double>::quiet_NaN();
  double B_xi = 1.0;

  double resolve_B(std::size_t n, bool max_problem) const {
    if (B_lambda > 0.0) return B_lambda;
    const double root = std::sqrt(static_cast<double>(n));
    return max_problem ? root : root / 2.0;
  }
  double resolve_nu(std::size_t n) const {
    return nu > 0.0 ? nu : 1.0 / std::sqrt(static_cast<double>(n));
  }
  double resolve_eta(double B, double nu_eff) const {
    return eta_theory ? nu_eff / (2.0 * B) : eta;
  }
};

enum class SaddleStatus { feasible, infeasible_null, budget_exhausted };

struct TracePoint {
  int t = 0;
  double nu_t = 0.0;
  std::array<double, 3> lambda{0.0, 0.0, 0.0};  // (lambda) or (lambda+, lambda-, lambda_cost)
  double xi = 0.0;
  double cost_gap = 0.0;   // cost(h_t) - eps_hat (loss for BGL)
  double disparity = 0.0;  // disparity(h_t)
};

enum class SolverAlgo { disparity_min, disparity_max, abs_disparity_min, bgl_min };

struct SaddleResult {
  SolverAlgo algo = SolverAlgo::disparity_min;
  SaddleStatus status = SaddleStatus::infeasible_null;
  StochasticModel q;  // empty when infeasible_null
  double lambda_hat = 0.0;
  std::array<double, 3> lambda_hat3{0.0, 0.0, 0.0};
  double xi_hat = 0.0;
  int iterations = 0;
  bool converged = false;  // nu_t <= nu reached within the iteration budget
  std::vector<TracePoint> trace;

  // Empirical values on the training context at termination.
  double disp_q = 0.0;
  double cost_q = 0.0;  // avg loss for BGL
  double nu_final = 0.0;

  // Per-support-point empirical values (inputs to the LP shrink).
  std::vector<Scorer> support;
  std::vector<double> support_disp;
  std::vector<double> support_cost;

  // Echo of the solved configuration.
  double eps_hat = 0.0;
  double B_lambda = 0.0;
  double nu_target = 0.0;
  double B_xi = 0.0;
  double beta_abs_sum = 0.0;
};

// Budget calibration: eps = (1+delta) * benchmark_loss, eps_hat = eps - c0_hat.
struct EpsCalibration {
  double eps = 0.0;
  double c0 = 0.0;
  double eps_hat = 0.0;
};
EpsCalibration calibrate_eps(double benchmark_loss, double delta, const LossSpec& loss,
                             const Grid& grid, std::span<const double> outcomes);

// Algorithm for the disparity-minimizing model over the set of good models.
// best_h defaults to the least-squares heuristic with the given ridge/benchmark.
SaddleResult solve_disparity_min(const ReductionContext& ctx, const ExpGradConfig& cfg,
                                 const BestResponseFn& best_h = {});

// Same with (beta0, beta1) negated; reported disparities re-negated to the
// original frame.
SaddleResult solve_disparity_max(const ReductionContext& ctx, const ExpGradConfig& cfg,
                                 const BestResponseFn& best_h = {});

// Slack-variable algorithm for the absolute-disparity-minimizing model.
SaddleResult solve_abs_disparity_min(const ReductionContext& ctx, const ExpGradConfig& cfg,
                                     const BestResponseFn& best_h = {});

// Bounded group loss: no discretization; weighted loss minimization inside.
struct BglContext {
  const Matrix* X = nullptr;
  LossSpec loss;
  std::vector<double> outcomes;
  std::vector<int> attribute;
  double p0 = 0.0, p1 = 0.0;  // group frequencies

  std::size_t n() const { return outcomes.size(); }
  double loss_of(std::span<const double> preds) const;
  double disp_of(std::span<const double> preds) const;  // E[l|A=1] - E[l|A=0]
};
BglContext make_bgl_context(const Matrix& X, std::span<const double> outcomes,
                            std::span<const int> attribute, const LossSpec& loss);

using BglBestResponseFn = std::function<Scorer(double lambda)>;
SaddleResult solve_bgl(const BglContext& ctx, const ExpGradConfig& cfg,
                       const BglBestResponseFn& best_f = {});

// LP support shrink: min sum p_t disp_t s.t. sum p_t cost_t <= eps_hat + 2 nu',
// nu' from a doubling search; exact single-constraint vertex solution with at
// most two support points.
struct ShrinkResult {
  StochasticModel model;
  double nu_prime = 0.0;
  double objective = 0.0;
  double cost = 0.0;
};
ShrinkResult shrink_support(std::span<const Scorer> support, std::span<const double> disp,
                            std::span<const double> cost, double eps_hat, double nu,
                            std::span<const double> input_weights = {});

// Post-hoc certificate: re-derives the saddle-point inequalities from the result.
struct Certificate {
  struct Line {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
  };
  std::vector<Line> lines;
  bool all_pass = true;
};
Certificate certify(const SaddleResult& result, const ReductionContext& ctx,
                    const ExpGradConfig& cfg, const BestResponseFn& best_h = {});

}  // namespace goodset
