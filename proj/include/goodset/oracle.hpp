#pragma once

#include <functional>
#include <span>
#include <vector>

#include "goodset/disparity.hpp"
#include "goodset/loss.hpp"
#include "goodset/matrix.hpp"
#include "goodset/scorer.hpp"

namespace goodset {

struct FitResult {
  Scorer scorer;
  bool norm_capped = false;  // set when a diverging logistic fit was capped
  int iterations = 0;
};

// Minimizes sum_i w_i (t_i - b.x_i)^2 + ridge * |b|^2 via normal equations.
Scorer fit_wls(const Matrix& X, std::span<const double> targets, std::span<const double> weights,
               double ridge);

// Weighted cross-entropy with soft labels in [0,1], damped Newton iterations.
FitResult fit_logistic(const Matrix& X, std::span<const double> labels,
                       std::span<const double> weights, double ridge);

// Dual multipliers collapsed to the two scales that enter the case weights:
// disp_scale * (disparity part) + cost_scale * c(y_snap, z).
struct DualWeights {
  double disp_scale = 1.0;
  double cost_scale = 0.0;
};

struct CaseWeightTable {
  std::size_t n = 0;
  int N = 0;
  std::vector<double> c;  // row-major n x N, grid level j stored at column j-1

  double at(std::size_t i, int j) const { return c[i * N + (j - 1)]; }
};

// Shared precomputation for the cost-sensitive reduction over one training set:
// per-row disparity weight (constant in z) and cumulative cost prefix sums.
struct ReductionContext {
  const Matrix* X = nullptr;
  LossSpec loss;
  Grid grid;
  DisparitySpec spec;
  std::vector<double> outcomes;  // pseudo-outcomes, all present
  std::vector<int> attribute;
  std::vector<double> mu_hat;  // empty unless eq5
  EventNormalizers norms;

  std::vector<double> disp_weight;  // n
  std::vector<double> cost_cum;     // n x (N+1) prefix sums of c(y_snap, z_j)

  std::size_t n() const { return outcomes.size(); }
  double cost_cum_at(std::size_t i, int j) const { return cost_cum[i * (grid.N + 1) + j]; }

  // Empirical cost / disparity of the threshold classifier induced by preds.
  double cost_of(std::span<const double> preds) const;
  double disparity_of(std::span<const double> preds) const;
  // Best-response objective value: disp_scale*disp + cost_scale*cost.
  double objective_of(std::span<const double> preds, const DualWeights& lam) const;

  DisparityInputs inputs(std::span<const double> preds) const;
};

ReductionContext make_reduction_context(const Matrix& X, std::span<const double> outcomes,
                                        std::span<const int> attribute,
                                        std::span<const double> mu_hat, const DisparitySpec& spec,
                                        const Grid& grid, const LossSpec& loss);

// Eq.-9 case weights c_lambda(i, z) = disp_scale * disparity part + cost_scale * c(y_snap, z).
CaseWeightTable build_case_weights(const ReductionContext& ctx, const DualWeights& lam);

// Plug point for the cost-sensitive oracle: production uses the least-squares
// heuristic; tests substitute an exact argmin over an enumerable scorer list.
using BestResponseFn = std::function<Scorer(const DualWeights&)>;

// Heuristic least-squares reduction: per-row cumulative-cost-minimizing grid
// target (ties to the smallest level), unweighted WLS fit on the features, then
// a sanity floor against the zero scorer and the benchmark (never worse).
Scorer best_response_h(const ReductionContext& ctx, const DualWeights& lam, double ridge,
                       const Scorer* benchmark);

// Exact argmin of the best-response objective over a finite candidate list;
// deterministic tie-break by list order.
Scorer exact_best_response(const ReductionContext& ctx, const DualWeights& lam,
                           std::span<const Scorer> candidates);

enum class Learner { wls, logistic };
Learner learner_from_string(const std::string& s);

// Outcome regression fitted on funded (d=1) rows only; predictions in [0,1].
FitResult fit_outcome_model(const Matrix& X, std::span<const double> outcomes,
                            std::span<const int> decision, Learner learner, double ridge);

}  // namespace goodset
