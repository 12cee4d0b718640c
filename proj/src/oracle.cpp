#include "goodset/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "goodset/error.hpp"

namespace goodset {

namespace {

constexpr double kLogisticNormCap = 1e3;

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
as_eigen(const Matrix& X) {
  return {X.data.data(), static_cast<Eigen::Index>(X.rows), static_cast<Eigen::Index>(X.cols)};
}

}  // namespace

Scorer fit_wls(const Matrix& X, std::span<const double> targets, std::span<const double> weights,
               double ridge) {
  const std::size_t n = X.rows, k = X.cols;
  if (targets.size() != n || weights.size() != n) fail(Errc::size, "fit_wls: size mismatch");
  if (ridge < 0.0) fail(Errc::domain, "fit_wls: ridge must be >= 0");
  bool any_nonzero = false;
  for (double w : weights)
    if (w != 0.0) any_nonzero = true;
  if (!any_nonzero) fail(Errc::domain, "fit_wls: all weights zero");

  auto Xe = as_eigen(X);
  Eigen::MatrixXd Xw(n, k);  // rows scaled by their weights
  Eigen::VectorXd t(n);
  for (std::size_t i = 0; i < n; ++i) {
    Xw.row(static_cast<Eigen::Index>(i)) = weights[i] * Xe.row(static_cast<Eigen::Index>(i));
    t(static_cast<Eigen::Index>(i)) = targets[i];
  }
  Eigen::MatrixXd A = Xe.transpose() * Xw;
  Eigen::VectorXd b = Xw.transpose() * t;
  for (std::size_t j = 0; j < k; ++j) A(j, j) += ridge;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  Eigen::VectorXd beta;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    // Rank-deficient pivots mean the system has no unique solution even when
    // it happens to be consistent.
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    const double dmax = d.maxCoeff();
    ok = dmax > 0.0 && d.minCoeff() > 1e-12 * dmax;
  }
  if (ok) {
    beta = ldlt.solve(b);
    ok = beta.allFinite() && (A * beta - b).norm() <= 1e-6 * (1.0 + b.norm());
  }
  if (!ok)
    fail(Errc::singular, "fit_wls: singular or indefinite normal equations; try ridge > 0");

  Scorer f;
  f.link = Link::identity_clipped;
  f.weights.assign(beta.data(), beta.data() + k);
  return f;
}

FitResult fit_logistic(const Matrix& X, std::span<const double> labels,
                       std::span<const double> weights, double ridge) {
  const std::size_t n = X.rows, k = X.cols;
  if (labels.size() != n || weights.size() != n) fail(Errc::size, "fit_logistic: size mismatch");
  bool any_nonzero = false;
  for (double w : weights)
    if (w != 0.0) any_nonzero = true;
  if (!any_nonzero) fail(Errc::domain, "fit_logistic: all weights zero");
  for (double t : labels)
    if (!(t >= 0.0 && t <= 1.0)) fail(Errc::domain, "fit_logistic: label outside [0,1]");

  auto Xe = as_eigen(X);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);

  auto objective = [&](const Eigen::VectorXd& bvec) {
    double obj = ridge * bvec.squaredNorm();
    const Eigen::VectorXd eta = Xe * bvec;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] == 0.0) continue;
      const double e = eta(static_cast<Eigen::Index>(i));
      // -t*log(sig) - (1-t)*log(1-sig) = softplus(e) - t*e, stably.
      const double softplus = e > 30.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      obj += weights[i] * (softplus - labels[i] * e);
    }
    return obj;
  };

  FitResult result;
  double obj = objective(beta);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd eta = Xe * beta;
    Eigen::VectorXd grad = 2.0 * ridge * beta;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(k, k);
    for (std::size_t j = 0; j < k; ++j) hess(j, j) = 2.0 * ridge;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] == 0.0) continue;
      const double p = 1.0 / (1.0 + std::exp(-eta(static_cast<Eigen::Index>(i))));
      const auto xi = Xe.row(static_cast<Eigen::Index>(i)).transpose();
      grad.noalias() += weights[i] * (p - labels[i]) * xi;
      const double r = std::max(weights[i] * p * (1.0 - p), 0.0);
      hess.noalias() += r * xi * xi.transpose();
    }
    if (grad.norm() <= 1e-8) {
      converged = true;
      break;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success) step = ldlt.solve(-grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = -grad;  // fallback direction

    double scale = 1.0;
    Eigen::VectorXd cand = beta + step;
    double cand_obj = objective(cand);
    int halvings = 0;
    while (cand_obj > obj && halvings < 40) {
      scale *= 0.5;
      cand = beta + scale * step;
      cand_obj = objective(cand);
      ++halvings;
    }
    if (cand_obj > obj) break;  // no descent available
    beta = cand;
    obj = cand_obj;

    if (beta.norm() > kLogisticNormCap) {
      beta *= kLogisticNormCap / beta.norm();
      result.norm_capped = true;
      break;
    }
  }
  // Separation signature: every weighted row sits on the correct side with a
  // margin so large the loss underflowed (the exact-arithmetic optimum is at
  // infinity; fp saturation can stop the loop or even "converge" it first).
  if (!result.norm_capped) {
    const Eigen::VectorXd eta = Xe * beta;
    bool separated = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] == 0.0) continue;
      const double margin = eta(static_cast<Eigen::Index>(i)) * (2.0 * labels[i] - 1.0);
      if (margin > 13.0) {
        separated = true;
      } else {
        separated = false;
        break;
      }
    }
    if (separated) result.norm_capped = true;
  }
  (void)converged;

  result.scorer.link = Link::sigmoid;
  result.scorer.weights.assign(beta.data(), beta.data() + k);
  return result;
}

ReductionContext make_reduction_context(const Matrix& X, std::span<const double> outcomes,
                                        std::span<const int> attribute,
                                        std::span<const double> mu_hat, const DisparitySpec& spec,
                                        const Grid& grid, const LossSpec& loss) {
  const std::size_t n = X.rows;
  if (outcomes.size() != n || attribute.size() != n)
    fail(Errc::size, "reduction context: size mismatch");
  for (double y : outcomes)
    if (std::isnan(y))
      fail(Errc::missing_label, "reduction context: masked outcome (run a selective pipeline first)");

  ReductionContext ctx;
  ctx.X = &X;
  ctx.loss = loss;
  ctx.grid = grid;
  ctx.spec = spec;
  ctx.outcomes.assign(outcomes.begin(), outcomes.end());
  ctx.attribute.assign(attribute.begin(), attribute.end());
  ctx.mu_hat.assign(mu_hat.begin(), mu_hat.end());

  ctx.disp_weight.assign(n, 0.0);
  if (spec.beta0 != 0.0 || spec.beta1 != 0.0) {
    DisparityInputs in = ctx.inputs(ctx.outcomes /*placeholder preds, unused sizes match*/);
    ctx.norms = event_normalizers(in, spec);
    for (std::size_t i = 0; i < n; ++i) {
      const double y = ctx.outcomes[i];
      const double g = nuisance_value(spec, in, i);
      double w = 0.0;
      if (spec.beta0 != 0.0 && spec.event0.matches(ctx.attribute[i], y))
        w += spec.beta0 / ctx.norms.p0 * g;
      if (spec.beta1 != 0.0 && spec.event1.matches(ctx.attribute[i], y))
        w += spec.beta1 / ctx.norms.p1 * g;
      ctx.disp_weight[i] = w;
    }
  }

  const int N = grid.N;
  ctx.cost_cum.assign(n * (N + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ysnap = snap_outcome(grid, ctx.outcomes[i]);
    double acc = 0.0;
    ctx.cost_cum[i * (N + 1)] = 0.0;
    for (int j = 1; j <= N; ++j) {
      acc += N * (loss.value_ext(ysnap, grid.midpoint(j)) -
                  loss.value_ext(ysnap, grid.midpoint(j - 1)));
      ctx.cost_cum[i * (N + 1) + j] = acc;
    }
  }
  return ctx;
}

DisparityInputs ReductionContext::inputs(std::span<const double> preds) const {
  DisparityInputs in;
  in.preds = preds;
  in.attribute = attribute;
  in.outcomes = outcomes;
  in.mu_hat = mu_hat;
  return in;
}

double ReductionContext::cost_of(std::span<const double> preds) const {
  if (preds.size() != n()) fail(Errc::size, "cost_of: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < n(); ++i) total += cost_cum_at(i, grid.levels_leq(preds[i]));
  return total / (static_cast<double>(n()) * grid.N);
}

double ReductionContext::disparity_of(std::span<const double> preds) const {
  if (spec.beta0 == 0.0 && spec.beta1 == 0.0) return 0.0;
  if (preds.size() != n()) fail(Errc::size, "disparity_of: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < n(); ++i)
    total += disp_weight[i] * (static_cast<double>(grid.levels_leq(preds[i])) / grid.N);
  return total / static_cast<double>(n());
}

double ReductionContext::objective_of(std::span<const double> preds, const DualWeights& lam) const {
  return lam.disp_scale * disparity_of(preds) + lam.cost_scale * cost_of(preds);
}

CaseWeightTable build_case_weights(const ReductionContext& ctx, const DualWeights& lam) {
  CaseWeightTable t;
  t.n = ctx.n();
  t.N = ctx.grid.N;
  t.c.resize(t.n * t.N);
  for (std::size_t i = 0; i < t.n; ++i)
    for (int j = 1; j <= t.N; ++j)
      t.c[i * t.N + (j - 1)] =
          lam.disp_scale * ctx.disp_weight[i] +
          lam.cost_scale * (ctx.cost_cum_at(i, j) - ctx.cost_cum_at(i, j - 1));
  return t;
}

Scorer best_response_h(const ReductionContext& ctx, const DualWeights& lam, double ridge,
                       const Scorer* benchmark) {
  const std::size_t n = ctx.n();
  const int N = ctx.grid.N;

  // Per-row exact optimum of the cost-sensitive objective: the grid level whose
  // cumulative case weight is smallest, ties to the smallest level.
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best_j = 0;
    double best_s = 0.0;  // S_i(0) = 0
    for (int j = 1; j <= N; ++j) {
      const double s = lam.disp_scale * ctx.disp_weight[i] * j + lam.cost_scale * ctx.cost_cum_at(i, j);
      if (s < best_s) {
        best_s = s;
        best_j = j;
      }
    }
    target[i] = best_j == 0 ? 0.0 : ctx.grid.level(best_j);
  }

  const std::vector<double> ones(n, 1.0);
  Scorer fitted = fit_wls(*ctx.X, target, ones, ridge);

  // Sanity floor: never return anything worse than the trivial responses.
  Scorer zero;
  zero.link = Link::identity_clipped;
  zero.weights.assign(ctx.X->cols, 0.0);

  Scorer best = std::move(fitted);
  double best_val = ctx.objective_of(best.predict_all(*ctx.X), lam);
  const double zero_val = ctx.objective_of(zero.predict_all(*ctx.X), lam);
  if (zero_val < best_val) {
    best = zero;
    best_val = zero_val;
  }
  if (benchmark != nullptr) {
    const double bench_val = ctx.objective_of(benchmark->predict_all(*ctx.X), lam);
    if (bench_val < best_val) {
      best = *benchmark;
      best_val = bench_val;
    }
  }
  return best;
}

Scorer exact_best_response(const ReductionContext& ctx, const DualWeights& lam,
                           std::span<const Scorer> candidates) {
  if (candidates.empty()) fail(Errc::size, "exact_best_response: empty candidate list");
  std::size_t best = 0;
  double best_val = ctx.objective_of(candidates[0].predict_all(*ctx.X), lam);
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const double v = ctx.objective_of(candidates[k].predict_all(*ctx.X), lam);
    if (v < best_val) {
      best = k;
      best_val = v;
    }
  }
  return candidates[best];
}

Learner learner_from_string(const std::string& s) {
  if (s == "wls") return Learner::wls;
  if (s == "logistic") return Learner::logistic;
  fail(Errc::config, "unknown learner '" + s + "'");
}

FitResult fit_outcome_model(const Matrix& X, std::span<const double> outcomes,
                            std::span<const int> decision, Learner learner, double ridge) {
  const std::size_t n = X.rows;
  if (outcomes.size() != n || decision.size() != n)
    fail(Errc::size, "fit_outcome_model: size mismatch");
  std::vector<std::size_t> funded;
  for (std::size_t i = 0; i < n; ++i)
    if (decision[i] == 1) funded.push_back(i);
  if (funded.empty()) fail(Errc::empty_selection, "fit_outcome_model: no funded (d=1) rows");

  Matrix Xf(funded.size(), X.cols);
  std::vector<double> yf(funded.size());
  for (std::size_t k = 0; k < funded.size(); ++k) {
    std::copy(X.row(funded[k]).begin(), X.row(funded[k]).end(), Xf.row(k).begin());
    yf[k] = outcomes[funded[k]];
    if (std::isnan(yf[k])) fail(Errc::missing_label, "fit_outcome_model: funded row lacks outcome");
  }
  const std::vector<double> ones(funded.size(), 1.0);
  if (learner == Learner::logistic) {
    const auto [mn, mx] = std::minmax_element(yf.begin(), yf.end());
    if (*mn == *mx)
      fail(Errc::empty_selection,
           "fit_outcome_model: logistic learner needs both label values among funded rows");
    return fit_logistic(Xf, yf, ones, ridge);
  }
  FitResult r;
  r.scorer = fit_wls(Xf, yf, ones, ridge);
  return r;
}

}  // namespace goodset
