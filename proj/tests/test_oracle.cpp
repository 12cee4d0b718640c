#include <doctest.h>

#include <cmath>

#include "goodset/error.hpp"
#include "goodset/oracle.hpp"
#include "goodset/rng.hpp"

using namespace goodset;

namespace {

Matrix random_design(Rng& rng, std::size_t n, std::size_t k, bool intercept = true) {
  Matrix X(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      X.at(i, j) = (intercept && j == 0) ? 1.0 : rng.normal();
  }
  return X;
}

ReductionContext sp_context(const Matrix& X, const std::vector<double>& y,
                            const std::vector<int>& a, int N, DisparityKind kind,
                            const LossSpec& loss) {
  return make_reduction_context(X, y, a, {}, make_spec(kind, false), Grid::make(N), loss);
}

}  // namespace

TEST_CASE("fit_wls interpolates an exactly determined line") {
  Matrix X(2, 2);
  X.at(0, 0) = 1.0; X.at(0, 1) = 0.0;
  X.at(1, 0) = 1.0; X.at(1, 1) = 1.0;
  const std::vector<double> t = {0.2, 0.8};
  const std::vector<double> w = {1.0, 1.0};
  const Scorer f = fit_wls(X, t, w, 0.0);
  CHECK(f.predict(X.row(0)) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(f.predict(X.row(1)) == doctest::Approx(0.8).epsilon(1e-10));
}

TEST_CASE("fit_wls: uniformly scaled weights match unweighted OLS") {
  Rng rng(31);
  Matrix X = random_design(rng, 40, 3);
  std::vector<double> t(40);
  for (auto& v : t) v = rng.uniform01();
  const std::vector<double> ones(40, 1.0);
  const std::vector<double> twos(40, 2.0);
  const Scorer f1 = fit_wls(X, t, ones, 0.0);
  const Scorer f2 = fit_wls(X, t, twos, 0.0);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(f1.weights[j] == doctest::Approx(f2.weights[j]).epsilon(1e-10));
}

TEST_CASE("fit_wls: huge ridge shrinks coefficients to zero") {
  Rng rng(32);
  Matrix X = random_design(rng, 30, 2);
  std::vector<double> t(30, 0.9);
  const std::vector<double> ones(30, 1.0);
  const Scorer f = fit_wls(X, t, ones, 1e12);
  for (double wj : f.weights) CHECK(std::abs(wj) < 1e-6);
}

TEST_CASE("fit_wls: singular design without ridge raises, with ridge succeeds") {
  Matrix X(4, 2);  // two identical columns
  for (std::size_t i = 0; i < 4; ++i) {
    X.at(i, 0) = static_cast<double>(i);
    X.at(i, 1) = static_cast<double>(i);
  }
  const std::vector<double> t = {0.0, 0.25, 0.5, 0.75};
  const std::vector<double> w = {1.0, 1.0, 1.0, 1.0};
  try {
    fit_wls(X, t, w, 0.0);
    FAIL("expected singular error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular);
    CHECK(std::string(e.what()).find("ridge") != std::string::npos);
  }
  CHECK_NOTHROW(fit_wls(X, t, w, 1e-6));
  CHECK_THROWS_AS(fit_wls(X, t, std::vector<double>(4, 0.0), 1e-6), Error);
}

TEST_CASE("fit_logistic: intercept-only fit recovers the base rate") {
  Matrix X(10, 1);
  for (std::size_t i = 0; i < 10; ++i) X.at(i, 0) = 1.0;
  std::vector<double> t(10, 0.0);
  t[0] = t[1] = t[2] = 1.0;  // base rate 0.3
  const std::vector<double> ones(10, 1.0);
  const FitResult r = fit_logistic(X, t, ones, 1e-10);
  CHECK(r.scorer.predict(X.row(0)) == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("fit_logistic: all-zero labels push predictions to zero") {
  Rng rng(33);
  Matrix X = random_design(rng, 25, 2);
  const std::vector<double> t(25, 0.0);
  const std::vector<double> ones(25, 1.0);
  const FitResult r = fit_logistic(X, t, ones, 1e-6);
  for (std::size_t i = 0; i < 25; ++i) CHECK(r.scorer.predict(X.row(i)) < 0.05);
}

TEST_CASE("fit_logistic matches a from-scratch gradient-descent oracle") {
  Rng rng(34);
  const std::size_t n = 60;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-(0.3 + 0.8 * X.at(i, 1))))) ? 1.0 : 0.0;
  const std::vector<double> ones(n, 1.0);
  const double ridge = 1e-3;

  // Plain gradient descent on the same objective.
  std::vector<double> beta = {0.0, 0.0};
  for (int iter = 0; iter < 200000; ++iter) {
    double g0 = 2.0 * ridge * beta[0], g1 = 2.0 * ridge * beta[1];
    for (std::size_t i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(beta[0] * X.at(i, 0) + beta[1] * X.at(i, 1))));
      g0 += (p - t[i]) * X.at(i, 0);
      g1 += (p - t[i]) * X.at(i, 1);
    }
    beta[0] -= 0.01 * g0 / n;
    beta[1] -= 0.01 * g1 / n;
  }

  const FitResult r = fit_logistic(X, t, ones, ridge);
  for (std::size_t i = 0; i < n; ++i) {
    const double oracle =
        1.0 / (1.0 + std::exp(-(beta[0] * X.at(i, 0) + beta[1] * X.at(i, 1))));
    CHECK(std::abs(r.scorer.predict(X.row(i)) - oracle) <= 1e-4);
  }
}

TEST_CASE("fit_logistic: perfect separation is capped and flagged") {
  Matrix X(8, 2);
  std::vector<double> t(8);
  for (std::size_t i = 0; i < 8; ++i) {
    X.at(i, 0) = 1.0;
    X.at(i, 1) = i < 4 ? -1.0 - 0.1 * i : 1.0 + 0.1 * i;
    t[i] = i < 4 ? 0.0 : 1.0;
  }
  const std::vector<double> ones(8, 1.0);
  const FitResult r = fit_logistic(X, t, ones, 0.0);
  CHECK(r.norm_capped);
}

TEST_CASE("scorer predictions stay in [0,1] for random weights") {
  Rng rng(35);
  for (int rep = 0; rep < 10000; ++rep) {
    Scorer f;
    f.link = rep % 2 == 0 ? Link::identity_clipped : Link::sigmoid;
    f.weights = {rng.normal() * 5.0, rng.normal() * 5.0};
    const std::vector<double> x = {rng.normal(), rng.normal()};
    const double p = f.predict(x);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("case weights: SP at lambda=0 is the signed group constant") {
  Rng rng(36);
  const std::size_t n = 12;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> y(n);
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform01();
    a[i] = i % 3 == 0 ? 1 : 0;
  }
  const auto ctx = sp_context(X, y, a, 4, DisparityKind::SP, LossSpec::squared());
  const CaseWeightTable t = build_case_weights(ctx, DualWeights{1.0, 0.0});

  const double n1 = 4.0, n0 = 8.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = a[i] == 1 ? 1.0 / (n1 / n) : -1.0 / (n0 / n);
    for (int j = 1; j <= 4; ++j) CHECK(t.at(i, j) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("case weights: null spec at lambda=1 reduces to the cost transform") {
  Rng rng(37);
  const std::size_t n = 9;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> y(n);
  std::vector<int> a(n, 0);
  for (std::size_t i = 0; i < n; ++i) y[i] = rng.uniform01();

  DisparitySpec null_spec;  // beta0 = beta1 = 0
  const Grid g = Grid::make(10);
  const LossSpec sq = LossSpec::squared();
  const auto ctx = make_reduction_context(X, y, a, {}, null_spec, g, sq);
  const CaseWeightTable t = build_case_weights(ctx, DualWeights{1.0, 1.0});
  for (std::size_t i = 0; i < n; ++i) {
    const double ysnap = snap_outcome(g, y[i]);
    for (int j = 1; j <= g.N; ++j)
      CHECK(t.at(i, j) == doctest::Approx(-2.0 * (ysnap - g.level(j))).epsilon(1e-12));
  }
}

TEST_CASE("case weight table is linear in lambda") {
  Rng rng(38);
  const std::size_t n = 10;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> y(n);
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform01();
    a[i] = i % 2;
  }
  const auto ctx = sp_context(X, y, a, 8, DisparityKind::SP, LossSpec::logistic(5.0));
  const CaseWeightTable t0 = build_case_weights(ctx, DualWeights{1.0, 0.0});
  const CaseWeightTable t1 = build_case_weights(ctx, DualWeights{1.0, 1.0});
  const double lam = 0.37;
  const CaseWeightTable tl = build_case_weights(ctx, DualWeights{1.0, lam});
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 1; j <= 8; ++j)
      CHECK(tl.at(i, j) ==
            doctest::Approx(t0.at(i, j) + lam * (t1.at(i, j) - t0.at(i, j))).epsilon(1e-12));
}

TEST_CASE("best response: per-row targets sit just below the snapped outcome") {
  // Identity design (no intercept) so WLS reproduces each row's target exactly.
  const std::size_t n = 9;
  Matrix X(n, n);
  for (std::size_t i = 0; i < n; ++i) X.at(i, i) = 1.0;
  std::vector<double> y = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> a(n, 0);
  DisparitySpec null_spec;
  const Grid g = Grid::make(40);
  const auto ctx = make_reduction_context(X, y, a, {}, null_spec, g, LossSpec::squared());
  const Scorer f = best_response_h(ctx, DualWeights{1.0, 1.0}, 1e-9, nullptr);
  for (std::size_t i = 0; i < n; ++i) {
    const double ysnap = snap_outcome(g, y[i]);
    const double expected = g.level(g.levels_leq(ysnap));  // grid point just below
    CHECK(f.predict(X.row(i)) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("best response: all-positive costs drive the scorer to zero") {
  Rng rng(39);
  const std::size_t n = 15;
  Matrix X = random_design(rng, n, 3);
  std::vector<double> y(n, 0.0);  // squared-loss costs -2(ysnap - z) > 0 for all z
  std::vector<int> a(n, 0);
  DisparitySpec null_spec;
  const auto ctx =
      make_reduction_context(X, y, a, {}, null_spec, Grid::make(10), LossSpec::squared());
  const Scorer f = best_response_h(ctx, DualWeights{1.0, 1.0}, 1e-6, nullptr);
  for (std::size_t i = 0; i < n; ++i) CHECK(f.predict(X.row(i)) <= 1e-9);
}

TEST_CASE("best response sanity floor against zero and benchmark") {
  Rng rng(40);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 20;
    Matrix X = random_design(rng, n, 3);
    std::vector<double> y(n);
    std::vector<int> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform01();
      a[i] = i % 2;
    }
    const auto ctx = sp_context(X, y, a, 10, DisparityKind::SP, LossSpec::squared());
    Scorer bench;
    bench.link = Link::identity_clipped;
    bench.weights = {rng.normal(), rng.normal(), rng.normal()};
    const DualWeights lam{rng.uniform(-1.0, 1.0), rng.uniform(0.0, 3.0)};
    const Scorer f = best_response_h(ctx, lam, 1e-6, &bench);

    Scorer zero;
    zero.link = Link::identity_clipped;
    zero.weights = {0.0, 0.0, 0.0};
    const double vf = ctx.objective_of(f.predict_all(X), lam);
    const double vz = ctx.objective_of(zero.predict_all(X), lam);
    const double vb = ctx.objective_of(bench.predict_all(X), lam);
    CHECK(vf <= std::min(vz, vb) + 1e-12);
  }
}

TEST_CASE("exact best response: argmin with deterministic tie-break") {
  Rng rng(41);
  const std::size_t n = 10;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> y(n);
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform01();
    a[i] = i % 2;
  }
  const auto ctx = sp_context(X, y, a, 4, DisparityKind::SP, LossSpec::squared());
  const DualWeights lam{1.0, 0.5};

  Scorer f1{{0.3, 0.1}, Link::identity_clipped};
  Scorer f2{{0.7, -0.4}, Link::identity_clipped};
  Scorer f3{{0.1, 0.9}, Link::identity_clipped};

  const std::vector<Scorer> single = {f1};
  CHECK(exact_best_response(ctx, lam, single).weights == f1.weights);

  const std::vector<Scorer> dup = {f1, f1};
  CHECK(exact_best_response(ctx, lam, dup).weights == f1.weights);

  const std::vector<Scorer> three = {f1, f2, f3};
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double v = ctx.objective_of(three[k].predict_all(X), lam);
    if (v < best) {
      best = v;
      best_idx = k;
    }
  }
  CHECK(exact_best_response(ctx, lam, three).weights == three[best_idx].weights);
}

TEST_CASE("argmin is idempotent when the heuristic joins the candidates") {
  Rng rng(44);
  const std::size_t n = 30;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> y(n);
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rng.uniform01();
    a[i] = i % 2;
  }
  const auto ctx = sp_context(X, y, a, 10, DisparityKind::SP, LossSpec::squared());
  const DualWeights lam{1.0, 1.0};

  std::vector<Scorer> candidates;
  for (double b0 : {0.2, 0.5, 0.8})
    candidates.push_back(Scorer{{b0, 0.1}, Link::identity_clipped});
  const Scorer heur = best_response_h(ctx, lam, 1e-6, nullptr);

  std::vector<Scorer> widened = candidates;
  widened.push_back(heur);
  const Scorer first = exact_best_response(ctx, lam, widened);
  const double v1 = ctx.objective_of(first.predict_all(X), lam);

  widened.push_back(first);
  const Scorer second = exact_best_response(ctx, lam, widened);
  const double v2 = ctx.objective_of(second.predict_all(X), lam);
  CHECK(v1 == v2);
  CHECK(v1 <= ctx.objective_of(heur.predict_all(X), lam));
}

TEST_CASE("heuristic best response tracks the exact oracle within 10%") {
  // Structured instance: the group is visible through x1, so the least-squares
  // reduction can express the disparity tradeoff the exact oracle exploits.
  Rng rng(43);
  const std::size_t n = 100;
  Matrix X(n, 2);
  std::vector<double> y(n);
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = i % 2;
    X.at(i, 0) = 1.0;
    X.at(i, 1) = rng.normal() + 1.5 * a[i];
    y[i] = std::clamp(0.3 + 0.25 * X.at(i, 1) + 0.05 * rng.normal(), 0.0, 1.0);
  }
  const auto ctx = sp_context(X, y, a, 40, DisparityKind::SP, LossSpec::squared());

  // Nine enumerable scorers spanning the instance.
  std::vector<Scorer> candidates;
  for (double b0 : {0.25, 0.4, 0.55})
    for (double b1 : {-0.25, 0.0, 0.25})
      candidates.push_back(Scorer{{b0, b1}, Link::identity_clipped});

  for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
    const DualWeights lam{1.0, lambda};
    const Scorer exact = exact_best_response(ctx, lam, candidates);
    const double exact_val = ctx.objective_of(exact.predict_all(X), lam);
    const Scorer heur = best_response_h(ctx, lam, 1e-6, nullptr);
    const double heur_val = ctx.objective_of(heur.predict_all(X), lam);
    CHECK(heur_val <= exact_val + 0.1 * std::abs(exact_val) + 1e-9);
  }
}

TEST_CASE("fit_outcome_model") {
  Rng rng(42);
  const std::size_t n = 200;
  Matrix X = random_design(rng, n, 2);
  std::vector<double> y(n);
  std::vector<int> d(n, 1);
  for (std::size_t i = 0; i < n; ++i) y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;

  // All funded: plain fit, predictions near the base rate structure.
  const FitResult all_funded = fit_outcome_model(X, y, d, Learner::logistic, 1e-6);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = all_funded.scorer.predict(X.row(i));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }

  // No funded rows.
  std::vector<int> none(n, 0);
  CHECK_THROWS_AS(fit_outcome_model(X, y, none, Learner::logistic, 1e-6), Error);

  // Constant mu = 0.5 recovered by an intercept-only-ish fit.
  std::vector<double> y2(n);
  for (std::size_t i = 0; i < n; ++i) y2[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  Matrix X2(n, 1);
  for (std::size_t i = 0; i < n; ++i) X2.at(i, 0) = 1.0;
  const FitResult constant = fit_outcome_model(X2, y2, d, Learner::logistic, 1e-6);
  CHECK(constant.scorer.predict(X2.row(0)) == doctest::Approx(0.5).epsilon(0.15));

  // Degenerate labels rejected for the logistic learner.
  std::vector<double> zeros(n, 0.0);
  CHECK_THROWS_AS(fit_outcome_model(X, zeros, d, Learner::logistic, 1e-6), Error);
  CHECK_NOTHROW(fit_outcome_model(X, zeros, d, Learner::wls, 1e-6));
}
