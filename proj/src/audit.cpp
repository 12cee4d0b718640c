#include "goodset/audit.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "goodset/error.hpp"
#include "goodset/metrics.hpp"
#include "goodset/oracle.hpp"

namespace goodset {

using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_outdir(const std::string& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) fail(Errc::io, "cannot create output directory '" + outdir + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(Errc::io, "write failed for '" + path + "'");
}

void write_report_json(const std::string& outdir, const ordered_json& report) {
  write_text(outdir + "/report.json", report.dump(2) + "\n");
}

// Wall clock goes to stdout only: report files must be byte-identical across
// reruns of the same config and seed.
struct RuntimeReporter {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  ~RuntimeReporter() {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("runtime_seconds %.3f\n", secs);
    std::fflush(stdout);
  }
};

// ---------------------------------------------------------------------------
// Experiment assembly shared by the audit subcommands.

struct PreparedExperiment {
  Dataset train;
  Dataset test;
  bool selective = false;
  bool use_pipeline = false;
  Pipeline pipeline = Pipeline::kgb;

  FeatureMap fmap;
  // Effective training set (funded subset under kgb, all rows otherwise).
  Matrix Xtrain;
  std::vector<double> train_labels;
  std::vector<int> train_a;
  std::vector<double> train_mu;  // empty unless selective rie/ie

  Matrix Xtest;
  std::vector<int> test_a;
  std::vector<double> test_mu;  // mu_hat applied to test rows (selective only)

  DisparitySpec spec;

  bool bench_is_scorer = false;
  Scorer bench_scorer;
  std::vector<double> bench_train_preds;
  std::vector<double> bench_test_preds;
  double bench_train_loss = 0.0;

  PreparedExperiment(Dataset tr, Dataset te) : train(std::move(tr)), test(std::move(te)) {}
};

std::vector<double> scaled_benchmark(const Dataset& ds, double scale) {
  if (!ds.has_benchmark())
    fail(Errc::config, "benchmark.source=external_scores_column but schema names no benchmark column");
  std::vector<double> out = ds.benchmark_scores();
  for (double& v : out) {
    v *= scale;
    if (!(v >= 0.0 && v <= 1.0))
      fail(Errc::domain, "benchmark score outside [0,1] after scaling; adjust benchmark.scale");
  }
  return out;
}

PreparedExperiment prepare_experiment(const Config& cfg) {
  cfg.oracle_learner_name();  // reject unknown learners up front
  const Dataset ds = load_csv(cfg.data_path(), cfg.schema());
  auto [train, test] = split(ds, cfg.split_fraction(), cfg.split_seed());
  PreparedExperiment exp(std::move(train), std::move(test));
  exp.selective = ds.mode() == LabelMode::selective;
  exp.use_pipeline = exp.selective;
  if (exp.use_pipeline) exp.pipeline = cfg.pipeline();

  const LossSpec loss = cfg.loss();
  exp.test_a = exp.test.attribute();

  if (!exp.selective) {
    exp.fmap = FeatureMap::fit(exp.train, cfg.featurizer());
    exp.Xtrain = exp.fmap.apply(exp.train);
    exp.Xtest = exp.fmap.apply(exp.test);
    exp.train_a = exp.train.attribute();
    exp.train_labels.resize(exp.train.n());
    for (std::size_t i = 0; i < exp.train.n(); ++i) exp.train_labels[i] = exp.train.outcome(i);
    exp.spec = cfg.disparity(/*selective=*/false);
  } else if (exp.pipeline == Pipeline::kgb) {
    // kgb treats the funded subsample as the whole population: the featurizer,
    // the benchmark, and the solver all see funded rows only.
    const Dataset funded = kgb(exp.train);
    exp.fmap = FeatureMap::fit(funded, cfg.featurizer());
    exp.Xtrain = exp.fmap.apply(funded);
    exp.Xtest = exp.fmap.apply(exp.test);
    exp.train_a = funded.attribute();
    exp.train_labels.resize(funded.n());
    for (std::size_t i = 0; i < funded.n(); ++i) exp.train_labels[i] = funded.outcome(i);
    exp.spec = cfg.disparity(/*selective=*/false);
  } else {
    exp.fmap = FeatureMap::fit(exp.train, cfg.featurizer());
    const Matrix Xtrain_all = exp.fmap.apply(exp.train);
    exp.Xtest = exp.fmap.apply(exp.test);
    std::vector<double> y_raw(exp.train.n(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < exp.train.n(); ++i)
      if (exp.train.labelled(i)) y_raw[i] = exp.train.outcome(i);
    const FitResult mu_fit = fit_outcome_model(Xtrain_all, y_raw, exp.train.decision(),
                                               cfg.outcome_learner(), cfg.outcome_ridge());
    const std::vector<double> mu_train = mu_fit.scorer.predict_all(Xtrain_all);
    exp.test_mu = mu_fit.scorer.predict_all(exp.Xtest);

    const PseudoLabelledDataset pl =
        exp.pipeline == Pipeline::rie ? rie(exp.train, mu_train) : ie(exp.train, mu_train);
    exp.Xtrain = Xtrain_all;
    exp.train_a = exp.train.attribute();
    exp.train_labels = pl.pseudo_outcomes;
    exp.train_mu = pl.mu_hat;
    exp.spec = select_nuisance(cfg.disparity(/*selective=*/false), exp.pipeline);
  }

  // Benchmark model and its training loss (the budget anchor).
  if (cfg.benchmark_source() == Config::BenchmarkSource::external_scores_column) {
    const double scale = cfg.benchmark_scale();
    if (exp.use_pipeline && exp.pipeline == Pipeline::kgb) {
      exp.bench_train_preds = scaled_benchmark(kgb(exp.train), scale);
    } else {
      exp.bench_train_preds = scaled_benchmark(exp.train, scale);
    }
    exp.bench_test_preds = scaled_benchmark(exp.test, scale);
  } else {
    const std::vector<double> ones(exp.Xtrain.rows, 1.0);
    if (cfg.benchmark_learner() == Learner::logistic)
      exp.bench_scorer = fit_logistic(exp.Xtrain, exp.train_labels, ones, cfg.oracle_ridge()).scorer;
    else
      exp.bench_scorer = fit_wls(exp.Xtrain, exp.train_labels, ones, cfg.oracle_ridge());
    exp.bench_is_scorer = true;
    exp.bench_train_preds = exp.bench_scorer.predict_all(exp.Xtrain);
    exp.bench_test_preds = exp.bench_scorer.predict_all(exp.Xtest);
  }
  exp.bench_train_loss = avg_loss(loss, exp.train_labels, exp.bench_train_preds);
  return exp;
}

// ---------------------------------------------------------------------------
// Test-set metric table.

struct MetricRow {
  std::string model;
  std::string population;
  std::string label_source;
  std::size_t n = 0;
  double loss = std::numeric_limits<double>::quiet_NaN();
  double mse_v = std::numeric_limits<double>::quiet_NaN();
  double auc = std::numeric_limits<double>::quiet_NaN();
  double disparity = std::numeric_limits<double>::quiet_NaN();
  double disp_se = std::numeric_limits<double>::quiet_NaN();
  std::size_t n0 = 0, n1 = 0;
};

// Labels available on the test split for a given population, or empty.
struct TestLabels {
  std::vector<double> y;
  std::string source;
};

TestLabels test_labels_for(const PreparedExperiment& exp, const std::vector<std::size_t>& rows,
                           bool funded_only) {
  TestLabels out;
  if (!exp.selective) {
    out.source = "observed";
    for (std::size_t i : rows) out.y.push_back(exp.test.outcome(i));
    return out;
  }
  if (funded_only) {
    out.source = "observed";
    for (std::size_t i : rows) out.y.push_back(exp.test.outcome(i));
    return out;
  }
  if (exp.use_pipeline && exp.pipeline != Pipeline::kgb) {
    out.source = exp.pipeline == Pipeline::rie ? "pseudo_rie" : "pseudo_ie";
    for (std::size_t i : rows) {
      if (exp.pipeline == Pipeline::rie && exp.test.labelled(i))
        out.y.push_back(exp.test.outcome(i));
      else
        out.y.push_back(exp.test_mu[i]);
    }
    return out;
  }
  out.source = "unavailable";
  return out;
}

// Test-split predictions of a (possibly randomized) model: per-support-scorer
// prediction vectors plus the mixture mean. Loss and MSE follow the randomized
// semantics (mixture of per-scorer values); ranking and disparity use the mean
// score, which coincides for mixture-linear functionals.
struct ModelPreds {
  std::vector<std::vector<double>> per_support;
  std::vector<double> weights;
  std::vector<double> mean;

  static ModelPreds point(std::vector<double> preds) {
    ModelPreds p;
    p.mean = preds;
    p.per_support = {std::move(preds)};
    p.weights = {1.0};
    return p;
  }
  static ModelPreds mixture(const StochasticModel& q, const Matrix& X) {
    ModelPreds p;
    p.weights = q.weights;
    p.mean.assign(X.rows, 0.0);
    for (std::size_t k = 0; k < q.support.size(); ++k) {
      p.per_support.push_back(q.support[k].predict_all(X));
      for (std::size_t i = 0; i < X.rows; ++i) p.mean[i] += q.weights[k] * p.per_support[k][i];
    }
    return p;
  }
};

MetricRow evaluate_row(const PreparedExperiment& exp, const std::string& model_name,
                       const ModelPreds& model, const std::string& population,
                       const LossSpec& loss) {
  MetricRow row;
  row.model = model_name;
  row.population = population;

  const bool funded_only = population == "funded";
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < exp.test.n(); ++i)
    if (!funded_only || exp.test.decision()[i] == 1) rows.push_back(i);
  if (rows.empty()) fail(Errc::empty_selection, "evaluate: empty population '" + population + "'");
  row.n = rows.size();

  std::vector<double> preds;
  std::vector<int> a;
  std::vector<double> mu;
  for (std::size_t i : rows) {
    preds.push_back(model.mean[i]);
    a.push_back(exp.test_a[i]);
    if (!exp.test_mu.empty()) mu.push_back(exp.test_mu[i]);
  }

  const TestLabels labels = test_labels_for(exp, rows, funded_only);
  row.label_source = labels.source;
  if (!labels.y.empty()) {
    double loss_sum = 0.0, mse_sum = 0.0;
    for (std::size_t k = 0; k < model.per_support.size(); ++k) {
      std::vector<double> pk;
      pk.reserve(rows.size());
      for (std::size_t i : rows) pk.push_back(model.per_support[k][i]);
      loss_sum += model.weights[k] * avg_loss(loss, labels.y, pk);
      mse_sum += model.weights[k] * mse(pk, labels.y);
    }
    row.loss = loss_sum;
    row.mse_v = mse_sum;
    row.auc = rank_auc(preds, labels.y);
  }

  // Disparity estimate for the configured measure on this population. On the
  // full population of selective data, Y*-dependent events go through eq5.
  DisparitySpec spec = exp.spec;
  DisparityInputs in;
  in.preds = preds;
  in.attribute = a;
  if (funded_only && exp.selective) {
    // Funded rows carry observed outcomes; use the direct (eq1) estimator.
    spec = make_spec(exp.spec.kind, /*selective=*/false);
    in.outcomes = labels.y;
  } else if (!labels.y.empty() && spec.mode == DisparityMode::eq1) {
    in.outcomes = labels.y;
  }
  in.mu_hat = mu;
  try {
    if (spec.mode == DisparityMode::bgl) {
      if (!labels.y.empty()) {
        double d = 0.0;
        for (std::size_t k = 0; k < model.per_support.size(); ++k) {
          std::vector<double> pk;
          pk.reserve(rows.size());
          for (std::size_t i : rows) pk.push_back(model.per_support[k][i]);
          d += model.weights[k] * bgl_disparity(pk, a, labels.y, loss);
        }
        row.disparity = d;
      }
    } else {
      const DisparityEstimate est = estimate_disparity(in, spec);
      row.disparity = est.value;
      row.disp_se = est.se;
      row.n0 = est.n0;
      row.n1 = est.n1;
    }
  } catch (const Error&) {
    // Population cannot support this estimate (e.g. empty event); leave NaN.
  }
  return row;
}

std::string metrics_csv(const std::vector<MetricRow>& rows, const std::string& config_hash) {
  std::string out =
      "config_hash,model,population,label_source,n,loss,mse,auc,disparity,disparity_se,n0,n1\n";
  for (const auto& r : rows) {
    out += config_hash + "," + r.model + "," + r.population + "," + r.label_source + "," +
           std::to_string(r.n) + "," + fmt(r.loss) + "," + fmt(r.mse_v) + "," + fmt(r.auc) + "," +
           fmt(r.disparity) + "," + fmt(r.disp_se) + "," + std::to_string(r.n0) + "," +
           std::to_string(r.n1) + "\n";
  }
  return out;
}

ordered_json row_json(const MetricRow& r) {
  ordered_json j;
  j["model"] = r.model;
  j["population"] = r.population;
  j["label_source"] = r.label_source;
  j["n"] = r.n;
  j["loss"] = r.loss;
  j["mse"] = r.mse_v;
  j["auc"] = r.auc;
  j["disparity"] = r.disparity;
  j["disparity_se"] = r.disp_se;
  j["n0"] = r.n0;
  j["n1"] = r.n1;
  return j;
}

std::string trace_csv(const SaddleResult& res) {
  std::string out = "t,nu_t,lambda_plus,lambda_minus,lambda_cost,xi,cost_gap,disparity\n";
  for (const auto& p : res.trace) {
    out += std::to_string(p.t) + "," + fmt(p.nu_t) + "," + fmt(p.lambda[0]) + "," +
           fmt(p.lambda[1]) + "," + fmt(p.lambda[2]) + "," + fmt(p.xi) + "," + fmt(p.cost_gap) +
           "," + fmt(p.disparity) + "\n";
  }
  return out;
}

const char* status_name(SaddleStatus s) {
  switch (s) {
    case SaddleStatus::feasible: return "feasible";
    case SaddleStatus::infeasible_null: return "infeasible_null";
    case SaddleStatus::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

ordered_json certificate_json(const Certificate& cert) {
  ordered_json lines = ordered_json::array();
  for (const auto& l : cert.lines) {
    ordered_json j;
    j["name"] = l.name;
    j["lhs"] = l.lhs;
    j["rhs"] = l.rhs;
    j["pass"] = l.pass;
    lines.push_back(j);
  }
  ordered_json out;
  out["all_pass"] = cert.all_pass;
  out["lines"] = lines;
  return out;
}

ordered_json model_json(const StochasticModel& q, const FeatureMap& fmap,
                        const std::string& config_hash) {
  ordered_json j;
  j["config_hash"] = config_hash;
  ordered_json fm;
  fm["columns"] = fmap.spec.columns;
  fm["degree"] = fmap.spec.degree;
  fm["standardize"] = fmap.spec.standardize;
  fm["intercept"] = fmap.spec.intercept;
  fm["means"] = fmap.means;
  fm["scales"] = fmap.scales;
  j["feature_map"] = fm;
  ordered_json support = ordered_json::array();
  for (std::size_t k = 0; k < q.support.size(); ++k) {
    ordered_json s;
    s["weight"] = q.weights[k];
    s["link"] = q.support[k].link == Link::sigmoid ? "sigmoid" : "identity_clipped";
    s["coefs"] = q.support[k].weights;
    support.push_back(s);
  }
  j["support"] = support;
  return j;
}

// Solver + shrink + certificate for one problem; returns the final model.
struct SolvedRun {
  SaddleResult result;
  ShrinkResult shrink;
  Certificate cert;
  bool has_model = false;
  StochasticModel model;
  ordered_json to_json() const {
    ordered_json j;
    j["status"] = status_name(result.status);
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["nu_final"] = result.nu_final;
    j["nu_target"] = result.nu_target;
    j["B_lambda"] = result.B_lambda;
    j["eps_hat"] = result.eps_hat;
    j["train_disparity"] = result.disp_q;
    j["train_cost"] = result.cost_q;
    if (result.algo == SolverAlgo::abs_disparity_min) {
      j["xi_hat"] = result.xi_hat;
      j["lambda_hat"] = result.lambda_hat3;
    } else {
      j["lambda_hat"] = result.lambda_hat;
    }
    if (has_model) {
      j["shrink"] = {{"nu_prime", shrink.nu_prime},
                     {"objective", shrink.objective},
                     {"cost", shrink.cost},
                     {"support_size", model.support.size()}};
      j["certificate"] = certificate_json(cert);
    }
    return j;
  }
};

SolvedRun solve_and_shrink(const ReductionContext& ctx, const ExpGradConfig& eg,
                           const BestResponseFn& best_h, SolverAlgo algo) {
  SolvedRun run;
  switch (algo) {
    case SolverAlgo::disparity_min: run.result = solve_disparity_min(ctx, eg, best_h); break;
    case SolverAlgo::disparity_max: run.result = solve_disparity_max(ctx, eg, best_h); break;
    case SolverAlgo::abs_disparity_min:
      run.result = solve_abs_disparity_min(ctx, eg, best_h);
      break;
    case SolverAlgo::bgl_min: fail(Errc::internal, "bgl handled separately");
  }
  if (run.result.status == SaddleStatus::infeasible_null) return run;

  // The LP shrink minimizes the solved objective; for the max problem the
  // stored support disparities are original-frame, so negate for the LP.
  std::vector<double> disp = run.result.support_disp;
  if (algo == SolverAlgo::disparity_max)
    for (double& d : disp) d = -d;
  if (algo == SolverAlgo::abs_disparity_min) {
    // Minimize |disparity|: the LP objective is linear, so shrink toward the
    // sign the averaged solution settled on.
    const double sign = run.result.disp_q >= 0.0 ? 1.0 : -1.0;
    for (double& d : disp) d *= sign;
  }
  run.shrink = shrink_support(run.result.support, disp, run.result.support_cost,
                              run.result.eps_hat, run.result.nu_target);
  run.model = run.shrink.model;
  run.has_model = true;
  run.cert = certify(run.result, ctx, eg, best_h);
  return run;
}

ReductionContext make_ctx(const PreparedExperiment& exp, const Grid& grid, const LossSpec& loss) {
  return make_reduction_context(exp.Xtrain, exp.train_labels, exp.train_a, exp.train_mu, exp.spec,
                                grid, loss);
}

BestResponseFn make_best_h(const PreparedExperiment& exp, const ReductionContext& ctx,
                           double ridge) {
  const Scorer* bench = exp.bench_is_scorer ? &exp.bench_scorer : nullptr;
  return [&ctx, ridge, bench](const DualWeights& lam) {
    return best_response_h(ctx, lam, ridge, bench);
  };
}

ordered_json base_report(const Config& cfg, const char* command) {
  ordered_json rep;
  rep["tool"] = "goodset";
  rep["command"] = command;
  rep["config_hash"] = cfg.hash();
  rep["config"] = cfg.json();
  return rep;
}

}  // namespace

void save_model(const StochasticModel& q, const FeatureMap& fmap, const std::string& config_hash,
                const std::string& path) {
  write_text(path, model_json(q, fmap, config_hash).dump(2) + "\n");
}

std::pair<StochasticModel, FeatureMap> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open model file '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::config, "model parse error: " + std::string(e.what()));
  }
  FeatureMap fmap;
  const auto& fm = j.at("feature_map");
  fmap.spec.columns = fm.at("columns").get<std::vector<std::string>>();
  fmap.spec.degree = fm.at("degree").get<int>();
  fmap.spec.standardize = fm.at("standardize").get<bool>();
  fmap.spec.intercept = fm.at("intercept").get<bool>();
  fmap.means = fm.at("means").get<std::vector<double>>();
  fmap.scales = fm.at("scales").get<std::vector<double>>();
  if (fmap.spec.intercept) fmap.names.push_back("(intercept)");
  for (const auto& c : fmap.spec.columns) fmap.names.push_back(c);
  if (fmap.spec.degree == 2)
    for (std::size_t i = 0; i < fmap.spec.columns.size(); ++i)
      for (std::size_t k = i; k < fmap.spec.columns.size(); ++k)
        fmap.names.push_back(fmap.spec.columns[i] + "*" + fmap.spec.columns[k]);

  StochasticModel q;
  for (const auto& s : j.at("support")) {
    Scorer f;
    f.link = s.at("link").get<std::string>() == "sigmoid" ? Link::sigmoid : Link::identity_clipped;
    f.weights = s.at("coefs").get<std::vector<double>>();
    q.support.push_back(std::move(f));
    q.weights.push_back(s.at("weight").get<double>());
  }
  q.validate();
  return {std::move(q), std::move(fmap)};
}

AuditOutcome run_range_audit(const Config& cfg, const std::string& outdir) {
  RuntimeReporter runtime;
  ensure_outdir(outdir);
  const LossSpec loss = cfg.loss();
  const Grid grid = cfg.grid();
  PreparedExperiment exp = prepare_experiment(cfg);
  const ReductionContext ctx = make_ctx(exp, grid, loss);
  const BestResponseFn best_h = make_best_h(exp, ctx, cfg.oracle_ridge());

  const EpsCalibration cal =
      calibrate_eps(exp.bench_train_loss, cfg.delta(), loss, grid, exp.train_labels);
  const ExpGradConfig eg = cfg.expgrad(cal.eps_hat);

  SolvedRun min_run = solve_and_shrink(ctx, eg, best_h, SolverAlgo::disparity_min);
  SolvedRun max_run = solve_and_shrink(ctx, eg, best_h, SolverAlgo::disparity_max);

  ordered_json rep = base_report(cfg, "audit range");
  rep["benchmark"] = {{"source", exp.bench_is_scorer ? "fit_loss_minimizer" : "external_scores_column"},
                      {"train_loss", exp.bench_train_loss}};
  rep["calibration"] = {{"delta", cfg.delta()},
                        {"eps", cal.eps},
                        {"c0_hat", cal.c0},
                        {"eps_hat", cal.eps_hat}};
  rep["min"] = min_run.to_json();
  rep["max"] = max_run.to_json();
  rep["empty_good_set"] = !min_run.has_model && !max_run.has_model;

  std::vector<MetricRow> rows;
  std::vector<std::string> populations = {"all"};
  if (exp.selective) populations.push_back("funded");
  for (const auto& pop : populations)
    rows.push_back(evaluate_row(exp, "benchmark", ModelPreds::point(exp.bench_test_preds), pop, loss));
  if (min_run.has_model) {
    const ModelPreds preds = ModelPreds::mixture(min_run.model, exp.Xtest);
    for (const auto& pop : populations)
      rows.push_back(evaluate_row(exp, "min_disparity", preds, pop, loss));
    save_model(min_run.model, exp.fmap, cfg.hash(), outdir + "/model_min.json");
  }
  if (max_run.has_model) {
    const ModelPreds preds = ModelPreds::mixture(max_run.model, exp.Xtest);
    for (const auto& pop : populations)
      rows.push_back(evaluate_row(exp, "max_disparity", preds, pop, loss));
    save_model(max_run.model, exp.fmap, cfg.hash(), outdir + "/model_max.json");
  }
  ordered_json metrics = ordered_json::array();
  for (const auto& r : rows) metrics.push_back(row_json(r));
  rep["metrics"] = metrics;

  // Optional sweep over loss tolerances.
  std::string sweep =
      "delta,eps,eps_hat,min_disp_train,max_disp_train,min_status,max_status\n";
  for (double d : cfg.sweep_deltas()) {
    const EpsCalibration c2 = calibrate_eps(exp.bench_train_loss, d, loss, grid, exp.train_labels);
    const ExpGradConfig eg2 = cfg.expgrad(c2.eps_hat);
    const SaddleResult mn = solve_disparity_min(ctx, eg2, best_h);
    const SaddleResult mx = solve_disparity_max(ctx, eg2, best_h);
    sweep += fmt(d) + "," + fmt(c2.eps) + "," + fmt(c2.eps_hat) + "," + fmt(mn.disp_q) + "," +
             fmt(mx.disp_q) + "," + status_name(mn.status) + "," + status_name(mx.status) + "\n";
  }
  write_text(outdir + "/sweep.csv", sweep);
  write_text(outdir + "/metrics.csv", metrics_csv(rows, cfg.hash()));
  write_text(outdir + "/trace_min.csv", trace_csv(min_run.result));
  write_text(outdir + "/trace_max.csv", trace_csv(max_run.result));
  write_report_json(outdir, rep);

  AuditOutcome out;
  out.report = rep;
  out.exit_code = rep["empty_good_set"].get<bool>() ? 2 : 0;
  return out;
}

AuditOutcome run_min_abs(const Config& cfg, const std::string& outdir) {
  RuntimeReporter runtime;
  ensure_outdir(outdir);
  const LossSpec loss = cfg.loss();
  const Grid grid = cfg.grid();
  PreparedExperiment exp = prepare_experiment(cfg);
  const ReductionContext ctx = make_ctx(exp, grid, loss);
  const BestResponseFn best_h = make_best_h(exp, ctx, cfg.oracle_ridge());

  const EpsCalibration cal =
      calibrate_eps(exp.bench_train_loss, cfg.delta(), loss, grid, exp.train_labels);
  const ExpGradConfig eg = cfg.expgrad(cal.eps_hat);

  SolvedRun run = solve_and_shrink(ctx, eg, best_h, SolverAlgo::abs_disparity_min);

  ordered_json rep = base_report(cfg, "audit min-abs");
  rep["benchmark"] = {{"source", exp.bench_is_scorer ? "fit_loss_minimizer" : "external_scores_column"},
                      {"train_loss", exp.bench_train_loss}};
  rep["calibration"] = {{"delta", cfg.delta()},
                        {"eps", cal.eps},
                        {"c0_hat", cal.c0},
                        {"eps_hat", cal.eps_hat}};
  rep["min_abs"] = run.to_json();
  rep["empty_good_set"] = !run.has_model;

  std::vector<MetricRow> rows;
  std::vector<std::string> populations = {"all"};
  if (exp.selective) populations.push_back("funded");
  for (const auto& pop : populations)
    rows.push_back(evaluate_row(exp, "benchmark", ModelPreds::point(exp.bench_test_preds), pop, loss));
  if (run.has_model) {
    const ModelPreds preds = ModelPreds::mixture(run.model, exp.Xtest);
    for (const auto& pop : populations)
      rows.push_back(evaluate_row(exp, "min_abs_disparity", preds, pop, loss));
    save_model(run.model, exp.fmap, cfg.hash(), outdir + "/model.json");
  }
  ordered_json metrics = ordered_json::array();
  for (const auto& r : rows) metrics.push_back(row_json(r));
  rep["metrics"] = metrics;

  write_text(outdir + "/metrics.csv", metrics_csv(rows, cfg.hash()));
  write_text(outdir + "/trace.csv", trace_csv(run.result));
  write_report_json(outdir, rep);

  AuditOutcome out;
  out.report = rep;
  out.exit_code = run.has_model ? 0 : 2;
  return out;
}

AuditOutcome run_bgl(const Config& cfg, const std::string& outdir) {
  RuntimeReporter runtime;
  ensure_outdir(outdir);
  const LossSpec loss = cfg.loss();
  PreparedExperiment exp = prepare_experiment(cfg);
  const BglContext ctx = make_bgl_context(exp.Xtrain, exp.train_labels, exp.train_a, loss);

  // No discretization: the budget stays in loss units.
  const double eps = (1.0 + cfg.delta()) * exp.bench_train_loss;
  const ExpGradConfig eg = cfg.expgrad(eps);
  SaddleResult result = solve_bgl(ctx, eg);

  ordered_json rep = base_report(cfg, "audit bgl");
  rep["benchmark"] = {{"source", exp.bench_is_scorer ? "fit_loss_minimizer" : "external_scores_column"},
                      {"train_loss", exp.bench_train_loss}};
  rep["calibration"] = {{"delta", cfg.delta()}, {"eps", eps}, {"eps_hat", eps}};

  SolvedRun run;
  run.result = std::move(result);
  if (run.result.status != SaddleStatus::infeasible_null) {
    run.shrink = shrink_support(run.result.support, run.result.support_disp,
                                run.result.support_cost, eps, run.result.nu_target);
    run.model = run.shrink.model;
    run.has_model = true;
  }
  ordered_json rj;
  rj["status"] = status_name(run.result.status);
  rj["iterations"] = run.result.iterations;
  rj["converged"] = run.result.converged;
  rj["nu_final"] = run.result.nu_final;
  rj["train_bgl_disparity"] = run.result.disp_q;
  rj["train_loss"] = run.result.cost_q;
  if (run.has_model)
    rj["shrink"] = {{"nu_prime", run.shrink.nu_prime},
                    {"objective", run.shrink.objective},
                    {"support_size", run.model.support.size()}};
  rep["bgl"] = rj;
  rep["empty_good_set"] = !run.has_model;

  std::vector<MetricRow> rows;
  rows.push_back(evaluate_row(exp, "benchmark", ModelPreds::point(exp.bench_test_preds), "all", loss));
  if (run.has_model) {
    MetricRow row = evaluate_row(exp, "bgl_min", ModelPreds::mixture(run.model, exp.Xtest), "all", loss);
    rows.push_back(row);
    save_model(run.model, exp.fmap, cfg.hash(), outdir + "/model.json");
  }
  ordered_json metrics = ordered_json::array();
  for (const auto& r : rows) metrics.push_back(row_json(r));
  rep["metrics"] = metrics;

  write_text(outdir + "/metrics.csv", metrics_csv(rows, cfg.hash()));
  write_text(outdir + "/trace.csv", trace_csv(run.result));
  write_report_json(outdir, rep);

  AuditOutcome out;
  out.report = rep;
  out.exit_code = run.has_model ? 0 : 2;
  return out;
}

AuditOutcome run_selective_prep(const Config& cfg, const std::string& outdir) {
  RuntimeReporter runtime;
  ensure_outdir(outdir);
  const Dataset ds = load_csv(cfg.data_path(), cfg.schema());
  if (ds.mode() != LabelMode::selective)
    fail(Errc::config, "selective prep: dataset is not in selective mode");
  const Pipeline pipeline = cfg.pipeline();

  ordered_json rep = base_report(cfg, "selective prep");
  rep["pipeline"] = to_string(pipeline);

  // Positivity is untestable from data; report the minimum fitted propensity
  // as a diagnostic (tiny values flag regions the outcome model extrapolates into).
  {
    FeatureMap pmap = FeatureMap::fit(ds, cfg.featurizer());
    const Matrix X = pmap.apply(ds);
    std::vector<double> d01(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) d01[i] = static_cast<double>(ds.decision()[i]);
    const std::vector<double> ones(ds.n(), 1.0);
    const FitResult propensity = fit_logistic(X, d01, ones, cfg.outcome_ridge());
    double min_pi = 1.0;
    for (std::size_t i = 0; i < ds.n(); ++i)
      min_pi = std::min(min_pi, propensity.scorer.predict(X.row(i)));
    rep["min_propensity_diagnostic"] = min_pi;
  }

  if (pipeline == Pipeline::kgb) {
    const Dataset funded = kgb(ds);
    write_csv(funded, outdir + "/prepared.csv");
    rep["rows_in"] = ds.n();
    rep["rows_out"] = funded.n();
  } else {
    FeatureMap fmap = FeatureMap::fit(ds, cfg.featurizer());
    const Matrix X = fmap.apply(ds);
    std::vector<double> y_raw(ds.n(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < ds.n(); ++i)
      if (ds.labelled(i)) y_raw[i] = ds.outcome(i);
    const FitResult mu_fit =
        fit_outcome_model(X, y_raw, ds.decision(), cfg.outcome_learner(), cfg.outcome_ridge());
    const std::vector<double> mu = mu_fit.scorer.predict_all(X);
    const PseudoLabelledDataset pl = pipeline == Pipeline::rie ? rie(ds, mu) : ie(ds, mu);

    std::string csv;
    for (const auto& name : ds.feature_names()) csv += name + ",";
    csv += "a,d,y_pseudo,mu_hat,provenance\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t j = 0; j < ds.num_features(); ++j) csv += fmt(ds.features().at(i, j)) + ",";
      csv += std::to_string(ds.attribute()[i]) + "," + std::to_string(ds.decision()[i]) + "," +
             fmt(pl.pseudo_outcomes[i]) + "," + fmt(pl.mu_hat[i]) + "," +
             to_string(pl.provenance[i]) + "\n";
    }
    write_text(outdir + "/prepared.csv", csv);
    rep["rows_in"] = ds.n();
    rep["rows_out"] = ds.n();
    std::size_t observed = 0, extrapolated = 0, interpolated = 0;
    for (const auto p : pl.provenance) {
      if (p == Provenance::observed) ++observed;
      if (p == Provenance::extrapolated) ++extrapolated;
      if (p == Provenance::interpolated) ++interpolated;
    }
    rep["provenance_counts"] = {{"observed", observed},
                                {"extrapolated", extrapolated},
                                {"interpolated", interpolated}};
  }
  write_report_json(outdir, rep);
  return AuditOutcome{0, rep};
}

AuditOutcome run_evaluate(const Config& cfg, const std::string& outdir) {
  RuntimeReporter runtime;
  ensure_outdir(outdir);
  const LossSpec loss = cfg.loss();
  PreparedExperiment exp = prepare_experiment(cfg);

  std::string model_name = "benchmark";
  ModelPreds preds = ModelPreds::point(exp.bench_test_preds);
  const std::string model_file = cfg.evaluate_model_file();
  if (!model_file.empty()) {
    auto [q, fmap] = load_model(model_file);
    fmap.bind(exp.test);
    const Matrix X = fmap.apply(exp.test);
    preds = ModelPreds::mixture(q, X);
    model_name = "model_file";
  }

  // Sealed ground truth (synthetic experiments) can stand in for labels on the
  // full population; column `y_star` aligned with the raw data file rows is not
  // available post-split, so the truth file carries values for every row and is
  // re-split with the same seed.
  const std::string truth_file = cfg.evaluate_truth_file();
  if (!truth_file.empty()) {
    ColumnSchema ts;
    ts.attribute = "a";
    ts.outcome = "y_star";
    ts.mode = LabelMode::full;
    const Dataset truth_ds = load_csv(truth_file, ts);
    if (truth_ds.n() != exp.train.n() + exp.test.n())
      fail(Errc::consistency, "evaluate: truth file row count does not match the dataset");
    auto [ttrain, ttest] = split(truth_ds, cfg.split_fraction(), cfg.split_seed());
    // Replace the test split with its fully-labelled sealed version.
    std::vector<double> y(ttest.n());
    for (std::size_t i = 0; i < ttest.n(); ++i) y[i] = ttest.outcome(i);
    Matrix f = exp.test.features();
    exp.test = Dataset(LabelMode::full, exp.test.feature_names(), std::move(f),
                       std::vector<int>(exp.test.attribute()),
                       std::vector<int>(exp.test.n(), 1), std::move(y),
                       std::vector<double>(exp.test.benchmark_scores()));
    exp.selective = false;
    exp.test_a = exp.test.attribute();
    exp.spec = cfg.disparity(/*selective=*/false);  // truth labels support eq1 directly
  }

  std::vector<MetricRow> rows;
  for (const auto& pop : cfg.evaluate_populations()) {
    MetricRow row = evaluate_row(exp, model_name, preds, pop, loss);
    if (row.label_source == "unavailable")
      fail(Errc::unidentified,
           "evaluate: population '" + pop +
               "' has no outcome labels here; supply evaluate.truth_file, use a rie/ie "
               "pipeline, or evaluate the funded population");
    rows.push_back(std::move(row));
  }

  ordered_json rep = base_report(cfg, "evaluate");
  ordered_json metrics = ordered_json::array();
  for (const auto& r : rows) metrics.push_back(row_json(r));
  rep["metrics"] = metrics;
  write_text(outdir + "/metrics.csv", metrics_csv(rows, cfg.hash()));
  write_report_json(outdir, rep);
  return AuditOutcome{0, rep};
}

AuditOutcome run_synth_gen(const Config& cfg, const std::string& outdir) {
  RuntimeReporter runtime;
  ensure_outdir(outdir);
  Dataset base = cfg.synth_has_base_sampler() ? sample_base(cfg.synth_base())
                                              : load_csv(cfg.data_path(), cfg.schema());
  auto [ds, truth] = generate_synthetic(cfg.synth_dgp(), base);
  write_csv(ds, outdir + "/synthetic.csv");

  std::string tcsv = "a,y_star,mu,pi\n";
  for (std::size_t i = 0; i < ds.n(); ++i)
    tcsv += std::to_string(ds.attribute()[i]) + "," + fmt(truth.y_star[i]) + "," +
            fmt(truth.mu[i]) + "," + fmt(truth.pi[i]) + "\n";
  write_text(outdir + "/synthetic_truth.csv", tcsv);

  ordered_json rep = base_report(cfg, "synth gen");
  rep["n"] = ds.n();
  std::size_t funded = 0;
  for (int d : ds.decision()) funded += d;
  rep["funded"] = funded;
  rep["funded_rate"] = static_cast<double>(funded) / static_cast<double>(ds.n());
  write_report_json(outdir, rep);
  return AuditOutcome{0, rep};
}

}  // namespace goodset
