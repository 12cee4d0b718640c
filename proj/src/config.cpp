#include "goodset/config.hpp"

#include <fstream>
#include <sstream>

#include "goodset/error.hpp"

namespace goodset {

using nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open config '" + path + "'");
  Config c;
  try {
    in >> c.root_;
  } catch (const std::exception& e) {
    fail(Errc::config, "config parse error in '" + path + "': " + e.what());
  }
  if (!c.root_.is_object()) fail(Errc::config, "config root must be an object");
  return c;
}

Config Config::from_json(ordered_json j) {
  Config c;
  c.root_ = std::move(j);
  if (!c.root_.is_object()) fail(Errc::config, "config root must be an object");
  return c;
}

void Config::set(const std::string& dotted_key, const std::string& value) {
  ordered_json* node = &root_;
  std::stringstream ss(dotted_key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) fail(Errc::config, "empty config key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object())
      (*node)[parts[i]] = ordered_json::object();
    node = &(*node)[parts[i]];
  }
  ordered_json parsed = ordered_json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // plain string
  (*node)[parts.back()] = parsed;
}

std::string Config::hash() const {
  const std::uint64_t h = fnv1a64(root_.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const ordered_json* Config::find(const std::string& dotted_key) const {
  const ordered_json* node = &root_;
  std::stringstream ss(dotted_key);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
  }
  return node;
}

bool Config::has(const std::string& dotted_key) const { return find(dotted_key) != nullptr; }

namespace {

template <typename T>
T get_or(const ordered_json* node, const char* key, T fallback) {
  if (node == nullptr || !node->contains(key)) return fallback;
  try {
    return (*node)[key].get<T>();
  } catch (const std::exception& e) {
    fail(Errc::config, std::string("config key '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const ordered_json* node, const std::string& where, const char* key) {
  if (node == nullptr || !node->contains(key))
    fail(Errc::config, "config: missing required key '" + where + "." + key + "'");
  try {
    return (*node)[key].get<T>();
  } catch (const std::exception& e) {
    fail(Errc::config, "config key '" + where + "." + key + "': " + e.what());
  }
}

}  // namespace

ColumnSchema Config::schema() const {
  const ordered_json* s = find("data.schema");
  if (s == nullptr) fail(Errc::config, "config: missing data.schema");
  ColumnSchema out;
  out.features = get_or<std::vector<std::string>>(s, "features", {});
  out.onehot = get_or<std::vector<std::string>>(s, "onehot", {});
  out.attribute = require<std::string>(s, "data.schema", "attribute");
  out.decision = get_or<std::string>(s, "decision", "");
  out.outcome = require<std::string>(s, "data.schema", "outcome");
  out.benchmark = get_or<std::string>(s, "benchmark", "");
  const std::string mode = get_or<std::string>(s, "mode", "full");
  if (mode == "full")
    out.mode = LabelMode::full;
  else if (mode == "selective")
    out.mode = LabelMode::selective;
  else
    fail(Errc::config, "data.schema.mode must be 'full' or 'selective'");
  return out;
}

std::string Config::data_path() const {
  const ordered_json* d = find("data");
  return require<std::string>(d, "data", "path");
}

FeaturizerSpec Config::featurizer() const {
  const ordered_json* f = find("featurizer");
  FeaturizerSpec spec;
  spec.columns = get_or<std::vector<std::string>>(f, "columns", {});
  spec.degree = get_or<int>(f, "degree", 1);
  spec.standardize = get_or<bool>(f, "standardize", false);
  spec.intercept = get_or<bool>(f, "intercept", true);
  return spec;
}

LossSpec Config::loss() const {
  const ordered_json* l = find("loss");
  const std::string kind = get_or<std::string>(l, "kind", "squared");
  if (kind == "squared") return LossSpec::squared();
  if (kind == "logistic") return LossSpec::logistic(get_or<double>(l, "C", 5.0));
  fail(Errc::config, "loss.kind must be 'squared' or 'logistic'");
}

Grid Config::grid() const { return Grid::make(get_or<int>(find("grid"), "N", 40)); }

DisparitySpec Config::disparity(bool selective) const {
  const ordered_json* d = find("disparity");
  const std::string kind = get_or<std::string>(d, "kind", "sp");
  if (kind != "custom") return make_spec(disparity_kind_from_string(kind), selective);

  DisparitySpec spec;
  spec.kind = DisparityKind::custom;
  spec.beta0 = get_or<double>(d, "beta0", 0.0);
  spec.beta1 = get_or<double>(d, "beta1", 0.0);
  auto read_event = [&](const char* key) {
    Event ev;
    if (d != nullptr && d->contains(key)) {
      const ordered_json& e = (*d)[key];
      if (e.contains("a")) ev.a = e["a"].get<int>();
      if (e.contains("ystar")) ev.ystar = e["ystar"].get<int>();
    }
    return ev;
  };
  spec.event0 = read_event("event0");
  spec.event1 = read_event("event1");
  const std::string g = get_or<std::string>(d, "nuisance", "one");
  if (g == "one")
    spec.nuisance = Nuisance::one;
  else if (g == "mu")
    spec.nuisance = Nuisance::mu;
  else if (g == "one_minus_mu")
    spec.nuisance = Nuisance::one_minus_mu;
  else
    fail(Errc::config, "disparity.nuisance must be one|mu|one_minus_mu");
  const std::string mode = get_or<std::string>(d, "mode", "eq1");
  if (mode == "eq1")
    spec.mode = DisparityMode::eq1;
  else if (mode == "eq5")
    spec.mode = DisparityMode::eq5;
  else if (mode == "bgl")
    spec.mode = DisparityMode::bgl;
  else
    fail(Errc::config, "disparity.mode must be eq1|eq5|bgl");
  if (spec.beta_abs_sum() == 0.0 && spec.mode != DisparityMode::bgl)
    fail(Errc::config, "custom disparity: |beta0|+|beta1| must be > 0 (or declare a null spec)");
  return spec;
}

Pipeline Config::pipeline() const {
  return pipeline_from_string(get_or<std::string>(find("selective"), "pipeline", "kgb"));
}

ExpGradConfig Config::expgrad(double eps_hat) const {
  const ordered_json* e = find("expgrad");
  ExpGradConfig cfg;
  cfg.B_lambda = get_or<double>(e, "B_lambda", 0.0);
  cfg.nu = get_or<double>(e, "nu", 0.0);
  if (e != nullptr && e->contains("eta") && (*e)["eta"].is_string()) {
    if ((*e)["eta"].get<std::string>() != "theory")
      fail(Errc::config, "expgrad.eta must be a number or \"theory\"");
    cfg.eta_theory = true;
  } else {
    cfg.eta = get_or<double>(e, "eta", 2.0);
  }
  cfg.max_iter = get_or<int>(e, "max_iter", 500);
  cfg.B_xi = get_or<double>(e, "B_xi", 1.0);
  cfg.eps_hat = eps_hat;
  return cfg;
}

double Config::delta() const { return get_or<double>(find("expgrad"), "delta", 0.01); }

double Config::split_fraction() const { return get_or<double>(find("split"), "fraction", 0.5); }

std::uint64_t Config::split_seed() const {
  return get_or<std::uint64_t>(find("split"), "seed", 0);
}

double Config::oracle_ridge() const { return get_or<double>(find("oracle"), "ridge", 1e-6); }

std::string Config::oracle_learner_name() const {
  const std::string name = get_or<std::string>(find("oracle"), "learner", "wls_heuristic");
  if (name != "wls_heuristic")
    fail(Errc::config, "oracle.learner: only 'wls_heuristic' is implemented, got '" + name + "'");
  return name;
}

Config::BenchmarkSource Config::benchmark_source() const {
  const std::string s =
      get_or<std::string>(find("benchmark"), "source", "fit_loss_minimizer");
  if (s == "external_scores_column") return BenchmarkSource::external_scores_column;
  if (s == "fit_loss_minimizer") return BenchmarkSource::fit_loss_minimizer;
  fail(Errc::config, "benchmark.source must be external_scores_column|fit_loss_minimizer");
}

double Config::benchmark_scale() const {
  return get_or<double>(find("benchmark"), "scale", 1.0);
}

Learner Config::benchmark_learner() const {
  const ordered_json* b = find("benchmark");
  if (b != nullptr && b->contains("learner"))
    return learner_from_string((*b)["learner"].get<std::string>());
  return loss().kind == LossSpec::Kind::logistic ? Learner::logistic : Learner::wls;
}

Learner Config::outcome_learner() const {
  return learner_from_string(get_or<std::string>(find("outcome_model"), "learner", "logistic"));
}

double Config::outcome_ridge() const {
  return get_or<double>(find("outcome_model"), "ridge", 1e-6);
}

std::vector<double> Config::sweep_deltas() const {
  return get_or<std::vector<double>>(find("audit"), "sweep_deltas", {});
}

bool Config::synth_has_base_sampler() const { return has("synth.base"); }

BaseSamplerConfig Config::synth_base() const {
  const ordered_json* b = find("synth.base");
  if (b == nullptr) fail(Errc::config, "config: missing synth.base");
  BaseSamplerConfig cfg;
  cfg.n = get_or<std::uint64_t>(b, "n", 1000);
  cfg.num_features = get_or<int>(b, "num_features", 2);
  cfg.a_prob = get_or<double>(b, "a_prob", 0.5);
  cfg.group_shift = get_or<double>(b, "group_shift", 0.0);
  cfg.seed = get_or<std::uint64_t>(b, "seed", 0);
  return cfg;
}

namespace {

LinearForm read_form(const ordered_json& j, const std::string& where) {
  LinearForm f;
  const std::string link = j.contains("link") ? j["link"].get<std::string>() : "logistic";
  if (link == "logistic")
    f.link = LinearForm::LinkKind::logistic;
  else if (link == "identity")
    f.link = LinearForm::LinkKind::identity;
  else
    fail(Errc::config, where + ".link must be logistic|identity");
  f.intercept = j.contains("intercept") ? j["intercept"].get<double>() : 0.0;
  if (j.contains("coefs")) {
    if (!j["coefs"].is_object()) fail(Errc::config, where + ".coefs must be an object");
    for (const auto& [k, v] : j["coefs"].items()) f.coefs.emplace_back(k, v.get<double>());
  }
  return f;
}

}  // namespace

SynthDgpConfig Config::synth_dgp() const {
  const ordered_json* s = find("synth");
  if (s == nullptr || !s->contains("pi") || !s->contains("mu"))
    fail(Errc::config, "config: synth.pi and synth.mu are required");
  SynthDgpConfig cfg;
  cfg.pi = read_form((*s)["pi"], "synth.pi");
  cfg.mu = read_form((*s)["mu"], "synth.mu");
  cfg.seed = get_or<std::uint64_t>(s, "seed", 0);
  return cfg;
}

std::string Config::evaluate_model_file() const {
  return get_or<std::string>(find("evaluate"), "model_file", "");
}

std::string Config::evaluate_truth_file() const {
  return get_or<std::string>(find("evaluate"), "truth_file", "");
}

std::vector<std::string> Config::evaluate_populations() const {
  return get_or<std::vector<std::string>>(find("evaluate"), "populations",
                                          std::vector<std::string>{"all"});
}

}  // namespace goodset
