#include "goodset/selective.hpp"

#include <cmath>
#include <set>

#include "goodset/error.hpp"

namespace goodset {

Pipeline pipeline_from_string(const std::string& s) {
  if (s == "kgb") return Pipeline::kgb;
  if (s == "rie") return Pipeline::rie;
  if (s == "ie") return Pipeline::ie;
  fail(Errc::config, "unknown selective pipeline '" + s + "'");
}

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::kgb: return "kgb";
    case Pipeline::rie: return "rie";
    case Pipeline::ie: return "ie";
  }
  return "kgb";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::observed: return "observed";
    case Provenance::extrapolated: return "extrapolated";
    case Provenance::interpolated: return "interpolated";
  }
  return "observed";
}

Dataset kgb(const Dataset& ds) {
  std::vector<std::size_t> funded;
  for (std::size_t i = 0; i < ds.n(); ++i)
    if (ds.decision()[i] == 1) funded.push_back(i);
  if (funded.empty()) fail(Errc::empty_selection, "kgb: no funded (d=1) rows");
  const Dataset sub = ds.subset(funded);

  Matrix X = sub.features();
  std::vector<double> y(sub.n());
  for (std::size_t i = 0; i < sub.n(); ++i) y[i] = sub.outcome(i);
  std::vector<double> bench = sub.benchmark_scores();
  return Dataset(LabelMode::full, sub.feature_names(), std::move(X),
                 std::vector<int>(sub.attribute()), std::vector<int>(sub.n(), 1), std::move(y),
                 std::move(bench));
}

namespace {

void check_mu(const Dataset& ds, std::span<const double> mu_hat) {
  if (mu_hat.size() != ds.n()) fail(Errc::size, "pseudo-labelling: mu_hat length mismatch");
  for (double m : mu_hat)
    if (!(m >= 0.0 && m <= 1.0))
      fail(Errc::domain, "pseudo-labelling: mu_hat value outside [0,1]");
}

}  // namespace

PseudoLabelledDataset rie(const Dataset& ds, std::span<const double> mu_hat) {
  check_mu(ds, mu_hat);
  PseudoLabelledDataset out{ds, {}, {mu_hat.begin(), mu_hat.end()}, {}};
  out.pseudo_outcomes.resize(ds.n());
  out.provenance.resize(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.labelled(i)) {
      out.pseudo_outcomes[i] = ds.outcome(i);
      out.provenance[i] = Provenance::observed;
    } else {
      out.pseudo_outcomes[i] = mu_hat[i];
      out.provenance[i] = Provenance::extrapolated;
    }
  }
  return out;
}

PseudoLabelledDataset ie(const Dataset& ds, std::span<const double> mu_hat) {
  check_mu(ds, mu_hat);
  PseudoLabelledDataset out{ds, {}, {mu_hat.begin(), mu_hat.end()}, {}};
  out.pseudo_outcomes.assign(mu_hat.begin(), mu_hat.end());
  out.provenance.resize(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i)
    out.provenance[i] =
        (ds.decision()[i] == 0) ? Provenance::extrapolated : Provenance::interpolated;
  return out;
}

DisparitySpec select_nuisance(const DisparitySpec& spec, Pipeline pipeline) {
  std::set<int> labels;
  if (spec.beta0 != 0.0 && spec.event0.ystar) labels.insert(*spec.event0.ystar);
  if (spec.beta1 != 0.0 && spec.event1.ystar) labels.insert(*spec.event1.ystar);
  if (labels.empty()) return spec;  // events depend on A only

  if (pipeline == Pipeline::kgb)
    fail(Errc::unidentified,
         "select_nuisance: Y*-dependent events are not identified on the full population "
         "under kgb (funded rows only)");
  if (labels.size() > 1)
    fail(Errc::unidentified,
         "select_nuisance: events mix Y*=0 and Y*=1; a single nuisance g cannot identify both");

  DisparitySpec out = spec;
  out.mode = DisparityMode::eq5;
  out.nuisance = (*labels.begin() == 1) ? Nuisance::mu : Nuisance::one_minus_mu;
  out.event0.ystar.reset();
  out.event1.ystar.reset();
  return out;
}

}  // namespace goodset
