#include "goodset/disparity.hpp"

#include <cmath>

#include "goodset/error.hpp"

namespace goodset {

namespace {

struct GroupTerm {
  double num = 0.0;   // sum g * f over event rows
  double den = 0.0;   // sum g over event rows
  std::size_t count = 0;
};

void check_inputs(const DisparityInputs& in, const DisparitySpec& spec) {
  const std::size_t n = in.preds.size();
  if (n == 0) fail(Errc::size, "disparity: empty inputs");
  if (in.attribute.size() != n) fail(Errc::size, "disparity: attribute length mismatch");
  const bool needs_y = (spec.beta0 != 0.0 && spec.event0.depends_on_outcome()) ||
                       (spec.beta1 != 0.0 && spec.event1.depends_on_outcome());
  if (spec.mode == DisparityMode::eq5 && needs_y)
    fail(Errc::unidentified,
         "eq5 events must not reference Y*; the nuisance g carries the outcome part");
  if (needs_y && in.outcomes.size() != n)
    fail(Errc::missing_label, "disparity: events reference Y* but outcomes are unavailable");
  if (spec.mode == DisparityMode::eq5 && in.mu_hat.size() != n &&
      spec.nuisance != Nuisance::one)
    fail(Errc::missing_label, "disparity: eq5 mode requires a mu_hat column");
}

GroupTerm group_term(const DisparityInputs& in, const DisparitySpec& spec, const Event& ev) {
  GroupTerm t;
  const std::size_t n = in.preds.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double y = ev.depends_on_outcome() ? in.outcomes[i] : 0.0;
    if (ev.depends_on_outcome() && std::isnan(y))
      fail(Errc::missing_label, "disparity: masked outcome inside a Y*-dependent event");
    if (!ev.matches(in.attribute[i], y)) continue;
    const double g = nuisance_value(spec, in, i);
    t.num += g * in.preds[i];
    t.den += g;
    t.count += 1;
  }
  return t;
}

double term_variance(const DisparityInputs& in, const DisparitySpec& spec, const Event& ev,
                     const GroupTerm& t) {
  if (t.count < 2 || t.den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double ratio = t.num / t.den;
  double ss = 0.0;
  for (std::size_t i = 0; i < in.preds.size(); ++i) {
    const double y = ev.depends_on_outcome() ? in.outcomes[i] : 0.0;
    if (!ev.matches(in.attribute[i], y)) continue;
    const double g = nuisance_value(spec, in, i);
    const double infl = g * (in.preds[i] - ratio);
    ss += infl * infl;
  }
  const double nc = static_cast<double>(t.count);
  return (nc / (nc - 1.0)) * ss / (t.den * t.den);
}

}  // namespace

double nuisance_value(const DisparitySpec& spec, const DisparityInputs& in, std::size_t i) {
  if (spec.mode != DisparityMode::eq5 || spec.nuisance == Nuisance::one) return 1.0;
  const double m = in.mu_hat[i];
  return spec.nuisance == Nuisance::mu ? m : 1.0 - m;
}

DisparitySpec make_spec(DisparityKind kind, bool selective) {
  DisparitySpec s;
  s.kind = kind;
  switch (kind) {
    case DisparityKind::SP:
      s.beta0 = -1.0;
      s.beta1 = 1.0;
      s.event0 = Event{0, std::nullopt};
      s.event1 = Event{1, std::nullopt};
      break;
    case DisparityKind::BFPC:
    case DisparityKind::BFNC: {
      const int label = (kind == DisparityKind::BFPC) ? 1 : 0;
      s.beta0 = -1.0;
      s.beta1 = 1.0;
      if (selective) {
        s.mode = DisparityMode::eq5;
        s.nuisance = (kind == DisparityKind::BFPC) ? Nuisance::mu : Nuisance::one_minus_mu;
        s.event0 = Event{0, std::nullopt};
        s.event1 = Event{1, std::nullopt};
      } else {
        s.event0 = Event{0, label};
        s.event1 = Event{1, label};
      }
      break;
    }
    case DisparityKind::AA:
      s.beta0 = 0.0;
      s.beta1 = 1.0;
      s.event1 = Event{1, std::nullopt};
      break;
    case DisparityKind::QAA:
      s.beta0 = 0.0;
      s.beta1 = 1.0;
      if (selective) {
        s.mode = DisparityMode::eq5;
        s.nuisance = Nuisance::mu;
        s.event1 = Event{1, std::nullopt};
      } else {
        s.event1 = Event{1, 1};
      }
      break;
    case DisparityKind::BGL:
      s.mode = DisparityMode::bgl;
      s.beta0 = -1.0;
      s.beta1 = 1.0;
      s.event0 = Event{0, std::nullopt};
      s.event1 = Event{1, std::nullopt};
      break;
    case DisparityKind::custom:
      break;
  }
  return s;
}

DisparityKind disparity_kind_from_string(const std::string& s) {
  if (s == "sp" || s == "SP") return DisparityKind::SP;
  if (s == "bfpc" || s == "BFPC") return DisparityKind::BFPC;
  if (s == "bfnc" || s == "BFNC") return DisparityKind::BFNC;
  if (s == "aa" || s == "AA") return DisparityKind::AA;
  if (s == "qaa" || s == "QAA") return DisparityKind::QAA;
  if (s == "bgl" || s == "BGL") return DisparityKind::BGL;
  if (s == "custom") return DisparityKind::custom;
  fail(Errc::config, "unknown disparity kind '" + s + "'");
}

std::string to_string(DisparityKind kind) {
  switch (kind) {
    case DisparityKind::SP: return "sp";
    case DisparityKind::BFPC: return "bfpc";
    case DisparityKind::BFNC: return "bfnc";
    case DisparityKind::AA: return "aa";
    case DisparityKind::QAA: return "qaa";
    case DisparityKind::BGL: return "bgl";
    case DisparityKind::custom: return "custom";
  }
  return "custom";
}

DisparitySpec negated(const DisparitySpec& spec) {
  DisparitySpec s = spec;
  s.beta0 = -s.beta0;
  s.beta1 = -s.beta1;
  return s;
}

EventNormalizers event_normalizers(const DisparityInputs& in, const DisparitySpec& spec) {
  check_inputs(in, spec);
  EventNormalizers out;
  const double n = static_cast<double>(in.preds.size());
  if (spec.beta0 != 0.0) {
    const GroupTerm t = group_term(in, spec, spec.event0);
    if (t.count == 0 || t.den <= 0.0)
      fail(Errc::empty_group, "disparity: event E0 is empty (or all-zero nuisance) with beta0 != 0");
    out.p0 = t.den / n;
    out.n0 = t.count;
  }
  if (spec.beta1 != 0.0) {
    const GroupTerm t = group_term(in, spec, spec.event1);
    if (t.count == 0 || t.den <= 0.0)
      fail(Errc::empty_group, "disparity: event E1 is empty (or all-zero nuisance) with beta1 != 0");
    out.p1 = t.den / n;
    out.n1 = t.count;
  }
  return out;
}

DisparityEstimate estimate_disparity(const DisparityInputs& in, const DisparitySpec& spec) {
  check_inputs(in, spec);
  if (spec.mode == DisparityMode::bgl)
    fail(Errc::config, "estimate_disparity: BGL uses bgl_disparity (loss-based)");
  DisparityEstimate est;
  double var = 0.0;
  bool se_defined = true;
  if (spec.beta0 != 0.0) {
    const GroupTerm t = group_term(in, spec, spec.event0);
    if (t.count == 0 || t.den <= 0.0)
      fail(Errc::empty_group, "disparity: event E0 is empty with beta0 != 0");
    est.value += spec.beta0 * (t.num / t.den);
    est.n0 = t.count;
    const double v = term_variance(in, spec, spec.event0, t);
    if (std::isnan(v)) se_defined = false;
    else var += spec.beta0 * spec.beta0 * v;
  }
  if (spec.beta1 != 0.0) {
    const GroupTerm t = group_term(in, spec, spec.event1);
    if (t.count == 0 || t.den <= 0.0)
      fail(Errc::empty_group, "disparity: event E1 is empty with beta1 != 0");
    est.value += spec.beta1 * (t.num / t.den);
    est.n1 = t.count;
    const double v = term_variance(in, spec, spec.event1, t);
    if (std::isnan(v)) se_defined = false;
    else var += spec.beta1 * spec.beta1 * v;
  }
  est.se = se_defined ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
  return est;
}

std::vector<double> snap_predictions(const Grid& grid, std::span<const double> preds) {
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i)
    out[i] = static_cast<double>(grid.levels_leq(preds[i])) / grid.N;
  return out;
}

DisparityEstimate disparity_of_scorer(const Scorer& f, const Matrix& X,
                                      const DisparityInputs& rows, const DisparitySpec& spec) {
  const std::vector<double> preds = f.predict_all(X);
  DisparityInputs in = rows;
  in.preds = preds;
  return estimate_disparity(in, spec);
}

DisparityEstimate disparity_of_mixture(const StochasticModel& q, const Matrix& X,
                                       const DisparityInputs& rows, const DisparitySpec& spec,
                                       const Grid& grid) {
  q.validate();
  std::vector<double> mixed(X.rows, 0.0);
  for (std::size_t k = 0; k < q.support.size(); ++k) {
    if (q.weights[k] == 0.0) continue;
    const std::vector<double> preds = q.support[k].predict_all(X);
    const std::vector<double> snapped = snap_predictions(grid, preds);
    for (std::size_t i = 0; i < X.rows; ++i) mixed[i] += q.weights[k] * snapped[i];
  }
  DisparityInputs in = rows;
  in.preds = mixed;
  return estimate_disparity(in, spec);
}

double bgl_disparity(std::span<const double> preds, std::span<const int> attribute,
                     std::span<const double> outcomes, const LossSpec& loss) {
  if (preds.empty() || preds.size() != attribute.size() || preds.size() != outcomes.size())
    fail(Errc::size, "bgl_disparity: input size mismatch");
  double sum[2] = {0.0, 0.0};
  std::size_t cnt[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (std::isnan(outcomes[i])) fail(Errc::missing_label, "bgl_disparity: masked outcome");
    const int a = attribute[i];
    sum[a] += loss.value_ext(outcomes[i], preds[i]);
    cnt[a] += 1;
  }
  if (cnt[0] == 0 || cnt[1] == 0) fail(Errc::empty_group, "bgl_disparity: an attribute group is empty");
  return sum[1] / cnt[1] - sum[0] / cnt[0];
}

}  // namespace goodset
