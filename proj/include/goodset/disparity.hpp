#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goodset/loss.hpp"
#include "goodset/scorer.hpp"

namespace goodset {

enum class DisparityMode { eq1, eq5, bgl };
enum class Nuisance { one, mu, one_minus_mu };
enum class DisparityKind { SP, BFPC, BFNC, AA, QAA, BGL, custom };

// Conjunction of optional conditions on the attribute and the outcome.
struct Event {
  std::optional<int> a;
  std::optional<int> ystar;

  bool matches(int a_i, double y_i) const {
    if (a && a_i != *a) return false;
    if (ystar && y_i != static_cast<double>(*ystar)) return false;
    return true;
  }
  bool depends_on_outcome() const { return ystar.has_value(); }
};

struct DisparitySpec {
  DisparityKind kind = DisparityKind::custom;
  DisparityMode mode = DisparityMode::eq1;
  double beta0 = 0.0;
  double beta1 = 0.0;
  Event event0, event1;
  Nuisance nuisance = Nuisance::one;

  double beta_abs_sum() const { return std::abs(beta0) + std::abs(beta1); }
};

struct DisparityEstimate {
  double value = 0.0;
  std::size_t n0 = 0, n1 = 0;
  double se = 0.0;
};

DisparitySpec make_spec(DisparityKind kind, bool selective);
DisparityKind disparity_kind_from_string(const std::string& s);
std::string to_string(DisparityKind kind);

// Same measure with (beta0, beta1) negated.
DisparitySpec negated(const DisparitySpec& spec);

// Rows used for estimation; outcomes may be NaN only where no event reads them.
// mu_hat is required in eq5 mode (the nuisance g is one / mu / 1-mu per row).
struct DisparityInputs {
  std::span<const double> preds;
  std::span<const int> attribute;
  std::span<const double> outcomes;  // may be empty if no event depends on Y*
  std::span<const double> mu_hat;    // empty unless mode = eq5
};

DisparityEstimate estimate_disparity(const DisparityInputs& in, const DisparitySpec& spec);

// Per-event normalizers p_a = mean(g * 1{E_a}); zero with nonzero beta is an error.
struct EventNormalizers {
  double p0 = 0.0, p1 = 0.0;
  std::size_t n0 = 0, n1 = 0;
};
EventNormalizers event_normalizers(const DisparityInputs& in, const DisparitySpec& spec);

// Nuisance weight of one row under the given measure.
double nuisance_value(const DisparitySpec& spec, const DisparityInputs& in, std::size_t i);

// Predictions replaced by (1/N) * #{z in grid : pred >= z}.
std::vector<double> snap_predictions(const Grid& grid, std::span<const double> preds);

// Disparity of a threshold-classifier mixture: estimator applied to the
// mixture-averaged snapped predictions (linear in the mixture weights).
DisparityEstimate disparity_of_mixture(const StochasticModel& q, const Matrix& X,
                                       const DisparityInputs& rows, const DisparitySpec& spec,
                                       const Grid& grid);

DisparityEstimate disparity_of_scorer(const Scorer& f, const Matrix& X,
                                      const DisparityInputs& rows, const DisparitySpec& spec);

// Difference in average loss across attribute groups: E[l|A=1] - E[l|A=0].
double bgl_disparity(std::span<const double> preds, std::span<const int> attribute,
                     std::span<const double> outcomes, const LossSpec& loss);

}  // namespace goodset
