#pragma once

#include <span>
#include <string>
#include <vector>

#include "goodset/dataset.hpp"
#include "goodset/disparity.hpp"

namespace goodset {

enum class Pipeline { kgb, rie, ie };
Pipeline pipeline_from_string(const std::string& s);
std::string to_string(Pipeline p);

enum class Provenance { observed, extrapolated, interpolated };
const char* to_string(Provenance p);

// A selective dataset with every row carrying a pseudo-outcome, plus the
// outcome-model values used to produce them (needed later as the nuisance g).
struct PseudoLabelledDataset {
  Dataset base;
  std::vector<double> pseudo_outcomes;
  std::vector<double> mu_hat;
  std::vector<Provenance> provenance;
};

// Known good-bad: funded rows only, relabelled as a full-label dataset.
Dataset kgb(const Dataset& ds);

// Reject inference by extrapolation: funded rows keep the observed outcome,
// rejected rows get mu_hat(x).
PseudoLabelledDataset rie(const Dataset& ds, std::span<const double> mu_hat);

// Interpolation and extrapolation: every row gets mu_hat(x), including funded.
PseudoLabelledDataset ie(const Dataset& ds, std::span<const double> mu_hat);

// Binds the nuisance g needed to identify Y*-dependent events on the full
// population under the given pipeline; A-only specs pass through unchanged.
DisparitySpec select_nuisance(const DisparitySpec& spec, Pipeline pipeline);

}  // namespace goodset
