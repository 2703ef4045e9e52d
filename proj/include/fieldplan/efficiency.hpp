#pragma once

#include <optional>
#include <vector>

#include "fieldplan/types.hpp"

namespace fieldplan {

// Which nuisance terms to project out of the treatment information. Tag-based
// terms are used only when the plan carries the tags; row/column blocking
// comes from the layout coordinates.
struct EfficiencyModel {
  bool use_env = true;
  bool use_rep = true;
  bool use_block = true;
  bool use_rows = false;
  bool use_cols = false;
};

struct EfficiencyReport {
  double aef = 0.0;
  std::vector<double> eigenvalues;  // nonzero eigenvalues of the scaled information, descending
  std::optional<double> upper_bound;
};

// Treatment information matrix C = T' Q T with Q projecting orthogonal to the
// general mean and the selected nuisance terms. Treatment order is
// lexicographic by label.
Matrix treatment_information(const DesignPlan& plan, const EfficiencyModel& model = {});

// Average efficiency factor: harmonic mean of the t-1 nonzero eigenvalues of
// R^{-1/2} C R^{-1/2} (R = replication counts). Fails with
// `disconnected-design` when rank < t-1. The upper bound is attached for
// binary equireplicate equal-block-size plans.
EfficiencyReport efficiency_factor(const DesignPlan& plan, const EfficiencyModel& model = {});

}  // namespace fieldplan
