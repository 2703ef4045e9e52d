#pragma once

#include "fieldplan/types.hpp"

namespace fieldplan {

enum class Orientation { as_is, transposed };

// A design plan joined with plot responses (one per plot, row-major).
struct AnalysisDataset {
  DesignPlan plan;
  Vector y;
};

// Maps each plot of the plan onto the uniformity grid at the given origin;
// `transposed` swaps the plan's axes. Fails with `footprint-exceeds-grid`.
AnalysisDataset overlay(const DesignPlan& plan, const UniformityGrid& grid, int origin_row,
                        int origin_col, Orientation orientation = Orientation::as_is);

}  // namespace fieldplan
