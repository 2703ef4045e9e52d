#include "fieldplan/overlay.hpp"

namespace fieldplan {

AnalysisDataset overlay(const DesignPlan& plan, const UniformityGrid& grid, int origin_row,
                        int origin_col, Orientation orientation) {
  const int span_rows = orientation == Orientation::as_is ? plan.layout.rows : plan.layout.cols;
  const int span_cols = orientation == Orientation::as_is ? plan.layout.cols : plan.layout.rows;
  require(origin_row >= 0 && origin_col >= 0 && origin_row + span_rows <= grid.layout.rows &&
              origin_col + span_cols <= grid.layout.cols,
          "footprint-exceeds-grid",
          "plan footprint " + std::to_string(span_rows) + "x" + std::to_string(span_cols) +
              " at (" + std::to_string(origin_row) + "," + std::to_string(origin_col) +
              ") does not fit a " + std::to_string(grid.layout.rows) + "x" +
              std::to_string(grid.layout.cols) + " grid");
  AnalysisDataset dataset;
  dataset.plan = plan;
  dataset.y.resize(plan.layout.size());
  for (int p = 0; p < plan.layout.size(); ++p) {
    const int i = plan.layout.row_of(p);
    const int j = plan.layout.col_of(p);
    const int gi = origin_row + (orientation == Orientation::as_is ? i : j);
    const int gj = origin_col + (orientation == Orientation::as_is ? j : i);
    dataset.y(p) = grid.yield(gi, gj);
  }
  return dataset;
}

}  // namespace fieldplan
