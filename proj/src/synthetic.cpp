#include "fieldplan/synthetic.hpp"

#include <cmath>

namespace fieldplan {

UniformityGrid gen_uniformity(const SyntheticGridSpec& spec) {
  Rng rng(spec.seed);
  return gen_uniformity(spec, rng);
}

UniformityGrid gen_uniformity(const SyntheticGridSpec& spec, Rng& rng) {
  spec.validate();
  const int rows = spec.rows, cols = spec.cols;
  Matrix z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = rng.normal();

  // AR(1) recursion down the rows, then along the columns; the composition
  // has the separable correlation with unit marginal variance.
  const double row_innov = std::sqrt(1.0 - spec.rho_row * spec.rho_row);
  for (int i = 1; i < rows; ++i) {
    z.row(i) = spec.rho_row * z.row(i - 1) + row_innov * z.row(i);
  }
  const double col_innov = std::sqrt(1.0 - spec.rho_col * spec.rho_col);
  for (int j = 1; j < cols; ++j) {
    z.col(j) = spec.rho_col * z.col(j - 1) + col_innov * z.col(j);
  }

  const double scale = std::sqrt(spec.sigma2);
  Matrix yield(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      yield(i, j) = scale * z(i, j) + spec.trend_row * i + spec.trend_col * j;
  return UniformityGrid(FieldLayout(rows, cols), std::move(yield));
}

}  // namespace fieldplan
