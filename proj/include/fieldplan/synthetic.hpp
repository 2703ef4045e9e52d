#pragma once

#include <cstdint>

#include "fieldplan/rng.hpp"
#include "fieldplan/types.hpp"

namespace fieldplan {

// Separable first-order autoregressive field: cor((i,j),(i',j')) =
// rho_row^|i-i'| * rho_col^|j-j'|, marginal variance sigma2, plus an optional
// linear gradient.
struct SyntheticGridSpec {
  int rows = 1;
  int cols = 1;
  double rho_row = 0.0;
  double rho_col = 0.0;
  double sigma2 = 1.0;
  double trend_row = 0.0;  // added yield per row step
  double trend_col = 0.0;  // added yield per column step
  std::uint64_t seed = 0;

  void validate() const {
    require(rows >= 1 && cols >= 1, "invalid-layout", "grid must be at least 1x1");
    require(std::abs(rho_row) < 1.0 && std::abs(rho_col) < 1.0, "invalid-autocorrelation",
            "|rho| must be < 1");
    require(sigma2 > 0.0, "invalid-variance", "sigma2 must be > 0");
  }
};

UniformityGrid gen_uniformity(const SyntheticGridSpec& spec);

// Same process, drawing from a caller-provided stream (the spec seed is
// ignored); used by Monte Carlo drivers that derive one stream per replicate.
UniformityGrid gen_uniformity(const SyntheticGridSpec& spec, Rng& rng);

}  // namespace fieldplan
