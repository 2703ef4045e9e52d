#pragma once

#include "fieldplan/types.hpp"

namespace fieldplan {

// Sliding-block model for a 1xN strip: iid block effects on every window of
// w consecutive plots plus an iid plot residual.
struct SlidingBlockSpec {
  int w = 1;             // window width in plots
  double sigma_b2 = 0.0; // per-window block variance
  double sigma_e2 = 1.0; // residual plot variance

  SlidingBlockSpec() = default;
  SlidingBlockSpec(int w_, double sigma_b2_, double sigma_e2_)
      : w(w_), sigma_b2(sigma_b2_), sigma_e2(sigma_e2_) {
    require(w >= 1, "invalid-window", "window width must be >= 1");
    require(sigma_b2 >= 0.0, "invalid-variance", "sigma_b2 must be >= 0");
    require(sigma_e2 >= 0.0, "invalid-variance", "sigma_e2 must be >= 0");
  }
};

// Induced plot covariance: cov(i, j) = sigma_b2 * (#windows containing both)
// + sigma_e2 * [i == j]. Only fully interior windows count, so covariance
// decays linearly to zero at distance w and edge plots see fewer windows;
// `wrap` switches to the circular variant where every plot sees w windows.
Matrix sliding_block_covariance(int n_plots, const SlidingBlockSpec& spec, bool wrap = false);

enum class SlidingAdjustMode { central, all };

// Mitscherlich-style sliding-window correction of a 1xN yield strip. Window
// means are computed on fully interior windows; `central` subtracts each
// window's mean from its central plot only (edge plots without a centered
// window stay unchanged), `all` subtracts from each plot the average mean of
// every window containing it. The grand mean is added back.
Vector sliding_block_adjust(const Vector& strip, int w, SlidingAdjustMode mode);

}  // namespace fieldplan
