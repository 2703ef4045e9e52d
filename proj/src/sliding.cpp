#include "fieldplan/sliding.hpp"

#include <algorithm>

namespace fieldplan {

Matrix sliding_block_covariance(int n_plots, const SlidingBlockSpec& spec, bool wrap) {
  require(n_plots >= spec.w, "strip-shorter-than-window",
          "need n_plots >= window width " + std::to_string(spec.w));
  const int w = spec.w;
  Matrix cov = Matrix::Zero(n_plots, n_plots);
  for (int i = 0; i < n_plots; ++i) {
    for (int j = i; j < n_plots; ++j) {
      int shared = 0;
      if (wrap) {
        const int d = std::min(std::abs(i - j), n_plots - std::abs(i - j));
        shared = std::max(0, w - d);
      } else {
        const int first = std::max(0, std::max(i, j) - w + 1);
        const int last = std::min(std::min(i, j), n_plots - w);
        shared = std::max(0, last - first + 1);
      }
      double value = spec.sigma_b2 * shared;
      if (i == j) value += spec.sigma_e2;
      cov(i, j) = value;
      cov(j, i) = value;
    }
  }
  return cov;
}

Vector sliding_block_adjust(const Vector& strip, int w, SlidingAdjustMode mode) {
  const int n = static_cast<int>(strip.size());
  require(n >= w, "strip-shorter-than-window", "strip shorter than window width");
  require(mode != SlidingAdjustMode::central || w % 2 == 1, "even-central-window",
          "central mode needs an odd window width");
  const double grand = strip.mean();
  const int n_windows = n - w + 1;
  Vector window_mean(n_windows);
  double running = strip.head(w).sum();
  window_mean(0) = running / w;
  for (int s = 1; s < n_windows; ++s) {
    running += strip(s + w - 1) - strip(s - 1);
    window_mean(s) = running / w;
  }

  Vector adjusted = strip;
  if (mode == SlidingAdjustMode::central) {
    const int half = (w - 1) / 2;
    for (int s = 0; s < n_windows; ++s) {
      const int center = s + half;
      adjusted(center) = strip(center) - window_mean(s) + grand;
    }
    return adjusted;
  }
  for (int p = 0; p < n; ++p) {
    const int first = std::max(0, p - w + 1);
    const int last = std::min(p, n - w);
    double sum = 0.0;
    for (int s = first; s <= last; ++s) sum += window_mean(s);
    adjusted(p) = strip(p) - sum / (last - first + 1) + grand;
  }
  return adjusted;
}

}  // namespace fieldplan
