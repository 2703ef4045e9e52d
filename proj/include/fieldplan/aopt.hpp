#pragma once

#include <cstdint>

#include "fieldplan/types.hpp"

namespace fieldplan {

struct AoptResult {
  DesignPlan plan;
  double criterion = 0.0;  // mean GLS variance of pairwise treatment differences
  std::int64_t evaluations = 0;
};

// Mean variance of pairwise treatment differences under GLS with the given
// plot covariance, for an explicit label assignment on a strip.
double aopt_criterion(const std::vector<int>& label_of, int t, const Matrix& cov_inverse);

// Seeded swap search (greedy with random restarts) minimizing the A-criterion
// over equal-replication assignments of t treatments on a 1xN strip with plot
// covariance `cov`. Never returns a plan worse than its initial plan.
AoptResult aopt_search(const FieldLayout& layout, int t, int r, const Matrix& cov,
                       std::uint64_t seed, std::int64_t max_iters = 200000);

}  // namespace fieldplan
