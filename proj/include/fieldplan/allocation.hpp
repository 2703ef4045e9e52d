#pragma once

#include <string>
#include <vector>

#include "fieldplan/types.hpp"

namespace fieldplan {

// Allocation of a trial budget to zones of a sub-divided target population.
// gamma is the genetic covariance of a genotype's zone effects; v holds the
// per-zone effective error variance of one trial's genotype mean.
struct AllocationProblem {
  Matrix gamma;    // q x q, symmetric PSD
  Vector v;        // per-zone per-trial error variance, all > 0
  int budget = 0;  // total number of trials N
  Vector weights;  // per-zone importance, sums to 1

  int zones() const { return static_cast<int>(gamma.rows()); }
  void validate() const;
};

// Equal weights 1/q.
Vector equal_weights(int q);

// Weighted average over zones of the BLUP mean-squared error of a within-zone
// pairwise genotype contrast (2 * MSE_pp). Zones with no trials are predicted
// through the genetic covariance alone.
double allocation_criterion(const AllocationProblem& problem, const std::vector<int>& alloc);

enum class AllocationMethod { exhaustive, greedy };

struct AllocationResult {
  std::vector<int> alloc;
  double criterion = 0.0;
  std::string certificate;  // "exhaustive-optimal" or "heuristic"
};

// Exhaustive enumeration of all integer compositions (guarded at 1e6), ties
// broken toward the lexicographically smallest allocation; greedy adds one
// trial at a time to the zone with the largest criterion decrease.
AllocationResult optimize_allocation(const AllocationProblem& problem, AllocationMethod method);

}  // namespace fieldplan
