#pragma once

#include <cstdint>

#include "fieldplan/types.hpp"

namespace fieldplan {

// Neighbour balance & evenness of distribution restrictions. NB caps how
// often any unordered pair of distinct treatments may sit next to each other
// within a row (column adjacency optional); ED tiles the layout into
// ed_rows x ed_cols coarse cells and caps the replicates of one treatment per
// cell.
struct NbEdConstraints {
  int max_row_adjacency = 1;
  int ed_rows = 1;
  int ed_cols = 1;
  int ed_cap = 1;
  bool include_col_adjacency = false;
};

// Total constraint violation count (0 means admissible).
int nbed_violations(const DesignPlan& plan, const NbEdConstraints& constraints);

struct NbEdResult {
  DesignPlan plan;
  std::int64_t evaluations = 0;
};

// Seeded pairwise-swap search with restarts for an admissible row-column
// assignment of t treatments with r replicates on rows x cols plots. Fails
// with `nbed-search-failed` (reporting the best violation count) when no
// admissible plan is found within max_iters evaluations.
NbEdResult nbed_search(int t, int rows, int cols, int r, const NbEdConstraints& constraints,
                       std::uint64_t seed, std::int64_t max_iters = 200000);

}  // namespace fieldplan
