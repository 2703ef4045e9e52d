#pragma once

#include <cstdint>

#include "fieldplan/efficiency.hpp"
#include "fieldplan/types.hpp"

namespace fieldplan {

struct AugmentedResult {
  DesignPlan plan;
  EfficiencyReport efficiency;  // AEF of the full plan under the row+column model
  std::int64_t evaluations = 0;
};

// Replicated check varieties plus unreplicated test lines on a rows x cols
// grid. Check placement is optimized by seeded swap search maximizing the
// average efficiency factor of the full plan after row and column effects;
// test lines fill the remaining plots, one plot each, in seeded random order.
AugmentedResult gen_augmented_rowcolumn(int checks, int n_test, int rows, int cols, int check_reps,
                                        std::uint64_t seed, std::int64_t max_iters = 50000);

}  // namespace fieldplan
