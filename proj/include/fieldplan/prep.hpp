#pragma once

#include <cstdint>
#include <vector>

#include "fieldplan/efficiency.hpp"
#include "fieldplan/types.hpp"

namespace fieldplan {

// Lines duplicated in environment `env` under the rotating-quota scheme: the
// window of dup_per_env consecutive line indices starting at env*dup_per_env,
// cyclically. Per-line duplication totals over the MET differ by at most one.
std::vector<int> prep_duplicated_lines(int t, int dup_per_env, int env);

struct PrepResult {
  DesignPlan plan;
  EfficiencyReport efficiency;  // AEF under the fixed env+rep+block model
  std::int64_t evaluations = 0;
};

// Partially replicated MET design: per environment every line once plus a
// rotating subset twice, laid out as two replicate groups split into
// incomplete blocks (duplicates sit in both groups, once each). Label
// placement is optimized by seeded swap search maximizing the average
// efficiency factor with environments, replicates and blocks as fixed
// nuisance effects.
PrepResult gen_prep(int t, int n_env, int dup_per_env, int blocks_per_env, std::uint64_t seed,
                    std::int64_t max_iters = 20000);

}  // namespace fieldplan
