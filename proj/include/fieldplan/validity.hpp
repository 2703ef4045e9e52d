#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "fieldplan/distributions.hpp"
#include "fieldplan/null_analysis.hpp"
#include "fieldplan/rng.hpp"
#include "fieldplan/synthetic.hpp"

namespace fieldplan {

// Per-replicate sources. The replicate index allows enumeration-style
// sources; Monte Carlo sources should use only the stream.
using DesignSource = std::function<DesignPlan(Rng&, int rep)>;
using GridSource = std::function<UniformityGrid(Rng&, int rep)>;

struct ValiditySpec {
  DesignSource draw_design;
  GridSource draw_grid;
  bool random_placement = false;  // random origin and orientation per rep
  ModelSpec model;
  double alpha = 0.05;
  int n_reps = 1000;
  bool collect_points = false;  // keep per-replicate records in the report
  std::string design_policy;    // recorded verbatim in the report
  std::string grid_policy;
};

struct RepPoint {
  int rep = 0;
  bool degenerate = false;
  double p_value = 1.0;
  double tec = 0.0;
  double model_sed = 0.0;
};

struct ValidityReport {
  int n_reps = 0;
  int n_valid = 0;
  int n_degenerate = 0;  // counted, never silently dropped
  double alpha = 0.05;
  double type1_rate = 0.0;
  BinomialInterval type1_ci;
  double empirical_sed = 0.0;   // sd of difference estimates across reps (truth 0)
  double mean_model_sed = 0.0;  // mean of the model-based SEDs
  double sed_ratio = 0.0;
  double mean_tec = 0.0;
  double se_tec = 0.0;  // Monte Carlo standard error of mean_tec
  double null_tec = 0.0;
  std::string design_policy;
  std::string grid_policy;
  std::vector<RepPoint> points;  // filled when collect_points is set
};

// Repeats {draw design, draw grid, place, analyze under the null}; rejection
// uses p <= alpha. Reports are a pure function of (spec, seed): replicate
// streams derive from the seed by index, and aggregation is order
// independent, so any thread count yields the identical report.
ValidityReport empirical_validity(const ValiditySpec& spec, std::uint64_t seed, int threads = 1);

// Uniform random relabeling of the plan's treatments.
DesignPlan permute_plan_labels(const DesignPlan& plan, Rng& rng);

// Convenience sources.
DesignSource fixed_plan_source(DesignPlan plan, bool permute_labels);
GridSource fixed_grid_source(UniformityGrid grid);
GridSource synthetic_grid_source(SyntheticGridSpec spec);  // fresh realization per rep

}  // namespace fieldplan
