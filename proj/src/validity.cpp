#include "fieldplan/validity.hpp"

#include <cmath>
#include <thread>

#include "fieldplan/overlay.hpp"

namespace fieldplan {

DesignPlan permute_plan_labels(const DesignPlan& plan, Rng& rng) {
  const auto labels = plan.treatments();
  auto shuffled = labels;
  rng.shuffle(shuffled);
  std::map<std::string, std::string> relabel;
  for (std::size_t i = 0; i < labels.size(); ++i) relabel[labels[i]] = shuffled[i];
  DesignPlan out = plan;
  for (auto& label : out.treatment) label = relabel.at(label);
  return out;
}

DesignSource fixed_plan_source(DesignPlan plan, bool permute_labels) {
  return [plan = std::move(plan), permute_labels](Rng& rng, int) {
    return permute_labels ? permute_plan_labels(plan, rng) : plan;
  };
}

GridSource fixed_grid_source(UniformityGrid grid) {
  return [grid = std::move(grid)](Rng&, int) { return grid; };
}

GridSource synthetic_grid_source(SyntheticGridSpec spec) {
  return [spec](Rng& rng, int) { return gen_uniformity(spec, rng); };
}

namespace {

struct RepRecord {
  bool degenerate = false;
  bool reject = false;
  double p_value = 1.0;
  double model_sed = 0.0;   // mean over pairs of the model SED
  double model_sed2 = 0.0;  // mean over pairs of the squared model SED
  double tec = 0.0;
  double null_tec = 0.0;
  std::vector<double> differences;
};

RepRecord run_replicate(const ValiditySpec& spec, std::uint64_t seed, int rep) {
  Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(rep) + 1);
  const DesignPlan plan = spec.draw_design(rng, rep);
  const UniformityGrid grid = spec.draw_grid(rng, rep);

  int origin_row = 0, origin_col = 0;
  Orientation orientation = Orientation::as_is;
  if (spec.random_placement) {
    const bool fits_as_is =
        plan.layout.rows <= grid.layout.rows && plan.layout.cols <= grid.layout.cols;
    const bool fits_transposed =
        plan.layout.cols <= grid.layout.rows && plan.layout.rows <= grid.layout.cols;
    require(fits_as_is || fits_transposed, "footprint-exceeds-grid",
            "plan does not fit the grid in either orientation");
    if (fits_as_is && fits_transposed) {
      orientation = rng.uniform_below(2) == 0 ? Orientation::as_is : Orientation::transposed;
    } else {
      orientation = fits_as_is ? Orientation::as_is : Orientation::transposed;
    }
    const int span_rows = orientation == Orientation::as_is ? plan.layout.rows : plan.layout.cols;
    const int span_cols = orientation == Orientation::as_is ? plan.layout.cols : plan.layout.rows;
    origin_row = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(grid.layout.rows - span_rows + 1)));
    origin_col = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(grid.layout.cols - span_cols + 1)));
  }

  RepRecord record;
  const AnalysisDataset dataset = overlay(plan, grid, origin_row, origin_col, orientation);
  try {
    const NullFit fit = analyze_null(dataset, spec.model);
    record.p_value = fit.p_value;
    record.reject = fit.p_value <= spec.alpha;
    record.model_sed = fit.mean_model_sed;
    for (double sed : fit.seds) record.model_sed2 += sed * sed / fit.seds.size();
    record.tec = fit.tec;
    record.null_tec = fit.null_tec;
    record.differences = fit.differences;
  } catch (const Error& e) {
    if (e.code() == "degenerate-data") {
      record.degenerate = true;
    } else {
      throw;
    }
  }
  return record;
}

}  // namespace

ValidityReport empirical_validity(const ValiditySpec& spec, std::uint64_t seed, int threads) {
  require(spec.n_reps >= 1, "invalid-reps", "n_reps must be >= 1");
  require(static_cast<bool>(spec.draw_design) && static_cast<bool>(spec.draw_grid),
          "missing-source", "validity run needs design and grid sources");

  std::vector<RepRecord> records(static_cast<std::size_t>(spec.n_reps));
  const int n_threads = std::max(1, std::min(threads, spec.n_reps));
  if (n_threads == 1) {
    for (int rep = 0; rep < spec.n_reps; ++rep) records[static_cast<std::size_t>(rep)] = run_replicate(spec, seed, rep);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int worker = 0; worker < n_threads; ++worker) {
      pool.emplace_back([&, worker] {
        try {
          for (int rep = worker; rep < spec.n_reps; rep += n_threads) {
            records[static_cast<std::size_t>(rep)] = run_replicate(spec, seed, rep);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& thread : pool) thread.join();
    if (failure) std::rethrow_exception(failure);
  }

  ValidityReport report;
  report.n_reps = spec.n_reps;
  report.alpha = spec.alpha;
  report.design_policy = spec.design_policy;
  report.grid_policy = spec.grid_policy;

  int rejections = 0;
  double sed2_sum = 0.0, tec_sum = 0.0, tec_sq_sum = 0.0;
  std::size_t n_pairs = 0;
  for (const auto& record : records) {
    if (record.degenerate) {
      ++report.n_degenerate;
      continue;
    }
    ++report.n_valid;
    rejections += record.reject ? 1 : 0;
    sed2_sum += record.model_sed2;
    tec_sum += record.tec;
    tec_sq_sum += record.tec * record.tec;
    report.null_tec = record.null_tec;
    n_pairs = record.differences.size();
  }
  require(report.n_valid >= 1, "all-runs-degenerate", "every replicate was degenerate");

  report.type1_rate = double(rejections) / report.n_valid;
  report.type1_ci = clopper_pearson(rejections, report.n_valid);
  // averaged on the variance scale: the SED implied by the mean model
  // variance of a pairwise difference
  report.mean_model_sed = std::sqrt(sed2_sum / report.n_valid);
  report.mean_tec = tec_sum / report.n_valid;
  if (report.n_valid >= 2) {
    const double var =
        (tec_sq_sum - report.n_valid * report.mean_tec * report.mean_tec) / (report.n_valid - 1);
    report.se_tec = std::sqrt(std::max(0.0, var) / report.n_valid);
  }

  // Empirical SED: per-pair standard deviation of the difference estimates
  // across valid replicates, root-mean-squared over pairs.
  if (n_pairs > 0 && report.n_valid >= 2) {
    double variance_sum = 0.0;
    for (std::size_t pair = 0; pair < n_pairs; ++pair) {
      double sum = 0.0, sq_sum = 0.0;
      for (const auto& record : records) {
        if (record.degenerate) continue;
        sum += record.differences[pair];
        sq_sum += record.differences[pair] * record.differences[pair];
      }
      const double mean = sum / report.n_valid;
      variance_sum += (sq_sum - report.n_valid * mean * mean) / (report.n_valid - 1);
    }
    report.empirical_sed = std::sqrt(std::max(0.0, variance_sum / n_pairs));
    report.sed_ratio = report.empirical_sed / report.mean_model_sed;
  }

  if (spec.collect_points) {
    report.points.reserve(records.size());
    for (int rep = 0; rep < spec.n_reps; ++rep) {
      const auto& record = records[static_cast<std::size_t>(rep)];
      report.points.push_back({rep, record.degenerate, record.p_value, record.tec, record.model_sed});
    }
  }
  return report;
}

}  // namespace fieldplan
