#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fieldplan/aopt.hpp"
#include "fieldplan/augmented.hpp"
#include "fieldplan/design.hpp"
#include "fieldplan/efficiency.hpp"
#include "fieldplan/linalg.hpp"
#include "fieldplan/nbed.hpp"
#include "fieldplan/prep.hpp"
#include "fieldplan/rng.hpp"
#include "fieldplan/sliding.hpp"

using namespace fieldplan;

// --------------------------------------------------------------------------
// sliding block

TEST_CASE("sliding block covariance window counts") {
  const auto cov = sliding_block_covariance(20, SlidingBlockSpec(5, 1.0, 0.0));
  // interior plots at distance 2 share 3 windows
  CHECK(cov(8, 10) == 3.0);
  // distance >= w: zero
  CHECK(cov(5, 10) == 0.0);
  CHECK(cov(5, 11) == 0.0);
  // interior variance = w, edge plots see fewer windows
  CHECK(cov(10, 10) == 5.0);
  CHECK(cov(0, 0) == 1.0);
  CHECK(cov(1, 1) == 2.0);
  CHECK(cov.isApprox(cov.transpose()));
}

TEST_CASE("sliding block covariance w=1 and wrap") {
  const auto diag = sliding_block_covariance(4, SlidingBlockSpec(1, 2.0, 0.5));
  CHECK(diag.isApprox(Matrix::Identity(4, 4) * 2.5));

  const auto wrapped = sliding_block_covariance(10, SlidingBlockSpec(3, 1.0, 0.0), true);
  for (int i = 0; i < 10; ++i) CHECK(wrapped(i, i) == 3.0);  // every plot in w windows
  CHECK(wrapped(0, 9) == 2.0);                               // circular distance 1
  CHECK_THROWS_AS(sliding_block_covariance(3, SlidingBlockSpec(5, 1.0, 1.0)), Error);
}

TEST_CASE("sliding block adjustment") {
  Vector constant = Vector::Constant(9, 4.2);
  CHECK(sliding_block_adjust(constant, 5, SlidingAdjustMode::central).isApprox(constant));
  CHECK(sliding_block_adjust(constant, 5, SlidingAdjustMode::all).isApprox(constant));

  Vector strip(5);
  strip << 1, 2, 3, 4, 5;
  const auto central = sliding_block_adjust(strip, 5, SlidingAdjustMode::central);
  CHECK(central(2) == doctest::Approx(3.0));  // 3 - 3 + 3
  for (int p : {0, 1, 3, 4}) CHECK(central(p) == strip(p));

  // linear trend, all mode: interior plots have zero fitted slope
  const int n = 30, w = 5;
  Vector trend(n);
  for (int p = 0; p < n; ++p) trend(p) = 2.0 + 0.7 * p;
  const auto adjusted = sliding_block_adjust(trend, w, SlidingAdjustMode::all);
  double sxy = 0.0, sxx = 0.0, mean_x = 0.0, mean_y = 0.0;
  int count = 0;
  for (int p = w - 1; p <= n - w; ++p) {
    mean_x += p;
    mean_y += adjusted(p);
    ++count;
  }
  mean_x /= count;
  mean_y /= count;
  for (int p = w - 1; p <= n - w; ++p) {
    sxy += (p - mean_x) * (adjusted(p) - mean_y);
    sxx += (p - mean_x) * (p - mean_x);
  }
  CHECK(std::abs(sxy / sxx) < 1e-9);

  CHECK_THROWS_AS(sliding_block_adjust(strip, 6, SlidingAdjustMode::all), Error);
  CHECK_THROWS_AS(sliding_block_adjust(strip, 4, SlidingAdjustMode::central), Error);
}

// --------------------------------------------------------------------------
// efficiency factor

namespace {

DesignPlan block_design(const std::vector<std::string>& blocks) {
  DesignPlan plan;
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.size());
  plan.layout = FieldLayout(1, n);
  int p = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (char c : blocks[b]) {
      plan.treatment.push_back(std::string(1, c));
      plan.block.push_back(static_cast<int>(b));
      ++p;
    }
  }
  return plan;
}

// Independent AEF route: mean pairwise variance under the orthogonal
// reference over mean pairwise variance of the design.
double aef_pairwise_route(const DesignPlan& plan) {
  const auto info = treatment_information(plan);
  const Matrix pinv = pseudo_inverse_psd(info);
  const double mean_variance = mean_pairwise_variance(pinv);
  std::map<std::string, int> reps;
  for (const auto& label : plan.treatment) reps[label]++;
  const double r = reps.begin()->second;
  return (2.0 / r) / mean_variance;
}

}  // namespace

TEST_CASE("aef of orthogonal designs is exactly 1") {
  const auto rcbd = gen_rcbd(5, 4, FieldLayout(1, 20), 3);
  DesignPlan with_blocks = rcbd;
  with_blocks.block = with_blocks.rep;
  CHECK(efficiency_factor(with_blocks).aef == doctest::Approx(1.0).epsilon(1e-12));

  EfficiencyModel rowcol_model;
  rowcol_model.use_rows = true;
  rowcol_model.use_cols = true;
  const auto latin = gen_latin(5, {LatinKind::full}, 17);
  CHECK(efficiency_factor(latin, rowcol_model).aef == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("aef eigen route equals pairwise variance route") {
  // balanced incomplete block design: t=4, blocks of 2, every pair once
  const auto bibd = block_design({"AB", "CD", "AC", "BD", "AD", "BC"});
  const auto report = efficiency_factor(bibd);
  CHECK(report.aef == doctest::Approx(aef_pairwise_route(bibd)).epsilon(1e-10));
  // BIBD attains the binary-design bound t(k-1)/((t-1)k)
  REQUIRE(report.upper_bound.has_value());
  CHECK(*report.upper_bound == doctest::Approx(4.0 * 1 / (3.0 * 2)));
  CHECK(report.aef <= *report.upper_bound + 1e-12);
  CHECK(report.aef == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(report.eigenvalues.size() == 3);

  // a non-balanced connected design also agrees across routes
  const auto ibd = block_design({"ABC", "CDA", "BDA"});
  CHECK(efficiency_factor(ibd).aef == doctest::Approx(aef_pairwise_route(ibd)).epsilon(1e-10));
}

TEST_CASE("disconnected design is rejected") {
  const auto split = block_design({"AB", "AB", "CD", "CD"});
  CHECK_THROWS_WITH_AS(efficiency_factor(split), doctest::Contains("rank"), Error);
}

// --------------------------------------------------------------------------
// nbed

namespace {

// Independent checker with plain nested loops.
int oracle_violations(const DesignPlan& plan, const NbEdConstraints& c) {
  std::map<std::pair<std::string, std::string>, int> adjacency;
  for (int i = 0; i < plan.layout.rows; ++i) {
    for (int j = 0; j + 1 < plan.layout.cols; ++j) {
      auto a = plan.label_at(i, j), b = plan.label_at(i, j + 1);
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      adjacency[{a, b}]++;
    }
  }
  int total = 0;
  for (auto& [pair, count] : adjacency) total += std::max(0, count - c.max_row_adjacency);
  std::map<std::pair<int, std::string>, int> cell_counts;
  const int cell_rows = plan.layout.rows / c.ed_rows;
  const int cell_cols = plan.layout.cols / c.ed_cols;
  for (int i = 0; i < plan.layout.rows; ++i)
    for (int j = 0; j < plan.layout.cols; ++j)
      cell_counts[{(i / cell_rows) * c.ed_cols + j / cell_cols, plan.label_at(i, j)}]++;
  for (auto& [key, count] : cell_counts) total += std::max(0, count - c.ed_cap);
  return total;
}

}  // namespace

TEST_CASE("nbed 2x2 exhaustive ground truth") {
  // ED cells = the two rows, cap 1; NB cap 2. Exactly the Latin arrangements
  // (AB/BA, BA/AB) are admissible among all 4-plot assignments with 2+2
  // replication, as an exhaustive scan of assignments shows.
  NbEdConstraints constraints;
  constraints.max_row_adjacency = 2;
  constraints.ed_rows = 2;
  constraints.ed_cols = 1;
  constraints.ed_cap = 1;

  std::set<std::string> admissible;
  std::vector<std::string> labels = {"A", "A", "B", "B"};
  std::sort(labels.begin(), labels.end());
  do {
    DesignPlan plan;
    plan.layout = FieldLayout(2, 2);
    plan.treatment = labels;
    if (oracle_violations(plan, constraints) == 0) {
      admissible.insert(labels[0] + labels[1] + labels[2] + labels[3]);
    }
  } while (std::next_permutation(labels.begin(), labels.end()));
  CHECK(admissible == std::set<std::string>{"ABBA", "BAAB"});

  const auto result = nbed_search(2, 2, 2, 2, constraints, 5);
  CHECK(oracle_violations(result.plan, constraints) == 0);
  CHECK(nbed_violations(result.plan, constraints) == 0);

  // with NB cap 1 on top, no assignment is admissible
  constraints.max_row_adjacency = 1;
  CHECK_THROWS_WITH_AS(nbed_search(2, 2, 2, 2, constraints, 5, 2000),
                       doctest::Contains("best violation count"), Error);
}

TEST_CASE("nbed search output always passes the independent checker") {
  NbEdConstraints constraints;
  constraints.max_row_adjacency = 1;
  constraints.ed_rows = 2;
  constraints.ed_cols = 2;
  constraints.ed_cap = 1;
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    // t=8 treatments, r=2 on a 4x4 grid
    const auto result = nbed_search(8, 4, 4, 2, constraints, seed);
    CHECK(oracle_violations(result.plan, constraints) == 0);
    CHECK(validate_plan(result.plan).empty());
  }
}

TEST_CASE("nbed infeasible constraints are rejected") {
  NbEdConstraints constraints;
  constraints.ed_cap = 0;
  CHECK_THROWS_WITH_AS(nbed_search(2, 2, 2, 2, constraints, 1),
                       doctest::Contains("ED"), Error);
  NbEdConstraints bad_tiling;
  bad_tiling.ed_rows = 3;
  CHECK_THROWS_WITH_AS(nbed_search(2, 2, 2, 2, bad_tiling, 1), doctest::Contains("tile"), Error);
}

// --------------------------------------------------------------------------
// aopt

TEST_CASE("aopt identity covariance criterion equals the balanced value") {
  const Matrix identity = Matrix::Identity(12, 12);
  const auto result = aopt_search(FieldLayout(1, 12), 3, 4, identity, 2, 400);
  // every equal-replication assignment has mean pairwise variance 2/r
  CHECK(result.criterion == doctest::Approx(2.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("aopt never returns worse than its initial plan") {
  const auto cov = sliding_block_covariance(15, SlidingBlockSpec(4, 1.0, 0.2));
  // max_iters=1 stops after evaluating the seeded initial plan
  const auto initial = aopt_search(FieldLayout(1, 15), 5, 3, cov, 33, 1);
  const auto optimized = aopt_search(FieldLayout(1, 15), 5, 3, cov, 33, 30000);
  CHECK(optimized.criterion <= initial.criterion + 1e-12);
}

TEST_CASE("aopt beats random plans") {
  const auto cov = sliding_block_covariance(12, SlidingBlockSpec(4, 1.0, 0.3));
  Eigen::LLT<Matrix> llt(cov);
  const Matrix cov_inverse = llt.solve(Matrix::Identity(12, 12));
  const auto result = aopt_search(FieldLayout(1, 12), 4, 3, cov, 7, 20000);
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> labels;
    for (int h = 0; h < 4; ++h)
      for (int k = 0; k < 3; ++k) labels.push_back(h);
    rng.shuffle(labels);
    CHECK(result.criterion <= aopt_criterion(labels, 4, cov_inverse) + 1e-12);
  }
}

TEST_CASE("aopt recovers the periodic layout under sliding-block covariance") {
  const auto cov = sliding_block_covariance(20, SlidingBlockSpec(5, 1.0, 0.1));
  const auto result = aopt_search(FieldLayout(1, 20), 5, 4, cov, 4, 60000);
  for (int p = 0; p + 5 < 20; ++p) {
    CHECK(result.plan.treatment[static_cast<std::size_t>(p)] == result.plan.treatment[static_cast<std::size_t>(p + 5)]);
  }
  CHECK_THROWS_AS(aopt_search(FieldLayout(1, 20), 5, 4, Matrix::Zero(20, 20), 1), Error);
}

// --------------------------------------------------------------------------
// augmented

TEST_CASE("augmented degenerates to a row-column design of checks") {
  const auto result = gen_augmented_rowcolumn(2, 0, 2, 2, 2, 3);
  // the optimized 2x2 arrangement of two checks is the Latin one
  const auto& plan = result.plan;
  CHECK(plan.label_at(0, 0) != plan.label_at(0, 1));
  CHECK(plan.label_at(0, 0) != plan.label_at(1, 0));
  CHECK(result.efficiency.aef == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("augmented test lines appear exactly once") {
  const auto result = gen_augmented_rowcolumn(3, 14, 4, 5, 2, 11, 4000);
  std::map<std::string, int> counts;
  for (const auto& label : result.plan.treatment) counts[label]++;
  int checks = 0, tests = 0;
  for (const auto& [label, count] : counts) {
    if (label[0] == 'C') {
      CHECK(count == 2);
      ++checks;
    } else {
      CHECK(count == 1);
      ++tests;
    }
  }
  CHECK(checks == 3);
  CHECK(tests == 14);
  CHECK_THROWS_WITH_AS(gen_augmented_rowcolumn(3, 10, 4, 5, 2, 1), doctest::Contains("rows*cols"),
                       Error);
}

TEST_CASE("augmented optimization does not lose to random placement") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto random_placement = gen_augmented_rowcolumn(3, 6, 3, 4, 2, seed, 1);
    const auto optimized = gen_augmented_rowcolumn(3, 6, 3, 4, 2, seed, 4000);
    CHECK(optimized.efficiency.aef >= random_placement.efficiency.aef - 1e-12);
  }
}

// --------------------------------------------------------------------------
// p-rep

TEST_CASE("prep rotation quotas") {
  // t=20, 5 environments, 4 duplicates each: every line duplicated once
  std::map<int, int> duplications;
  for (int e = 0; e < 5; ++e) {
    for (int line : prep_duplicated_lines(20, 4, e)) duplications[line]++;
  }
  CHECK(duplications.size() == 20);
  for (const auto& [line, count] : duplications) CHECK(count == 1);

  // t=1000, 5 environments, 200 duplicates: six plots per line in total
  std::map<int, int> big;
  for (int e = 0; e < 5; ++e) {
    for (int line : prep_duplicated_lines(1000, 200, e)) big[line]++;
  }
  CHECK(big.size() == 1000);
  for (const auto& [line, count] : big) CHECK(5 + count == 6);

  // non-divisible case: totals differ by at most one
  std::map<int, int> uneven;
  for (int e = 0; e < 4; ++e) {
    for (int line : prep_duplicated_lines(7, 3, e)) uneven[line]++;
  }
  int low = 99, high = 0;
  for (int line = 0; line < 7; ++line) {
    low = std::min(low, uneven[line]);
    high = std::max(high, uneven[line]);
  }
  CHECK(high - low <= 1);
}

TEST_CASE("prep per-environment counts and structure") {
  const auto result = gen_prep(20, 5, 4, 4, 13, 3000);
  const auto& plan = result.plan;
  CHECK(plan.layout.rows == 5);
  CHECK(plan.layout.cols == 24);
  CHECK(plan.layout.size() == 120);
  CHECK(validate_plan(plan).empty());

  for (int e = 0; e < 5; ++e) {
    std::map<std::string, int> counts;
    for (int j = 0; j < 24; ++j) {
      CHECK(plan.env[static_cast<std::size_t>(plan.layout.index(e, j))] == e);
      counts[plan.label_at(e, j)]++;
    }
    CHECK(counts.size() == 20);  // every line present
    int twice = 0, once = 0;
    for (const auto& [label, count] : counts) {
      if (count == 2) ++twice;
      else if (count == 1) ++once;
      else CHECK(false);
    }
    CHECK(twice == 4);
    CHECK(once == 16);
  }

  // duplicates sit in both replicate groups of their environment
  for (int e = 0; e < 5; ++e) {
    std::map<std::string, std::set<int>> reps_of;
    for (int j = 0; j < 24; ++j) {
      const int p = plan.layout.index(e, j);
      reps_of[plan.treatment[static_cast<std::size_t>(p)]].insert(plan.rep[static_cast<std::size_t>(p)]);
    }
    for (const auto& [label, reps] : reps_of) CHECK(reps.size() >= 1);
  }
  CHECK(result.efficiency.aef > 0.0);
  CHECK(result.efficiency.aef <= 1.0 + 1e-12);

  CHECK_THROWS_AS(gen_prep(20, 5, 21, 4, 1), Error);
  CHECK_THROWS_AS(gen_prep(20, 5, 4, 1, 1), Error);
}

TEST_CASE("prep optimization does not lose to its initial assignment") {
  const auto initial = gen_prep(12, 3, 3, 3, 7, 1);
  const auto optimized = gen_prep(12, 3, 3, 3, 7, 4000);
  CHECK(optimized.efficiency.aef >= initial.efficiency.aef - 1e-12);
}
