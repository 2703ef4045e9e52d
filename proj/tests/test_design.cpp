#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "fieldplan/design.hpp"
#include "fieldplan/distributions.hpp"
#include "fieldplan/linalg.hpp"

using namespace fieldplan;

namespace {

std::string label_string(const DesignPlan& plan) {
  std::string out;
  for (const auto& label : plan.treatment) out += label;
  return out;
}

std::map<std::string, int> label_counts(const DesignPlan& plan) {
  std::map<std::string, int> counts;
  for (const auto& label : plan.treatment) counts[label]++;
  return counts;
}

// chi-square goodness of fit against the uniform distribution over `cells`
// outcomes; returns the p-value.
double uniform_gof_pvalue(const std::map<std::string, int>& observed, long cells, int draws) {
  const double expected = double(draws) / cells;
  double stat = 0.0;
  long seen = 0;
  for (const auto& [key, count] : observed) {
    stat += (count - expected) * (count - expected) / expected;
    ++seen;
  }
  stat += (cells - seen) * expected;  // unobserved outcomes
  return 1.0 - chi_squared_cdf(stat, double(cells - 1));
}

}  // namespace

TEST_CASE("crd single treatment is constant") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    const auto plan = gen_crd(1, 3, FieldLayout(1, 3), seed);
    CHECK(label_string(plan) == "AAA");
  }
}

TEST_CASE("crd counts and errors") {
  const auto plan = gen_crd(5, 4, FieldLayout(1, 20), 7);
  for (const auto& [label, count] : label_counts(plan)) CHECK(count == 4);
  CHECK(label_counts(plan).size() == 5);
  CHECK_THROWS_WITH_AS(gen_crd(5, 4, FieldLayout(1, 19), 7), doctest::Contains("plot"), Error);
  // deterministic given seed
  CHECK(label_string(gen_crd(5, 4, FieldLayout(1, 20), 7)) == label_string(plan));
  CHECK(label_string(gen_crd(5, 4, FieldLayout(1, 20), 8)) != label_string(plan));
}

TEST_CASE("crd randomization is uniform over the permutation set") {
  // t=3, r=1: six equally likely arrangements
  for (std::uint64_t meta_seed = 1; meta_seed <= 10; ++meta_seed) {
    std::map<std::string, int> observed;
    Rng meta(meta_seed);
    const int draws = 3000;
    for (int i = 0; i < draws; ++i) {
      observed[label_string(gen_crd(3, 1, FieldLayout(1, 3), meta.bits()))]++;
    }
    CHECK(uniform_gof_pvalue(observed, 6, draws) > 0.01);
  }
}

TEST_CASE("rcbd blocks are permutations") {
  const auto tiny = gen_rcbd(2, 1, FieldLayout(1, 2), 3);
  CHECK((label_string(tiny) == "AB" || label_string(tiny) == "BA"));

  const auto plan = gen_rcbd(5, 4, FieldLayout(1, 20), 11);
  for (int b = 0; b < 4; ++b) {
    std::set<std::string> in_block;
    for (int k = 0; k < 5; ++k) {
      CHECK(plan.rep[static_cast<std::size_t>(b * 5 + k)] == b);
      in_block.insert(plan.treatment[static_cast<std::size_t>(b * 5 + k)]);
    }
    CHECK(in_block.size() == 5);
  }
  CHECK(validate_plan(plan).empty());
  // randomization set size for t=5, r=4 is (5!)^4
  CHECK(std::pow(120.0, 4) == 207360000.0);
  CHECK_THROWS_AS(gen_rcbd(5, 4, FieldLayout(1, 21), 0), Error);
}

TEST_CASE("rcbd per-block randomization is independent and uniform") {
  // t=2, r=2: four equally likely plans
  for (std::uint64_t meta_seed = 1; meta_seed <= 10; ++meta_seed) {
    std::map<std::string, int> observed;
    Rng meta(meta_seed ^ 0xABCDULL);
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
      observed[label_string(gen_rcbd(2, 2, FieldLayout(1, 4), meta.bits()))]++;
    }
    CHECK(uniform_gof_pvalue(observed, 4, draws) > 0.01);
  }
}

TEST_CASE("column-major rcbd blocks") {
  const auto plan = gen_rcbd(3, 2, FieldLayout(3, 2), 5, BlockOrientation::col_major);
  // blocks are the two columns
  for (int j = 0; j < 2; ++j) {
    std::set<std::string> in_block;
    for (int i = 0; i < 3; ++i) {
      CHECK(plan.rep[static_cast<std::size_t>(plan.layout.index(i, j))] == j);
      in_block.insert(plan.label_at(i, j));
    }
    CHECK(in_block.size() == 3);
  }
}

TEST_CASE("shift squares match the classical constructions") {
  // knight's move, step 2: ABCDE / CDEAB / EABCD / BCDEA / DEABC
  const auto knight = shift_square(5, 2);
  const std::vector<std::uint8_t> expected_knight = {0, 1, 2, 3, 4, 2, 3, 4, 0, 1, 4, 0, 1,
                                                     2, 3, 1, 2, 3, 4, 0, 3, 4, 0, 1, 2};
  CHECK(knight == expected_knight);
  CHECK(is_shift_square(knight, 5, LatinKind::knut_vik));
  CHECK_FALSE(is_shift_square(knight, 5, LatinKind::diagonal));

  // diagonal, step 1: ABCDE / BCDEA / CDEAB / DEABC / EABCD
  const auto diagonal = shift_square(5, 1);
  const std::vector<std::uint8_t> expected_diagonal = {0, 1, 2, 3, 4, 1, 2, 3, 4, 0, 2, 3, 4,
                                                       0, 1, 3, 4, 0, 1, 2, 4, 0, 1, 2, 3};
  CHECK(diagonal == expected_diagonal);
  CHECK(is_shift_square(diagonal, 5, LatinKind::diagonal));
  CHECK_FALSE(is_shift_square(diagonal, 5, LatinKind::knut_vik));
}

TEST_CASE("latin class steps") {
  CHECK(latin_shift_steps(LatinKind::knut_vik, 5) == std::vector<int>{2, 3});
  CHECK(latin_shift_steps(LatinKind::knut_vik, 4).empty());
  CHECK(latin_shift_steps(LatinKind::knut_vik, 7) == std::vector<int>{2, 3, 4, 5});
  CHECK(latin_shift_steps(LatinKind::diagonal, 5) == std::vector<int>{1, 4});
  CHECK_THROWS_WITH_AS(gen_latin(4, {LatinKind::knut_vik}, 0),
                       doctest::Contains("no valid shift step"), Error);
}

TEST_CASE("latin square enumeration counts per class") {
  // enumeration oracle: all order-5 squares, filtered by class membership
  const auto& squares = enumerate_latin_squares(5);
  CHECK(squares.size() == 161280);
  long knight = 0, diagonal = 0;
  for (const auto& square : squares) {
    if (is_shift_square(square, 5, LatinKind::knut_vik)) ++knight;
    if (is_shift_square(square, 5, LatinKind::diagonal)) ++diagonal;
  }
  // 120 base rows x 2 steps, and the classes are disjoint
  CHECK(knight == 240);
  CHECK(diagonal == 240);
  CHECK(enumerate_latin_squares(3).size() == 12);
  CHECK(enumerate_latin_squares(4).size() == 576);
}

TEST_CASE("latin generators stay in class and are latin") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (LatinKind kind : {LatinKind::full, LatinKind::knut_vik, LatinKind::diagonal}) {
      const auto plan = gen_latin(5, {kind}, seed);
      // each treatment once per row and column
      for (int i = 0; i < 5; ++i) {
        std::set<std::string> row, col;
        for (int j = 0; j < 5; ++j) {
          row.insert(plan.label_at(i, j));
          col.insert(plan.label_at(j, i));
        }
        CHECK(row.size() == 5);
        CHECK(col.size() == 5);
      }
      std::vector<std::uint8_t> square(25);
      for (int p = 0; p < 25; ++p) square[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(plan.treatment[static_cast<std::size_t>(p)][0] - 'A');
      if (kind != LatinKind::full) {
        CHECK(is_shift_square(square, 5, kind));
      }
    }
  }
}

TEST_CASE("full latin class sampling is uniform at order 3") {
  for (std::uint64_t meta_seed = 1; meta_seed <= 10; ++meta_seed) {
    std::map<std::string, int> observed;
    Rng meta(meta_seed ^ 0x5EEDULL);
    const int draws = 6000;
    for (int i = 0; i < draws; ++i) {
      observed[label_string(gen_latin(3, {LatinKind::full}, meta.bits()))]++;
    }
    CHECK(uniform_gof_pvalue(observed, 12, draws) > 0.01);
  }
}

TEST_CASE("order 6 full latin sampling produces valid squares") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto plan = gen_latin(6, {LatinKind::full}, seed);
    for (int i = 0; i < 6; ++i) {
      std::set<std::string> row, col;
      for (int j = 0; j < 6; ++j) {
        row.insert(plan.label_at(i, j));
        col.insert(plan.label_at(j, i));
      }
      CHECK(row.size() == 6);
      CHECK(col.size() == 6);
    }
  }
  CHECK_THROWS_AS(gen_latin(7, {LatinKind::full}, 0), Error);
}

TEST_CASE("systematic layouts") {
  CHECK(label_string(gen_systematic(5, 4, SystematicPattern::repeat)) ==
        "ABCDEABCDEABCDEABCDE");
  const auto sandwich = gen_systematic(5, 4, SystematicPattern::sandwich);
  CHECK(label_string(sandwich) == "ABCDEEDCBAABCDEEDCBA");
  // every treatment's mean 1-based plot position is 10.5
  std::map<std::string, double> position_sum;
  for (int p = 0; p < 20; ++p) position_sum[sandwich.treatment[static_cast<std::size_t>(p)]] += p + 1;
  for (const auto& [label, sum] : position_sum) CHECK(sum / 4.0 == doctest::Approx(10.5));

  CHECK(label_string(gen_systematic(1, 4, SystematicPattern::repeat)) == "AAAA");
  CHECK_THROWS_WITH_AS(gen_systematic(5, 3, SystematicPattern::sandwich),
                       doctest::Contains("even"), Error);

  // label permutation keeps the pattern structure
  const auto permuted = gen_systematic(5, 4, SystematicPattern::repeat, true, 9);
  for (int p = 0; p < 15; ++p) {
    CHECK(permuted.treatment[static_cast<std::size_t>(p)] == permuted.treatment[static_cast<std::size_t>(p + 5)]);
  }
}

namespace {

// Independent A-criterion: explicit design matrix, pseudo-inverse of the full
// normal equations, average variance of pairwise treatment contrasts.
double brute_force_a_value(const std::vector<int>& label_of, int t, int r) {
  const int n = t * r;
  Matrix x = Matrix::Zero(n, 1 + r + t + 1);
  for (int p = 0; p < n; ++p) {
    x(p, 0) = 1.0;
    x(p, 1 + p / t) = 1.0;
    x(p, 1 + r + label_of[static_cast<std::size_t>(p)]) = 1.0;
    x(p, 1 + r + t) = p;
  }
  const Matrix xtx_pinv = pseudo_inverse_psd(x.transpose() * x);
  double total = 0.0;
  int pairs = 0;
  for (int h = 0; h < t; ++h)
    for (int k = h + 1; k < t; ++k) {
      Vector contrast = Vector::Zero(1 + r + t + 1);
      contrast(1 + r + h) = 1.0;
      contrast(1 + r + k) = -1.0;
      total += contrast.dot(xtx_pinv * contrast);
      ++pairs;
    }
  return total / pairs;
}

}  // namespace

TEST_CASE("positional covariate set matches the exhaustive oracle at t=2 r=2") {
  const auto result = positional_covariate_set(2, 2, FieldLayout(1, 4));
  CHECK(result.arrangements_scored == 2);  // first block canonical, second free

  // oracle: score both arrangements AB|AB and AB|BA by brute force
  const double value_abab = brute_force_a_value({0, 1, 0, 1}, 2, 2);
  const double value_abba = brute_force_a_value({0, 1, 1, 0}, 2, 2);
  const double best = std::min(value_abab, value_abba);
  CHECK(result.criterion == doctest::Approx(best).epsilon(1e-10));
  // AB|BA balances positions, so it should beat AB|AB
  CHECK(value_abba < value_abab);
  REQUIRE(result.optima.size() == 1);
  std::string labels = label_string(result.optima[0]);
  CHECK(labels == "ABBA");
}

TEST_CASE("positional covariate optima share the criterion value") {
  const auto result = positional_covariate_set(3, 2, FieldLayout(1, 6));
  CHECK(result.arrangements_scored == 6);
  for (const auto& plan : result.optima) {
    std::vector<int> label_of(6);
    for (int p = 0; p < 6; ++p) label_of[static_cast<std::size_t>(p)] = plan.treatment[static_cast<std::size_t>(p)][0] - 'A';
    CHECK(brute_force_a_value(label_of, 3, 2) == doctest::Approx(result.criterion).epsilon(1e-10));
  }
  CHECK_THROWS_WITH_AS(positional_covariate_set(5, 5, FieldLayout(1, 25)),
                       doctest::Contains("t*r <= 20"), Error);
}
