#include "fieldplan/design.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

#include "fieldplan/linalg.hpp"
#include "fieldplan/rng.hpp"

namespace fieldplan {

namespace {

int gcd(int a, int b) { return b == 0 ? a : gcd(b, a % b); }

// Plot visit order for contiguous blocking.
std::vector<int> plot_order(const FieldLayout& layout, BlockOrientation orientation) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(layout.size()));
  if (orientation == BlockOrientation::row_major) {
    for (int p = 0; p < layout.size(); ++p) order.push_back(p);
  } else {
    for (int j = 0; j < layout.cols; ++j)
      for (int i = 0; i < layout.rows; ++i) order.push_back(layout.index(i, j));
  }
  return order;
}

void latin_dfs(int t, int row, std::vector<std::uint8_t>& square, std::vector<std::uint32_t>& col_used,
               std::vector<std::vector<std::uint8_t>>& out) {
  if (row == t) {
    out.push_back(square);
    return;
  }
  std::vector<std::uint8_t> values(static_cast<std::size_t>(t));
  std::iota(values.begin(), values.end(), std::uint8_t{0});
  // recurse over permutations of the current row, column-mask pruned
  std::vector<std::uint8_t> row_values(static_cast<std::size_t>(t), 0);
  std::uint32_t row_used = 0;
  auto place = [&](auto&& self, int col) -> void {
    if (col == t) {
      for (int j = 0; j < t; ++j) {
        square[static_cast<std::size_t>(row * t + j)] = row_values[static_cast<std::size_t>(j)];
        col_used[static_cast<std::size_t>(j)] |= 1u << row_values[static_cast<std::size_t>(j)];
      }
      latin_dfs(t, row + 1, square, col_used, out);
      for (int j = 0; j < t; ++j) {
        col_used[static_cast<std::size_t>(j)] &= ~(1u << row_values[static_cast<std::size_t>(j)]);
      }
      return;
    }
    for (std::uint8_t v = 0; v < t; ++v) {
      const std::uint32_t bit = 1u << v;
      if ((row_used & bit) || (col_used[static_cast<std::size_t>(col)] & bit)) continue;
      row_values[static_cast<std::size_t>(col)] = v;
      row_used |= bit;
      self(self, col + 1);
      row_used &= ~bit;
    }
  };
  place(place, 0);
}

DesignPlan square_to_plan(const std::vector<std::uint8_t>& square, int t,
                          const std::vector<std::string>& labels) {
  DesignPlan plan;
  plan.layout = FieldLayout(t, t);
  plan.treatment.resize(static_cast<std::size_t>(t * t));
  for (int p = 0; p < t * t; ++p) {
    plan.treatment[static_cast<std::size_t>(p)] = labels[square[static_cast<std::size_t>(p)]];
  }
  return plan;
}

}  // namespace

std::vector<int> latin_shift_steps(LatinKind kind, int t) {
  std::vector<int> steps;
  if (kind == LatinKind::diagonal) {
    steps.push_back(1);
    if (t >= 3) steps.push_back(t - 1);
    return steps;
  }
  if (kind == LatinKind::knut_vik) {
    for (int s = 2; s <= t - 2; ++s) {
      if (gcd(s, t) == 1) steps.push_back(s);
    }
  }
  return steps;
}

DesignPlan gen_crd(int t, int r, const FieldLayout& layout, std::uint64_t seed) {
  require(t >= 1 && r >= 1, "invalid-dims", "t and r must be >= 1");
  require(layout.size() == t * r, "plot-count-mismatch",
          "layout has " + std::to_string(layout.size()) + " plots, need t*r = " + std::to_string(t * r));
  const auto labels = default_labels(t);
  std::vector<std::string> assignment;
  assignment.reserve(static_cast<std::size_t>(t * r));
  for (const auto& label : labels)
    for (int k = 0; k < r; ++k) assignment.push_back(label);
  Rng rng(seed);
  rng.shuffle(assignment);
  DesignPlan plan;
  plan.layout = layout;
  plan.treatment = std::move(assignment);
  plan.design_class = "crd";
  plan.seed = seed;
  return plan;
}

DesignPlan gen_rcbd(int t, int r, const FieldLayout& layout, std::uint64_t seed,
                    BlockOrientation orientation) {
  require(t >= 1 && r >= 1, "invalid-dims", "t and r must be >= 1");
  require(layout.size() == t * r, "block-decomposition-mismatch",
          "layout has " + std::to_string(layout.size()) + " plots, cannot form " + std::to_string(r) +
              " blocks of " + std::to_string(t));
  const auto labels = default_labels(t);
  const auto order = plot_order(layout, orientation);
  Rng rng(seed);
  DesignPlan plan;
  plan.layout = layout;
  plan.treatment.resize(static_cast<std::size_t>(t * r));
  plan.rep.resize(static_cast<std::size_t>(t * r));
  for (int b = 0; b < r; ++b) {
    auto perm = rng.permutation(t);
    for (int k = 0; k < t; ++k) {
      const int plot = order[static_cast<std::size_t>(b * t + k)];
      plan.treatment[static_cast<std::size_t>(plot)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
      plan.rep[static_cast<std::size_t>(plot)] = b;
    }
  }
  plan.design_class = "rcbd";
  plan.seed = seed;
  return plan;
}

const std::vector<std::vector<std::uint8_t>>& enumerate_latin_squares(int t) {
  require(t >= 1 && t <= 5, "latin-enumeration-too-large",
          "exhaustive Latin square enumeration is limited to t <= 5");
  static std::mutex mutex;
  static std::map<int, std::vector<std::vector<std::uint8_t>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(t);
  if (it == cache.end()) {
    std::vector<std::vector<std::uint8_t>> squares;
    std::vector<std::uint8_t> square(static_cast<std::size_t>(t * t), 0);
    std::vector<std::uint32_t> col_used(static_cast<std::size_t>(t), 0);
    latin_dfs(t, 0, square, col_used, squares);
    it = cache.emplace(t, std::move(squares)).first;
  }
  return it->second;
}

std::vector<std::uint8_t> shift_square(int t, int step) {
  std::vector<std::uint8_t> square(static_cast<std::size_t>(t * t));
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      square[static_cast<std::size_t>(i * t + j)] = static_cast<std::uint8_t>((j + step * i) % t);
  return square;
}

bool is_shift_square(const std::vector<std::uint8_t>& square, int t, LatinKind kind) {
  const auto steps = latin_shift_steps(kind, t);
  for (int s : steps) {
    bool match = true;
    for (int i = 0; i < t && match; ++i) {
      for (int j = 0; j < t && match; ++j) {
        if (square[static_cast<std::size_t>(i * t + j)] !=
            square[static_cast<std::size_t>((j + s * i) % t)]) {
          match = false;
        }
      }
    }
    if (match) return true;
  }
  return false;
}

DesignPlan gen_latin(int t, LatinClass latin_class, std::uint64_t seed) {
  require(t >= 2, "invalid-dims", "Latin square needs t >= 2");
  const auto labels = default_labels(t);
  Rng rng(seed);
  DesignPlan plan;

  if (latin_class.kind == LatinKind::full) {
    if (t <= 5) {
      const auto& squares = enumerate_latin_squares(t);
      const auto& square = squares[rng.uniform_below(squares.size())];
      plan = square_to_plan(square, t, labels);
    } else {
      require(t == 6, "latin-full-too-large", "uniform full-class sampling supported for t <= 6");
      // Row-by-row rejection: draw each row as a uniform permutation, retry
      // the row on column conflicts, restart the square on a dead end.
      std::vector<std::uint8_t> square(static_cast<std::size_t>(t * t), 0);
      bool done = false;
      while (!done) {
        std::vector<std::uint32_t> col_used(static_cast<std::size_t>(t), 0);
        done = true;
        for (int i = 0; i < t && done; ++i) {
          bool placed = false;
          for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            const auto perm = rng.permutation(t);
            bool ok = true;
            for (int j = 0; j < t; ++j) {
              if (col_used[static_cast<std::size_t>(j)] & (1u << perm[static_cast<std::size_t>(j)])) {
                ok = false;
                break;
              }
            }
            if (!ok) continue;
            for (int j = 0; j < t; ++j) {
              square[static_cast<std::size_t>(i * t + j)] = static_cast<std::uint8_t>(perm[static_cast<std::size_t>(j)]);
              col_used[static_cast<std::size_t>(j)] |= 1u << perm[static_cast<std::size_t>(j)];
            }
            placed = true;
          }
          if (!placed) done = false;  // dead end, restart the whole square
        }
      }
      plan = square_to_plan(square, t, labels);
    }
  } else {
    const auto steps = latin_shift_steps(latin_class.kind, t);
    require(!steps.empty(), "no-valid-shift-step",
            "no valid shift step for this class at t = " + std::to_string(t));
    const int step = steps[rng.uniform_below(steps.size())];
    const auto base = rng.permutation(t);
    std::vector<std::uint8_t> square(static_cast<std::size_t>(t * t));
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        square[static_cast<std::size_t>(i * t + j)] =
            static_cast<std::uint8_t>(base[static_cast<std::size_t>((j + step * i) % t)]);
    plan = square_to_plan(square, t, labels);
  }

  plan.design_class = latin_class.kind == LatinKind::full      ? "latin"
                      : latin_class.kind == LatinKind::knut_vik ? "latin-knut-vik"
                                                                : "latin-diagonal";
  plan.seed = seed;
  return plan;
}

DesignPlan gen_systematic(int t, int r, SystematicPattern pattern, bool permute_labels,
                          std::uint64_t seed) {
  require(t >= 1 && r >= 1, "invalid-dims", "t and r must be >= 1");
  require(pattern != SystematicPattern::sandwich || r % 2 == 0, "sandwich-odd-replicates",
          "sandwich pattern requires an even number of replicates");
  auto labels = default_labels(t);
  if (permute_labels) {
    Rng rng(seed);
    rng.shuffle(labels);
  }
  DesignPlan plan;
  plan.layout = FieldLayout(1, t * r);
  plan.treatment.resize(static_cast<std::size_t>(t * r));
  plan.rep.resize(static_cast<std::size_t>(t * r));
  for (int c = 0; c < r; ++c) {
    const bool reversed = pattern == SystematicPattern::sandwich && c % 2 == 1;
    for (int k = 0; k < t; ++k) {
      const int plot = c * t + k;
      plan.treatment[static_cast<std::size_t>(plot)] = labels[static_cast<std::size_t>(reversed ? t - 1 - k : k)];
      plan.rep[static_cast<std::size_t>(plot)] = c;
    }
  }
  plan.design_class = pattern == SystematicPattern::repeat ? "systematic-repeat" : "systematic-sandwich";
  plan.seed = permute_labels ? seed : 0;
  return plan;
}

PositionalCovariateResult positional_covariate_set(int t, int r, const FieldLayout& layout) {
  require(t >= 2 && r >= 1, "invalid-dims", "need t >= 2 and r >= 1");
  const int n = t * r;
  require(n <= 20, "enumeration-guard-exceeded", "exhaustive search limited to t*r <= 20");
  require(layout.rows == 1 && layout.cols == n, "layout-shape-mismatch",
          "positional covariate set needs a 1x(t*r) strip");

  // Nuisance space: block indicators plus the linear position covariate.
  std::vector<int> block_tags(static_cast<std::size_t>(n));
  Vector position(n);
  for (int p = 0; p < n; ++p) {
    block_tags[static_cast<std::size_t>(p)] = p / t;
    position(p) = p;
  }
  Matrix nuisance = hcat({indicator_columns(block_tags), position});
  const Matrix q = residual_projector(nuisance, n);

  // All permutations of 0..t-1, lexicographic; block 0 stays canonical.
  std::vector<std::vector<int>> perms;
  {
    std::vector<int> p(static_cast<std::size_t>(t));
    std::iota(p.begin(), p.end(), 0);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  }
  const std::size_t n_perms = perms.size();

  std::vector<std::size_t> digits(static_cast<std::size_t>(r), 0);  // digits[0] fixed at identity
  std::vector<int> label_of(static_cast<std::size_t>(n));
  const Matrix ridge = Matrix::Constant(t, t, 1.0 / t);

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::vector<std::size_t>, double>> kept;
  std::int64_t scored = 0;
  constexpr double tie_tol = 1e-10;

  while (true) {
    for (int b = 0; b < r; ++b) {
      const auto& perm = perms[digits[static_cast<std::size_t>(b)]];
      for (int k = 0; k < t; ++k) label_of[static_cast<std::size_t>(b * t + k)] = perm[static_cast<std::size_t>(k)];
    }
    Matrix info = Matrix::Zero(t, t);
    for (int p = 0; p < n; ++p)
      for (int s = 0; s < n; ++s) info(label_of[static_cast<std::size_t>(p)], label_of[static_cast<std::size_t>(s)]) += q(p, s);
    // tr(C+) = tr((C + J/t)^-1) - 1 when C has the single null vector 1.
    const double trace_pinv = (info + ridge).ldlt().solve(Matrix::Identity(t, t)).trace() - 1.0;
    const double a_value = 2.0 * trace_pinv / (t - 1);
    ++scored;

    if (a_value < best - tie_tol) {
      best = a_value;
      kept.clear();
      kept.emplace_back(digits, a_value);
    } else if (a_value <= best + tie_tol) {
      best = std::min(best, a_value);
      kept.emplace_back(digits, a_value);
    }

    int at = r - 1;
    while (at >= 1 && ++digits[static_cast<std::size_t>(at)] == n_perms) {
      digits[static_cast<std::size_t>(at)] = 0;
      --at;
    }
    if (at < 1) break;
  }

  PositionalCovariateResult result;
  result.criterion = best;
  result.arrangements_scored = scored;
  const auto labels = default_labels(t);
  for (const auto& [arrangement, value] : kept) {
    if (value > best + tie_tol) continue;
    DesignPlan plan;
    plan.layout = layout;
    plan.treatment.resize(static_cast<std::size_t>(n));
    plan.rep.resize(static_cast<std::size_t>(n));
    for (int b = 0; b < r; ++b) {
      const auto& perm = perms[arrangement[static_cast<std::size_t>(b)]];
      for (int k = 0; k < t; ++k) {
        plan.treatment[static_cast<std::size_t>(b * t + k)] = labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
        plan.rep[static_cast<std::size_t>(b * t + k)] = b;
      }
    }
    plan.design_class = "positional-covariate-optimum";
    result.optima.push_back(std::move(plan));
    require(result.optima.size() <= 2'000'000, "optima-set-too-large",
            "optimum set exceeds the materialization cap");
  }
  return result;
}

}  // namespace fieldplan
