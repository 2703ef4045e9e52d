#include "fieldplan/nbed.hpp"

#include <algorithm>
#include <map>

#include "fieldplan/rng.hpp"

namespace fieldplan {

namespace {

void check_constraints(const NbEdConstraints& c, int rows, int cols, int r) {
  require(c.max_row_adjacency >= 1, "invalid-nbed-constraints", "max_row_adjacency must be >= 1");
  require(c.ed_rows >= 1 && c.ed_cols >= 1, "invalid-nbed-constraints", "coarse grid must be >= 1x1");
  require(rows % c.ed_rows == 0 && cols % c.ed_cols == 0, "ed-cells-do-not-tile",
          "ed_rows x ed_cols must tile the layout");
  require(c.ed_cap * c.ed_rows * c.ed_cols >= r, "infeasible-ed-constraints",
          "ed_cap * cells < replicates; no assignment can satisfy ED");
}

int violations(const std::vector<int>& label_of, int rows, int cols, int t, int,
               const NbEdConstraints& c) {
  int total = 0;
  std::map<std::pair<int, int>, int> adjacency;
  auto count_pair = [&](int a, int b) {
    if (a == b) return;
    adjacency[{std::min(a, b), std::max(a, b)}]++;
  };
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j)
      count_pair(label_of[static_cast<std::size_t>(i * cols + j)], label_of[static_cast<std::size_t>(i * cols + j + 1)]);
  if (c.include_col_adjacency) {
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i + 1 < rows; ++i)
        count_pair(label_of[static_cast<std::size_t>(i * cols + j)], label_of[static_cast<std::size_t>((i + 1) * cols + j)]);
  }
  for (const auto& [pair, count] : adjacency) total += std::max(0, count - c.max_row_adjacency);

  const int cell_rows = rows / c.ed_rows;
  const int cell_cols = cols / c.ed_cols;
  std::vector<int> cell_count(static_cast<std::size_t>(c.ed_rows * c.ed_cols * t), 0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int cell = (i / cell_rows) * c.ed_cols + j / cell_cols;
      cell_count[static_cast<std::size_t>(cell * t + label_of[static_cast<std::size_t>(i * cols + j)])]++;
    }
  }
  for (int count : cell_count) total += std::max(0, count - c.ed_cap);
  return total;
}

}  // namespace

int nbed_violations(const DesignPlan& plan, const NbEdConstraints& constraints) {
  const auto labels = plan.treatments();
  std::map<std::string, int> id_of;
  for (std::size_t i = 0; i < labels.size(); ++i) id_of[labels[i]] = static_cast<int>(i);
  std::vector<int> label_of(static_cast<std::size_t>(plan.layout.size()));
  int max_rep = 0;
  std::map<int, int> reps;
  for (int p = 0; p < plan.layout.size(); ++p) {
    label_of[static_cast<std::size_t>(p)] = id_of.at(plan.treatment[static_cast<std::size_t>(p)]);
    max_rep = std::max(max_rep, ++reps[label_of[static_cast<std::size_t>(p)]]);
  }
  check_constraints(constraints, plan.layout.rows, plan.layout.cols, max_rep);
  return violations(label_of, plan.layout.rows, plan.layout.cols, static_cast<int>(labels.size()), max_rep,
                    constraints);
}

NbEdResult nbed_search(int t, int rows, int cols, int r, const NbEdConstraints& constraints,
                       std::uint64_t seed, std::int64_t max_iters) {
  require(t >= 2 && r >= 1, "invalid-dims", "need t >= 2 and r >= 1");
  require(rows * cols == t * r, "plot-count-mismatch", "rows*cols must equal t*r");
  check_constraints(constraints, rows, cols, r);

  const int n = rows * cols;
  Rng rng(seed);
  std::vector<int> best_labels;
  int best = std::numeric_limits<int>::max();
  std::int64_t evaluations = 0;

  while (evaluations < max_iters && best > 0) {
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int h = 0; h < t; ++h)
      for (int k = 0; k < r; ++k) labels.push_back(h);
    rng.shuffle(labels);
    int current = violations(labels, rows, cols, t, r, constraints);
    ++evaluations;

    bool improved = true;
    while (improved && current > 0 && evaluations < max_iters) {
      improved = false;
      std::vector<std::pair<int, int>> pairs;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      rng.shuffle(pairs);
      for (const auto& [i, j] : pairs) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
        std::swap(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
        const int candidate = violations(labels, rows, cols, t, r, constraints);
        ++evaluations;
        if (candidate < current) {
          current = candidate;
          improved = true;
          if (current == 0) break;
        } else {
          std::swap(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
        }
        if (evaluations >= max_iters) break;
      }
    }
    if (current < best) {
      best = current;
      best_labels = labels;
    }
  }

  require(best == 0, "nbed-search-failed",
          "no admissible design within iteration budget; best violation count = " +
              std::to_string(best));

  const auto names = default_labels(t);
  NbEdResult result;
  result.plan.layout = FieldLayout(rows, cols);
  result.plan.treatment.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) result.plan.treatment[static_cast<std::size_t>(p)] = names[static_cast<std::size_t>(best_labels[static_cast<std::size_t>(p)])];
  result.plan.design_class = "nbed";
  result.plan.seed = seed;
  result.evaluations = evaluations;
  return result;
}

}  // namespace fieldplan
