#include "fieldplan/augmented.hpp"

#include <limits>

#include "fieldplan/linalg.hpp"
#include "fieldplan/rng.hpp"

namespace fieldplan {

namespace {

// Harmonic mean of the nonzero eigenvalues of the scaled information, or 0
// when the assignment is disconnected (rank below t-1).
double aef_or_zero(const std::vector<int>& label_of, int t, const Matrix& q) {
  const int n = static_cast<int>(label_of.size());
  Matrix info = Matrix::Zero(t, t);
  for (int p = 0; p < n; ++p)
    for (int s = 0; s < n; ++s) info(label_of[static_cast<std::size_t>(p)], label_of[static_cast<std::size_t>(s)]) += q(p, s);
  Vector replication = Vector::Zero(t);
  for (int label : label_of) replication(label) += 1.0;
  const Vector scale = replication.cwiseSqrt().cwiseInverse();
  const auto eigenvalues = nonzero_eigenvalues(scale.asDiagonal() * info * scale.asDiagonal());
  if (static_cast<int>(eigenvalues.size()) != t - 1) return 0.0;
  double inverse_sum = 0.0;
  for (double e : eigenvalues) inverse_sum += 1.0 / e;
  return (t - 1) / inverse_sum;
}

}  // namespace

AugmentedResult gen_augmented_rowcolumn(int checks, int n_test, int rows, int cols, int check_reps,
                                        std::uint64_t seed, std::int64_t max_iters) {
  require(checks >= 1 && check_reps >= 1 && n_test >= 0, "invalid-dims",
          "need checks >= 1, check_reps >= 1, n_test >= 0");
  const int n = rows * cols;
  require(n == checks * check_reps + n_test, "infeasible-counts",
          "rows*cols must equal checks*check_reps + n_test");
  const int t = checks + n_test;
  require(t >= 2, "too-few-treatments", "need at least two distinct lines");

  // Row+column nuisance projection; fixed, since only labels move.
  std::vector<int> row_tags(static_cast<std::size_t>(n)), col_tags(static_cast<std::size_t>(n));
  const FieldLayout layout(rows, cols);
  for (int p = 0; p < n; ++p) {
    row_tags[static_cast<std::size_t>(p)] = layout.row_of(p);
    col_tags[static_cast<std::size_t>(p)] = layout.col_of(p);
  }
  const Matrix q =
      residual_projector(hcat({indicator_columns(row_tags), indicator_columns(col_tags)}), n);

  Rng rng(seed);
  // Labels 0..checks-1 are checks; checks..t-1 are test singletons. Which
  // singleton sits where does not affect the criterion, so swaps only move
  // check replicates and check/test boundaries.
  std::vector<int> best_labels;
  double best = -1.0;
  std::int64_t evaluations = 0;

  while (evaluations < max_iters) {
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int h = 0; h < checks; ++h)
      for (int k = 0; k < check_reps; ++k) labels.push_back(h);
    for (int h = checks; h < t; ++h) labels.push_back(h);
    rng.shuffle(labels);
    double current = aef_or_zero(labels, t, q);
    ++evaluations;

    bool improved = true;
    while (improved && evaluations < max_iters) {
      improved = false;
      std::vector<std::pair<int, int>> pairs;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          // skip pairs of test singletons: pure relabelings
          if (labels[static_cast<std::size_t>(i)] >= checks && labels[static_cast<std::size_t>(j)] >= checks) continue;
          pairs.emplace_back(i, j);
        }
      rng.shuffle(pairs);
      for (const auto& [i, j] : pairs) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
        std::swap(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
        const double candidate = aef_or_zero(labels, t, q);
        ++evaluations;
        if (candidate > current + 1e-12) {
          current = candidate;
          improved = true;
        } else {
          std::swap(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
        }
        if (evaluations >= max_iters) break;
      }
    }
    if (current > best) {
      best = current;
      best_labels = labels;
    }
  }
  require(best > 0.0, "disconnected-design", "no connected augmented layout found within budget");

  // Final uniform placement of the test lines over the test plots.
  std::vector<int> test_ids;
  for (int h = checks; h < t; ++h) test_ids.push_back(h);
  rng.shuffle(test_ids);
  std::size_t next_test = 0;
  const auto check_names = default_labels(checks, "C");
  const auto test_names = default_labels(n_test > 0 ? n_test : 1, "T");

  AugmentedResult result;
  result.plan.layout = layout;
  result.plan.treatment.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    int label = best_labels[static_cast<std::size_t>(p)];
    if (label >= checks) label = test_ids[next_test++];
    result.plan.treatment[static_cast<std::size_t>(p)] =
        label < checks ? check_names[static_cast<std::size_t>(label)] : test_names[static_cast<std::size_t>(label - checks)];
  }
  result.plan.design_class = "augmented-rowcolumn";
  result.plan.seed = seed;
  result.evaluations = evaluations;

  EfficiencyModel model;
  model.use_rows = true;
  model.use_cols = true;
  result.efficiency = efficiency_factor(result.plan, model);
  return result;
}

}  // namespace fieldplan
