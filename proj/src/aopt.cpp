#include "fieldplan/aopt.hpp"

#include <Eigen/Cholesky>
#include <limits>

#include "fieldplan/linalg.hpp"
#include "fieldplan/rng.hpp"

namespace fieldplan {

double aopt_criterion(const std::vector<int>& label_of, int t, const Matrix& cov_inverse) {
  const int n = static_cast<int>(label_of.size());
  Matrix info = Matrix::Zero(t, t);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) info(label_of[static_cast<std::size_t>(p)], label_of[static_cast<std::size_t>(q)]) += cov_inverse(p, q);
  Eigen::LLT<Matrix> llt(info);
  require(llt.info() == Eigen::Success, "disconnected-design", "treatment information is singular");
  const Matrix effect_cov = llt.solve(Matrix::Identity(t, t));
  return mean_pairwise_variance(effect_cov);
}

AoptResult aopt_search(const FieldLayout& layout, int t, int r, const Matrix& cov,
                       std::uint64_t seed, std::int64_t max_iters) {
  const int n = t * r;
  require(layout.rows == 1 && layout.cols == n, "layout-shape-mismatch",
          "aopt search needs a 1x(t*r) strip");
  require(cov.rows() == n && cov.cols() == n, "covariance-shape-mismatch",
          "covariance must be n_plots x n_plots");
  Eigen::LLT<Matrix> llt(cov);
  require(llt.info() == Eigen::Success, "singular-covariance",
          "plot covariance must be positive definite");
  const Matrix cov_inverse = llt.solve(Matrix::Identity(n, n));

  Rng rng(seed);
  std::vector<int> best_labels;
  double best = std::numeric_limits<double>::infinity();
  std::int64_t evaluations = 0;

  while (evaluations < max_iters) {
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (int h = 0; h < t; ++h)
      for (int k = 0; k < r; ++k) labels.push_back(h);
    rng.shuffle(labels);
    double current = aopt_criterion(labels, t, cov_inverse);
    ++evaluations;

    bool improved = true;
    while (improved && evaluations < max_iters) {
      improved = false;
      std::vector<std::pair<int, int>> pairs;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
      rng.shuffle(pairs);
      for (const auto& [i, j] : pairs) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) continue;
        std::swap(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(j)]);
        const double candidate = aopt_criterion(labels, t, cov_inverse);
        ++evaluations;
        if (candidate < current - 1e-12) {
          current = candidate;
          improved = true;
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

  const auto names = default_labels(t);
  AoptResult result;
  result.plan.layout = layout;
  result.plan.treatment.resize(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) result.plan.treatment[static_cast<std::size_t>(p)] = names[static_cast<std::size_t>(best_labels[static_cast<std::size_t>(p)])];
  result.plan.design_class = "aopt";
  result.plan.seed = seed;
  result.criterion = best;
  result.evaluations = evaluations;
  return result;
}

}  // namespace fieldplan
