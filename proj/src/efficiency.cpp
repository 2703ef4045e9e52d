#include "fieldplan/efficiency.hpp"

#include <map>
#include <set>

#include "fieldplan/linalg.hpp"

namespace fieldplan {

namespace {

Matrix treatment_indicators(const DesignPlan& plan) {
  const auto labels = plan.treatments();
  std::map<std::string, int> column_of;
  for (std::size_t i = 0; i < labels.size(); ++i) column_of[labels[i]] = static_cast<int>(i);
  Matrix t_mat = Matrix::Zero(plan.layout.size(), static_cast<Eigen::Index>(labels.size()));
  for (int p = 0; p < plan.layout.size(); ++p) {
    t_mat(p, column_of.at(plan.treatment[static_cast<std::size_t>(p)])) = 1.0;
  }
  return t_mat;
}

Matrix nuisance_columns(const DesignPlan& plan, const EfficiencyModel& model) {
  const int n = plan.layout.size();
  std::vector<Matrix> blocks;
  blocks.push_back(Matrix::Ones(n, 1));
  if (model.use_env && plan.has_env()) blocks.push_back(indicator_columns(plan.env));
  if (model.use_rep && plan.has_rep()) blocks.push_back(indicator_columns(plan.rep));
  if (model.use_block && plan.has_block()) blocks.push_back(indicator_columns(plan.block));
  if (model.use_rows) {
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) rows[static_cast<std::size_t>(p)] = plan.layout.row_of(p);
    blocks.push_back(indicator_columns(rows));
  }
  if (model.use_cols) {
    std::vector<int> cols(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) cols[static_cast<std::size_t>(p)] = plan.layout.col_of(p);
    blocks.push_back(indicator_columns(cols));
  }
  return hcat(blocks);
}

}  // namespace

Matrix treatment_information(const DesignPlan& plan, const EfficiencyModel& model) {
  const Matrix t_mat = treatment_indicators(plan);
  const Matrix q = residual_projector(nuisance_columns(plan, model), plan.layout.size());
  return t_mat.transpose() * q * t_mat;
}

EfficiencyReport efficiency_factor(const DesignPlan& plan, const EfficiencyModel& model) {
  const Matrix t_mat = treatment_indicators(plan);
  const int t = static_cast<int>(t_mat.cols());
  require(t >= 2, "too-few-treatments", "efficiency factor needs at least two treatments");
  const Matrix q = residual_projector(nuisance_columns(plan, model), plan.layout.size());
  const Matrix info = t_mat.transpose() * q * t_mat;
  Vector replication = t_mat.colwise().sum();
  Vector scale = replication.cwiseSqrt().cwiseInverse();
  const Matrix scaled = scale.asDiagonal() * info * scale.asDiagonal();

  const auto eigenvalues = nonzero_eigenvalues(scaled);
  require(static_cast<int>(eigenvalues.size()) == t - 1, "disconnected-design",
          "treatment information has rank " + std::to_string(eigenvalues.size()) + ", need " +
              std::to_string(t - 1));

  double inverse_sum = 0.0;
  for (double e : eigenvalues) inverse_sum += 1.0 / e;
  EfficiencyReport report;
  report.eigenvalues = eigenvalues;
  report.aef = (t - 1) / inverse_sum;

  // John-Williams style bound for binary equireplicate plans with equal block
  // sizes: aef <= t(k-1) / ((t-1)k).
  if (plan.has_block()) {
    std::map<int, int> block_size;
    std::map<int, std::set<std::string>> block_labels;
    bool binary = true;
    for (int p = 0; p < plan.layout.size(); ++p) {
      const int b = plan.block[static_cast<std::size_t>(p)];
      block_size[b]++;
      if (!block_labels[b].insert(plan.treatment[static_cast<std::size_t>(p)]).second) binary = false;
    }
    bool equal_k = true;
    const int k = block_size.begin()->second;
    for (const auto& [b, size] : block_size) equal_k = equal_k && size == k;
    bool equireplicate = true;
    for (Eigen::Index h = 1; h < replication.size(); ++h) {
      equireplicate = equireplicate && replication(h) == replication(0);
    }
    if (binary && equal_k && equireplicate && k >= 2) {
      report.upper_bound = double(t) * (k - 1) / (double(t - 1) * k);
    }
  }
  return report;
}

}  // namespace fieldplan
