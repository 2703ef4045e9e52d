#include "fieldplan/null_analysis.hpp"

#include <Eigen/Cholesky>
#include <map>

#include "fieldplan/distributions.hpp"
#include "fieldplan/linalg.hpp"

namespace fieldplan {

namespace {

Matrix nuisance_columns(const DesignPlan& plan, NullModel kind) {
  const int n = plan.layout.size();
  std::vector<Matrix> blocks;
  blocks.push_back(Matrix::Ones(n, 1));
  switch (kind) {
    case NullModel::crd:
      break;
    case NullModel::rcbd:
      require(plan.has_rep(), "model-structure-mismatch", "rcbd model needs replicate tags");
      blocks.push_back(indicator_columns(plan.rep));
      break;
    case NullModel::rowcol: {
      std::vector<int> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n));
      for (int p = 0; p < n; ++p) {
        rows[static_cast<std::size_t>(p)] = plan.layout.row_of(p);
        cols[static_cast<std::size_t>(p)] = plan.layout.col_of(p);
      }
      blocks.push_back(indicator_columns(rows));
      blocks.push_back(indicator_columns(cols));
      break;
    }
    case NullModel::ancova_position: {
      if (plan.has_rep()) blocks.push_back(indicator_columns(plan.rep));
      Vector position(n);
      for (int p = 0; p < n; ++p) position(p) = p;
      blocks.push_back(position);
      break;
    }
  }
  return hcat(blocks);
}

Matrix treatment_indicators(const DesignPlan& plan) {
  const auto labels = plan.treatments();
  std::map<std::string, int> column_of;
  for (std::size_t i = 0; i < labels.size(); ++i) column_of[labels[i]] = static_cast<int>(i);
  Matrix t_mat = Matrix::Zero(plan.layout.size(), static_cast<Eigen::Index>(labels.size()));
  for (int p = 0; p < plan.layout.size(); ++p)
    t_mat(p, column_of.at(plan.treatment[static_cast<std::size_t>(p)])) = 1.0;
  return t_mat;
}

}  // namespace

NullFit analyze_null(const AnalysisDataset& dataset, const ModelSpec& model) {
  const int n = dataset.plan.layout.size();
  require(dataset.y.size() == n, "dataset-shape-mismatch", "response length must match plot count");

  Matrix nuisance = nuisance_columns(dataset.plan, model.kind);
  Matrix t_mat = treatment_indicators(dataset.plan);
  const int t = static_cast<int>(t_mat.cols());
  require(t >= 2, "too-few-treatments", "null analysis needs at least two treatments");
  Vector y = dataset.y;

  if (model.gls_cov.has_value()) {
    require(model.gls_cov->rows() == n && model.gls_cov->cols() == n, "covariance-shape-mismatch",
            "gls covariance must be n x n");
    Eigen::LLT<Matrix> llt(*model.gls_cov);
    require(llt.info() == Eigen::Success, "singular-covariance",
            "gls covariance must be positive definite");
    const auto whiten = [&](const Matrix& mat) {
      return Matrix(llt.matrixL().solve(mat));
    };
    nuisance = whiten(nuisance);
    t_mat = whiten(t_mat);
    y = llt.matrixL().solve(y);
  }

  const Matrix q_nuisance = residual_projector(nuisance, n);
  const Matrix full = hcat({nuisance, t_mat});
  const int rank_nuisance = matrix_rank(nuisance);
  const int rank_full = matrix_rank(full);

  NullFit fit;
  fit.tdf = rank_full - rank_nuisance;
  fit.rdf = n - rank_full;
  require(fit.tdf >= 1, "singular-model", "treatments are confounded with the nuisance terms");
  require(fit.rdf >= 1, "zero-residual-df", "model leaves no residual degrees of freedom");

  const Matrix q_full = residual_projector(full, n);
  fit.rss = y.dot(q_full * y);
  const double rss_reduced = y.dot(q_nuisance * y);
  fit.tss = std::max(0.0, rss_reduced - fit.rss);

  const double scale = std::max(1.0, y.squaredNorm());
  require(fit.tss + fit.rss > 1e-12 * scale, "degenerate-data",
          "no residual variation; F statistic undefined");

  fit.f = (fit.tss / fit.tdf) / (fit.rss / fit.rdf);
  fit.p_value = 1.0 - f_cdf(fit.f, fit.tdf, fit.rdf);
  fit.tec = fit.tss / (fit.tss + fit.rss);
  fit.null_tec = double(fit.tdf) / (fit.tdf + fit.rdf);

  // adjusted treatment effects and their pairwise differences
  const Matrix info = t_mat.transpose() * q_nuisance * t_mat;
  const Matrix info_pinv = pseudo_inverse_psd(info);
  const Vector effects = info_pinv * t_mat.transpose() * (q_nuisance * y);
  const double sigma2_hat = fit.rss / fit.rdf;
  double sed_sum = 0.0;
  for (int h = 0; h < t; ++h) {
    for (int k = h + 1; k < t; ++k) {
      fit.differences.push_back(effects(h) - effects(k));
      const double var = sigma2_hat * (info_pinv(h, h) + info_pinv(k, k) - 2.0 * info_pinv(h, k));
      fit.seds.push_back(std::sqrt(std::max(0.0, var)));
      sed_sum += fit.seds.back();
    }
  }
  fit.mean_model_sed = sed_sum / fit.seds.size();
  return fit;
}

TecValue tec(const AnalysisDataset& dataset, const ModelSpec& model) {
  const NullFit fit = analyze_null(dataset, model);
  return {fit.tec, fit.null_tec};
}

}  // namespace fieldplan
