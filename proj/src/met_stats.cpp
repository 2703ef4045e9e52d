#include "fieldplan/met_stats.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "fieldplan/distributions.hpp"

namespace fieldplan {

double var_general_mean(const VarianceComponents& vc, const MetDims& dims) {
  const double m = dims.m, n = dims.n, r = dims.r;
  return vc.sigma_f2.value / m + vc.sigma_s2.value / n + vc.sigma_fs2.value / (m * n) +
         vc.sigma2.value / (m * n * r);
}

FlaggedValue est_var_general_mean(const AnovaTable& table, const MetDims& dims) {
  const double value = (table.row("farms").ms + table.row("seasons").ms -
                        table.row("farms-x-seasons").ms) /
                       (double(dims.m) * dims.n * dims.r);
  return {value, value < 0.0};
}

double semivariance(const VarianceComponents& vc, const MetDims& dims) {
  const double m = dims.m, n = dims.n, r = dims.r;
  return vc.sigma_ftau2.value / m + vc.sigma_taus2.value / n + vc.sigma_ftaus2.value / (m * n) +
         vc.sigma2.value / (m * n * r);
}

FlaggedValue est_semivariance(const AnovaTable& table, const MetDims& dims) {
  const double value = (table.row("treatments-x-farms").ms + table.row("treatments-x-seasons").ms -
                        table.row("treatments-x-farms-x-seasons").ms) /
                       (double(dims.m) * dims.n * dims.r);
  return {value, value < 0.0};
}

double heritability(double sigma_tau2, double sv) {
  require(sigma_tau2 >= 0.0 && sv >= 0.0, "negative-heritability-input",
          "heritability needs sigma_tau2 >= 0 and sv >= 0");
  require(sigma_tau2 > 0.0 || sv > 0.0, "zero-heritability-inputs",
          "sigma_tau2 and sv cannot both be zero");
  return sigma_tau2 / (sigma_tau2 + sv);
}

double satterthwaite_df(const std::vector<MsTerm>& terms) {
  require(!terms.empty(), "empty-ms-combination", "need at least one mean square");
  double combination = 0.0;
  double denominator = 0.0;
  for (const auto& term : terms) {
    require(term.df > 0.0, "invalid-df", "mean-square df must be positive");
    require(term.sign == 1 || term.sign == -1, "invalid-sign", "signs must be +1 or -1");
    const double contribution = term.sign * term.ms;
    combination += contribution;
    denominator += contribution * contribution / term.df;
  }
  require(combination > 0.0, "nonpositive-combination",
          "signed mean-square combination must be positive");
  return combination * combination / denominator;
}

TreatmentTest met_treatment_test(const AnovaTable& table) {
  const auto& t_row = table.row("treatments");
  const auto& tf = table.row("treatments-x-farms");
  const auto& ts = table.row("treatments-x-seasons");
  const auto& tfs = table.row("treatments-x-farms-x-seasons");
  TreatmentTest test;
  test.ndf = static_cast<double>(t_row.df);
  test.denominator = tf.ms + ts.ms - tfs.ms;
  require(test.denominator > 0.0, "nonpositive-combination",
          "effective error mean square is not positive");
  test.ddf = satterthwaite_df({{tf.ms, double(tf.df), +1},
                               {ts.ms, double(ts.df), +1},
                               {tfs.ms, double(tfs.df), -1}});
  test.f = t_row.ms / test.denominator;
  test.p_value = 1.0 - f_cdf(test.f, test.ndf, test.ddf);
  return test;
}

Rank1Fit rank1_fit(const Matrix& table) {
  require(table.rows() >= 2 && table.cols() >= 2, "table-too-small",
          "rank-1 fit needs at least a 2x2 table");
  require(table.allFinite(), "non-finite-table", "table entries must be finite");
  Rank1Fit fit;
  if (table.isZero(0.0)) {
    fit.alpha = Vector::Zero(table.rows());
    fit.beta = Vector::Zero(table.cols());
    fit.residual_ss = 0.0;
    return fit;
  }
  Eigen::JacobiSVD<Matrix> svd(table, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector u = svd.matrixU().col(0);
  Vector v = svd.matrixV().col(0);
  // sign convention: first nonzero entry of beta positive
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0.0) {
        u = -u;
        v = -v;
      }
      break;
    }
  }
  fit.alpha = svd.singularValues()(0) * u;
  fit.beta = v;
  fit.residual_ss = (table - fit.alpha * fit.beta.transpose()).squaredNorm();
  return fit;
}

}  // namespace fieldplan
