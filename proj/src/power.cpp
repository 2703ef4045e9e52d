#include "fieldplan/power.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <set>

#include "fieldplan/distributions.hpp"
#include "fieldplan/linalg.hpp"
#include "fieldplan/met_stats.hpp"

namespace fieldplan {

namespace {

// Joint level id per observation for a factor combination.
std::vector<int> joint_levels(const PowerRequest& req, const std::vector<std::string>& factors) {
  const std::size_t n = req.factors.begin()->second.size();
  std::vector<int> joint(n, 0);
  for (const auto& name : factors) {
    const auto it = req.factors.find(name);
    require(it != req.factors.end(), "unknown-factor", "no factor column '" + name + "'");
    int levels = 0;
    for (int level : it->second) levels = std::max(levels, level + 1);
    for (std::size_t p = 0; p < n; ++p) joint[p] = joint[p] * levels + it->second[p];
  }
  return joint;
}

int level_count(const std::vector<int>& column) {
  std::set<int> levels(column.begin(), column.end());
  return static_cast<int>(levels.size());
}

// Satterthwaite ddf for a treatment contrast in a fully crossed balanced MET
// frame: the effective error is MS_TxF + MS_TxS - MS_TxFxS, evaluated at the
// expected mean squares under the fixed variance parameters.
double met_satterthwaite_ddf(const PowerRequest& req) {
  require(req.factors.count("farm") && req.factors.count("season"),
          "satterthwaite-unavailable",
          "satterthwaite ddf rule needs a balanced MET frame with farm and season columns");
  const auto& treatment = req.factors.at("treatment");
  const int t = level_count(treatment);
  const int m = level_count(req.factors.at("farm"));
  const int n_seasons = level_count(req.factors.at("season"));
  const std::size_t n = treatment.size();
  const std::size_t cells = static_cast<std::size_t>(t) * m * n_seasons;
  require(cells > 0 && n % cells == 0, "satterthwaite-unavailable",
          "frame is not a balanced treatment x farm x season layout");
  const int r = static_cast<int>(n / cells);
  {
    // every (treatment, farm, season) cell must appear exactly r times
    std::map<std::tuple<int, int, int>, int> counts;
    const auto& farm = req.factors.at("farm");
    const auto& season = req.factors.at("season");
    for (std::size_t p = 0; p < n; ++p) counts[{treatment[p], farm[p], season[p]}]++;
    require(counts.size() == cells, "satterthwaite-unavailable", "frame has empty cells");
    for (const auto& [cell, count] : counts)
      require(count == r, "satterthwaite-unavailable", "frame cells are unbalanced");
  }

  auto term_variance = [&](std::vector<std::string> wanted) -> double {
    std::sort(wanted.begin(), wanted.end());
    for (const auto& term : req.random_effects) {
      auto factors = term.factors;
      std::sort(factors.begin(), factors.end());
      if (factors == wanted) return term.variance;
    }
    return 0.0;
  };
  const double s_ftau = term_variance({"treatment", "farm"});
  const double s_taus = term_variance({"treatment", "season"});
  const double s_ftaus = term_variance({"treatment", "farm", "season"});
  const double s2 = req.residual_variance;

  const double ems_tf = s2 + r * s_ftaus + r * n_seasons * s_ftau;
  const double ems_ts = s2 + r * s_ftaus + r * m * s_taus;
  const double ems_tfs = s2 + r * s_ftaus;
  return satterthwaite_df({{ems_tf, double(t - 1) * (m - 1), +1},
                           {ems_ts, double(t - 1) * (n_seasons - 1), +1},
                           {ems_tfs, double(t - 1) * (m - 1) * (n_seasons - 1), -1}});
}

}  // namespace

PowerResult stroup_power(const PowerRequest& req) {
  require(req.factors.count("treatment"), "missing-treatment-column",
          "frame must have a treatment column");
  const auto& treatment = req.factors.at("treatment");
  const int n = static_cast<int>(treatment.size());
  require(n >= 2, "frame-too-small", "frame needs at least two observations");
  for (const auto& [name, column] : req.factors) {
    require(static_cast<int>(column.size()) == n, "frame-column-mismatch",
            "factor column '" + name + "' has the wrong length");
  }
  const int t = static_cast<int>(req.treatment_means.size());
  require(level_count(treatment) == t, "treatment-means-mismatch",
          "treatment_means must have one entry per treatment level in the frame");
  require(req.contrast.cols() == t, "contrast-shape-mismatch",
          "contrast columns must match treatment count");
  require(req.residual_variance > 0.0, "invalid-variance", "residual variance must be > 0");
  double total_variance = req.residual_variance;
  for (const auto& term : req.random_effects) {
    require(term.variance >= 0.0, "invalid-variance", "random-effect variances must be >= 0");
    total_variance += term.variance;
  }
  require(total_variance > 0.0, "invalid-variance", "total variance must be positive");

  // V = sigma2 I + sum_k sigma_k^2 Z_k Z_k'
  Matrix v = req.residual_variance * Matrix::Identity(n, n);
  std::vector<Matrix> z_blocks;
  for (const auto& term : req.random_effects) {
    if (term.variance == 0.0) continue;
    const Matrix z = indicator_columns(joint_levels(req, term.factors));
    v += term.variance * z * z.transpose();
    z_blocks.push_back(z);
  }
  Eigen::LLT<Matrix> llt(v);
  require(llt.info() == Eigen::Success, "singular-covariance", "assembled V is not positive definite");

  std::vector<int> treatment_tags(treatment.begin(), treatment.end());
  const Matrix x = indicator_columns(treatment_tags);
  const Matrix v_inv_x = llt.solve(x);
  const Matrix info = x.transpose() * v_inv_x;
  Eigen::LLT<Matrix> info_llt(info);
  require(info_llt.info() == Eigen::Success, "non-estimable-contrast",
          "some treatment has no observations");

  const Vector l_beta = req.contrast * req.treatment_means;
  const Matrix middle = req.contrast * info_llt.solve(req.contrast.transpose());
  int rank = 0;
  const Matrix middle_pinv = pseudo_inverse_psd(middle, &rank);
  require(rank == matrix_rank(req.contrast), "non-estimable-contrast",
          "contrast variance is rank deficient");

  PowerResult result;
  result.lambda = l_beta.dot(middle_pinv * l_beta);
  result.ndf = rank;

  switch (req.ddf_rule) {
    case DdfRule::residual: {
      std::vector<Matrix> design_blocks = {x};
      for (const auto& z : z_blocks) design_blocks.push_back(z);
      result.ddf = n - matrix_rank(hcat(design_blocks));
      break;
    }
    case DdfRule::satterthwaite:
      result.ddf = met_satterthwaite_ddf(req);
      break;
    case DdfRule::user:
      result.ddf = req.user_ddf;
      break;
  }
  require(result.ddf >= 1.0, "invalid-ddf", "denominator df must be >= 1");

  result.critical_value = f_quantile(1.0 - req.alpha, result.ndf, result.ddf);
  result.power =
      1.0 - noncentral_f_cdf(result.critical_value, result.ndf, result.ddf, result.lambda);
  return result;
}

}  // namespace fieldplan
