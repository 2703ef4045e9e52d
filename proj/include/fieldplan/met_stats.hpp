#pragma once

#include "fieldplan/met.hpp"
#include "fieldplan/types.hpp"

namespace fieldplan {

struct FlaggedValue {
  double value = 0.0;
  bool negative = false;
};

// Variance of the estimated general mean:
// sigma_f2/m + sigma_s2/n + sigma_fs2/(mn) + sigma2/(mnr).
double var_general_mean(const VarianceComponents& vc, const MetDims& dims);

// ANOVA estimator (MS_F + MS_S - MS_FxS) / (mnr); negative values flagged.
FlaggedValue est_var_general_mean(const AnovaTable& table, const MetDims& dims);

// Semi-variance (half the variance of a treatment-mean difference):
// sigma_ftau2/m + sigma_taus2/n + sigma_ftaus2/(mn) + sigma2/(mnr).
double semivariance(const VarianceComponents& vc, const MetDims& dims);

// ANOVA estimator (MS_TxF + MS_TxS - MS_TxFxS) / (mnr); negative flagged.
FlaggedValue est_semivariance(const AnovaTable& table, const MetDims& dims);

// Broad-sense heritability sigma_tau2 / (sigma_tau2 + sv), in [0, 1].
double heritability(double sigma_tau2, double sv);

struct MsTerm {
  double ms = 0.0;
  double df = 1.0;
  int sign = +1;  // +1 or -1
};

// Satterthwaite degrees of freedom of a signed mean-square combination.
double satterthwaite_df(const std::vector<MsTerm>& terms);

struct TreatmentTest {
  double f = 0.0;
  double ndf = 0.0;
  double ddf = 0.0;  // Satterthwaite df of the denominator
  double p_value = 1.0;
  double denominator = 0.0;  // MS_TxF + MS_TxS - MS_TxFxS
};

// F test of treatment means against the interaction-based effective error;
// valid in a balanced MET regardless of the within-trial layout.
TreatmentTest met_treatment_test(const AnovaTable& table);

struct Rank1Fit {
  Vector alpha;  // row effects (carries the scale)
  Vector beta;   // column effects, first nonzero entry positive
  double residual_ss = 0.0;
};

// Best least-squares fit of eta_hi ~ alpha_h * beta_i via the leading
// singular triple. An all-zero table yields zero vectors and residual 0.
Rank1Fit rank1_fit(const Matrix& table);

}  // namespace fieldplan
