#pragma once

namespace fieldplan {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Regularized lower incomplete gamma P(a, x).
double incomplete_gamma_p(double a, double x);

double chi_squared_cdf(double x, double df);

double f_cdf(double x, double ndf, double ddf);

// Smallest x with F_cdf(x) >= p; bisection on the CDF.
double f_quantile(double p, double ndf, double ddf);

// Noncentral F CDF via the Poisson-weighted central incomplete-beta series;
// absolute error below 1e-10 on the supported domain.
double noncentral_f_cdf(double x, double ndf, double ddf, double lambda);

// Beta quantile (inverse of incomplete_beta in x).
double beta_quantile(double p, double a, double b);

struct BinomialInterval {
  double lower = 0.0;
  double upper = 1.0;
};

// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
BinomialInterval clopper_pearson(int successes, int trials, double confidence = 0.95);

}  // namespace fieldplan
