#include "fieldplan/distributions.hpp"

#include <cmath>
#include <limits>

#include "fieldplan/error.hpp"

namespace fieldplan {

namespace {

// Continued fraction for the incomplete beta (Lentz method).
double beta_cf(double a, double b, double x) {
  constexpr int max_iter = 500;
  constexpr double eps = 3e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  fail("beta-cf-no-convergence", "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "invalid-beta-parameters", "incomplete beta requires a, b > 0");
  require(x >= 0.0 && x <= 1.0, "invalid-beta-parameters", "incomplete beta requires 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double incomplete_gamma_p(double a, double x) {
  require(a > 0.0 && x >= 0.0, "invalid-gamma-parameters", "incomplete gamma requires a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  constexpr int max_iter = 500;
  constexpr double eps = 3e-16;
  if (x < a + 1.0) {
    // series representation
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < max_iter; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * eps) {
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
      }
    }
    fail("gamma-series-no-convergence", "incomplete gamma series did not converge");
  }
  // continued fraction for Q(a, x)
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) {
      return 1.0 - h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  fail("gamma-cf-no-convergence", "incomplete gamma continued fraction did not converge");
}

double chi_squared_cdf(double x, double df) {
  require(df > 0.0, "invalid-df", "chi-squared df must be positive");
  if (x <= 0.0) return 0.0;
  return incomplete_gamma_p(df / 2.0, x / 2.0);
}

double f_cdf(double x, double ndf, double ddf) {
  require(ndf >= 1.0 && ddf >= 1.0, "invalid-df", "F degrees of freedom must be >= 1");
  if (x <= 0.0) return 0.0;
  const double u = ndf * x / (ndf * x + ddf);
  return incomplete_beta(ndf / 2.0, ddf / 2.0, u);
}

double f_quantile(double p, double ndf, double ddf) {
  require(p >= 0.0 && p < 1.0, "invalid-probability", "F quantile requires 0 <= p < 1");
  if (p == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (f_cdf(hi, ndf, ddf) < p) {
    hi *= 2.0;
    require(hi < 1e300, "f-quantile-overflow", "F quantile bracket exceeded range");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f_cdf(mid, ndf, ddf) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double noncentral_f_cdf(double x, double ndf, double ddf, double lambda) {
  require(x >= 0.0, "invalid-argument", "noncentral F requires x >= 0");
  require(ndf >= 1.0 && ddf >= 1.0, "invalid-df", "F degrees of freedom must be >= 1");
  require(lambda >= 0.0, "invalid-noncentrality", "noncentrality must be >= 0");
  if (x == 0.0) return 0.0;
  if (lambda == 0.0) return f_cdf(x, ndf, ddf);

  const double u = ndf * x / (ndf * x + ddf);
  const double half_lambda = lambda / 2.0;
  const double a0 = ndf / 2.0;
  const double b = ddf / 2.0;

  // Running values: Poisson(k; lambda/2) weight, I_u(a0+k, b), and the
  // increment D_k = u^a (1-u)^b / (a B(a, b)) used to step the beta term via
  // I_u(a+1, b) = I_u(a, b) - D_k.
  double weight = std::exp(-half_lambda);
  double beta_term = incomplete_beta(a0, b, u);
  double increment = std::exp(a0 * std::log(u) + b * std::log1p(-u) + std::lgamma(a0 + b) -
                              std::lgamma(a0 + 1.0) - std::lgamma(b));
  double cdf = weight * beta_term;
  double weight_sum = weight;

  constexpr int max_terms = 100000;
  for (int k = 0; k < max_terms; ++k) {
    const double a = a0 + k;
    beta_term -= increment;
    if (beta_term < 0.0) beta_term = 0.0;
    increment *= u * (a + b) / (a + 1.0);
    weight *= half_lambda / (k + 1);
    weight_sum += weight;
    cdf += weight * beta_term;
    // Remaining terms are bounded by the missing Poisson mass times the
    // current (monotone decreasing in k) beta term.
    if ((1.0 - weight_sum) * beta_term < 1e-13) break;
  }
  if (cdf < 0.0) cdf = 0.0;
  if (cdf > 1.0) cdf = 1.0;
  return cdf;
}

double beta_quantile(double p, double a, double b) {
  require(p >= 0.0 && p <= 1.0, "invalid-probability", "beta quantile requires 0 <= p <= 1");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (incomplete_beta(a, b, mid) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

BinomialInterval clopper_pearson(int successes, int trials, double confidence) {
  require(trials >= 1, "invalid-trials", "binomial interval requires trials >= 1");
  require(successes >= 0 && successes <= trials, "invalid-successes",
          "successes must be in [0, trials]");
  require(confidence > 0.0 && confidence < 1.0, "invalid-confidence", "confidence must be in (0,1)");
  const double alpha = 1.0 - confidence;
  BinomialInterval interval;
  if (successes > 0) {
    interval.lower = beta_quantile(alpha / 2.0, successes, trials - successes + 1);
  }
  if (successes < trials) {
    interval.upper = beta_quantile(1.0 - alpha / 2.0, successes + 1, trials - successes);
  }
  return interval;
}

}  // namespace fieldplan
