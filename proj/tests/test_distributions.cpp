#include <doctest.h>

#include <cmath>
#include <functional>

#include "fieldplan/distributions.hpp"
#include "fieldplan/error.hpp"

using namespace fieldplan;

namespace {

// Noncentral F density through the noncentral beta mixture, integrated by
// adaptive Simpson; independent of the incomplete-beta series in the library.
double ncbeta_density(double u, double a0, double b, double lambda) {
  double weight = std::exp(-lambda / 2.0);
  double density = 0.0;
  for (int k = 0; k < 400; ++k) {
    const double a = a0 + k;
    const double log_pdf = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u);
    density += weight * std::exp(log_pdf);
    weight *= (lambda / 2.0) / (k + 1);
    if (weight < 1e-18) break;
  }
  return density;
}

double simpson(const std::function<double(double)>& f, double a, double b, int depth, double fa,
               double fm, double fb, double whole) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 1e-12) return left + right;
  return simpson(f, a, m, depth - 1, fa, flm, fm, left) +
         simpson(f, m, b, depth - 1, fm, frm, fb, right);
}

double quadrature_ncf_cdf(double x, double ndf, double ddf, double lambda) {
  if (x <= 0.0) return 0.0;
  const double upper = ndf * x / (ndf * x + ddf);
  // integrate in v = sqrt(u) to regularize the u^(a-1) edge when ndf = 1
  const std::function<double(double)> f = [&](double v) {
    const double u = v * v;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 2.0 * v * ncbeta_density(u, ndf / 2.0, ddf / 2.0, lambda);
  };
  const double a = 0.0, b = std::sqrt(upper);
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, 40, fa, fm, fb, whole);
}

}  // namespace

TEST_CASE("incomplete beta basics") {
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  CHECK(incomplete_beta(3.5, 3.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  // I_x(1, b) = 1 - (1-x)^b
  CHECK(incomplete_beta(1.0, 4.0, 0.3) ==
        doctest::Approx(1.0 - std::pow(0.7, 4.0)).epsilon(1e-12));
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(incomplete_beta(2.5, 7.0, 0.2) ==
        doctest::Approx(1.0 - incomplete_beta(7.0, 2.5, 0.8)).epsilon(1e-12));
}

TEST_CASE("incomplete gamma and chi-squared") {
  // P(1, x) = 1 - exp(-x)
  CHECK(incomplete_gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  // chi2(2) cdf = 1 - exp(-x/2)
  CHECK(chi_squared_cdf(3.0, 2.0) == doctest::Approx(1.0 - std::exp(-1.5)).epsilon(1e-12));
  // classic 95% point of chi2(1)
  CHECK(chi_squared_cdf(3.841458820694124, 1.0) == doctest::Approx(0.95).epsilon(1e-9));
}

TEST_CASE("central F cdf and quantile") {
  CHECK(f_cdf(0.0, 4, 12) == 0.0);
  const double crit = f_quantile(0.95, 4, 12);
  CHECK(crit == doctest::Approx(3.2592).epsilon(2e-4));  // published table value
  CHECK(f_cdf(crit, 4, 12) == doctest::Approx(0.95).epsilon(1e-12));
  // F(1, d) = t(d)^2: P(F(1,10) <= 4.964603...) = 0.95 (t_{0.975,10} = 2.2281)
  CHECK(f_quantile(0.95, 1, 10) == doctest::Approx(2.228138852 * 2.228138852).epsilon(1e-6));
}

TEST_CASE("noncentral F reduces to central at lambda 0") {
  const double crit = f_quantile(0.95, 4, 12);
  CHECK(noncentral_f_cdf(crit, 4, 12, 0.0) == doctest::Approx(0.95).epsilon(1e-10));
  CHECK(noncentral_f_cdf(0.0, 4, 12, 3.0) == 0.0);
}

TEST_CASE("noncentral F agrees with quadrature oracle on a grid") {
  const double ndfs[] = {1, 2, 4, 9};
  const double ddfs[] = {4, 12, 30};
  const double lambdas[] = {0.5, 2.0, 7.5, 20.0};
  const double xs[] = {0.5, 1.5, 3.0, 6.0};
  int points = 0;
  for (double ndf : ndfs)
    for (double ddf : ddfs)
      for (double lambda : lambdas)
        for (double x : xs) {
          const double mine = noncentral_f_cdf(x, ndf, ddf, lambda);
          const double oracle = quadrature_ncf_cdf(x, ndf, ddf, lambda);
          CHECK(mine == doctest::Approx(oracle).epsilon(1e-8));
          ++points;
        }
  CHECK(points >= 20);
}

TEST_CASE("noncentral F monotonicity") {
  for (double lambda : {0.0, 1.0, 5.0, 15.0}) {
    double previous = -1.0;
    for (double x = 0.0; x <= 8.0; x += 0.25) {
      const double value = noncentral_f_cdf(x, 3, 10, lambda);
      CHECK(value >= previous - 1e-14);
      previous = value;
    }
  }
  for (double x : {0.5, 1.0, 2.5, 5.0}) {
    double previous = 2.0;
    for (double lambda = 0.0; lambda <= 20.0; lambda += 0.5) {
      const double value = noncentral_f_cdf(x, 3, 10, lambda);
      CHECK(value <= previous + 1e-14);
      previous = value;
    }
  }
}

TEST_CASE("clopper-pearson interval satisfies the exact tail equations") {
  auto binom_tail_geq = [](int x, int n, double p) {
    // P(X >= x)
    double total = 0.0;
    for (int k = x; k <= n; ++k) {
      total += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                        k * std::log(p) + (n - k) * std::log1p(-p));
    }
    return total;
  };
  auto binom_tail_leq = [](int x, int n, double p) {
    double total = 0.0;
    for (int k = 0; k <= x; ++k) {
      total += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                        k * std::log(p) + (n - k) * std::log1p(-p));
    }
    return total;
  };

  for (auto [x, n] : {std::pair{3, 20}, {17, 20}, {50, 1000}}) {
    const auto interval = clopper_pearson(x, n, 0.95);
    CHECK(binom_tail_geq(x, n, interval.lower) == doctest::Approx(0.025).epsilon(1e-7));
    CHECK(binom_tail_leq(x, n, interval.upper) == doctest::Approx(0.025).epsilon(1e-7));
  }
  // boundary cases
  const auto zero = clopper_pearson(0, 10, 0.95);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == doctest::Approx(1.0 - std::pow(0.025, 0.1)).epsilon(1e-9));
  const auto all = clopper_pearson(10, 10, 0.95);
  CHECK(all.upper == 1.0);
  CHECK(all.lower == doctest::Approx(std::pow(0.025, 0.1)).epsilon(1e-9));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(noncentral_f_cdf(-1.0, 3, 10, 0.0), Error);
  CHECK_THROWS_AS(noncentral_f_cdf(1.0, 0, 10, 0.0), Error);
  CHECK_THROWS_AS(noncentral_f_cdf(1.0, 3, 10, -2.0), Error);
  CHECK_THROWS_AS(incomplete_beta(-1.0, 2.0, 0.5), Error);
}
