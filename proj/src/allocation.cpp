#include "fieldplan/allocation.hpp"

#include <Eigen/Cholesky>
#include <limits>

namespace fieldplan {

Vector equal_weights(int q) { return Vector::Constant(q, 1.0 / q); }

void AllocationProblem::validate() const {
  const int q = zones();
  require(q >= 1, "invalid-zones", "need at least one zone");
  require(gamma.cols() == q, "gamma-not-square", "gamma must be square");
  require(gamma.isApprox(gamma.transpose(), 1e-10), "gamma-not-symmetric", "gamma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gamma);
  require(solver.eigenvalues().minCoeff() > -1e-10, "gamma-not-psd",
          "gamma must be positive semidefinite");
  require(v.size() == q, "v-size-mismatch", "v must have one entry per zone");
  require(v.minCoeff() > 0.0, "invalid-variance", "per-trial error variances must be > 0");
  require(budget >= q, "budget-too-small", "budget must be at least the zone count");
  require(weights.size() == q, "weights-size-mismatch", "weights must have one entry per zone");
  require(weights.minCoeff() >= 0.0 && std::abs(weights.sum() - 1.0) < 1e-9, "invalid-weights",
          "weights must be nonnegative and sum to 1");
}

double allocation_criterion(const AllocationProblem& problem, const std::vector<int>& alloc) {
  const int q = problem.zones();
  require(static_cast<int>(alloc.size()) == q, "alloc-size-mismatch",
          "allocation must have one entry per zone");
  std::vector<int> observed;
  int total = 0;
  for (int p = 0; p < q; ++p) {
    require(alloc[static_cast<std::size_t>(p)] >= 0, "negative-allocation", "trial counts must be >= 0");
    total += alloc[static_cast<std::size_t>(p)];
    if (alloc[static_cast<std::size_t>(p)] > 0) observed.push_back(p);
  }
  require(total == problem.budget, "budget-mismatch", "allocation must sum to the budget");
  require(!observed.empty(), "no-observed-zones", "at least one zone must receive a trial");

  const int no = static_cast<int>(observed.size());
  Matrix gamma_oo(no, no);
  Matrix gamma_ao(q, no);
  for (int a = 0; a < no; ++a) {
    for (int b = 0; b < no; ++b) gamma_oo(a, b) = problem.gamma(observed[static_cast<std::size_t>(a)], observed[static_cast<std::size_t>(b)]);
    for (int p = 0; p < q; ++p) gamma_ao(p, a) = problem.gamma(p, observed[static_cast<std::size_t>(a)]);
  }
  Matrix noise = gamma_oo;
  for (int a = 0; a < no; ++a) {
    noise(a, a) += problem.v(observed[static_cast<std::size_t>(a)]) / alloc[static_cast<std::size_t>(observed[static_cast<std::size_t>(a)])];
  }
  Eigen::LLT<Matrix> llt(noise);
  require(llt.info() == Eigen::Success, "singular-prediction-system",
          "observed-zone covariance is singular");
  // BLUP MSE of the zone effects: Gamma - Gamma_.O (Gamma_OO + D)^-1 Gamma_O.
  const Matrix mse = problem.gamma - gamma_ao * llt.solve(gamma_ao.transpose());

  double criterion = 0.0;
  for (int p = 0; p < q; ++p) criterion += problem.weights(p) * 2.0 * mse(p, p);
  return criterion;
}

namespace {

// C(n + k - 1, k - 1) with overflow clamp.
double composition_count(int n, int k) {
  double count = 1.0;
  for (int i = 1; i < k; ++i) count *= double(n + i) / i;
  return count;
}

void enumerate_compositions(const AllocationProblem& problem, std::vector<int>& alloc, int zone,
                            int remaining, double& best, std::vector<int>& best_alloc) {
  const int q = problem.zones();
  if (zone == q - 1) {
    alloc[static_cast<std::size_t>(zone)] = remaining;
    const double value = allocation_criterion(problem, alloc);
    // strict improvement keeps the lexicographically smallest tie
    if (value < best - 1e-12) {
      best = value;
      best_alloc = alloc;
    }
    return;
  }
  for (int take = 0; take <= remaining; ++take) {
    alloc[static_cast<std::size_t>(zone)] = take;
    enumerate_compositions(problem, alloc, zone + 1, remaining - take, best, best_alloc);
  }
}

}  // namespace

AllocationResult optimize_allocation(const AllocationProblem& problem, AllocationMethod method) {
  problem.validate();
  const int q = problem.zones();
  AllocationResult result;

  if (method == AllocationMethod::exhaustive) {
    require(composition_count(problem.budget, q) <= 1e6, "enumeration-guard-exceeded",
            "too many compositions for exhaustive search");
    std::vector<int> alloc(static_cast<std::size_t>(q), 0);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_alloc;
    enumerate_compositions(problem, alloc, 0, problem.budget, best, best_alloc);
    result.alloc = best_alloc;
    result.criterion = best;
    result.certificate = "exhaustive-optimal";
    return result;
  }

  // Greedy: seed every zone with one trial (the criterion is finite either
  // way, but unseeded zones would never attract their first trial when the
  // budget is tight), then add the remaining trials one at a time.
  std::vector<int> alloc(static_cast<std::size_t>(q), 1);
  for (int step = q; step < problem.budget; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int best_zone = 0;
    for (int p = 0; p < q; ++p) {
      alloc[static_cast<std::size_t>(p)] += 1;
      AllocationProblem trial = problem;
      trial.budget = step + 1;
      const double value = allocation_criterion(trial, alloc);
      alloc[static_cast<std::size_t>(p)] -= 1;
      if (value < best - 1e-12) {
        best = value;
        best_zone = p;
      }
    }
    alloc[static_cast<std::size_t>(best_zone)] += 1;
  }
  result.alloc = alloc;
  result.criterion = allocation_criterion(problem, alloc);
  result.certificate = "heuristic";
  return result;
}

}  // namespace fieldplan
