#pragma once

#include <map>
#include <string>
#include <vector>

#include "fieldplan/types.hpp"

namespace fieldplan {

// One random-effect term: a grouping by the joint levels of the named factor
// columns, with a fixed variance.
struct RandomEffectTerm {
  std::vector<std::string> factors;
  double variance = 0.0;
};

enum class DdfRule { residual, satterthwaite, user };

// Fixed-variance power request. The frame lives in `factors` (one integer
// level column per factor, all the same length); "treatment" must be present
// and indexes treatment_means. The marginal covariance is assembled from the
// random-effect terms plus the residual, variances held fixed.
struct PowerRequest {
  std::map<std::string, std::vector<int>> factors;
  Vector treatment_means;  // fixed-effect truth, one entry per treatment level
  std::vector<RandomEffectTerm> random_effects;
  double residual_variance = 1.0;
  Matrix contrast;  // rows are contrasts over treatment means
  double alpha = 0.05;
  DdfRule ddf_rule = DdfRule::residual;
  double user_ddf = 0.0;
};

struct PowerResult {
  double lambda = 0.0;
  double ndf = 0.0;
  double ddf = 0.0;
  double critical_value = 0.0;
  double power = 0.0;
};

// Noncentrality lambda = (L b)' [L (X'V^-1 X)^- L']^-1 (L b) with V assembled
// from the fixed variance parameters, ndf = rank(L), ddf per rule, and
// power = P(F(ndf, ddf, lambda) > F_crit(alpha)).
PowerResult stroup_power(const PowerRequest& request);

}  // namespace fieldplan
