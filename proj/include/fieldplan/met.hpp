#pragma once

#include <string>
#include <vector>

#include "fieldplan/types.hpp"

namespace fieldplan {

// Fully crossed balanced MET response, indexed (treatment h, farm i,
// season j, replicate k).
struct MetDataset {
  MetDims dims;
  Vector y;  // flat, index ((h*m + i)*n + j)*r + k

  MetDataset() = default;
  explicit MetDataset(MetDims dims_) : dims(dims_), y(Vector::Zero(dims_.total())) {}

  double& at(int h, int i, int j, int k) { return y(index(h, i, j, k)); }
  double at(int h, int i, int j, int k) const { return y(index(h, i, j, k)); }
  int index(int h, int i, int j, int k) const {
    return ((h * dims.m + i) * dims.n + j) * dims.r + k;
  }
};

// Long CSV `treatment,farm,season,rep,y`; levels may be arbitrary labels and
// are mapped to indices in lexicographic order. Fails on unbalanced input.
MetDataset parse_met_csv(const std::string& text);

enum class EmsSymbol {
  sigma2,        // residual plot error
  sigma_fs2,     // farm x season
  sigma_f2,      // farm
  sigma_s2,      // season
  sigma_ftau2,   // treatment x farm
  sigma_taus2,   // treatment x season
  sigma_ftaus2,  // treatment x farm x season
  q_tau,         // fixed treatment quadratic, (t-1)^-1 sum (tau_h - mean)^2
  mu2            // squared general mean
};

const char* ems_symbol_name(EmsSymbol symbol);

struct EmsTerm {
  EmsSymbol symbol;
  long long coefficient;  // integer monomial in r, m, n, t, evaluated
};

struct AnovaRow {
  std::string source;
  long long df = 0;
  double ss = 0.0;
  double ms = 0.0;  // ss / df
  std::vector<EmsTerm> ems;
};

struct AnovaTable {
  MetDims dims;
  std::vector<AnovaRow> rows;

  bool has_row(const std::string& source) const;
  const AnovaRow& row(const std::string& source) const;  // fails with missing-anova-row
};

// Balanced crossed-classification ANOVA with expected mean squares. For t = 1
// the treatment rows are absent; for r = 1 the error row is absent (0 df).
// Row df always sum to the number of observations.
AnovaTable anova_met(const MetDataset& data);

struct Component {
  double value = 0.0;
  bool negative = false;   // raw method-of-moments estimate fell below zero
  bool available = true;   // false when confounded or not in the model
};

struct VarianceComponents {
  Component sigma2;
  Component sigma_fs2;
  Component sigma_f2;
  Component sigma_s2;
  Component sigma_ftau2;
  Component sigma_taus2;
  Component sigma_ftaus2;
  Component sigma_tau2;
};

// Method-of-moments inversion of the expected-mean-square system. Negative
// estimates are returned raw with the negative flag set. With r = 1 the
// residual is confounded with the three-way interaction; sigma2 is then
// reported unavailable (0) and sigma_ftaus2 carries the combined component.
VarianceComponents mom_components(const AnovaTable& table, const MetDims& dims);

enum class AggregationMode { plots, means, sums };

// Collapse replicates to one value per (treatment, farm, season) cell; sums
// are rescaled to means. `plots` returns the input unchanged.
MetDataset aggregate_met(const MetDataset& data, AggregationMode mode);

}  // namespace fieldplan
