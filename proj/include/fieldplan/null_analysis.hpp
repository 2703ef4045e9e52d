#pragma once

#include <optional>
#include <vector>

#include "fieldplan/overlay.hpp"
#include "fieldplan/types.hpp"

namespace fieldplan {

enum class NullModel {
  crd,              // general mean only
  rcbd,             // + replicate blocks (requires rep tags)
  rowcol,           // + layout row and column effects
  ancova_position,  // + replicate blocks if tagged, + linear plot position
};

struct ModelSpec {
  NullModel kind = NullModel::crd;
  // When set, analysis is generalized least squares under this plot
  // covariance (whitening); otherwise ordinary least squares.
  std::optional<Matrix> gls_cov;
};

// One least-squares null analysis: F test of treatments adjusted for the
// model's nuisance terms, model-based SEDs and all pairwise treatment
// difference estimates (unordered pairs in lexicographic label order).
struct NullFit {
  double f = 0.0;
  double p_value = 1.0;
  double tss = 0.0;
  double rss = 0.0;
  int tdf = 0;
  int rdf = 0;
  double mean_model_sed = 0.0;
  std::vector<double> differences;
  std::vector<double> seds;
  double tec = 0.0;       // tss / (tss + rss)
  double null_tec = 0.0;  // tdf / (tdf + rdf)
};

NullFit analyze_null(const AnalysisDataset& dataset, const ModelSpec& model);

struct TecValue {
  double tec = 0.0;
  double null_tec = 0.0;
};

// Treatment error coefficient TSS/(TSS+RSS) and its null value
// TDF/(TDF+RDF); fails with `degenerate-data` when TSS + RSS = 0.
TecValue tec(const AnalysisDataset& dataset, const ModelSpec& model);

}  // namespace fieldplan
