#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fieldplan/error.hpp"

namespace fieldplan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rectangular grid of plots, indexed (row, col), 0-based. A strip of N plots
// is a 1xN layout.
struct FieldLayout {
  int rows = 0;
  int cols = 0;

  FieldLayout() = default;
  FieldLayout(int rows_, int cols_) : rows(rows_), cols(cols_) {
    require(rows >= 1 && cols >= 1, "invalid-layout", "layout must have rows >= 1 and cols >= 1");
  }

  int size() const { return rows * cols; }
  bool contains(int row, int col) const { return row >= 0 && row < rows && col >= 0 && col < cols; }
  int index(int row, int col) const { return row * cols + col; }
  int row_of(int plot) const { return plot / cols; }
  int col_of(int plot) const { return plot % cols; }

  bool operator==(const FieldLayout&) const = default;
};

// Balanced multi-environment-trial dimensions.
struct MetDims {
  int t = 1;  // treatments
  int m = 1;  // farms / sites
  int n = 1;  // seasons / years
  int r = 1;  // replicates per site-season

  MetDims() = default;
  MetDims(int t_, int m_, int n_, int r_) : t(t_), m(m_), n(n_), r(r_) {
    require(t >= 1 && m >= 1 && n >= 1 && r >= 1, "invalid-dims",
            "all of t, m, n, r must be >= 1");
  }

  int total() const { return t * m * n * r; }
  bool operator==(const MetDims&) const = default;
};

// Assignment of treatment labels to plots plus optional block structure.
// Tag vectors are either empty or layout.size() long; ids are 0-based.
struct DesignPlan {
  FieldLayout layout;
  std::vector<std::string> treatment;  // one label per plot, row-major
  std::vector<int> rep;                // replicate / complete block id
  std::vector<int> block;              // incomplete block id
  std::vector<int> env;                // environment id

  std::string design_class;  // e.g. "crd", "rcbd", "latin"
  std::uint64_t seed = 0;

  bool has_rep() const { return !rep.empty(); }
  bool has_block() const { return !block.empty(); }
  bool has_env() const { return !env.empty(); }

  const std::string& label_at(int row, int col) const {
    return treatment[static_cast<std::size_t>(layout.index(row, col))];
  }

  // Distinct labels in lexicographic order.
  std::vector<std::string> treatments() const;

  // Plot indices per treatment, keyed in lexicographic label order.
  std::map<std::string, std::vector<int>> plots_by_treatment() const;
};

// Checks every DesignPlan invariant and reports all violations, not just the
// first. An empty result means the plan is valid.
std::vector<std::string> validate_plan(const DesignPlan& plan);

// Plot yields from a trial grown without treatments.
struct UniformityGrid {
  FieldLayout layout;
  Matrix yield;  // layout.rows x layout.cols

  UniformityGrid() = default;
  UniformityGrid(FieldLayout layout_, Matrix yield_) : layout(layout_), yield(std::move(yield_)) {
    require(yield.rows() == layout.rows && yield.cols() == layout.cols, "grid-shape-mismatch",
            "yield matrix does not match layout");
    require(yield.allFinite(), "non-finite-yield", "grid contains non-finite yields");
  }
};

// Default treatment labels whose lexicographic order matches index order:
// A..Z for small counts, zero-padded T001-style beyond that.
std::vector<std::string> default_labels(int count, const std::string& prefix = "");

}  // namespace fieldplan
