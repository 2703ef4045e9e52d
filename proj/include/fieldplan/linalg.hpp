#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fieldplan/types.hpp"

namespace fieldplan {

// One 0/1 indicator column per distinct tag value, in increasing tag order.
Matrix indicator_columns(const std::vector<int>& tags);

// Horizontal concatenation; empty blocks are skipped.
Matrix hcat(const std::vector<Matrix>& blocks);

// Orthogonal projector onto the column space of X (rank-revealing QR).
Matrix projector(const Matrix& columns);

// I - projector(X): the residual maker.
Matrix residual_projector(const Matrix& columns, int n);

int matrix_rank(const Matrix& m);

// Moore-Penrose inverse of a symmetric PSD matrix via eigendecomposition.
// rank_out, if given, receives the numerical rank.
Matrix pseudo_inverse_psd(const Matrix& m, int* rank_out = nullptr);

// Nonzero eigenvalues of a symmetric PSD matrix, descending.
std::vector<double> nonzero_eigenvalues(const Matrix& m);

// Mean of var(tau_h - tau_h') over unordered pairs, given the (pseudo-)
// covariance of the treatment effect estimates.
double mean_pairwise_variance(const Matrix& effect_covariance);

}  // namespace fieldplan
