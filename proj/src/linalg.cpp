#include "fieldplan/linalg.hpp"

#include <algorithm>
#include <map>

#include "fieldplan/error.hpp"

namespace fieldplan {

Matrix indicator_columns(const std::vector<int>& tags) {
  std::map<int, int> column_of;
  for (int tag : tags) column_of.emplace(tag, 0);
  int next = 0;
  for (auto& [tag, col] : column_of) col = next++;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(tags.size()), next);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    out(static_cast<Eigen::Index>(i), column_of.at(tags[i])) = 1.0;
  }
  return out;
}

Matrix hcat(const std::vector<Matrix>& blocks) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    rows = b.rows();
    cols += b.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

Matrix projector(const Matrix& columns) {
  Eigen::ColPivHouseholderQR<Matrix> qr(columns);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) return Matrix::Zero(columns.rows(), columns.rows());
  Matrix q = qr.householderQ() * Matrix::Identity(columns.rows(), rank);
  return q * q.transpose();
}

Matrix residual_projector(const Matrix& columns, int n) {
  if (columns.size() == 0) return Matrix::Identity(n, n);
  return Matrix::Identity(n, n) - projector(columns);
}

int matrix_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  return static_cast<int>(qr.rank());
}

Matrix pseudo_inverse_psd(const Matrix& m, int* rank_out) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  require(solver.info() == Eigen::Success, "eigen-failure", "eigendecomposition failed");
  const Vector values = solver.eigenvalues();
  const double cutoff = std::max(1e-10, values.cwiseAbs().maxCoeff() * 1e-12);
  Vector inverted = Vector::Zero(values.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff) {
      inverted(i) = 1.0 / values(i);
      ++rank;
    }
  }
  if (rank_out) *rank_out = rank;
  return solver.eigenvectors() * inverted.asDiagonal() * solver.eigenvectors().transpose();
}

std::vector<double> nonzero_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  require(solver.info() == Eigen::Success, "eigen-failure", "eigendecomposition failed");
  const Vector values = solver.eigenvalues();
  const double cutoff = std::max(1e-10, values.cwiseAbs().maxCoeff() * 1e-12);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff) out.push_back(values(i));
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

double mean_pairwise_variance(const Matrix& effect_covariance) {
  const Eigen::Index t = effect_covariance.rows();
  require(t >= 2, "too-few-treatments", "pairwise variance needs at least two treatments");
  double sum = 0.0;
  for (Eigen::Index h = 0; h < t; ++h) {
    for (Eigen::Index k = h + 1; k < t; ++k) {
      sum += effect_covariance(h, h) + effect_covariance(k, k) - 2.0 * effect_covariance(h, k);
    }
  }
  return sum / (double(t) * double(t - 1) / 2.0);
}

}  // namespace fieldplan
