#pragma once

// Dense complex linear algebra shared by the algebra, bundle and kernel layers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace fellap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Largest singular value; zero for empty matrices.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Max entrywise modulus; zero for empty operands.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Distance between the inner automorphisms Ad(u) and Ad(v): min over phases c of max|u - c v|.
inline double phase_distance(const Matrix& u, const Matrix& v) {
  if (u.size() == 0 && v.size() == 0) return 0.0;
  const Complex overlap = (v.adjoint() * u).trace();
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0, 0.0);
  return max_abs(u - phase * v);
}

inline double unitarity_defect(const Matrix& u) {
  if (u.size() == 0) return 0.0;
  return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

inline Complex random_complex(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = random_complex(rng);
  return m;
}

inline Vector random_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = random_complex(rng);
  return v;
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the diagonal phase fix.
inline Matrix random_unitary(Rng& rng, Eigen::Index d) {
  if (d == 0) return Matrix(0, 0);
  const Matrix z = random_matrix(rng, d, d);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    const double mag = std::abs(diag);
    if (mag > 0) q.col(i) *= diag / mag;
  }
  return q;
}

/// Numerical rank of a set of column vectors.
inline Eigen::Index numerical_rank(const Matrix& columns, double threshold = 1e-9) {
  if (columns.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(columns);
  qr.setThreshold(threshold);
  return qr.rank();
}

/// FNV-1a, used for stable seeds and config fingerprints.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 14695981039346656037ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace fellap
