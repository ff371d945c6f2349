#pragma once

#include "sparsegen/core.hpp"

namespace sparsegen {

enum class BasisKind { identity, dct, haar };

// Orthonormal change-of-basis matrix. `identity` keeps a matrix-free fast
// path so recovery with and without an explicit basis is bit-identical.
struct OrthonormalBasis {
  DenseMatrix matrix;  // n x n, rows orthonormal; empty for identity
  BasisKind kind = BasisKind::identity;
  Eigen::Index size = 0;
};

inline OrthonormalBasis identity_basis(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("identity_basis: n must be positive");
  return {DenseMatrix(), BasisKind::identity, n};
}

// Orthonormal DCT-II: row 0 = 1/sqrt(n), row j entry i = sqrt(2/n) cos(pi (2i+1) j / (2n)).
inline OrthonormalBasis dct_basis(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("dct_basis: n must be positive");
  DenseMatrix b(n, n);
  const double dn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) b(0, i) = 1.0 / std::sqrt(dn);
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      b(j, i) = std::sqrt(2.0 / dn) * std::cos(M_PI * (2.0 * i + 1.0) * j / (2.0 * dn));
  return {std::move(b), BasisKind::dct, n};
}

// Full-depth orthonormal Haar matrix, built by the standard recursion
// H_{2n} = [H_n kron (1,1)/sqrt2 ; I_n kron (1,-1)/sqrt2].
inline OrthonormalBasis haar_basis(Eigen::Index n) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw std::invalid_argument("haar_basis: n must be a power of two");
  DenseMatrix h(1, 1);
  h(0, 0) = 1.0;
  for (Eigen::Index half = 1; half < n; half *= 2) {
    DenseMatrix next(2 * half, 2 * half);
    next.setZero();
    const double s = 1.0 / std::sqrt(2.0);
    for (Eigen::Index r = 0; r < half; ++r)
      for (Eigen::Index c = 0; c < half; ++c) {
        next(r, 2 * c) = s * h(r, c);
        next(r, 2 * c + 1) = s * h(r, c);
      }
    for (Eigen::Index r = 0; r < half; ++r) {
      next(half + r, 2 * r) = s;
      next(half + r, 2 * r + 1) = -s;
    }
    h = std::move(next);
  }
  return {std::move(h), BasisKind::haar, n};
}

// Haar-like basis for axis lengths that are not powers of two: symmetrically
// zero-pad to the next power of two, restrict every padded-transform row back
// to the original columns (the restrictions span R^n since the full matrix is
// invertible), and re-orthonormalize coarse-first by QR.
inline OrthonormalBasis padded_haar_basis(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("padded_haar_basis: n must be positive");
  Eigen::Index padded = 1;
  while (padded < n) padded *= 2;
  if (padded == n) return haar_basis(n);
  const Eigen::Index offset = (padded - n) / 2;
  const OrthonormalBasis full = haar_basis(padded);
  const Eigen::MatrixXd restricted = full.matrix.block(0, offset, padded, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(restricted.transpose());
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd r = qr.matrixQR();
  for (Eigen::Index i = 0; i < n; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return {DenseMatrix(q.transpose()), BasisKind::haar, n};
}

// 2-D separable basis for flattened side x side images: B2d = B1d kron B1d.
inline OrthonormalBasis kron_basis(const OrthonormalBasis& b1d) {
  if (b1d.kind == BasisKind::identity) return identity_basis(b1d.size * b1d.size);
  const Eigen::Index s = b1d.size;
  DenseMatrix big(s * s, s * s);
  for (Eigen::Index r1 = 0; r1 < s; ++r1)
    for (Eigen::Index r2 = 0; r2 < s; ++r2)
      for (Eigen::Index c1 = 0; c1 < s; ++c1)
        for (Eigen::Index c2 = 0; c2 < s; ++c2)
          big(r1 * s + r2, c1 * s + c2) = b1d.matrix(r1, c1) * b1d.matrix(r2, c2);
  return {std::move(big), b1d.kind, s * s};
}

// Applies B1d kron B1d to a flattened image without materializing the big
// matrix: reshape, transform rows and columns, flatten.
inline Signal kron_apply(const OrthonormalBasis& b1d, const Signal& v) {
  const Eigen::Index s = b1d.size;
  if (v.size() != s * s) throw std::invalid_argument("kron_apply: size mismatch");
  if (b1d.kind == BasisKind::identity) return v;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> img(
      v.data(), s, s);
  Eigen::MatrixXd transformed = b1d.matrix * img * b1d.matrix.transpose();
  Signal out(s * s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) out[i * s + j] = transformed(i, j);
  return out;
}

inline Signal apply(const OrthonormalBasis& b, const Signal& v) {
  if (v.size() != b.size) throw std::invalid_argument("basis apply: size mismatch");
  if (b.kind == BasisKind::identity) return v;
  return b.matrix * v;
}

inline Signal apply_inverse(const OrthonormalBasis& b, const Signal& v) {
  if (v.size() != b.size) throw std::invalid_argument("basis apply_inverse: size mismatch");
  if (b.kind == BasisKind::identity) return v;
  return b.matrix.transpose() * v;
}

// Basis for a signal of length n. 784-dimensional signals are treated as
// 28x28 images and get the separable 2-D construction; Haar falls back to
// the padded variant when the side is not a power of two.
inline OrthonormalBasis make_signal_basis(BasisKind kind, Eigen::Index n) {
  if (kind == BasisKind::identity) return identity_basis(n);
  const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n))));
  const bool square = side * side == n && side > 1;
  if (kind == BasisKind::dct) return square ? kron_basis(dct_basis(side)) : dct_basis(n);
  if (square) return kron_basis(padded_haar_basis(side));
  return haar_basis(n);  // throws unless power of two
}

inline BasisKind parse_basis_kind(const std::string& name) {
  if (name == "identity") return BasisKind::identity;
  if (name == "dct") return BasisKind::dct;
  if (name == "haar") return BasisKind::haar;
  throw std::invalid_argument("unknown basis kind: " + name);
}

}  // namespace sparsegen
