#pragma once

// Dense linear algebra for small ambient dimension (2 <= d <= 6): singular
// values, compound (exterior power) matrices, orthogonal projections and
// Haar-distributed orthogonal matrices. Everything here is header-only and
// templated on the scalar type.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "affdim/error.hpp"

namespace affdim {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

// Ratio alpha_d / alpha_1 below which a matrix counts as singular to working
// precision.
inline constexpr double kSingularRatio = 1e-14;

template <typename Scalar>
struct SingularSpectrum {
  Vec<Scalar> values;  // alpha_1 >= ... >= alpha_d
  bool near_singular = false;

  Eigen::Index size() const { return values.size(); }
  Scalar operator[](Eigen::Index i) const { return values[i]; }
  Scalar norm() const { return values.size() ? values[0] : Scalar(0); }
  Scalar mininorm() const { return values.size() ? values[values.size() - 1] : Scalar(0); }
  Scalar product() const { return values.prod(); }
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

// Singular values in nonincreasing order. Works for rectangular input; the
// spectrum then has min(rows, cols) entries.
template <typename Derived>
SingularSpectrum<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (!a.allFinite()) throw InvalidInput("singular_values: non-finite matrix entry");
  SingularSpectrum<Scalar> out;
  if (a.size() == 0) return out;
  Eigen::JacobiSVD<Mat<Scalar>> svd(a.derived().template cast<Scalar>().eval());
  out.values = svd.singularValues();
  out.near_singular = !(out.mininorm() >= Scalar(kSingularRatio) * out.norm()) || out.norm() == Scalar(0);
  return out;
}

template <typename Derived>
typename Derived::Scalar operator_norm(const Eigen::MatrixBase<Derived>& a) {
  return singular_values(a).norm();
}

template <typename Derived>
typename Derived::Scalar mininorm(const Eigen::MatrixBase<Derived>& a) {
  return singular_values(a).mininorm();
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

// All k-subsets of {0..d-1} in lexicographic order.
inline std::vector<std::vector<int>> k_subsets(int d, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > d) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == d - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

// k-th compound matrix: entry (I, J) is the minor det A[I, J] with row and
// column k-subsets in lexicographic order.
template <typename Derived>
Mat<typename Derived::Scalar> compound(const Eigen::MatrixBase<Derived>& a, int k) {
  using Scalar = typename Derived::Scalar;
  const int d = static_cast<int>(a.rows());
  if (a.rows() != a.cols()) throw InvalidInput("compound: matrix must be square");
  if (k < 1 || k > d) throw InvalidInput("compound: k must lie in 1..d");
  const auto subsets = k_subsets(d, k);
  const auto m = static_cast<Eigen::Index>(subsets.size());
  Mat<Scalar> out(m, m);
  Mat<Scalar> minor(k, k);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& rows = subsets[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto& cols = subsets[static_cast<std::size_t>(c)];
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          minor(i, j) = a(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      out(r, c) = minor.determinant();
    }
  }
  return out;
}

// Householder QR with the sign of each column of Q chosen so that R has a
// nonnegative diagonal. This makes the factorization a function of the input.
template <typename Scalar>
struct PositiveQr {
  Mat<Scalar> q;  // rows x cols, orthonormal columns
  Mat<Scalar> r;  // cols x cols, upper triangular, r(i,i) >= 0
};

template <typename Derived>
PositiveQr<typename Derived::Scalar> positive_qr(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  Eigen::HouseholderQR<Mat<Scalar>> qr(m.derived().template cast<Scalar>().eval());
  PositiveQr<Scalar> out;
  out.q = qr.householderQ() * Mat<Scalar>::Identity(rows, cols);
  out.r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < cols; ++i) {
    if (out.r(i, i) < Scalar(0)) {
      out.r.row(i) *= Scalar(-1);
      out.q.col(i) *= Scalar(-1);
    }
  }
  return out;
}

// Haar-distributed element of O(d): Gaussian matrix, QR, positive diagonal.
template <typename Scalar = double, typename Generator>
Mat<Scalar> haar_orthogonal(int d, Generator& rng) {
  if (d < 1) throw InvalidInput("haar_orthogonal: d must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat<Scalar> g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = Scalar(normal(rng));
  return positive_qr(g).q;
}

template <typename Scalar = double>
Mat<Scalar> rotation(Scalar angle) {
  Mat<Scalar> r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

// k-dimensional subspace of R^d held through an orthonormal basis.
template <typename Scalar>
class BasicSubspace {
 public:
  BasicSubspace() = default;

  // Orthonormalizes the columns of `spanning`; they must be independent.
  explicit BasicSubspace(const Mat<Scalar>& spanning) {
    if (!spanning.allFinite()) throw InvalidInput("Subspace: non-finite basis");
    if (spanning.cols() < 1 || spanning.cols() > spanning.rows())
      throw InvalidInput("Subspace: need 1 <= k <= d basis vectors");
    auto qr = positive_qr(spanning);
    const Scalar scale = qr.r.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < qr.r.cols(); ++i)
      if (!(qr.r(i, i) > Scalar(1e-12) * scale)) throw InvalidInput("Subspace: dependent basis vectors");
    basis_ = std::move(qr.q);
  }

  static BasicSubspace from_orthonormal(Mat<Scalar> basis) {
    BasicSubspace s;
    s.basis_ = std::move(basis);
    if (!s.is_orthonormal(Scalar(1e-12))) throw InvalidInput("Subspace: basis not orthonormal");
    return s;
  }

  const Mat<Scalar>& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient() const { return static_cast<int>(basis_.rows()); }
  bool proper() const { return dim() >= 1 && dim() <= ambient() - 1; }

  Mat<Scalar> projector() const { return basis_ * basis_.transpose(); }

  BasicSubspace complement() const {
    const int d = ambient();
    Eigen::HouseholderQR<Mat<Scalar>> qr(basis_);
    Mat<Scalar> full = qr.householderQ() * Mat<Scalar>::Identity(d, d);
    BasicSubspace c;
    c.basis_ = full.rightCols(d - dim());
    return c;
  }

  bool is_orthonormal(Scalar tol) const {
    const Mat<Scalar> gram = basis_.transpose() * basis_;
    return (gram - Mat<Scalar>::Identity(dim(), dim())).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Mat<Scalar> basis_;
};

using Subspace = BasicSubspace<double>;

// Top dim(V) singular values of P_V A; the remaining d - dim(V) singular
// values of P_V A vanish.
template <typename Scalar, typename Derived>
Vec<Scalar> projected_singular_values(const BasicSubspace<Scalar>& v, const Eigen::MatrixBase<Derived>& a) {
  if (v.dim() < 1 || v.ambient() != a.rows()) throw InvalidInput("projected_singular_values: subspace/matrix mismatch");
  if (!v.is_orthonormal(Scalar(1e-10))) throw InvalidInput("projected_singular_values: invalid subspace");
  const Mat<Scalar> pa = v.projector() * a.derived().template cast<Scalar>();
  return singular_values(pa).values.head(v.dim());
}

// Haar-random k-plane: first k columns of a Haar orthogonal matrix.
template <typename Scalar = double, typename Generator>
BasicSubspace<Scalar> random_subspace(int d, int k, Generator& rng) {
  if (k < 1 || k > d) throw InvalidInput("random_subspace: need 1 <= k <= d");
  return BasicSubspace<Scalar>::from_orthonormal(haar_orthogonal<Scalar>(d, rng).leftCols(k));
}

}  // namespace affdim
