#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "formreg/error.hpp"
#include "formreg/numkit/matrix.hpp"
#include "formreg/numkit/ops.hpp"

namespace formreg::numkit {

/// Floating rank threshold policy.
///
/// threshold = tol_scale * amplification * max(rows, cols, reference_dim) * eps
///             * max(sigma_max, reference_norm)
///
/// With the reference fields left at their defaults this is the usual
/// relative SVD threshold. The regularization loop pins the reference to the
/// size and spectral norm of the original input, so that blocks whose true
/// value is zero (and which carry only rounding noise) are judged against the
/// scale of the whole problem, and raises `amplification` to account for
/// error propagated through earlier kernel computations.
struct TolPolicy {
  double tol_scale = 1.0;
  double reference_norm = 0.0;
  std::size_t reference_dim = 0;
  double amplification = 1.0;
};

/// Outcome of a rank decision. For exact backends only `rank` is meaningful.
struct RankReport {
  std::size_t rank = 0;
  double smallest_accepted = 0.0;  // least singular value counted as nonzero
  double largest_rejected = 0.0;   // greatest singular value counted as zero
  double largest = 0.0;            // sigma_max of the decided matrix
  double threshold = 0.0;
  bool exact = true;

  /// Distance of the decision from the threshold as a ratio (>= 1 when the
  /// decision is consistent). Infinite for exact decisions or when nothing
  /// lies on the relevant side.
  double margin() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (exact) return inf;
    double m = inf;
    if (rank > 0) m = threshold > 0.0 ? smallest_accepted / threshold : inf;
    if (largest_rejected > 0.0) m = std::min(m, threshold / largest_rejected);
    return m;
  }
};

namespace detail {

template <FloatScalar T>
using EigenMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <FloatScalar T>
EigenMat<T> to_eigen(const Matrix<T>& m) {
  EigenMat<T> e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

template <FloatScalar T>
Matrix<T> from_eigen(const EigenMat<T>& e) {
  Matrix<T> m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = e(i, j);
  return m;
}

/// Full SVD; singular values in descending order.
template <FloatScalar T>
struct FullSvd {
  Matrix<T> u;
  std::vector<double> sigma;
  Matrix<T> v;
};

template <FloatScalar T>
FullSvd<T> full_svd(const Matrix<T>& a) {
  FullSvd<T> out;
  if (a.rows() == 0 || a.cols() == 0) {
    out.u = Matrix<T>::identity(a.rows());
    out.v = Matrix<T>::identity(a.cols());
    return out;
  }
  Eigen::JacobiSVD<EigenMat<T>> svd(to_eigen(a), Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.u = from_eigen<T>(svd.matrixU());
  out.v = from_eigen<T>(svd.matrixV());
  const auto& s = svd.singularValues();
  out.sigma.assign(s.data(), s.data() + s.size());
  return out;
}

inline RankReport decide_rank(const std::vector<double>& sigma, std::size_t rows, std::size_t cols,
                              const TolPolicy& policy) {
  RankReport rep;
  rep.exact = false;
  const double smax = sigma.empty() ? 0.0 : sigma.front();
  const double scale = std::max(smax, policy.reference_norm);
  const auto dim = static_cast<double>(std::max({rows, cols, policy.reference_dim}));
  rep.largest = smax;
  rep.threshold = policy.tol_scale * policy.amplification * dim * std::numeric_limits<double>::epsilon() * scale;
  for (double s : sigma) {
    if (s > rep.threshold) {
      ++rep.rank;
      rep.smallest_accepted = s;
    } else {
      rep.largest_rejected = std::max(rep.largest_rejected, s);
    }
  }
  return rep;
}

/// Rank by fraction-free (Bareiss) elimination; exact over any field.
template <ExactScalar T>
std::size_t bareiss_rank(Matrix<T> a) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  T prev(1);
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && ScalarTraits<T>::is_zero(a(p, c))) ++p;
    if (p == rows) continue;
    if (p != r)
      for (std::size_t j = 0; j < cols; ++j) std::swap(a(p, j), a(r, j));
    const T pivot = a(r, c);
    for (std::size_t i = r + 1; i < rows; ++i) {
      const T f = a(i, c);
      for (std::size_t j = c + 1; j < cols; ++j) a(i, j) = (pivot * a(i, j) - f * a(r, j)) / prev;
      a(i, c) = T(0);
    }
    prev = pivot;
    ++r;
  }
  return r;
}

}  // namespace detail

/// Singular values in descending order (floating backends only).
template <FloatScalar T>
std::vector<double> singular_values(const Matrix<T>& a) {
  return detail::full_svd(a).sigma;
}

/// Exact rank (exact backends) or thresholded SVD rank (floating backends).
template <Scalar T>
RankReport rank_of(const Matrix<T>& a, const TolPolicy& policy = {}) {
  if constexpr (ScalarTraits<T>::exact) {
    RankReport rep;
    rep.rank = detail::bareiss_rank(a);
    return rep;
  } else {
    return detail::decide_rank(singular_values(a), a.rows(), a.cols(), policy);
  }
}

/// S A = [A1; 0] with S nonsingular and A1 of full row rank.
template <Scalar T>
struct RowCompression {
  Matrix<T> s;
  Matrix<T> a1;
  std::size_t m = 0;  // number of zero rows
  RankReport rank;
};

/// Row compression of a matrix of any shape.
///
/// Exact backends use row echelon elimination (below-pivot only, no
/// scaling), so S is a product of swaps and shears. Floating backends take
/// S = U^* from the full SVD A = U Sigma V^*, which makes S unitary, and the
/// bottom rows of S A are then set to exact zero.
template <Scalar T>
RowCompression<T> compress_rows(const Matrix<T>& a, const TolPolicy& policy = {}) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  RowCompression<T> out;
  if constexpr (ScalarTraits<T>::exact) {
    Matrix<T> w = a;
    Matrix<T> s = Matrix<T>::identity(rows);
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
      std::size_t p = r;
      while (p < rows && ScalarTraits<T>::is_zero(w(p, c))) ++p;
      if (p == rows) continue;
      if (p != r) {
        for (std::size_t j = 0; j < cols; ++j) std::swap(w(p, j), w(r, j));
        for (std::size_t j = 0; j < rows; ++j) std::swap(s(p, j), s(r, j));
      }
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (ScalarTraits<T>::is_zero(w(i, c))) continue;
        const T f = w(i, c) / w(r, c);
        for (std::size_t j = c; j < cols; ++j) w(i, j) -= f * w(r, j);
        for (std::size_t j = 0; j < rows; ++j) s(i, j) -= f * s(r, j);
      }
      ++r;
    }
    out.s = std::move(s);
    out.a1 = w.block(0, 0, r, cols);
    out.m = rows - r;
    out.rank.rank = r;
  } else {
    auto svd = detail::full_svd(a);
    out.rank = detail::decide_rank(svd.sigma, rows, cols, policy);
    out.s = star(svd.u, ScalarTraits<T>::complex ? FormKind::Sesquilinear : FormKind::Bilinear);
    const std::size_t r = out.rank.rank;
    out.a1 = (out.s * a).block(0, 0, r, cols);
    out.m = rows - r;
  }
  return out;
}

/// Square-input row compression S A = [A1; 0].
template <Scalar T>
RowCompression<T> row_compress(const Matrix<T>& a, const TolPolicy& policy = {}) {
  if (!a.is_square()) throw ShapeError("row_compress: input " + a.shape_string() + " is not square");
  return compress_rows(a, policy);
}

/// Matrix whose columns span {v : A v = 0}.
template <Scalar T>
Matrix<T> nullspace(const Matrix<T>& a, const TolPolicy& policy = {}) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  if constexpr (ScalarTraits<T>::exact) {
    // Reduced row echelon form, then one basis vector per free column.
    Matrix<T> w = a;
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
      std::size_t p = r;
      while (p < rows && ScalarTraits<T>::is_zero(w(p, c))) ++p;
      if (p == rows) continue;
      if (p != r)
        for (std::size_t j = 0; j < cols; ++j) std::swap(w(p, j), w(r, j));
      const T inv = T(1) / w(r, c);
      for (std::size_t j = c; j < cols; ++j) w(r, j) *= inv;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == r || ScalarTraits<T>::is_zero(w(i, c))) continue;
        const T f = w(i, c);
        for (std::size_t j = c; j < cols; ++j) w(i, j) -= f * w(r, j);
      }
      pivots.push_back(c);
      ++r;
    }
    std::vector<std::size_t> free;
    for (std::size_t c = 0, k = 0; c < cols; ++c) {
      if (k < pivots.size() && pivots[k] == c) {
        ++k;
      } else {
        free.push_back(c);
      }
    }
    Matrix<T> n(cols, free.size());
    for (std::size_t f = 0; f < free.size(); ++f) {
      n(free[f], f) = T(1);
      for (std::size_t k = 0; k < pivots.size(); ++k) n(pivots[k], f) = -w(k, free[f]);
    }
    return n;
  } else {
    auto svd = detail::full_svd(a);
    const std::size_t rank = detail::decide_rank(svd.sigma, rows, cols, policy).rank;
    return svd.v.block(0, rank, cols, cols - rank);
  }
}

}  // namespace formreg::numkit
