#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "formreg/error.hpp"
#include "formreg/numkit/matrix.hpp"

namespace formreg::numkit {

/// Bilinear forms transform by S A S^T, sesquilinear ones by S A S^*.
enum class FormKind { Bilinear, Sesquilinear };

inline std::string_view to_string(FormKind f) {
  return f == FormKind::Bilinear ? "bilinear" : "sesquilinear";
}

template <Scalar T>
void check_form(FormKind form) {
  if (form == FormKind::Sesquilinear && !ScalarTraits<T>::complex) {
    throw InvalidFormError("sesquilinear form requires the complex field");
  }
}

/// Transpose for bilinear forms, conjugate transpose for sesquilinear ones.
template <Scalar T>
Matrix<T> star(const Matrix<T>& a, FormKind form) {
  check_form<T>(form);
  return form == FormKind::Sesquilinear ? a.transpose().conj() : a.transpose();
}

/// S A S^star.
template <Scalar T>
Matrix<T> congruence(const Matrix<T>& s, const Matrix<T>& a, FormKind form) {
  return s * a * star(s, form);
}

/// Block-diagonal sum; an empty list gives the 0x0 matrix.
template <Scalar T>
Matrix<T> direct_sum(const std::vector<Matrix<T>>& blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) {
    if (!b.is_square()) throw ShapeError("direct_sum: block " + b.shape_string() + " is not square");
    n += b.rows();
  }
  Matrix<T> out(n, n);
  std::size_t at = 0;
  for (const auto& b : blocks) {
    out.set_block(at, at, b);
    at += b.rows();
  }
  return out;
}

/// n x n nilpotent Jordan block with ones on the superdiagonal.
template <Scalar T>
Matrix<T> jordan_block(std::size_t n) {
  if (n == 0) throw DomainError("jordan_block: size must be positive");
  Matrix<T> j(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) j(i, i + 1) = T(1);
  return j;
}

}  // namespace formreg::numkit
