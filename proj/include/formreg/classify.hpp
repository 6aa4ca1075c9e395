#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formreg/error.hpp"
#include "formreg/numkit.hpp"
#include "formreg/regengine.hpp"

namespace formreg::classify {

using numkit::FormKind;
using numkit::Matrix;
using numkit::Scalar;
using numkit::ScalarTraits;

enum class VerdictTag { Equivalent, NotEquivalent, ReducedToRegularParts };

/// The necessary invariant that separated two forms.
enum class Violation { None, Size, SingularSummands, RegularSize };

inline std::string_view to_string(VerdictTag t) {
  switch (t) {
    case VerdictTag::Equivalent:
      return "Equivalent";
    case VerdictTag::NotEquivalent:
      return "NotEquivalent";
    case VerdictTag::ReducedToRegularParts:
      return "ReducedToRegularParts";
  }
  return "?";
}

inline std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::None:
      return "none";
    case Violation::Size:
      return "sizes differ";
    case Violation::SingularSummands:
      return "singular summands differ";
    case Violation::RegularSize:
      return "regular part sizes differ";
  }
  return "?";
}

template <Scalar T>
struct Verdict {
  VerdictTag tag = VerdictTag::NotEquivalent;
  Violation violation = Violation::None;
  std::vector<std::size_t> blocks_a;
  std::vector<std::size_t> blocks_b;
  Matrix<T> regular_a;
  Matrix<T> regular_b;
  bool upgraded_by_witness = false;
};

/// dim L and dim K of the form x^T A y~ (left kernel and its annihilator).
struct SubspaceReport {
  std::size_t dim_l = 0;
  std::size_t dim_k = 0;
};

/// dim { x : x^T A = 0 }.
template <Scalar T>
std::size_t left_kernel_dim(const Matrix<T>& a, FormKind form, double tol_scale = 1.0) {
  numkit::check_form<T>(form);
  if (!a.is_square()) throw ShapeError("left_kernel_dim: input " + a.shape_string() + " is not square");
  const auto policy = regengine::detail::engine_policy(a, tol_scale);
  return a.rows() - numkit::rank_of(a, policy).rank;
}

/// dim { x : x^T A l~ = 0 for all l in the left kernel }, computed as
/// n - rank(A conj(N)) with the columns of N spanning the left kernel.
template <Scalar T>
std::size_t k_subspace_dim(const Matrix<T>& a, FormKind form, double tol_scale = 1.0) {
  numkit::check_form<T>(form);
  if (!a.is_square()) throw ShapeError("k_subspace_dim: input " + a.shape_string() + " is not square");
  auto policy = regengine::detail::engine_policy(a, tol_scale);
  const Matrix<T> basis = numkit::nullspace(a.transpose(), policy);
  const Matrix<T> coupled = a * (form == FormKind::Sesquilinear ? basis.conj() : basis);
  // The computed kernel basis carries the same error growth as the engine's coupling block.
  policy.amplification *= regengine::detail::kernel_amplification(numkit::rank_of(a, policy));
  return a.rows() - numkit::rank_of(coupled, policy).rank;
}

template <Scalar T>
SubspaceReport subspaces(const Matrix<T>& a, FormKind form, double tol_scale = 1.0) {
  return {left_kernel_dim(a, form, tol_scale), k_subspace_dim(a, form, tol_scale)};
}

/// True iff S is nonsingular and S R_A S^star = R_B (exactly, or entrywise
/// within tol * (1 + max|R_B|) for floating backends).
template <Scalar T>
bool check_congruence_witness(const Matrix<T>& ra, const Matrix<T>& rb, const Matrix<T>& s, FormKind form,
                              double tol = 1e-9) {
  numkit::check_form<T>(form);
  if (!ra.is_square() || !rb.is_square() || !s.is_square() || ra.rows() != rb.rows() || s.rows() != ra.rows()) {
    throw ShapeError("check_congruence_witness: need square matrices of one size, got " + ra.shape_string() + ", " +
                     rb.shape_string() + ", " + s.shape_string());
  }
  if (numkit::rank_of(s).rank != s.rows()) return false;
  const Matrix<T> image = numkit::congruence(s, ra, form);
  if constexpr (ScalarTraits<T>::exact) {
    return image == rb;
  } else {
    return numkit::max_abs_diff(image, rb) <= tol * (1.0 + rb.max_abs());
  }
}

struct CompareOptions {
  double tol_scale = 1.0;
  double tol = 1e-9;  // floating equality of regular parts / witness residual
};

/// Topological (*)congruence up to the regular parts: equal sizes, equal
/// singular summands, and regular parts that are equal or carried onto each
/// other by a supplied linear witness. Anything else short of a violated
/// invariant is ReducedToRegularParts.
template <Scalar T>
Verdict<T> compare(const Matrix<T>& a, const Matrix<T>& b, FormKind form, const CompareOptions& opts = {},
                   const std::optional<Matrix<T>>& witness = std::nullopt) {
  numkit::check_form<T>(form);
  if (!a.is_square() || !b.is_square()) throw ShapeError("compare: inputs must be square");
  Verdict<T> v;
  if (a.rows() != b.rows()) {
    v.violation = Violation::Size;
    return v;
  }
  const regengine::RegularizeOptions ropts{opts.tol_scale};
  auto da = regengine::regularize(a, form, ropts).decomposition;
  auto db = regengine::regularize(b, form, ropts).decomposition;
  v.blocks_a = da.blocks;
  v.blocks_b = db.blocks;
  v.regular_a = std::move(da.regular);
  v.regular_b = std::move(db.regular);
  if (v.blocks_a != v.blocks_b) {
    v.violation = Violation::SingularSummands;
    return v;
  }
  if (v.regular_a.rows() != v.regular_b.rows()) {
    v.violation = Violation::RegularSize;
    return v;
  }
  bool same = false;
  if constexpr (ScalarTraits<T>::exact) {
    same = v.regular_a == v.regular_b;
  } else {
    same = numkit::max_abs_diff(v.regular_a, v.regular_b) <= opts.tol * (1.0 + v.regular_b.max_abs());
  }
  if (same) {
    v.tag = VerdictTag::Equivalent;
    return v;
  }
  v.tag = VerdictTag::ReducedToRegularParts;
  if (witness && witness->rows() == v.regular_a.rows() &&
      check_congruence_witness(v.regular_a, v.regular_b, *witness, form, opts.tol)) {
    v.tag = VerdictTag::Equivalent;
    v.upgraded_by_witness = true;
  }
  return v;
}

}  // namespace formreg::classify
