#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "formreg/error.hpp"
#include "formreg/numkit.hpp"

namespace formreg::regengine {

using numkit::FormKind;
using numkit::Matrix;
using numkit::RankReport;
using numkit::Scalar;
using numkit::ScalarTraits;
using numkit::TolPolicy;

/// Margin below which a floating rank decision or the regular part is flagged.
inline constexpr double kMarginGuard = 10.0;

/// One pass of the reduction. With n the size of the step input and
/// n1 = n - m1, the input is carried to
///
///   (S1 + I_m1) S A S^* (S1^* + I_m1) = [ D  E   C1 ]  } m2
///                                       [ F  A2  0  ]
///                                       [ 0  0   0  ]  } m1
///
/// where S A = [A1; 0] and S1 C = [C1; 0].
template <Scalar T>
struct StepRecord {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  Matrix<T> s;   // n x n
  Matrix<T> s1;  // n1 x n1
  Matrix<T> d;   // m2 x m2
  Matrix<T> e;   // m2 x (n1 - m2)
  Matrix<T> f;   // (n1 - m2) x m2
  Matrix<T> c1;  // m2 x m1, full row rank
  Matrix<T> a2;  // (n1 - m2) x (n1 - m2)
  RankReport rank_a;  // decision that produced m1
  RankReport rank_c;  // decision that produced m2
  double amplification = 1.0;  // error growth factor in effect for rank_a
};

/// Replayable certificate of a full regularization run.
template <Scalar T>
struct ReductionTrace {
  std::size_t input_size = 0;
  FormKind form = FormKind::Bilinear;
  double tol_scale = 1.0;
  std::vector<StepRecord<T>> steps;
  Matrix<T> regular;
  RankReport regular_rank;

  std::vector<std::size_t> m_sequence() const {
    std::vector<std::size_t> m;
    m.reserve(2 * steps.size());
    for (const auto& st : steps) {
      m.push_back(st.m1);
      m.push_back(st.m2);
    }
    return m;
  }

  /// Smallest margin over every floating rank decision (infinite when exact).
  double min_margin() const {
    double m = regular_rank.margin();
    for (const auto& st : steps) m = std::min({m, st.rank_a.margin(), st.rank_c.margin()});
    return m;
  }

  /// Some singular value of the regular part lies within kMarginGuard of the threshold.
  bool ill_conditioned() const {
    if (regular_rank.exact || regular.rows() == 0) return false;
    return regular_rank.smallest_accepted <= kMarginGuard * regular_rank.threshold;
  }

  /// The m-sequence is weakly decreasing, as it always is in exact arithmetic.
  bool consistent() const {
    const auto m = m_sequence();
    return std::is_sorted(m.begin(), m.end(), std::greater<>());
  }

  /// Some step's rank decision has margin below kMarginGuard.
  bool low_margin() const {
    return std::any_of(steps.begin(), steps.end(), [](const StepRecord<T>& st) {
      return st.rank_a.margin() <= kMarginGuard || st.rank_c.margin() <= kMarginGuard;
    });
  }
};

/// R + J_{n1} + ... + J_{np}, blocks kept in descending order.
template <Scalar T>
struct RegularizingDecomposition {
  Matrix<T> regular;
  std::vector<std::size_t> blocks;
  std::vector<std::size_t> m_sequence;

  std::size_t total_size() const {
    std::size_t n = regular.rows();
    for (auto b : blocks) n += b;
    return n;
  }
};

template <Scalar T>
struct Regularization {
  RegularizingDecomposition<T> decomposition;
  ReductionTrace<T> trace;
};

struct RegularizeOptions {
  double tol_scale = 1.0;
};

/// Block sizes from an m-sequence: J_i appears m_i - m_{i+1} times, m_{2t+1} = 0.
/// With `lenient`, rises in the sequence contribute no blocks instead of throwing.
inline std::vector<std::size_t> blocks_from_m_sequence(const std::vector<std::size_t>& m, bool lenient = false) {
  std::vector<std::size_t> blocks;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t next = i + 1 < m.size() ? m[i + 1] : 0;
    if (m[i] < next) {
      if (lenient) continue;
      throw InvariantError("m-sequence is not weakly decreasing");
    }
    blocks.insert(blocks.end(), m[i] - next, i + 1);
  }
  std::sort(blocks.begin(), blocks.end(), std::greater<>());
  return blocks;
}

/// Inverse of blocks_from_m_sequence: m_i = #{blocks of size >= i} for i = 1..2t,
/// 2t being the largest block size rounded up to even.
inline std::vector<std::size_t> m_sequence_from_blocks(const std::vector<std::size_t>& blocks) {
  std::size_t largest = 0;
  for (auto b : blocks) {
    if (b == 0) throw DomainError("singular Jordan block sizes must be positive");
    largest = std::max(largest, b);
  }
  const std::size_t len = largest + (largest % 2);
  std::vector<std::size_t> m(len, 0);
  for (std::size_t i = 0; i < len; ++i)
    m[i] = static_cast<std::size_t>(std::count_if(blocks.begin(), blocks.end(), [&](std::size_t b) { return b >= i + 1; }));
  return m;
}

inline bool weakly_decreasing(const std::vector<std::size_t>& m) {
  return std::is_sorted(m.begin(), m.end(), std::greater<>());
}

namespace detail {

template <Scalar T>
TolPolicy engine_policy(const Matrix<T>& a, double tol_scale) {
  TolPolicy p;
  p.tol_scale = tol_scale;
  p.reference_dim = a.rows();
  if constexpr (!ScalarTraits<T>::exact) {
    const auto sv = numkit::singular_values(a);
    p.reference_norm = sv.empty() ? 0.0 : sv.front();
  }
  return p;
}

/// Error growth from computing a left kernel of W in floating point: a
/// backward perturbation of size delta tilts the computed kernel by about
/// delta / sigma_r(W), which shows up in the coupling block scaled by
/// sigma_1(W). Exact decisions do not amplify.
inline double kernel_amplification(const RankReport& w) {
  if (w.exact || w.rank == 0 || w.smallest_accepted <= 0.0) return 1.0;
  return 1.0 + w.largest / w.smallest_accepted;
}

template <Scalar T>
StepRecord<T> finish_step(const Matrix<T>& a, numkit::RowCompression<T> comp, FormKind form, TolPolicy policy) {
  const std::size_t n = a.rows();
  StepRecord<T> st;
  st.m1 = comp.m;
  st.rank_a = comp.rank;
  st.amplification = policy.amplification;
  policy.amplification *= kernel_amplification(comp.rank);
  st.s = std::move(comp.s);
  const std::size_t n1 = n - st.m1;

  // S A with the bottom m1 rows exactly zero, then S A S^*.
  Matrix<T> sa(n, n);
  sa.set_block(0, 0, comp.a1);
  const Matrix<T> m = sa * numkit::star(st.s, form);
  const Matrix<T> b = m.block(0, 0, n1, n1);
  const Matrix<T> c = m.block(0, n1, n1, st.m1);

  auto comp_c = numkit::compress_rows(c, policy);
  st.m2 = comp_c.rank.rank;
  st.rank_c = comp_c.rank;
  st.s1 = std::move(comp_c.s);
  st.c1 = std::move(comp_c.a1);

  const Matrix<T> bb = numkit::congruence(st.s1, b, form);
  const std::size_t rest = n1 - st.m2;
  st.d = bb.block(0, 0, st.m2, st.m2);
  st.e = bb.block(0, st.m2, st.m2, rest);
  st.f = bb.block(st.m2, 0, rest, st.m2);
  st.a2 = bb.block(st.m2, st.m2, rest, rest);
  return st;
}

}  // namespace detail

/// One reduction step on a singular square matrix.
template <Scalar T>
StepRecord<T> regularization_step(const Matrix<T>& a, FormKind form, const TolPolicy& policy = {}) {
  numkit::check_form<T>(form);
  if (!a.is_square()) throw ShapeError("regularization_step: input " + a.shape_string() + " is not square");
  if (a.rows() == 0) throw PreconditionError("regularization_step: empty matrix is nonsingular");
  auto comp = numkit::row_compress(a, policy);
  if (comp.m == 0) throw PreconditionError("regularization_step: input is nonsingular");
  return detail::finish_step(a, std::move(comp), form, policy);
}

/// Iterates the reduction step until the working matrix is nonsingular
/// (0x0 counts as nonsingular) and reads the singular summands off the
/// m-sequence.
template <Scalar T>
Regularization<T> regularize(const Matrix<T>& a, FormKind form, const RegularizeOptions& opts = {}) {
  numkit::check_form<T>(form);
  if (!a.is_square()) throw ShapeError("regularize: input " + a.shape_string() + " is not square");
  TolPolicy policy = detail::engine_policy(a, opts.tol_scale);

  Regularization<T> out;
  auto& trace = out.trace;
  trace.input_size = a.rows();
  trace.form = form;
  trace.tol_scale = opts.tol_scale;

  Matrix<T> work = a;
  while (work.rows() > 0) {
    auto comp = numkit::row_compress(work, policy);
    if (comp.m == 0) {
      trace.regular_rank = comp.rank;
      break;
    }
    const std::size_t before = work.rows();
    trace.steps.push_back(detail::finish_step(work, std::move(comp), form, policy));
    policy.amplification *= detail::kernel_amplification(trace.steps.back().rank_a);
    work = trace.steps.back().a2;
    if (work.rows() >= before) throw InvariantError("regularize: working size did not decrease");
  }
  if (work.rows() == 0) {
    trace.regular_rank = RankReport{};
    trace.regular_rank.exact = ScalarTraits<T>::exact;
  }
  trace.regular = work;

  auto& d = out.decomposition;
  d.regular = std::move(work);
  d.m_sequence = trace.m_sequence();
  // Only floating runs can produce a rising sequence; trace.consistent() reports it.
  d.blocks = blocks_from_m_sequence(d.m_sequence, true);
  return out;
}

/// regular + J_{b1} + J_{b2} + ... with blocks in descending size.
template <Scalar T>
Matrix<T> assemble_decomposition(const RegularizingDecomposition<T>& d) {
  if (!d.regular.is_square()) throw ShapeError("assemble: regular part is not square");
  if (numkit::rank_of(d.regular).rank != d.regular.rows()) {
    throw InvariantError("assemble: regular part is singular");
  }
  std::vector<std::size_t> sizes = d.blocks;
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  std::vector<Matrix<T>> parts{d.regular};
  for (auto b : sizes) parts.push_back(numkit::jordan_block<T>(b));
  return numkit::direct_sum(parts);
}

struct Check {
  std::string name;
  bool passed = false;
  double residual = 0.0;  // observed deviation (0 for exact checks)
  double limit = 0.0;     // allowed deviation
};

struct VerificationReport {
  std::vector<Check> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> f;
    for (const auto& c : checks)
      if (!c.passed) f.push_back(c.name);
    return f;
  }
  bool failed(const std::string& substring) const {
    return std::any_of(checks.begin(), checks.end(), [&](const Check& c) {
      return !c.passed && c.name.find(substring) != std::string::npos;
    });
  }
};

struct VerifyOptions {
  /// Floating tolerance: unitarity residual <= tol, block residuals <= tol * (1 + max|A|).
  double tol = 1e-9;
};

/// Replays a trace against its input and checks every structural claim.
template <Scalar T>
VerificationReport verify_trace(const Matrix<T>& a, const ReductionTrace<T>& trace, FormKind form,
                                const VerifyOptions& opts = {}) {
  constexpr bool exact = ScalarTraits<T>::exact;
  numkit::check_form<T>(form);
  if (!a.is_square()) throw ShapeError("verify_trace: input " + a.shape_string() + " is not square");
  if (trace.input_size != a.rows()) {
    throw ShapeError("verify_trace: trace is for size " + std::to_string(trace.input_size) + ", input is " +
                     std::to_string(a.rows()));
  }

  VerificationReport rep;
  TolPolicy policy = detail::engine_policy(a, trace.tol_scale);
  const double block_tol = exact ? 0.0 : opts.tol * (1.0 + a.max_abs());
  const double unit_tol = exact ? 0.0 : opts.tol;

  auto add = [&](std::string name, bool ok, double residual = 0.0, double limit = 0.0) {
    rep.checks.push_back({std::move(name), ok, residual, limit});
  };
  auto close = [&](std::string name, const Matrix<T>& x, const Matrix<T>& y) {
    if (x.rows() != y.rows() || x.cols() != y.cols()) {
      add(std::move(name), false, std::numeric_limits<double>::infinity(), block_tol);
      return;
    }
    const double r = numkit::max_abs_diff(x, y);
    add(std::move(name), exact ? x == y : r <= block_tol, r, block_tol);
  };
  // Blocks zeroed by a rank decision may carry up to that decision's threshold.
  auto zero = [&](std::string name, const Matrix<T>& x, double threshold) {
    const double r = x.max_abs();
    const double limit = block_tol + threshold;
    add(std::move(name), exact ? x.is_zero() : r <= limit, r, limit);
  };
  auto nonsingular = [&](std::string name, const Matrix<T>& s) {
    if constexpr (exact) {
      add(std::move(name) + " nonsingular", s.is_square() && numkit::rank_of(s).rank == s.rows());
    } else {
      const Matrix<T> eye = Matrix<T>::identity(s.rows());
      const double r = s.is_square() ? numkit::max_abs_diff(s * s.transpose().conj(), eye)
                                     : std::numeric_limits<double>::infinity();
      add(std::move(name) + " unitary", r <= unit_tol, r, unit_tol);
    }
  };

  add("form matches trace", trace.form == form);

  Matrix<T> work = a;
  bool replayable = true;
  for (std::size_t k = 0; k < trace.steps.size() && replayable; ++k) {
    const auto& st = trace.steps[k];
    const std::string tag = "step " + std::to_string(k + 1) + ": ";
    const std::size_t n = work.rows();
    const bool dims_ok = st.m1 >= 1 && st.m1 <= n && st.m2 <= n - st.m1 && st.s.rows() == n && st.s.cols() == n &&
                         st.s1.rows() == n - st.m1 && st.s1.cols() == n - st.m1;
    add(tag + "dimensions", dims_ok);
    if (!dims_ok) {
      replayable = false;
      break;
    }
    const std::size_t n1 = n - st.m1;
    const std::size_t rest = n1 - st.m2;

    const auto work_rank = numkit::rank_of(work, policy);
    TolPolicy coupling = policy;
    coupling.amplification *= detail::kernel_amplification(work_rank);
    const double coupling_threshold = numkit::detail::decide_rank({}, n1, st.m1, coupling).threshold;

    nonsingular(tag + "S", st.s);
    const Matrix<T> m = numkit::congruence(st.s, work, form);
    zero(tag + "bottom m1 rows of S A S* are zero", m.block(n1, 0, st.m1, n), work_rank.threshold);
    add(tag + "rows of [B C] independent", numkit::rank_of(m.block(0, 0, n1, n), policy).rank == n1);

    nonsingular(tag + "S1", st.s1);
    Matrix<T> big = Matrix<T>::identity(n);
    big.set_block(0, 0, st.s1);
    const Matrix<T> m2 = numkit::congruence(big, m, form);
    zero(tag + "C block below C1 is zero", m2.block(st.m2, n1, rest, st.m1), coupling_threshold);
    add(tag + "C1 full row rank", st.c1.rows() == st.m2 && numkit::rank_of(st.c1, coupling).rank == st.m2);
    close(tag + "C1 matches", m2.block(0, n1, st.m2, st.m1), st.c1);
    close(tag + "D matches", m2.block(0, 0, st.m2, st.m2), st.d);
    close(tag + "E matches", m2.block(0, st.m2, st.m2, rest), st.e);
    close(tag + "F matches", m2.block(st.m2, 0, rest, st.m2), st.f);
    close(tag + "A2 matches", m2.block(st.m2, st.m2, rest, rest), st.a2);

    policy.amplification = coupling.amplification;
    work = st.a2;
    if (work.rows() != rest) replayable = false;
  }

  if (replayable) close("regular part matches terminal working matrix", work, trace.regular);
  const auto regular_rank = numkit::rank_of(trace.regular, policy);
  add("regular part nonsingular", trace.regular.is_square() && regular_rank.rank == trace.regular.rows());
  add("m-sequence monotonicity", weakly_decreasing(trace.m_sequence()));
  std::size_t consumed = 0;
  for (const auto& st : trace.steps) consumed += st.m1 + st.m2;
  add("sizes telescope", trace.regular.rows() + consumed == trace.input_size);
  return rep;
}

}  // namespace formreg::regengine
