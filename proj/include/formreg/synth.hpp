#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/QR>

#include "formreg/error.hpp"
#include "formreg/numkit.hpp"
#include "formreg/regengine.hpp"

namespace formreg::synth {

using numkit::FormKind;
using numkit::Matrix;
using numkit::Scalar;
using numkit::ScalarTraits;

/// Identifier recorded in generated metadata. The library distributions are
/// implementation-defined, so uniform and normal variates are derived from
/// the raw engine output here to keep fixtures identical across platforms.
inline constexpr std::string_view kGeneratorId = "mt19937_64+box-muller/v1";

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi] by rejection.
  long uniform_int(long lo, long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<long>(x % span);
  }

  /// Standard normal; both Box-Muller outputs are used in turn.
  double gaussian() {
    if (spare_) {
      const double g = *spare_;
      spare_.reset();
      return g;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Independent sub-stream seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
}

inline constexpr double kMaxCondition = 1e6;

template <Scalar T>
T random_entry(Rng& rng, long bound) {
  if constexpr (std::is_same_v<T, numkit::Rational>) {
    return numkit::Rational(rng.uniform_int(-bound, bound));
  } else if constexpr (std::is_same_v<T, numkit::GaussianRational>) {
    const long re = rng.uniform_int(-bound, bound);
    const long im = rng.uniform_int(-bound, bound);
    return {numkit::Rational(re), numkit::Rational(im)};
  } else if constexpr (std::is_same_v<T, double>) {
    return rng.gaussian();
  } else {
    const double re = rng.gaussian();
    const double im = rng.gaussian();
    return {re * std::numbers::sqrt2 / 2, im * std::numbers::sqrt2 / 2};
  }
}

template <Scalar T>
Matrix<T> random_matrix(Rng& rng, std::size_t rows, std::size_t cols, long bound = 3) {
  Matrix<T> m(rows, cols);
  for (auto& x : m.entries()) x = random_entry<T>(rng, bound);
  return m;
}

/// Random n x n nonsingular matrix. Exact: integer (or Gaussian integer)
/// entries in [-entry_bound, entry_bound], resampled until exactly
/// nonsingular. Float: Gaussian entries, resampled while the condition
/// number exceeds 1e6.
template <Scalar T>
Matrix<T> random_nonsingular(std::size_t n, std::uint64_t seed, long entry_bound = 3) {
  if (entry_bound < 1) throw DomainError("entry_bound must be positive");
  Rng rng(seed);
  for (;;) {
    Matrix<T> m = random_matrix<T>(rng, n, n, entry_bound);
    if constexpr (ScalarTraits<T>::exact) {
      if (numkit::rank_of(m).rank == n) return m;
    } else {
      if (n == 0) return m;
      const auto sv = numkit::singular_values(m);
      if (sv.back() > 0.0 && sv.front() / sv.back() <= kMaxCondition) return m;
    }
  }
}

/// Random unitary (complex) or orthogonal (real) matrix from the QR
/// factorization of a Gaussian matrix, with R's diagonal phases folded into Q.
template <Scalar T>
Matrix<T> random_unitary(std::size_t n, std::uint64_t seed) {
  if constexpr (ScalarTraits<T>::exact) {
    throw DomainError("random_unitary: exact backends are unsupported, use a general nonsingular scramble");
  } else {
    Rng rng(seed);
    const Matrix<T> g = random_matrix<T>(rng, n, n);
    if (n == 0) return g;
    Eigen::HouseholderQR<numkit::detail::EigenMat<T>> qr(numkit::detail::to_eigen(g));
    numkit::detail::EigenMat<T> q = qr.householderQ();
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const double mag = std::abs(r(j, j));
      if (mag > 0.0) q.col(j) *= r(j, j) / mag;
    }
    return numkit::detail::from_eigen<T>(q);
  }
}

enum class Scramble { None, Unitary, GeneralNonsingular };

inline std::string_view to_string(Scramble s) {
  switch (s) {
    case Scramble::None:
      return "none";
    case Scramble::Unitary:
      return "unitary";
    case Scramble::GeneralNonsingular:
      return "general";
  }
  return "?";
}

struct SynthesisSpec {
  std::size_t regular_size = 0;
  std::vector<std::size_t> blocks;
  Scramble scramble = Scramble::None;
  std::uint64_t seed = 0;
  long entry_bound = 3;

  std::size_t total_size() const {
    std::size_t n = regular_size;
    for (auto b : blocks) n += b;
    return n;
  }
};

template <Scalar T>
struct Synthesized {
  Matrix<T> a;
  regengine::RegularizingDecomposition<T> ground_truth;
  Matrix<T> transform;  // A = T (R + J...) T^star
};

/// Builds T (R + J_{b1} + ...) T^star with the prescribed summands.
template <Scalar T>
Synthesized<T> synthesize(const SynthesisSpec& spec, const std::optional<Matrix<T>>& regular, FormKind form) {
  numkit::check_form<T>(form);
  for (auto b : spec.blocks)
    if (b == 0) throw DomainError("synthesize: block sizes must be positive");

  Synthesized<T> out;
  auto& truth = out.ground_truth;
  if (regular) {
    if (!regular->is_square() || regular->rows() != spec.regular_size) {
      throw ShapeError("synthesize: supplied regular part has shape " + regular->shape_string());
    }
    if (numkit::rank_of(*regular).rank != regular->rows()) {
      throw PreconditionError("synthesize: supplied regular part is singular");
    }
    truth.regular = *regular;
  } else {
    truth.regular = random_nonsingular<T>(spec.regular_size, derive_seed(spec.seed, 0), spec.entry_bound);
  }
  truth.blocks = spec.blocks;
  std::sort(truth.blocks.begin(), truth.blocks.end(), std::greater<>());
  truth.m_sequence = regengine::m_sequence_from_blocks(truth.blocks);

  const Matrix<T> d = regengine::assemble_decomposition(truth);
  const std::size_t n = d.rows();
  switch (spec.scramble) {
    case Scramble::None:
      out.transform = Matrix<T>::identity(n);
      break;
    case Scramble::Unitary:
      out.transform = random_unitary<T>(n, derive_seed(spec.seed, 1));
      break;
    case Scramble::GeneralNonsingular:
      out.transform = random_nonsingular<T>(n, derive_seed(spec.seed, 1), spec.entry_bound);
      break;
  }
  out.a = spec.scramble == Scramble::None ? d : numkit::congruence(out.transform, d, form);
  return out;
}

}  // namespace formreg::synth
