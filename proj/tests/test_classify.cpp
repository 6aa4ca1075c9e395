#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "gtest/gtest.h"

#include "formreg/classify.hpp"
#include "formreg/synth.hpp"

namespace {

using namespace formreg;
using namespace formreg::classify;
using numkit::direct_sum;
using numkit::jordan_block;
using Q = numkit::Rational;
using G = numkit::GaussianRational;
using C = std::complex<double>;

constexpr auto kBil = FormKind::Bilinear;
constexpr auto kSesq = FormKind::Sesquilinear;

TEST(Subspaces, LeftKernelFixtures) {
  EXPECT_EQ(left_kernel_dim(Matrix<Q>::zero(3), kBil), 3u);
  EXPECT_EQ(left_kernel_dim(jordan_block<Q>(2), kBil), 1u);
  EXPECT_EQ(left_kernel_dim(Matrix<Q>::identity(5), kBil), 0u);
  EXPECT_EQ(left_kernel_dim(jordan_block<double>(2), kBil), 1u);
  EXPECT_EQ(left_kernel_dim(Matrix<C>::zero(3), kSesq), 3u);
}

TEST(Subspaces, KFixtures) {
  EXPECT_EQ(k_subspace_dim(Matrix<Q>::zero(3), kBil), 3u);
  EXPECT_EQ(k_subspace_dim(jordan_block<Q>(2), kBil), 1u);
  EXPECT_EQ(k_subspace_dim(Matrix<Q>::identity(4), kBil), 4u);
  EXPECT_EQ(k_subspace_dim(jordan_block<C>(2), kSesq), 1u);
  EXPECT_EQ(k_subspace_dim(Matrix<G>::identity(4), kSesq), 4u);
}

TEST(Subspaces, RejectsBadInput) {
  EXPECT_THROW(left_kernel_dim(Matrix<Q>(2, 3), kBil), ShapeError);
  EXPECT_THROW(k_subspace_dim(Matrix<Q>(2, 3), kBil), ShapeError);
  EXPECT_THROW(k_subspace_dim(Matrix<Q>::zero(2), kSesq), InvalidFormError);
}

// dim L is the first m-value and n - dim K the second, so each subspace
// dimension is determined by the engine's staircase.
template <class T>
void cross_check(FormKind form, synth::Scramble scramble, std::uint64_t seeds) {
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    synth::Rng rng(seed);
    synth::SynthesisSpec spec;
    spec.seed = seed;
    spec.scramble = scramble;
    spec.regular_size = static_cast<std::size_t>(rng.uniform_int(0, 3));
    const long nblocks = rng.uniform_int(0, 3);
    for (long k = 0; k < nblocks; ++k) spec.blocks.push_back(static_cast<std::size_t>(rng.uniform_int(1, 3)));
    if (spec.total_size() == 0) continue;
    const auto s = synth::synthesize<T>(spec, std::nullopt, form);
    const auto& m = s.ground_truth.m_sequence;
    const std::size_t m1 = m.size() > 0 ? m[0] : 0;
    const std::size_t m2 = m.size() > 1 ? m[1] : 0;
    const auto sub = subspaces(s.a, form);
    EXPECT_EQ(sub.dim_l, m1) << "seed " << seed;
    EXPECT_EQ(s.a.rows() - sub.dim_k, m2) << "seed " << seed;
  }
}

TEST(Subspaces, MatchFirstTwoMValues) {
  cross_check<Q>(kBil, synth::Scramble::GeneralNonsingular, 60);
  cross_check<G>(kSesq, synth::Scramble::GeneralNonsingular, 60);
  cross_check<double>(kBil, synth::Scramble::Unitary, 60);
  cross_check<C>(kSesq, synth::Scramble::Unitary, 60);
}

TEST(Compare, Fixtures) {
  {
    const auto v = compare(Matrix<Q>::zero(2), jordan_block<Q>(2), kBil);
    EXPECT_EQ(v.tag, VerdictTag::NotEquivalent);
    EXPECT_EQ(v.violation, Violation::SingularSummands);
  }
  {
    const auto v = compare(Matrix<Q>::identity(3), Matrix<Q>::identity(3), kBil);
    EXPECT_EQ(v.tag, VerdictTag::Equivalent);
    EXPECT_FALSE(v.upgraded_by_witness);
  }
  {
    const Matrix<Q> one{{Q(1)}};
    const auto a = direct_sum<Q>({jordan_block<Q>(2), one});
    const auto b = direct_sum<Q>({one, jordan_block<Q>(2)});
    EXPECT_EQ(compare(a, b, kBil).tag, VerdictTag::Equivalent);
  }
  {
    const auto v = compare(Matrix<Q>::identity(2), Matrix<Q>::identity(3), kBil);
    EXPECT_EQ(v.tag, VerdictTag::NotEquivalent);
    EXPECT_EQ(v.violation, Violation::Size);
  }
  EXPECT_EQ(to_string(Violation::SingularSummands), "singular summands differ");
}

TEST(Compare, DifferentRegularPartsNeedAWitness) {
  const Matrix<Q> one{{Q(1)}};
  const Matrix<Q> four{{Q(4)}};
  const auto v = compare(one, four, kBil);
  EXPECT_EQ(v.tag, VerdictTag::ReducedToRegularParts);

  const Matrix<Q> two{{Q(2)}};
  const auto w = compare(one, four, kBil, {}, std::optional(two));
  EXPECT_EQ(w.tag, VerdictTag::Equivalent);
  EXPECT_TRUE(w.upgraded_by_witness);

  const auto bad = compare(one, four, kBil, {}, std::optional(one));
  EXPECT_EQ(bad.tag, VerdictTag::ReducedToRegularParts);
}

TEST(Witness, Fixtures) {
  const Matrix<Q> one{{Q(1)}};
  EXPECT_TRUE(check_congruence_witness(one, Matrix<Q>{{Q(4)}}, Matrix<Q>{{Q(2)}}, kBil));

  // i [1] conj(i) = 1, never -1.
  const Matrix<G> g1{{G(1)}};
  const Matrix<G> gm1{{G(-1)}};
  const Matrix<G> gi{{numkit::kImagUnit}};
  EXPECT_FALSE(check_congruence_witness(g1, gm1, gi, kSesq));
  // Under the bilinear form i [1] i = -1.
  EXPECT_TRUE(check_congruence_witness(g1, gm1, gi, kBil));

  EXPECT_TRUE(check_congruence_witness(Matrix<C>::identity(2), Matrix<C>::identity(2),
                                       synth::random_unitary<C>(2, 5), kSesq));
  EXPECT_FALSE(check_congruence_witness(one, one, Matrix<Q>{{Q(0)}}, kBil));
  EXPECT_THROW(check_congruence_witness(one, Matrix<Q>::identity(2), one, kBil), ShapeError);
}

TEST(Compare, ReflexiveAndSymmetric) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    synth::Rng rng(seed);
    const std::size_t n = 1 + seed % 5;
    const std::size_t r = seed % (n + 1);
    const auto a = synth::random_matrix<Q>(rng, n, r) * synth::random_matrix<Q>(rng, r, n);
    const auto b = synth::random_matrix<Q>(rng, n, r) * synth::random_matrix<Q>(rng, r, n);
    EXPECT_EQ(compare(a, a, kBil).tag, VerdictTag::Equivalent);
    EXPECT_EQ(compare(a, b, kBil).tag, compare(b, a, kBil).tag);
  }
}

TEST(Compare, CongruentInputsAreNeverSeparated) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    synth::SynthesisSpec spec;
    spec.seed = seed;
    spec.regular_size = seed % 3;
    spec.blocks = {1 + seed % 3, 1 + seed % 2};
    const auto s = synth::synthesize<G>(spec, std::nullopt, kSesq);
    const auto t = synth::random_nonsingular<G>(s.a.rows(), seed + 77);
    const auto v = compare(s.a, numkit::congruence(t, s.a, kSesq), kSesq);
    EXPECT_NE(v.tag, VerdictTag::NotEquivalent) << "seed " << seed;
    EXPECT_EQ(v.blocks_a, v.blocks_b);
  }
}

}  // namespace
