#include <complex>
#include <cstdint>
#include <vector>

#include "gtest/gtest.h"

#include "formreg/classify.hpp"
#include "formreg/regengine.hpp"
#include "formreg/synth.hpp"

namespace {

using namespace formreg;
using namespace formreg::regengine;
using numkit::direct_sum;
using numkit::jordan_block;
using Q = numkit::Rational;
using G = numkit::GaussianRational;
using C = std::complex<double>;
using Sizes = std::vector<std::size_t>;

constexpr auto kBil = FormKind::Bilinear;
constexpr auto kSesq = FormKind::Sesquilinear;

TEST(Step, JordanTwo) {
  const auto st = regularization_step(jordan_block<Q>(2), kBil);
  EXPECT_EQ(st.m1, 1u);
  EXPECT_EQ(st.m2, 1u);
  EXPECT_EQ(st.a2.rows(), 0u);
  EXPECT_EQ(st.c1, (Matrix<Q>{{Q(1)}}));
}

TEST(Step, ZeroTwo) {
  const auto st = regularization_step(Matrix<Q>::zero(2), kBil);
  EXPECT_EQ(st.m1, 2u);
  EXPECT_EQ(st.m2, 0u);
  EXPECT_EQ(st.a2.rows(), 0u);
  EXPECT_EQ(st.c1.rows(), 0u);
  EXPECT_EQ(st.c1.cols(), 2u);
}

TEST(Step, JordanThreeHandTrace) {
  // B = [[0,1],[0,0]], C = [0;1]; S1 swaps the two rows, so
  // S1 B S1^T = [[0,0],[1,0]] and D = E = A2 = [0], F = [1].
  const auto st = regularization_step(jordan_block<Q>(3), kBil);
  EXPECT_EQ(st.m1, 1u);
  EXPECT_EQ(st.m2, 1u);
  EXPECT_EQ(st.s, Matrix<Q>::identity(3));
  EXPECT_EQ(st.s1, (Matrix<Q>{{Q(0), Q(1)}, {Q(1), Q(0)}}));
  EXPECT_EQ(st.c1, (Matrix<Q>{{Q(1)}}));
  EXPECT_EQ(st.d, Matrix<Q>::zero(1));
  EXPECT_EQ(st.e, Matrix<Q>::zero(1));
  EXPECT_EQ(st.f, (Matrix<Q>{{Q(1)}}));
  EXPECT_EQ(st.a2, Matrix<Q>::zero(1));
}

TEST(Step, Preconditions) {
  EXPECT_THROW(regularization_step(Matrix<Q>::identity(3), kBil), PreconditionError);
  EXPECT_THROW(regularization_step(Matrix<Q>(0, 0), kBil), PreconditionError);
  EXPECT_THROW(regularization_step(Matrix<Q>(2, 3), kBil), ShapeError);
  EXPECT_THROW(regularization_step(jordan_block<Q>(2), kSesq), InvalidFormError);
}

TEST(Step, SecondCompressionNeverExceedsFirst) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    synth::Rng rng(seed);
    const std::size_t n = 2 + seed % 6;
    const std::size_t r = seed % n;
    const auto a = synth::random_matrix<Q>(rng, n, r) * synth::random_matrix<Q>(rng, r, n);
    const auto st = regularization_step(a, kBil);
    EXPECT_LE(st.m2, st.m1);
    EXPECT_EQ(st.c1.rows(), st.m2);
    EXPECT_EQ(st.c1.cols(), st.m1);
    EXPECT_EQ(st.a2.rows(), n - st.m1 - st.m2);
  }
}

TEST(Regularize, Fixtures) {
  {
    const auto d = regularize(Matrix<Q>::zero(3), kBil).decomposition;
    EXPECT_EQ(d.regular.rows(), 0u);
    EXPECT_EQ(d.blocks, (Sizes{1, 1, 1}));
    EXPECT_EQ(d.m_sequence, (Sizes{3, 0}));
  }
  {
    const auto d = regularize(Matrix<Q>::identity(4), kBil).decomposition;
    EXPECT_EQ(d.regular, Matrix<Q>::identity(4));
    EXPECT_TRUE(d.blocks.empty());
    EXPECT_TRUE(d.m_sequence.empty());
  }
  {
    const auto d = regularize(jordan_block<Q>(3), kBil).decomposition;
    EXPECT_EQ(d.regular.rows(), 0u);
    EXPECT_EQ(d.blocks, (Sizes{3}));
    EXPECT_EQ(d.m_sequence, (Sizes{1, 1, 1, 0}));
  }
  {
    const Matrix<Q> five{{Q(5)}};
    const auto a = direct_sum<Q>({five, jordan_block<Q>(2), jordan_block<Q>(1)});
    const auto d = regularize(a, kBil).decomposition;
    EXPECT_EQ(d.regular, five);
    EXPECT_EQ(d.blocks, (Sizes{2, 1}));
  }
  EXPECT_EQ(regularize(Matrix<Q>(0, 0), kBil).decomposition.regular.rows(), 0u);
  EXPECT_THROW(regularize(Matrix<Q>(1, 2), kBil), ShapeError);
}

TEST(Regularize, JordanBlocksAllBackends) {
  for (std::size_t n = 1; n <= 12; ++n) {
    EXPECT_EQ(regularize(jordan_block<Q>(n), kBil).decomposition.blocks, Sizes{n});
    EXPECT_EQ(regularize(jordan_block<G>(n), kSesq).decomposition.blocks, Sizes{n});
    EXPECT_EQ(regularize(jordan_block<double>(n), kBil).decomposition.blocks, Sizes{n});
    EXPECT_EQ(regularize(jordan_block<C>(n), kSesq).decomposition.blocks, Sizes{n});
    EXPECT_EQ(regularize(jordan_block<Q>(n), kBil).decomposition.regular.rows(), 0u);
  }
}

TEST(Regularize, MSequenceMatchesPrescribedBlocks) {
  // Independent route: the m-sequence of R + J's is #{blocks >= i}.
  const std::vector<Sizes> cases = {{1}, {2}, {3, 1}, {4, 4, 2}, {5, 2, 2, 1}, {6}, {1, 1, 2, 3}};
  for (const auto& blocks : cases) {
    std::vector<Matrix<Q>> parts{Matrix<Q>{{Q(2), Q(1)}, {Q(0), Q(3)}}};
    for (auto b : blocks) parts.push_back(jordan_block<Q>(b));
    const auto d = regularize(direct_sum(parts), kBil).decomposition;
    EXPECT_EQ(d.m_sequence, m_sequence_from_blocks(blocks));
    EXPECT_TRUE(weakly_decreasing(d.m_sequence));
    EXPECT_EQ(d.total_size(), direct_sum(parts).rows());
  }
}

TEST(MSequence, BlocksRoundTrip) {
  EXPECT_EQ(blocks_from_m_sequence({3, 0}), (Sizes{1, 1, 1}));
  EXPECT_EQ(blocks_from_m_sequence({1, 1, 1, 0}), (Sizes{3}));
  EXPECT_EQ(blocks_from_m_sequence({}), Sizes{});
  EXPECT_EQ(m_sequence_from_blocks({3}), (Sizes{1, 1, 1, 0}));
  EXPECT_EQ(m_sequence_from_blocks({2, 1}), (Sizes{2, 1}));
  EXPECT_THROW(blocks_from_m_sequence({1, 2}), InvariantError);
  for (const Sizes& b : std::vector<Sizes>{{1}, {2, 2}, {7, 3, 3, 1}, {4}}) {
    EXPECT_EQ(blocks_from_m_sequence(m_sequence_from_blocks(b)), b);
  }
}

TEST(Regularize, CongruenceInvariantExact) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    synth::Rng rng(seed);
    const std::size_t n = 2 + seed % 5;
    const std::size_t r = seed % n;
    const auto a = synth::random_matrix<G>(rng, n, r) * synth::random_matrix<G>(rng, r, n) +
                   synth::random_matrix<G>(rng, n, 1) * synth::random_matrix<G>(rng, 1, n);
    const auto t = synth::random_nonsingular<G>(n, seed + 77);
    for (auto form : {kBil, kSesq}) {
      const auto d1 = regularize(a, form).decomposition;
      const auto d2 = regularize(numkit::congruence(t, a, form), form).decomposition;
      EXPECT_EQ(d1.blocks, d2.blocks);
      EXPECT_EQ(d1.m_sequence, d2.m_sequence);
      EXPECT_EQ(d1.regular.rows(), d2.regular.rows());
    }
  }
}

TEST(Regularize, CongruenceInvariantFloatUnitary) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    synth::SynthesisSpec spec;
    spec.regular_size = seed % 4;
    spec.blocks = {1 + seed % 3, 1 + seed % 5};
    spec.scramble = synth::Scramble::Unitary;
    spec.seed = seed;
    const auto inst = synth::synthesize<C>(spec, std::nullopt, kSesq);
    const auto u = synth::random_unitary<C>(inst.a.rows(), seed + 5);
    const auto r1 = regularize(inst.a, kSesq);
    const auto r2 = regularize(numkit::congruence(u, inst.a, kSesq), kSesq);
    EXPECT_EQ(r1.decomposition.blocks, inst.ground_truth.blocks);
    EXPECT_EQ(r2.decomposition.blocks, inst.ground_truth.blocks);
    EXPECT_EQ(r1.decomposition.regular.rows(), r2.decomposition.regular.rows());
  }
}

TEST(Regularize, FixedPointOfAssembly) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    synth::Rng rng(seed);
    const std::size_t n = 1 + seed % 5;
    const auto a = synth::random_matrix<Q>(rng, n, seed % n) * synth::random_matrix<Q>(rng, seed % n, n);
    const auto d = regularize(a, kBil).decomposition;
    const auto again = regularize(assemble_decomposition(d), kBil).decomposition;
    EXPECT_EQ(again.blocks, d.blocks);
    EXPECT_EQ(again.regular.rows(), d.regular.rows());
  }
}

TEST(Regularize, FirstKernelMatchesRank) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    synth::Rng rng(seed);
    const std::size_t n = 2 + seed % 6;
    const std::size_t r = seed % n;
    const auto a = synth::random_matrix<Q>(rng, n, r) * synth::random_matrix<Q>(rng, r, n);
    const auto d = regularize(a, kBil).decomposition;
    ASSERT_FALSE(d.m_sequence.empty());
    EXPECT_EQ(d.m_sequence[0], n - numkit::rank_of(a).rank);
  }
}

TEST(Assemble, Fixtures) {
  RegularizingDecomposition<Q> d;
  d.regular = Matrix<Q>{{Q(7)}};
  d.blocks = {1};
  EXPECT_EQ(assemble_decomposition(d), (Matrix<Q>{{Q(7), Q(0)}, {Q(0), Q(0)}}));

  d.regular = Matrix<Q>(0, 0);
  d.blocks = {2};
  EXPECT_EQ(assemble_decomposition(d), jordan_block<Q>(2));

  d.regular = Matrix<Q>::identity(2);
  d.blocks = {};
  EXPECT_EQ(assemble_decomposition(d), Matrix<Q>::identity(2));

  d.regular = Matrix<Q>::zero(1);
  EXPECT_THROW(assemble_decomposition(d), InvariantError);
}

TEST(Assemble, BlocksInDescendingOrder) {
  RegularizingDecomposition<Q> d;
  d.blocks = {1, 3};
  EXPECT_EQ(assemble_decomposition(d), direct_sum<Q>({jordan_block<Q>(3), jordan_block<Q>(1)}));
}

TEST(VerifyTrace, PassesOnEngineOutput) {
  const auto a = jordan_block<Q>(3);
  const auto run = regularize(a, kBil);
  const auto rep = verify_trace(a, run.trace, kBil);
  EXPECT_TRUE(rep.passed()) << ::testing::PrintToString(rep.failures());

  const auto af = numkit::congruence(synth::random_unitary<double>(5, 3),
                                     direct_sum<double>({Matrix<double>{{2.0}}, jordan_block<double>(4)}), kBil);
  const auto runf = regularize(af, kBil);
  EXPECT_TRUE(verify_trace(af, runf.trace, kBil).passed());
  EXPECT_EQ(runf.decomposition.blocks, Sizes{4});
}

TEST(VerifyTrace, DetectsTampering) {
  const auto a = jordan_block<Q>(3);
  const auto base = regularize(a, kBil).trace;

  auto forged = base;
  forged.steps[0].m2 = 2;  // m-sequence (1, 2, ...)
  const auto r1 = verify_trace(a, forged, kBil);
  EXPECT_FALSE(r1.passed());
  EXPECT_TRUE(r1.failed("monotonicity"));

  auto zeroed = base;
  zeroed.steps[0].c1 = Matrix<Q>::zero(1);
  const auto r2 = verify_trace(a, zeroed, kBil);
  EXPECT_FALSE(r2.passed());
  EXPECT_TRUE(r2.failed("C1 full row rank"));

  const Matrix<Q> five{{Q(5)}};
  const auto b = direct_sum<Q>({five, jordan_block<Q>(2)});
  auto singular = regularize(b, kBil).trace;
  singular.regular = Matrix<Q>::zero(1);
  const auto r3 = verify_trace(b, singular, kBil);
  EXPECT_FALSE(r3.passed());
  EXPECT_TRUE(r3.failed("regular part nonsingular"));
}

TEST(VerifyTrace, SizeMismatchIsShapeError) {
  const auto trace = regularize(jordan_block<Q>(3), kBil).trace;
  EXPECT_THROW(verify_trace(jordan_block<Q>(2), trace, kBil), ShapeError);
}

TEST(Regularize, FloatFlagsNearSingularRegularPart) {
  const Matrix<double> a{{1.0, 0.0}, {0.0, 3e-15}};  // threshold is 2 eps = 4.4e-16
  const auto run = regularize(a, kBil);
  EXPECT_TRUE(run.trace.ill_conditioned());
  EXPECT_EQ(run.decomposition.regular.rows(), 2u);
  EXPECT_FALSE(regularize(Matrix<double>::identity(3), kBil).trace.ill_conditioned());
}

TEST(Regularize, TolScaleChangesDecisions) {
  const Matrix<double> a{{1.0, 0.0}, {0.0, 1e-9}};
  EXPECT_TRUE(regularize(a, kBil).decomposition.blocks.empty());
  EXPECT_EQ(regularize(a, kBil, {1e8}).decomposition.blocks, Sizes{1});
}

}  // namespace
