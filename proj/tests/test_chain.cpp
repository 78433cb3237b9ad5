#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "transop/chain.hpp"
#include "transop/systems.hpp"

using namespace transop;

namespace {

constexpr std::size_t kMillion = 1000000;

double x_(double x) { return x; }
double one(double) { return 1.0; }

BranchSystem always_first() {
  return BranchSystem(
      Grid::unit_interval(64), [](double x) { return x < 0.5 ? 2 * x : 2 * x - 1; },
      {{[](double x) { return 0.5 * x; }, systems::constant(1.0), "x/2"}, {[](double x) { return 0.5 * (x + 1); }, systems::constant(0.0), "(x+1)/2"}},
      true, "always-first");
}

const Grid bins32 = Grid::unit_interval(32);

}  // namespace

TEST(BranchSampler, DegenerateWeightsAlwaysTakeFirstBranch) {
  const BranchSampler s(always_first(), InitialLaw::uniform());
  const auto pe = simulate_paths(s, 2000, 3);
  for (std::size_t p = 0; p < pe.n_paths; ++p)
    for (std::size_t k = 0; k < 3; ++k) ASSERT_EQ(pe.at(p, k + 1), 0.5 * pe.at(p, k));
}

TEST(BranchSampler, DoublingFromZeroStaysDyadic) {
  const BranchSampler s(systems::doubling(64), InitialLaw::point(0.0));
  const std::size_t n = 100000;
  const auto pe = simulate_paths(s, 1, n);
  std::size_t upper = 0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = pe.at(0, k), prev = pe.at(0, k - 1);
    ASSERT_TRUE(x == 0.5 * prev || x == 0.5 * (prev + 1));
    upper += x >= 0.5;
  }
  EXPECT_NEAR(static_cast<double>(upper) / n, 0.5, 0.005);
  // The first 50 states are exact dyadic rationals.
  for (std::size_t k = 0; k <= 50; ++k) EXPECT_EQ(std::ldexp(pe.at(0, k), static_cast<int>(k)), std::floor(std::ldexp(pe.at(0, k), static_cast<int>(k))));
}

TEST(BranchSampler, RefusesVanishingRadonNikodymWeight) {
  const Grid g = Grid::unit_interval(8);
  std::vector<double> w(8, 1.0);
  w[3] = 0.0;
  EXPECT_THROW(BranchSampler(systems::doubling(8), InitialLaw::uniform(), RadonNikodymWeight{GridFunction(g, w)}), Error);
}

TEST(BranchSampler, RejectsUnnormalizedWeights) {
  const BranchSystem bs(
      Grid::unit_interval(8), [](double x) { return x; }, {{[](double x) { return x; }, [](double x) { return x > 0.99 ? 0.5 : 1.0; }, "id"}}, false);
  const BranchSampler s(bs, InitialLaw::point(0.995));
  EXPECT_THROW(simulate_paths(s, 1, 1), NormalizationError);
}

TEST(ControlledSampler, RandomControlStep) {
  const ControlledSampler s(systems::random_control(64), InitialLaw::uniform());
  for (std::uint64_t id = 0; id < 200; ++id) {
    const double x = 0.37;
    Stream a(3, id), b(3, id);
    const double y = s.step(x, a);
    const double vi = b.uniform(), u = b.uniform();
    const double expect = vi < 0.5 ? u * x : u + (1 - u) * x;
    ASSERT_DOUBLE_EQ(y, expect);
  }
}

TEST(Simulate, InitialLaw) {
  const ControlledSampler s(systems::random_control(64), InitialLaw::arcsine());
  const auto pe = simulate_paths(s, 100000, 0);
  EXPECT_LE(ks_distance(pe.sample(0), reference::arcsine_measure(Grid::unit_interval(4096))), 0.01);
}

TEST(Simulate, RandomControlKeepsArcsine) {
  const ControlledSampler s(systems::random_control(64), InitialLaw::arcsine());
  const auto pe = simulate_paths(s, 100000, 25);
  const auto mu = reference::arcsine_measure(Grid::unit_interval(4096));
  for (std::size_t n : {1, 5, 25}) EXPECT_LE(ks_distance(pe.sample(n), mu), 0.02) << n;
}

TEST(Simulate, GaussBackwardKeepsGauss) {
  const GaussBackwardSampler s;
  const auto pe = simulate_paths(s, 100000, 10);
  EXPECT_LE(ks_distance(pe.sample(10), reference::gauss_measure(Grid::unit_interval(4096))), 0.02);
}

TEST(Simulate, ThreadCountDoesNotChangePaths) {
  const ControlledSampler s(systems::random_control(64), InitialLaw::arcsine());
  const auto a = simulate_paths(s, 5000, 7, 11, 1);
  const auto b = simulate_paths(s, 5000, 7, 11, 4);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.seed, b.seed);
}

TEST(Simulate, FirstStreamOffsetsPaths) {
  const BranchSampler s(systems::doubling(64), InitialLaw::uniform());
  const auto a = simulate_paths(s, 10, 4, 5, 1, 0);
  const auto b = simulate_paths(s, 5, 4, 5, 1, 5);
  for (std::size_t p = 0; p < 5; ++p)
    for (std::size_t k = 0; k <= 4; ++k) EXPECT_EQ(a.at(p + 5, k), b.at(p, k));
}

TEST(Conditional, DeterministicSamplerHasNoDeviation) {
  const BranchSampler s(always_first(), InitialLaw::uniform());
  const auto pe = simulate_paths(s, 20000, 2);
  EXPECT_EQ(conditional_deviation(pe, x_, [](double x) { return 0.5 * x; }, 0, 1, bins32), 0.0);
  EXPECT_EQ(markov_property_check(pe, x_, 1, bins32), 0.0);
}

TEST(Conditional, DoublingIdentity) {
  const BranchSampler s(systems::doubling(64), InitialLaw::uniform());
  const auto pe = simulate_paths(s, kMillion, 1);
  EXPECT_LE(conditional_deviation(pe, x_, [](double x) { return x / 2 + 0.25; }, 0, 1, bins32), 4.0);
  const auto est = estimate_conditional(pe, x_, 0, bins32);
  for (std::size_t b = 0; b < 32; ++b) {
    ASSERT_TRUE(est.values[b].has_value());
    EXPECT_LE(std::abs(*est.values[b] - (bins32.node(b) / 2 + 0.25)), 4 * est.std_errors[b]);
  }
}

TEST(Conditional, RandomControlIdentity) {
  const ControlledSampler s(systems::random_control(64), InitialLaw::uniform());
  const auto pe = simulate_paths(s, kMillion, 1);
  EXPECT_LE(conditional_deviation(pe, x_, [](double x) { return (1 + 2 * x) / 4; }, 0, 1, bins32), 4.0);
}

TEST(Conditional, WrongConditionalMeanIsDetected) {
  const BranchSampler s(systems::doubling(64), InitialLaw::uniform());
  const auto pe = simulate_paths(s, 200000, 1);
  EXPECT_GE(conditional_deviation(pe, x_, [](double x) { return x / 2 + 0.3; }, 0, 1, bins32), 8.0);
}

TEST(Markov, BuiltInSamplersPass) {
  const auto d = simulate_paths(BranchSampler(systems::doubling(64), InitialLaw::uniform()), kMillion, 2);
  EXPECT_LE(markov_property_check(d, x_, 1, bins32), 5.0);
  const auto r = simulate_paths(ControlledSampler(systems::random_control(64), InitialLaw::arcsine()), kMillion, 2);
  EXPECT_LE(markov_property_check(r, x_, 1, bins32), 5.0);
}

TEST(Markov, ReplayedChoicesAreDetected) {
  const BranchSampler s(systems::doubling(64), InitialLaw::uniform());
  const auto pe = simulate_replayed_choices(s, kMillion, 3, 2);
  EXPECT_GE(markov_property_check(pe, x_, 2, bins32), 8.0);
}

TEST(Nested, ConstantOne) {
  const auto bs = systems::doubling(256);
  EXPECT_NEAR(nested_operator_expectation(bs, one, DiscreteMeasure::uniform(bs.grid()), {one}), 1.0, 1e-14);
}

TEST(Nested, DoublingSecondMoment) {
  // integral x (x/2 + 1/4) dx = 1/6 + 1/8.
  const auto bs = systems::doubling(4096);
  EXPECT_NEAR(nested_operator_expectation(bs, one, DiscreteMeasure::uniform(bs.grid()), {x_, x_}), 7.0 / 24, 1e-8);
}

TEST(Nested, RejectsTooManyFunctions) {
  const auto bs = systems::doubling(16);
  EXPECT_THROW(nested_operator_expectation(bs, one, DiscreteMeasure::uniform(bs.grid()), std::vector<RealMap>(7, x_)), Error);
}

TEST(PathMoment, TrivialAndFirstMoment) {
  const auto pe = simulate_paths(BranchSampler(systems::doubling(64), InitialLaw::uniform()), 100000, 2);
  const auto c = path_moment_mc(pe, {one, one, one});
  EXPECT_EQ(c.mean, 1.0);
  EXPECT_EQ(c.std_error, 0.0);
  const auto m = path_moment_mc(pe, {x_});
  EXPECT_LE(std::abs(m.mean - 0.5), 4 * m.std_error);
}

TEST(PathMoment, AgreesWithNestedExpectation) {
  const auto d = simulate_paths(BranchSampler(systems::doubling(64), InitialLaw::uniform()), kMillion, 1);
  const auto md = path_moment_mc(d, {x_, x_});
  EXPECT_LE(std::abs(md.mean - 7.0 / 24), 4 * md.std_error);

  const auto cs = systems::random_control(2048);
  const auto r = simulate_paths(ControlledSampler(cs, InitialLaw::arcsine()), kMillion, 1);
  const auto mr = path_moment_mc(r, {x_, x_});
  const double q = nested_operator_expectation(cs, one, reference::arcsine_measure(cs.grid()), {x_, x_});
  EXPECT_LE(std::abs(mr.mean - q), 4 * mr.std_error);
}

TEST(QuasiInvariance, MeasurePreservingDoubling) {
  const auto bs = systems::doubling(64);
  const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), kMillion, 2);
  auto psi = [](std::span<const double> w) { return std::cos(2 * std::numbers::pi * w[0]) + w[1] * w[0]; };
  EXPECT_LE(std::abs(quasi_invariance_check(pe, bs.sigma_map(), one, psi, 2).z), 4.0);
}

TEST(QuasiInvariance, ParametricWithClosedFormWeight) {
  const double u = 0.3;
  const auto bs = systems::parametric(u, 64);
  const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), kMillion, 2);
  auto psi = [](std::span<const double> w) { return w[1]; };
  auto W = [u](double x) { return systems::parametric_weight(u, x); };
  EXPECT_LE(std::abs(quasi_invariance_check(pe, bs.sigma_map(), W, psi, 2).z), 4.0);
  auto swapped = [u](double x) { return systems::parametric_weight(1 - u, x); };
  EXPECT_GE(std::abs(quasi_invariance_check(pe, bs.sigma_map(), swapped, psi, 2).z), 8.0);
}

TEST(Martingale, ConstantsAreHarmonic) {
  const auto bs = systems::logistic(256);
  const BranchSampler s(bs, InitialLaw::arcsine());
  const auto pe = simulate_paths(s, 200000, 2);
  EXPECT_EQ(martingale_check(pe, bs, one, 1, bins32), 0.0);
  EXPECT_EQ(martingale_check(pe, bs, one, 2, bins32), 0.0);
}

TEST(Martingale, RejectsNonHarmonic) {
  const auto bs = systems::doubling(64);
  const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), 1000, 1);
  EXPECT_THROW(martingale_check(pe, bs, x_, 1, bins32), Error);
}

TEST(Martingale, GaussBackwardSampler) {
  // The normalized operator R'g = R(g h) / h fixes 1; the Gauss operator itself fixes h.
  const auto op = systems::gauss(1024, 10000);
  const auto Rh = apply(op, reference::gauss_density);
  for (std::size_t j = 0; j < Rh.size(); ++j) ASSERT_NEAR(Rh[j], reference::gauss_density(op.grid().node(j)), 1e-6);
  const GaussBackwardSampler s;
  const auto pe = simulate_paths(s, kMillion, 2);
  const GeneratorOp<GaussBackwardSampler> gen{s, s.grid()};
  EXPECT_LE(martingale_check(pe, gen, one, 1, bins32), 5.0);
  EXPECT_LE(power_identity_check(pe, gen, x_, 1, bins32), 5.0);
  EXPECT_LE(power_identity_check(pe, gen, x_, 2, bins32), 5.0);
}

TEST(Martingale, DoublingEigenfunction) {
  // R(x - 1/2) = (x - 1/2) / 2, so 2^n (T_n - 1/2) is a martingale.
  const auto bs = systems::doubling(1024);
  auto f = [](double x) { return x - 0.5; };
  const auto Rf = apply(bs, f);
  for (std::size_t j = 0; j < Rf.size(); ++j) ASSERT_NEAR(Rf[j], 0.5 * f(bs.grid().node(j)), 1e-15);
  const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), kMillion, 2);
  EXPECT_LE(eigen_martingale_check(pe, f, 0.5, 1, bins32), 4.0);
  EXPECT_LE(eigen_martingale_check(pe, f, 0.5, 2, bins32), 4.0);
  EXPECT_GE(eigen_martingale_check(pe, f, 0.45, 1, bins32), 8.0);
}

TEST(TransitionMatrix, TwoStateChain) {
  const FiniteChainSampler s({{0.9, 0.1}, {0.5, 0.5}}, {0.5, 0.5});
  const auto pe = simulate_paths(s, 1000, 1000);
  const auto t = estimate_transition_matrix(pe, 2);
  EXPECT_NEAR(t.probabilities[0][0], 0.9, 0.005);
  EXPECT_NEAR(t.probabilities[0][1], 0.1, 0.005);
  EXPECT_NEAR(t.probabilities[1][0], 0.5, 0.005);
  EXPECT_NEAR(t.probabilities[1][1], 0.5, 0.005);
  // Perron right eigenvector of the estimate is harmonic for it.
  Eigen::Matrix2d P;
  P << t.probabilities[0][0], t.probabilities[0][1], t.probabilities[1][0], t.probabilities[1][1];
  Eigen::EigenSolver<Eigen::Matrix2d> es(P);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < 2; ++i)
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  const Eigen::Vector2d h = es.eigenvectors().col(best).real();
  EXPECT_LE((P * h - h).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(TransitionMatrix, DeterministicCycle) {
  const FiniteChainSampler s({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}, {1, 0, 0});
  const auto t = estimate_transition_matrix(simulate_paths(s, 10, 30), 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t.probabilities[i][j], j == (i + 1) % 3 ? 1.0 : 0.0);
}

TEST(TransitionMatrix, UnseenStateIsFlagged) {
  const FiniteChainSampler s({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {1, 0, 0});
  const auto t = estimate_transition_matrix(simulate_paths(s, 10, 5), 3);
  EXPECT_TRUE(t.present[0]);
  EXPECT_FALSE(t.present[1]);
  EXPECT_FALSE(t.present[2]);
}

TEST(FiniteChain, RejectsBadRows) {
  EXPECT_THROW(FiniteChainSampler({{0.5, 0.4}, {0.5, 0.5}}, {1, 0}), NormalizationError);
  EXPECT_THROW(FiniteChainSampler({{1.0}}, {0.5, 0.5}), Error);
}
