#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "transop/invariant.hpp"
#include "transop/reference.hpp"
#include "transop/rng.hpp"
#include "transop/systems.hpp"

using namespace transop;

namespace {

constexpr double pi = std::numbers::pi;

DiscreteMeasure random_measure(const Grid& g, Stream& s) {
  std::vector<double> w(g.n());
  for (auto& x : w) x = s.uniform() < 0.3 ? s.uniform() : 0.0;
  w[0] += 1e-3;
  return DiscreteMeasure::from_weights(g, std::move(w));
}

}  // namespace

TEST(Ulam, DoublingIsTheTwoBandMatrix) {
  const std::size_t n = 64;
  const auto m = build_ulam(systems::doubling(n), Grid::unit_interval(n));
  // Cell j goes half to cell j/2 and half to cell (j+n)/2.
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    expect(static_cast<Eigen::Index>(j / 2), static_cast<Eigen::Index>(j)) += 0.5;
    expect(static_cast<Eigen::Index>((j + n) / 2), static_cast<Eigen::Index>(j)) += 0.5;
  }
  EXPECT_LE((m.entries - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE(m.max_column_sum_defect(), 1e-15);
}

TEST(Ulam, IdentitySystem) {
  const auto m = build_ulam(systems::identity(32), Grid::unit_interval(32));
  EXPECT_LE((m.entries - Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ulam, GaussColumnSums) {
  // Column j is the fraction of cell j covered by the K kept branch images.
  // Only [0, 1/(K+1)) is missed, so the whole deficit sits in the first column,
  // and the mass lost from the uniform law is below sum_{n>K} n^{-2} <= 1/K.
  const std::size_t n = 512;
  const long K = 10000;
  const auto op = systems::gauss(n, K, GaussTail::ignore);
  const auto m = build_ulam(op, op.grid());
  EXPECT_NEAR(m.entries.col(0).sum(), 1.0 - static_cast<double>(n) / (K + 1), 1e-9);
  for (Eigen::Index j = 1; j < m.entries.cols(); ++j) EXPECT_NEAR(m.entries.col(j).sum(), 1.0, 1e-9);
  const double lost = 1.0 - m.entries.colwise().sum().mean();
  EXPECT_GE(lost, 0.0);
  EXPECT_LE(lost, 1.0 / K);
  // The tail estimate puts the missing piece back.
  const auto full = build_ulam(systems::gauss(n, K), op.grid());
  EXPECT_LE(full.max_column_sum_defect(), 1e-9);
}

TEST(Ulam, GridMismatchIsRejected) {
  EXPECT_THROW(build_ulam(systems::doubling(64), Grid::unit_interval(32)), Error);
}

TEST(PowerIterate, DoublingConvergesToUniform) {
  const auto m = build_ulam(systems::doubling(512), Grid::unit_interval(512));
  const auto r = power_iterate(m, 1e-10, 60, reference::arcsine_measure(m.grid));
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_LE(wasserstein1(r.measure, DiscreteMeasure::uniform(m.grid)), 1e-9);
}

TEST(PowerIterate, GaussDensity) {
  const auto op = systems::gauss(512, 10000);
  const auto r = power_iterate(build_ulam(op, op.grid()), 1e-13, 20000);
  EXPECT_LE(reference::density_l1(r.measure, reference::gauss_measure(op.grid())), 0.02);
}

TEST(PowerIterate, RandomControlArcsine) {
  const auto op = systems::random_control(1024);
  const auto r = power_iterate(build_ulam(op, op.grid()), 1e-13, 20000);
  EXPECT_LE(reference::density_l1(r.measure, reference::arcsine_measure(op.grid())), 0.03);
}

TEST(PowerIterate, RejectsNonPositiveTolerance) {
  const auto m = build_ulam(systems::doubling(8), Grid::unit_interval(8));
  EXPECT_THROW(power_iterate(m, 0.0, 10), Error);
}

TEST(VerifyInvariance, ArcsineUnderRandomControl) {
  const auto op = systems::random_control(2048);
  const auto mu = reference::arcsine_measure(op.grid());
  const std::vector<RealMap> fs{[](double) { return 1.0; }, [](double x) { return x; }, [](double x) { return x * x; },
                                [](double x) { return std::cos(2 * pi * x); }};
  for (double r : verify_invariance(mu, op, fs)) EXPECT_LE(r, 5e-4);
}

TEST(VerifyInvariance, LebesgueUnderGauss) {
  const auto op = systems::gauss(2048, 10000);
  const auto r = verify_invariance(DiscreteMeasure::uniform(op.grid()), op, {[](double x) { return x; }});
  EXPECT_LE(r[0], 5e-4);
}

TEST(VerifyInvariance, LogisticSquareAgainstClosedForm) {
  // R(x^2) = ((1 + s)^2 + (1 - s)^2) / 8 = (2 - x) / 4 with s = sqrt(1 - x), and
  // integral (2 - x)/4 d(arcsine) = 3/8 = integral x^2 d(arcsine): the residual vanishes.
  const auto bs = systems::logistic(2048);
  const auto Rf = apply(bs, [](double x) { return x * x; });
  for (std::size_t j = 0; j < Rf.size(); ++j) EXPECT_NEAR(Rf[j], (2 - bs.grid().node(j)) / 4, 1e-12);
  const auto mu = reference::arcsine_measure(bs.grid());
  EXPECT_LE(verify_invariance(mu, bs, {[](double x) { return x * x; }})[0], 1e-5);
}

TEST(Hutchinson, HalvingGivesLebesgue) {
  const Grid g = Grid::unit_interval(1024);
  const auto r = hutchinson_iterate(systems::halving(), DiscreteMeasure::point_mass(g, 0.9), 30);
  EXPECT_LE(wasserstein1(r.stationary.measure, DiscreteMeasure::uniform(g)), 1e-3);
}

TEST(Hutchinson, CantorMoments) {
  // Digit series: mean sum 2 * 3^{-n} / 2 = 1/2, variance sum 3^{-2n} = 1/8.
  const Grid g = Grid::unit_interval(2187);
  const auto r = hutchinson_iterate(systems::cantor(), DiscreteMeasure::uniform(g), 40);
  EXPECT_NEAR(r.stationary.measure.mean(), 0.5, 1e-3);
  EXPECT_NEAR(r.stationary.measure.variance(), 0.125, 1e-3);
  for (double q : r.ratios) EXPECT_LE(q, 1.0 / 3 + 2.0 / 2187);
}

TEST(Hutchinson, SingleContractionGivesPointMass) {
  const Grid g = Grid::unit_interval(256);
  const AffineIFS ifs({{0.5, 0.0}}, {1.0});
  const auto r = hutchinson_iterate(ifs, DiscreteMeasure::uniform(g), 20);
  EXPECT_NEAR(r.stationary.measure[0], 1.0, 1e-9);
}

TEST(Hutchinson, RejectsMapsLeavingTheDomain) {
  const AffineIFS ifs({{2.0, 0.0}}, {1.0});
  EXPECT_THROW(hutchinson_step(ifs, DiscreteMeasure::uniform(Grid::unit_interval(8))), DomainError);
}

TEST(AffineIFS, RejectsBadProbabilities) {
  EXPECT_THROW(AffineIFS({{0.5, 0.0}, {0.5, 0.5}}, {0.5, 0.6}), NormalizationError);
  EXPECT_THROW(AffineIFS({{0.5, 0.0}}, {0.5, 0.5}), Error);
}

TEST(Contraction, CantorRandomPairs) {
  const Grid g = Grid::unit_interval(729);
  Stream s(kDefaultMasterSeed, 3);
  for (int t = 0; t < 20; ++t) {
    const auto c = contraction_certificate(systems::cantor(), random_measure(g, s), random_measure(g, s));
    EXPECT_LE(c.ratio, 1.0 / 3 + 2.0 / 729);
    EXPECT_DOUBLE_EQ(c.alpha_bound, 1.0 / 3);
  }
}

TEST(Contraction, IdentityIsNotContracting) {
  const Grid g = Grid::unit_interval(100);
  const AffineIFS id({{1.0, 0.0}}, {1.0});
  Stream s(kDefaultMasterSeed, 4);
  EXPECT_NEAR(contraction_certificate(id, random_measure(g, s), random_measure(g, s)).ratio, 1.0, 1e-12);
}

TEST(Contraction, HalvingPointMasses) {
  const std::size_t n = 1024;
  const Grid g = Grid::unit_interval(n);
  const auto c = contraction_certificate(systems::halving(), DiscreteMeasure::point_mass(g, 0.0), DiscreteMeasure::point_mass(g, 1.0));
  EXPECT_NEAR(c.ratio, 0.5, 2.0 / n);
}

TEST(Eigen, RandomControlSubdominant) {
  // R(x - 1/2) = (x - 1/2) / 2 for the random-control operator.
  const auto op = systems::random_control(128);
  const auto e = subdominant_eigenpair(build_ulam(op, op.grid()));
  EXPECT_NEAR(e.value, 0.5, 1e-2);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t j = 0; j < 128; ++j) {
    const double x = op.grid().node(j) - 0.5, y = e.function[j];
    sxy += x * y, sxx += x * x, syy += y * y;
  }
  EXPECT_GT(std::abs(sxy) / std::sqrt(sxx * syy), 0.99);
}
