#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "transop/rng.hpp"
#include "transop/systems.hpp"
#include "transop/transfer.hpp"

using namespace transop;

namespace {

constexpr double pi = std::numbers::pi;

double max_node_error(const GridFunction& g, const auto& oracle) {
  double m = 0;
  for (std::size_t j = 0; j < g.size(); ++j) m = std::max(m, std::abs(g[j] - oracle(g.grid().node(j))));
  return m;
}

double one(double) { return 1.0; }

}  // namespace

TEST(BranchOperator, NormalizedMapsOneToOne) {
  for (const auto& bs : {systems::doubling(256), systems::logistic(256), systems::parametric(0.3, 256)})
    EXPECT_EQ(max_node_error(apply(bs, one), one), 0.0) << bs.name();
}

TEST(BranchOperator, LogisticOfIdentity) {
  // tau_+ + tau_- = 1, so R(x) = 1/2 everywhere.
  const auto r = apply(systems::logistic(1024), [](double x) { return x; });
  EXPECT_LE(max_node_error(r, [](double) { return 0.5; }), 1e-12);
}

TEST(BranchOperator, DoublingOfCosine) {
  // (cos(pi x) + cos(pi x + pi)) / 2 = 0.
  const auto r = apply(systems::doubling(1024), [](double x) { return std::cos(2 * pi * x); });
  EXPECT_LE(r.max_abs(), 1e-10);
}

TEST(BranchOperator, RejectsBranchThatIsNotAnInverse) {
  EXPECT_THROW(BranchSystem(Grid::unit_interval(8), [](double x) { return x; },
                            {{[](double x) { return 0.5 * x; }, systems::constant(1.0), "bad"}}, true),
               DomainError);
}

TEST(BranchOperator, RejectsWeightsThatDoNotSum) {
  EXPECT_THROW(BranchSystem(Grid::unit_interval(8), [](double x) { return x; }, {{[](double x) { return x; }, systems::constant(0.9), "id"}},
                            true),
               NormalizationError);
}

TEST(IntegralOperator, OneIsFixed) {
  EXPECT_LE(max_node_error(apply(systems::random_control(512), one), one), 1e-10);
}

TEST(IntegralOperator, RandomControlOfIdentity) {
  // (1/2)(x/2 + (1+x)/2) = (1 + 2x)/4.
  const auto r = apply(systems::random_control(512), [](double x) { return x; });
  EXPECT_LE(max_node_error(r, [](double x) { return (1 + 2 * x) / 4; }), 1e-12);
}

TEST(IntegralOperator, RandomControlOfSquareMatchesClosedForm) {
  // (1/2)(x^2/3 + integral_0^1 (u + (1-u) x)^2 du) = (1/2)(x^2/3 + (1 + x + x^2)/3).
  const auto r = apply(systems::random_control(512), [](double x) { return x * x; });
  EXPECT_LE(max_node_error(r, [](double x) { return (1 + x + 2 * x * x) / 6; }), 1e-12);
}

TEST(IntegralOperator, DegenerateControlLaw) {
  const ControlledSystem cs(
      Grid::unit_interval(64), [](double x, Control c) { return c.index == 0 ? x * x : 1 - x; }, ControlLaw{{1.0, 0.0}, false}, false);
  const auto r = apply(cs, [](double y) { return std::sin(y); });
  EXPECT_EQ(max_node_error(r, [](double x) { return std::sin(x * x); }), 0.0);
}

TEST(RuelleCircle, HaarIsNormalized) {
  const auto op = systems::circle(WaveletFilter::haar(), 1024);
  EXPECT_LE(max_node_error(apply(op, one), one), 1e-12);
  EXPECT_LE(op.normalization_residual(), 1e-12);
}

TEST(RuelleCircle, ZeroFilter) {
  const auto op = systems::circle(WaveletFilter::zero(), 64);
  EXPECT_EQ(apply(op, one).max_abs(), 0.0);
}

TEST(RuelleCircle, HaarOfCosine) {
  // |m0|^2 = 2 cos^2(pi t); R cos(2 pi .) = cos^2(pi t).
  const auto op = systems::circle(WaveletFilter::haar(), 1024);
  const auto r = apply(op, [](double t) { return std::cos(2 * pi * t); });
  EXPECT_LE(max_node_error(r, [](double t) { return std::cos(pi * t) * std::cos(pi * t); }), 1e-10);
}

TEST(RuelleAdjoint, HaarOfOne) {
  const auto op = systems::circle(WaveletFilter::haar(), 512);
  const auto r = apply_ruelle_adjoint(op, one);
  EXPECT_LE(max_node_error(r, [](double t) { return 2 * std::cos(pi * t) * std::cos(pi * t); }), 1e-12);
  EXPECT_EQ(apply_ruelle_adjoint(op, [](double) { return 0.0; }).max_abs(), 0.0);
}

TEST(RuelleAdjoint, Duality) {
  // <R f, g> = <f, R* g> for random trigonometric f, g, midpoint rule on 1024 nodes.
  const auto op = systems::circle(WaveletFilter::daubechies4(), 1024);
  Stream s(kDefaultMasterSeed, 1);
  for (int trial = 0; trial < 5; ++trial) {
    double a[4], b[4];
    for (int i = 0; i < 4; ++i) a[i] = s.uniform(-1, 1), b[i] = s.uniform(-1, 1);
    auto f = [&](double t) { return a[0] + a[1] * std::cos(2 * pi * t) + a[2] * std::sin(4 * pi * t) + a[3] * std::cos(6 * pi * t); };
    auto g = [&](double t) { return b[0] + b[1] * std::sin(2 * pi * t) + b[2] * std::cos(4 * pi * t) + b[3] * std::sin(6 * pi * t); };
    const auto Rf = apply(op, f);
    const auto Rsg = apply_ruelle_adjoint(op, g);
    double lhs = 0, rhs = 0;
    for (std::size_t j = 0; j < 1024; ++j) {
      const double t = op.grid().node(j);
      lhs += Rf[j] * g(t);
      rhs += f(t) * Rsg[j];
    }
    EXPECT_NEAR(lhs / 1024, rhs / 1024, 1e-9);
  }
}

TEST(Gauss, BaselSum) {
  const GaussOperator op(Grid::unit_interval(16), 1000000, GaussTail::ignore);
  EXPECT_NEAR(op.evaluate(one, 0.0), pi * pi / 6, 1e-6);
  EXPECT_EQ(op.evaluate([](double) { return 0.0; }, 0.3), 0.0);
}

TEST(Gauss, TailEstimateCloses) {
  // With the tail estimate R1(0) is pi^2/6 to far better than 1/K.
  const GaussOperator op(Grid::unit_interval(16), 1000);
  EXPECT_NEAR(op.evaluate(one, 0.0), pi * pi / 6, 1e-8);
}

TEST(Gauss, LebesgueIsPreserved) {
  // integral R f dx = integral f W dx with W the Radon-Nikodym weight of Lebesgue.
  const auto op = systems::gauss(512, 10000);
  const auto lambda = DiscreteMeasure::uniform(op.grid());
  const auto W = radon_nikodym(op, lambda);
  auto id = [](double x) { return x; };
  const double lhs = integrate(apply(op, id), lambda);
  const double rhs = integrate(GridFunction::sample(op.grid(), id) * W.W, lambda);
  EXPECT_NEAR(lhs, rhs, 2e-4);
  EXPECT_NEAR(lhs, 0.5, 2e-4);
}

TEST(Pullout, ConstantIsExact) {
  const auto bs = systems::logistic(512);
  EXPECT_LE(pullout_check(bs, [](double) { return 2.5; }, [](double x) { return std::exp(x); }), 1e-12);
}

TEST(Pullout, Doubling) {
  const auto bs = systems::doubling(4096);
  EXPECT_LE(pullout_check(bs, [](double x) { return std::sin(2 * pi * x); }, [](double x) { return x; }), 5e-6);
}

TEST(Pullout, LogisticTrigonometric) {
  const auto bs = systems::logistic(4096);
  Stream s(kDefaultMasterSeed, 2);
  for (int trial = 0; trial < 3; ++trial) {
    const double a = s.uniform(-1, 1), b = s.uniform(-1, 1), c = s.uniform(-1, 1), d = s.uniform(-1, 1);
    auto f = [&](double x) { return a * std::cos(2 * pi * x) + b * std::sin(pi * x); };
    auto g = [&](double x) { return c * std::sin(2 * pi * x) + d * std::cos(pi * x); };
    EXPECT_LE(pullout_check(bs, f, g), 1e-5);
  }
}

TEST(RadonNikodym, DoublingLebesgue) {
  const auto bs = systems::doubling(512);
  const auto W = radon_nikodym(bs, DiscreteMeasure::uniform(bs.grid()));
  EXPECT_LE(max_node_error(W.W, one), 1e-10);
}

TEST(RadonNikodym, ParametricClosedForm) {
  const double u = 0.3;
  const auto bs = systems::parametric(u, 1000);
  const auto W = radon_nikodym(bs, DiscreteMeasure::uniform(bs.grid()));
  const Grid& g = bs.grid();
  const std::size_t brk = g.locate(u);
  for (std::size_t j = 0; j < g.n(); ++j) {
    if (j + 1 >= brk && j <= brk + 1) continue;
    EXPECT_NEAR(W.W[j], systems::parametric_weight(u, g.node(j)), 1e-10) << j;
  }
  EXPECT_NEAR(systems::parametric_weight(u, 0.1), 1 / 0.6, 1e-15);
  EXPECT_NEAR(systems::parametric_weight(u, 0.5), 1 / 1.4, 1e-15);
}

TEST(CellKernel, RowsAreProbabilities) {
  for (const auto& K : {cell_kernel(systems::doubling(64)), cell_kernel(systems::random_control(64)),
                        cell_kernel(systems::circle(WaveletFilter::daubechies4(), 64))})
    for (Eigen::Index i = 0; i < K.rows(); ++i) EXPECT_NEAR(K.row(i).sum(), 1.0, 1e-9);
}
