#pragma once

// Verification suites: one record per check, grouped by acceptance criterion.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "transop/chain.hpp"
#include "transop/filter.hpp"
#include "transop/grid.hpp"
#include "transop/invariant.hpp"
#include "transop/reference.hpp"
#include "transop/rng.hpp"
#include "transop/schur.hpp"
#include "transop/solenoid.hpp"
#include "transop/systems.hpp"
#include "transop/transfer.hpp"
#include "transop/wavelet.hpp"

namespace transop::verify {

struct CheckRecord {
  std::string name;
  bool pass = false;
  double statistic = 0;
  double threshold = 0;
  std::string relation;  // "<=" or ">="
  double runtime_ms = 0;
  std::string detail;
};

struct Options {
  std::uint64_t master_seed = kDefaultMasterSeed;
  unsigned threads = 1;
  std::string inject_fault;  // "" or "misnormalized-filter"
};

struct Criterion {
  int id = 0;
  std::string title;
  std::vector<CheckRecord> checks;
  double runtime_ms = 0;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s{"operators", "chains", "solenoid", "wavelet", "schur", "all"};
  return s;
}

namespace detail {

inline CheckRecord make(std::string name, double stat, double thr, const std::string& rel, std::string detail = {}) {
  CheckRecord r{std::move(name), false, stat, thr, rel, 0, std::move(detail)};
  if (std::isnan(stat))
    r.pass = false;
  else if (rel == "<=")
    r.pass = stat <= thr;
  else if (rel == ">=")
    r.pass = stat >= thr;
  else
    throw Error("check relation must be <= or >=");
  return r;
}

// Runs body, appends its records with the elapsed time split evenly; exceptions become failed records.
inline void timed(std::vector<CheckRecord>& out, const std::string& name, const std::function<std::vector<CheckRecord>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<CheckRecord> recs;
  try {
    recs = body();
  } catch (const std::exception& e) {
    recs = {CheckRecord{name, false, std::numeric_limits<double>::quiet_NaN(), 0, "<=", 0, std::string("error: ") + e.what()}};
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  for (auto& r : recs) {
    r.runtime_ms = ms / static_cast<double>(recs.size());
    out.push_back(std::move(r));
  }
}

// Disjoint stream ranges per Monte Carlo check.
inline std::uint64_t streams(std::uint64_t tag) { return tag << 32; }

inline double x_(double x) { return x; }
inline double x2(double x) { return x * x; }
inline double one(double) { return 1.0; }
inline double cos2pi(double x) { return std::cos(2.0 * std::numbers::pi * x); }

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------- operators

inline Criterion criterion_gauss_density(const Options& o) {
  Criterion c{1, "Gauss invariant density by Ulam (grid 512, K=1e4)", {}, 0};
  detail::timed(c.checks, "gauss-ulam-l1", [&] {
    const auto op = systems::gauss(512, 10000);
    const auto m = build_ulam(op, op.grid(), {std::nullopt, 8, o.threads});
    const auto st = power_iterate(m, 1e-13, 20000);
    const double l1 = reference::density_l1(st.measure, reference::gauss_measure(op.grid()));
    return std::vector<CheckRecord>{
        detail::make("gauss-ulam-l1", l1, 0.02, "<=", "iterations " + std::to_string(st.iterations)),
        detail::make("gauss-ulam-column-sum-defect", m.max_column_sum_defect(), 1e-6, "<="),
    };
  });
  return c;
}

inline Criterion criterion_arcsine_invariance(const Options& o) {
  Criterion c{2, "Arcsine invariance of the random-control operator (grid 2048)", {}, 0};
  detail::timed(c.checks, "random-control-arcsine-invariance", [&] {
    const auto op = systems::random_control(2048);
    const auto mu = reference::arcsine_measure(op.grid());
    const auto res = verify_invariance(mu, op, {detail::one, detail::x_, detail::x2, detail::cos2pi}, o.threads);
    const char* names[] = {"1", "x", "x^2", "cos2pix"};
    std::vector<CheckRecord> out;
    for (std::size_t i = 0; i < res.size(); ++i)
      out.push_back(detail::make(std::string("random-control-arcsine-invariance[f=") + names[i] + "]", res[i], 5e-4, "<="));
    return out;
  });
  return c;
}

/// Largest |integral R f d mu - integral f d mu| over a fixed family of test functions, and its argmax.
inline std::pair<double, std::string> logistic_separation(std::size_t n, unsigned threads = 1) {
  const auto op = systems::logistic(n);
  const auto mu = reference::arcsine_measure(op.grid());
  std::vector<std::pair<std::string, RealMap>> family;
  for (int p = 1; p <= 4; ++p) family.push_back({"x^" + std::to_string(p), [p](double x) { return std::pow(x, p); }});
  for (int j = 1; j <= 4; ++j) {
    family.push_back({"cos(" + std::to_string(j) + "pi x)", [j](double x) { return std::cos(j * std::numbers::pi * x); }});
    family.push_back({"sin(" + std::to_string(j) + "pi x)", [j](double x) { return std::sin(j * std::numbers::pi * x); }});
  }
  family.push_back({"sqrt(x)", [](double x) { return std::sqrt(x); }});
  family.push_back({"1[x<1/4]", [](double x) { return x < 0.25 ? 1.0 : 0.0; }});
  family.push_back({"1[x<1/2]", [](double x) { return x < 0.5 ? 1.0 : 0.0; }});
  double best = -1;
  std::string arg;
  for (const auto& [name, f] : family) {
    const double r = verify_invariance(mu, op, {f}, threads)[0];
    if (r > best) {
      best = r;
      arg = name;
    }
  }
  return {best, arg};
}

inline Criterion criterion_logistic(const Options& o) {
  Criterion c{3, "Logistic dichotomy: pushforward invariance, uniform-weight R non-invariance", {}, 0};
  detail::timed(c.checks, "logistic-pushforward-ks", [&] {
    const std::size_t n = 100000;
    std::vector<double> x(n);
    parallel_for(n, o.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t p = b; p < e; ++p) {
        Stream s(o.master_seed, detail::streams(3) + p);
        double v = reference::arcsine_quantile(s.uniform());
        for (int k = 0; k < 20; ++k) v = systems::logistic_map(v);
        x[p] = v;
      }
    });
    const double ks = ks_distance(EmpiricalSample{x, {o.master_seed, detail::streams(3)}}, reference::arcsine_measure(Grid::unit_interval(4096)));
    return std::vector<CheckRecord>{detail::make("logistic-pushforward-ks", ks, 0.02, "<=")};
  });
  detail::timed(c.checks, "logistic-uniform-weight-separation", [&] {
    const auto [best, arg] = logistic_separation(2048, o.threads);
    return std::vector<CheckRecord>{detail::make("logistic-uniform-weight-separation", best, 0.01, ">=",
                                                 "best test function " + arg +
                                                     "; the uniform-weight operator preserves the arcsine law in the dual sense")};
  });
  return c;
}

inline Criterion criterion_hutchinson(const Options&) {
  Criterion c{10, "Hutchinson iteration for the Cantor IFS (grid 2187, 40 iterations)", {}, 0};
  detail::timed(c.checks, "cantor", [&] {
    const Grid g = Grid::unit_interval(2187);
    const auto ifs = systems::cantor();
    const auto r = hutchinson_iterate(ifs, DiscreteMeasure::uniform(g), 40);
    double worst = 0;
    for (double q : r.ratios) worst = std::max(worst, q);
    const auto& mu = r.stationary.measure;
    return std::vector<CheckRecord>{
        detail::make("cantor-mean-error", std::abs(mu.mean() - 0.5), 1e-3, "<="),
        detail::make("cantor-variance-error", std::abs(mu.variance() - 0.125), 1e-3, "<="),
        detail::make("cantor-contraction-ratio", worst, 1.0 / 3.0 + 2.0 / 2187.0, "<=",
                     std::to_string(r.ratios.size()) + " resolvable ratios"),
    };
  });
  return c;
}

inline std::vector<CheckRecord> operator_extras(const Options& o) {
  std::vector<CheckRecord> out;
  detail::timed(out, "haar-filter-normalization", [&] {
    const auto f = o.inject_fault == "misnormalized-filter" ? WaveletFilter::haar().scaled(1.01) : WaveletFilter::haar();
    return std::vector<CheckRecord>{detail::make("haar-filter-normalization", f.normalization_defect(), 1e-12, "<=")};
  });
  detail::timed(out, "doubling-ulam-uniform-l1", [&] {
    const auto bs = systems::doubling(1024);
    const auto st = power_iterate(build_ulam(bs, bs.grid(), {std::nullopt, 8, o.threads}), 1e-13, 1000);
    return std::vector<CheckRecord>{detail::make("doubling-ulam-uniform-l1", reference::density_l1(st.measure, DiscreteMeasure::uniform(bs.grid())), 1e-6, "<=")};
  });
  detail::timed(out, "random-control-ulam-arcsine-l1", [&] {
    const auto op = systems::random_control(1024);
    const auto st = power_iterate(build_ulam(op, op.grid(), {std::nullopt, 8, o.threads}), 1e-12, 20000);
    return std::vector<CheckRecord>{
        detail::make("random-control-ulam-arcsine-l1", reference::density_l1(st.measure, reference::arcsine_measure(op.grid())), 0.03, "<=")};
  });
  detail::timed(out, "doubling-pullout", [&] {
    const auto bs = systems::doubling(4096);
    auto sin2pi = [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
    return std::vector<CheckRecord>{detail::make("doubling-pullout", pullout_check(bs, sin2pi, detail::x_), 5e-6, "<=")};
  });
  return out;
}

// ---------------------------------------------------------------- chains

inline Criterion criterion_kolmogorov(const Options& o) {
  Criterion c{4, "Kolmogorov moment formula: Monte Carlo vs nested operator quadrature (1e6 paths)", {}, 0};
  const std::vector<std::pair<std::string, std::vector<RealMap>>> sets{
      {"(x)", {detail::x_}},
      {"(x,x)", {detail::x_, detail::x_}},
      {"(x^2,x)", {detail::x2, detail::x_}},
      {"(x,x,x)", {detail::x_, detail::x_, detail::x_}},
      {"(cos,x,x^2)", {detail::cos2pi, detail::x_, detail::x2}},
  };
  auto run = [&](const std::string& sys, const auto& op, const auto& sampler, const DiscreteMeasure& lambda, std::uint64_t tag) {
    detail::timed(c.checks, "kolmogorov-" + sys, [&] {
      const auto pe = simulate_paths(sampler, 1000000, 2, o.master_seed, o.threads, detail::streams(tag));
      std::vector<CheckRecord> out;
      for (const auto& [label, fs] : sets) {
        const auto mc = path_moment_mc(pe, fs);
        const double q = nested_operator_expectation(op, detail::one, lambda, fs, o.threads);
        out.push_back(detail::make("kolmogorov-" + sys + label, std::abs(mc.mean - q) / mc.std_error, 4.0, "<=",
                                   "mc " + detail::fmt(mc.mean) + " quadrature " + detail::fmt(q)));
      }
      return out;
    });
  };
  const auto d = systems::doubling(4096);
  run("doubling", d, BranchSampler(d, InitialLaw::uniform()), DiscreteMeasure::uniform(d.grid()), 41);
  const auto rc = systems::random_control(2048);
  run("random-control", rc, ControlledSampler(rc, InitialLaw::arcsine()), reference::arcsine_measure(rc.grid()), 42);
  return c;
}

inline Criterion criterion_quasi_invariance(const Options& o) {
  Criterion c{5, "Quasi-invariance of the path measure for the parametric system (1e6 paths)", {}, 0};
  const std::vector<std::pair<std::string, std::pair<PathFunctional, std::size_t>>> psis{
      {"x1", {[](std::span<const double> w) { return w[1]; }, 2}},
      {"x0*x1", {[](std::span<const double> w) { return w[0] * w[1]; }, 2}},
      {"cos(2pi x0)", {[](std::span<const double> w) { return detail::cos2pi(w[0]); }, 1}},
  };
  std::uint64_t tag = 50;
  for (double u : {0.3, 0.5, 0.7}) {
    const std::string label = "u=" + detail::fmt(u);
    detail::timed(c.checks, "quasi-invariance-" + label, [&] {
      const auto bs = systems::parametric(u, 1024);
      const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), 1000000, 2, o.master_seed, o.threads, detail::streams(++tag));
      auto W = [u](double x) { return systems::parametric_weight(u, x); };
      std::vector<CheckRecord> out;
      for (const auto& [name, pm] : psis) {
        const auto q = quasi_invariance_check(pe, bs.sigma_map(), W, pm.first, pm.second);
        out.push_back(detail::make("quasi-invariance-" + label + "[" + name + "]", std::abs(q.z), 4.0, "<=",
                                   "lhs " + detail::fmt(q.lhs) + " rhs " + detail::fmt(q.rhs)));
      }
      if (u == 0.5) {
        double m = 0;
        for (int i = 0; i <= 1000; ++i) m = std::max(m, std::abs(W(i / 1000.0) - 1.0));
        out.push_back(detail::make("quasi-invariance-u=0.5-weight-is-one", m, 0.0, "<="));
      }
      return out;
    });
  }
  return c;
}

inline Criterion criterion_martingale(const Options& o) {
  Criterion c{6, "Martingale property for harmonic functions (1e6 transitions, k=1,2)", {}, 0};
  const Grid bins = Grid::unit_interval(32);
  auto run = [&](const std::string& sys, const auto& sampler, const Grid& grid, const Grid& b, RealMap f, std::uint64_t tag) {
    detail::timed(c.checks, "martingale-" + sys, [&] {
      const auto pe = simulate_paths(sampler, 1000000, 2, o.master_seed, o.threads, detail::streams(tag));
      const GeneratorOp<std::decay_t<decltype(sampler)>> op{sampler, grid};
      std::vector<CheckRecord> out;
      for (int k = 1; k <= 2; ++k) {
        out.push_back(detail::make("martingale-" + sys + "[h=1,k=" + std::to_string(k) + "]",
                                   martingale_check(pe, op, detail::one, k, b), 5.0, "<="));
        out.push_back(detail::make("power-identity-" + sys + "[k=" + std::to_string(k) + "]",
                                   power_identity_check(pe, op, f, k, b, 0, o.threads), 5.0, "<="));
      }
      return out;
    });
  };
  {
    // The chain of R'f = R(f h)/h; h = Gauss density is R-harmonic, so 1 is R'-harmonic.
    detail::timed(c.checks, "gauss-density-harmonic", [&] {
      const auto op = systems::gauss(1024, 10000);
      const auto Rh = apply(op, reference::gauss_density, o.threads);
      double m = 0;
      for (std::size_t j = 0; j < op.grid().n(); ++j) m = std::max(m, std::abs(Rh[j] - reference::gauss_density(op.grid().node(j))));
      return std::vector<CheckRecord>{detail::make("gauss-density-harmonic", m, 1e-6, "<=")};
    });
    const GaussBackwardSampler gs(10000);
    run("gauss-backward", gs, gs.grid(), bins, detail::x_, 61);
  }
  {
    const auto bs = systems::doubling(1024);
    run("doubling", BranchSampler(bs, InitialLaw::uniform()), bs.grid(), bins, detail::cos2pi, 62);
  }
  {
    const auto bs = systems::logistic(1024);
    run("logistic", BranchSampler(bs, InitialLaw::arcsine()), bs.grid(), bins, detail::x2, 63);
  }
  {
    const auto bs = systems::parametric(0.3, 1024);
    run("parametric-0.3", BranchSampler(bs, InitialLaw::uniform()), bs.grid(), bins, detail::x_, 64);
  }
  {
    const auto cs = systems::random_control(1024);
    run("random-control", ControlledSampler(cs, InitialLaw::arcsine()), cs.grid(), bins, detail::x_, 65);
  }
  {
    const auto one = CosinePolynomial::constant(1.0);
    const auto haar = systems::circle_chain(WaveletFilter::haar(), one, 1024);
    run("circle-haar", BranchSampler(haar, InitialLaw::uniform()), haar.grid(), Grid::circle(32), detail::cos2pi, 66);
    const auto d4 = systems::circle_chain(WaveletFilter::daubechies4(), one, 1024);
    run("circle-daub4", BranchSampler(d4, InitialLaw::uniform()), d4.grid(), Grid::circle(32), detail::cos2pi, 67);
  }
  return c;
}

inline std::vector<CheckRecord> chain_extras(const Options& o) {
  std::vector<CheckRecord> out;
  const Grid bins = Grid::unit_interval(32);
  detail::timed(out, "markov-property", [&] {
    const auto bs = systems::doubling(1024);
    const BranchSampler s(bs, InitialLaw::uniform());
    const auto pe = simulate_paths(s, 1000000, 3, o.master_seed, o.threads, detail::streams(71));
    const auto bad = simulate_replayed_choices(s, 1000000, 3, 2, o.master_seed);
    return std::vector<CheckRecord>{
        detail::make("markov-property-doubling", markov_property_check(pe, detail::x_, 2, bins), 5.0, "<="),
        detail::make("markov-property-replayed-control", markov_property_check(bad, detail::x_, 2, bins), 8.0, ">="),
    };
  });
  detail::timed(out, "quasi-invariance-wrong-weight", [&] {
    const double u = 0.3;
    const auto bs = systems::parametric(u, 1024);
    const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), 1000000, 2, o.master_seed, o.threads, detail::streams(72));
    auto W = [u](double x) { return x < u ? 1.0 / (2 * (1 - u)) : 1.0 / (2 * u); };
    const auto q = quasi_invariance_check(pe, bs.sigma_map(), W, [](std::span<const double> w) { return w[1]; }, 2);
    return std::vector<CheckRecord>{detail::make("quasi-invariance-swapped-weight-detected", std::abs(q.z), 8.0, ">=")};
  });
  detail::timed(out, "transition-matrix", [&] {
    const FiniteChainSampler s({{0.9, 0.1}, {0.5, 0.5}}, {0.5, 0.5});
    const auto pe = simulate_paths(s, 1000, 1000, o.master_seed, o.threads, detail::streams(73));
    const auto t = estimate_transition_matrix(pe, 2);
    const double e = std::max({std::abs(t.probabilities[0][0] - 0.9), std::abs(t.probabilities[0][1] - 0.1),
                               std::abs(t.probabilities[1][0] - 0.5), std::abs(t.probabilities[1][1] - 0.5)});
    return std::vector<CheckRecord>{detail::make("transition-matrix-two-state", e, 0.005, "<=")};
  });
  return out;
}

// ---------------------------------------------------------------- solenoid

inline Criterion criterion_positive_definite(const Options& o) {
  Criterion c{8, "Positive-definite function on Z[1/N] (20 random 6-point sets)", {}, 0};
  auto run = [&](const WaveletFilter& f, std::uint64_t tag) {
    detail::timed(c.checks, "pd-" + f.name(), [&] {
      Stream s(o.master_seed, detail::streams(tag));
      double worst = std::numeric_limits<double>::infinity();
      for (int t = 0; t < 20; ++t) {
        const auto L = pd_function(f, detail::one, s.uniform());
        const auto pts = random_nadic_set(6, 16, 4, s);
        worst = std::min(worst, decltype(L)::min_eigenvalue(L.gram(pts)));
      }
      return std::vector<CheckRecord>{detail::make("pd-min-eigenvalue-" + f.name(), worst, -1e-8, ">=")};
    });
  };
  run(WaveletFilter::haar(), 81);
  run(WaveletFilter::daubechies4(), 82);
  return c;
}

inline std::vector<CheckRecord> solenoid_extras(const Options& o) {
  std::vector<CheckRecord> out;
  detail::timed(out, "pi-k-mass", [&] {
    std::vector<CheckRecord> r;
    for (const auto& f : {WaveletFilter::haar(), WaveletFilter::daubechies4()}) {
      double worst = 0;
      for (int k = 0; k <= 5; ++k) worst = std::max(worst, std::abs(pi_k_distribution(f, detail::one, k, Grid::circle(4096)).total() - 1.0));
      r.push_back(detail::make("pi-k-mass-" + f.name(), worst, 1e-8, "<="));
    }
    return r;
  });
  detail::timed(out, "solenoid-paths", [&] {
    const auto bs = systems::circle_chain(WaveletFilter::haar(), CosinePolynomial::constant(1.0), 1024);
    const auto pe = simulate_paths(BranchSampler(bs, InitialLaw::uniform()), 100000, 10, o.master_seed, o.threads, detail::streams(91));
    const auto viol = solenoid_violations(pe, bs.sigma_map(), true);
    const auto law = pi_k_distribution(WaveletFilter::haar(), detail::one, 3, Grid::circle(4096));
    const double ks = ks_distance(pe.sample(3), law);
    return std::vector<CheckRecord>{
        detail::make("solenoid-constraint-violations-haar", static_cast<double>(viol), 0.0, "<="),
        detail::make("pi-3-ks-haar", ks, 0.02, "<="),
    };
  });
  return out;
}

// ---------------------------------------------------------------- wavelet

inline Criterion criterion_wavelet(const Options& o) {
  Criterion c{7, "Wavelet identities: Haar h=1, Fejer autocorrelation, Ruelle fixed point, KS=UK", {}, 0};
  detail::timed(c.checks, "haar-harmonic", [&] {
    const auto phi = cascade(WaveletFilter::haar(), 10, 10);
    const auto hs = autocorrelation(phi);
    double m = 0;
    const Grid g = Grid::circle(1024);
    for (std::size_t j = 0; j < g.n(); ++j) m = std::max(m, std::abs(hs.h(g.node(j)) - 1.0));
    return std::vector<CheckRecord>{detail::make("haar-h-equals-one", m, 1e-10, "<=")};
  });
  detail::timed(c.checks, "fejer", [&] {
    std::vector<CheckRecord> r;
    for (int m = 1; m <= 3; ++m) {
      const auto phi = box_scaling_function(m, 8);
      const auto hs = autocorrelation(phi);
      const double L = 2.0 * m + 1;
      double e = 0;
      for (long n = 0; n <= 2 * m + 1; ++n) e = std::max(e, std::abs(hs.autocorr(n) - std::max(0.0, (L - static_cast<double>(n)) / L)));
      const auto f = WaveletFilter::stretched_haar(m);
      r.push_back(detail::make("fejer-autocorrelation-m=" + std::to_string(m), e, 1e-10, "<="));
      r.push_back(detail::make("fejer-box-cascade-fixed-m=" + std::to_string(m), cascade_residual(f, phi), 1e-12, "<="));
      r.push_back(detail::make("fejer-ruelle-fixed-m=" + std::to_string(m), verify_ruelle_fixed(f, hs.h), 1e-8, "<="));
    }
    return r;
  });
  detail::timed(c.checks, "ruelle-fixed", [&] {
    const auto hs = autocorrelation(cascade(WaveletFilter::haar(), 10, 10));
    return std::vector<CheckRecord>{
        detail::make("haar-ruelle-fixed", verify_ruelle_fixed(WaveletFilter::haar(), hs.h), 1e-8, "<="),
        detail::make("daub4-ruelle-fixed-h=1", verify_ruelle_fixed(WaveletFilter::daubechies4(), CosinePolynomial::constant(1.0)), 1e-8, "<="),
    };
  });
  detail::timed(c.checks, "intertwining", [&] {
    const auto f = WaveletFilter::haar();
    const auto phi = cascade(f, 10, 10);
    Stream s(o.master_seed, detail::streams(101));
    double m = 0;
    for (int t = 0; t < 5; ++t) {
      Sequence xi;
      for (long n = 0; n < 8; ++n) xi[n - 3] = s.uniform(-1, 1);
      m = std::max(m, intertwine_check(f, phi, xi));
    }
    return std::vector<CheckRecord>{detail::make("haar-KS-equals-UK", m, 1e-10, "<=")};
  });
  return c;
}

// ---------------------------------------------------------------- schur

inline Criterion criterion_schur(const Options& o) {
  Criterion c{9, "Schur parameters: roundtrip and finite Blaschke termination", {}, 0};
  detail::timed(c.checks, "schur-roundtrip", [&] {
    Stream s(o.master_seed, detail::streams(111));
    const auto nu = DiskLaw::uniform(0.9);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const int len = 1 + static_cast<int>(s.uniform() * 8);
      const auto p = sample_random_schur(nu, len, s);
      const auto q = extract_params(function_from_params(p, 24), len);
      if (q.params.size() != p.params.size()) return std::vector<CheckRecord>{detail::make("schur-roundtrip-max-error", 1.0, 1e-8, "<=", "early termination")};
      for (std::size_t k = 0; k < p.params.size(); ++k) worst = std::max(worst, std::abs(p.params[k] - q.params[k]));
    }
    return std::vector<CheckRecord>{detail::make("schur-roundtrip-max-error", worst, 1e-8, "<=")};
  });
  detail::timed(c.checks, "blaschke", [&] {
    const std::vector<cplx> zeros{{0.5, 0.0}, {-0.3, 0.4}, {0.1, -0.6}};
    std::vector<CheckRecord> r;
    for (int d = 1; d <= 3; ++d) {
      const auto b = blaschke(std::vector<cplx>(zeros.begin(), zeros.begin() + d));
      const auto p = extract_params(b, 10);
      const double steps_off = p.terminated ? std::abs(static_cast<double>(p.params.size()) - (d + 1)) : 99.0;
      r.push_back(detail::make("blaschke-d=" + std::to_string(d) + "-steps-minus-(d+1)", steps_off, 0.0, "<="));
      r.push_back(detail::make("blaschke-d=" + std::to_string(d) + "-terminal-modulus-defect", p.terminal_defect, 1e-8, "<="));
    }
    return r;
  });
  return c;
}

// ---------------------------------------------------------------- suites

using CriterionFn = Criterion (*)(const Options&);

inline std::vector<Criterion> acceptance_criteria(const Options& o) {
  const CriterionFn fns[] = {criterion_gauss_density, criterion_arcsine_invariance, criterion_logistic, criterion_kolmogorov,
                             criterion_quasi_invariance, criterion_martingale, criterion_wavelet, criterion_positive_definite,
                             criterion_schur, criterion_hutchinson};
  std::vector<Criterion> out;
  for (auto fn : fns) {
    const auto t0 = std::chrono::steady_clock::now();
    out.push_back(fn(o));
    out.back().runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return out;
}

inline void append(std::vector<CheckRecord>& out, const Criterion& c) { out.insert(out.end(), c.checks.begin(), c.checks.end()); }

inline std::vector<CheckRecord> run_suite(const std::string& suite, const Options& o) {
  bool known = false;
  for (const auto& s : suite_names()) known = known || s == suite;
  if (!known) throw Error("unknown suite '" + suite + "'");
  if (!o.inject_fault.empty() && o.inject_fault != "misnormalized-filter") throw Error("unknown fault '" + o.inject_fault + "'");
  const bool all = suite == "all";
  std::vector<CheckRecord> out;
  if (all || suite == "operators") {
    append(out, criterion_gauss_density(o));
    append(out, criterion_arcsine_invariance(o));
    append(out, criterion_logistic(o));
    append(out, criterion_hutchinson(o));
    for (auto& r : operator_extras(o)) out.push_back(std::move(r));
  }
  if (all || suite == "chains") {
    append(out, criterion_kolmogorov(o));
    append(out, criterion_quasi_invariance(o));
    append(out, criterion_martingale(o));
    for (auto& r : chain_extras(o)) out.push_back(std::move(r));
  }
  if (all || suite == "solenoid") {
    append(out, criterion_positive_definite(o));
    for (auto& r : solenoid_extras(o)) out.push_back(std::move(r));
  }
  if (all || suite == "wavelet") append(out, criterion_wavelet(o));
  if (all || suite == "schur") append(out, criterion_schur(o));
  return out;
}

}  // namespace transop::verify
