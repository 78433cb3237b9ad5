#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "transop/error.hpp"
#include "transop/grid.hpp"
#include "transop/parallel.hpp"
#include "transop/reference.hpp"
#include "transop/rng.hpp"
#include "transop/transfer.hpp"
#include "transop/invariant.hpp"

namespace transop {

/// Law of T_0, given by its quantile function.
struct InitialLaw {
  std::function<double(double)> quantile;
  std::string name;

  double draw(Stream& s) const { return quantile(s.uniform()); }

  static InitialLaw uniform(double lo = 0, double hi = 1) {
    return {[lo, hi](double u) { return lo + (hi - lo) * u; }, "uniform"};
  }
  static InitialLaw arcsine() { return {reference::arcsine_quantile, "arcsine"}; }
  static InitialLaw gauss() { return {reference::gauss_quantile, "gauss"}; }
  static InitialLaw point(double x) {
    return {[x](double) { return x; }, "point"};
  }
  // Cell masses with mass spread uniformly inside each cell.
  static InitialLaw from_measure(const DiscreteMeasure& mu) {
    auto cdf = mu.cdf_at_boundaries();
    const Grid g = mu.grid();
    return {[cdf, g](double u) {
              const double v = u * cdf.back();
              auto it = std::upper_bound(cdf.begin() + 1, cdf.end(), v);
              std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()) - 1, g.n() - 1);
              while (i + 1 < g.n() && cdf[i + 1] - cdf[i] <= 0) ++i;
              const double m = cdf[i + 1] - cdf[i];
              const double t = m > 0 ? std::clamp((v - cdf[i]) / m, 0.0, 1.0) : 0.5;
              return g.cell_lower(i) + t * g.width();
            },
            "measure"};
  }
};

namespace detail {

inline std::size_t pick(std::span<const double> w, double u) {
  double total = 0;
  for (double x : w) total += x;
  const double v = u * total;
  double c = 0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0) continue;
    c += w[i];
    last = i;
    if (v < c) return i;
  }
  return last;
}

}  // namespace detail

/// Chain moving along inverse branches: from x, go to tau_i(x) with probability p_i(x).
class BranchSampler {
 public:
  BranchSampler(BranchSystem bs, InitialLaw init) : bs_(std::move(bs)), init_(std::move(init)) {
    if (bs_.branch_count() > 16) throw Error("branch sampler: at most 16 branches");
  }

  // Refuses systems whose Radon-Nikodym weight vanishes on a cell: the path
  // measure would not be quasi-invariant and there is no canonical repair.
  BranchSampler(BranchSystem bs, InitialLaw init, const RadonNikodymWeight& W) : BranchSampler(std::move(bs), std::move(init)) {
    for (std::size_t j = 0; j < W.W.size(); ++j)
      if (!(W.W[j] > 0)) throw Error("branch sampler: W vanishes on cell " + std::to_string(j) + "; refusing to sample");
  }

  const BranchSystem& system() const { return bs_; }
  const Grid& grid() const { return bs_.grid(); }
  const std::string& name() const { return bs_.name(); }

  double draw_initial(Stream& s) const { return init_.draw(s); }

  std::size_t choose(double x, Stream& s) const {
    std::array<double, 16> w{};
    double total = 0;
    for (std::size_t i = 0; i < bs_.branch_count(); ++i) {
      w[i] = bs_.weight(i, x);
      total += w[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw NormalizationError(detail::at_point("branch weights do not sum to 1", x));
    return detail::pick(std::span<const double>(w.data(), bs_.branch_count()), s.uniform());
  }

  double move(std::size_t i, double x) const { return bs_.tau(i, x); }

  double step(double x, Stream& s) const { return move(choose(x, s), x); }

  template <RealFunction F>
  double generator(const F& f, double x) const {
    return bs_.evaluate(f, x);
  }

 private:
  BranchSystem bs_;
  InitialLaw init_;
};

/// T_{n+1} = F(T_n, psi_n) with psi_n drawn from the control law by inverse CDF.
class ControlledSampler {
 public:
  ControlledSampler(ControlledSystem cs, InitialLaw init) : cs_(std::move(cs)), init_(std::move(init)) {}

  const ControlledSystem& system() const { return cs_; }
  const Grid& grid() const { return cs_.grid(); }
  const std::string& name() const { return cs_.name(); }
  double draw_initial(Stream& s) const { return init_.draw(s); }

  double step(double x, Stream& s) const {
    const double vi = s.uniform();
    const double vu = cs_.law().with_uniform ? s.uniform() : 0.5;
    return cs_.move(x, cs_.draw(vi, vu));
  }

  template <RealFunction F>
  double generator(const F& f, double x) const {
    return cs_.evaluate(f, x);
  }

 private:
  ControlledSystem cs_;
  InitialLaw init_;
};

/**
 * Backward chain of the Gauss map for the normalized operator
 * R'f = R(f h)/h, h the Gauss density: from x, go to 1/(k+x) with probability
 * (1+x)/((k+x)(k+x+1)), truncated at k <= K and renormalized.
 */
class GaussBackwardSampler {
 public:
  explicit GaussBackwardSampler(long K = 10000, InitialLaw init = InitialLaw::gauss())
      : K_(K), init_(std::move(init)), grid_(Grid::unit_interval(1024)) {
    if (K_ < 2) throw Error("gauss sampler: K must be >= 2");
  }

  long K() const { return K_; }
  const Grid& grid() const { return grid_; }
  std::string name() const { return "gauss-backward"; }
  double draw_initial(Stream& s) const { return init_.draw(s); }

  // Truncated mass: sum_{k<=K} q_k(x) = 1 - (1+x)/(K+x+1).
  double kept_mass(double x) const { return 1.0 - (1.0 + x) / (static_cast<double>(K_) + x + 1.0); }

  double step(double x, Stream& s) const {
    const double v = s.uniform() * kept_mass(x);
    // Smallest k with 1 - (1+x)/(k+x+1) >= v.
    double k = std::ceil((1.0 + x) / (1.0 - v) - x - 1.0 - 1e-12);
    k = std::clamp(k, 1.0, static_cast<double>(K_));
    return 1.0 / (k + x);
  }

  template <RealFunction F>
  double generator(const F& f, double x) const {
    double s = 0;
    for (long k = K_; k >= 1; --k) {
      const double y = static_cast<double>(k) + x;
      s += (1.0 + x) / (y * (y + 1.0)) * f(1.0 / y);
    }
    return s / kept_mass(x);
  }

 private:
  long K_;
  InitialLaw init_;
  Grid grid_;
};

/// Chain driven by an affine IFS with constant probabilities.
class IfsSampler {
 public:
  IfsSampler(AffineIFS ifs, InitialLaw init, Grid grid) : ifs_(std::move(ifs)), init_(std::move(init)), grid_(std::move(grid)) {}

  const Grid& grid() const { return grid_; }
  const std::string& name() const { return ifs_.name(); }
  double draw_initial(Stream& s) const { return init_.draw(s); }

  double step(double x, Stream& s) const {
    const std::size_t j = detail::pick(ifs_.probs(), s.uniform());
    return ifs_.maps()[j](x);
  }

  template <RealFunction F>
  double generator(const F& f, double x) const {
    double s = 0;
    for (std::size_t j = 0; j < ifs_.maps().size(); ++j) s += ifs_.probs()[j] * f(ifs_.maps()[j](x));
    return s;
  }

 private:
  AffineIFS ifs_;
  InitialLaw init_;
  Grid grid_;
};

/// Chain on {0, ..., S-1} with transition matrix P; states are stored as reals.
class FiniteChainSampler {
 public:
  FiniteChainSampler(std::vector<std::vector<double>> P, std::vector<double> initial) : P_(std::move(P)), init_(std::move(initial)) {
    for (const auto& row : P_) {
      if (row.size() != P_.size()) throw Error("finite chain: transition matrix must be square");
      double s = 0;
      for (double p : row) {
        if (!(p >= 0)) throw NormalizationError("finite chain: negative transition probability");
        s += p;
      }
      if (std::abs(s - 1.0) > 1e-12) throw NormalizationError("finite chain: row does not sum to 1");
    }
    if (init_.size() != P_.size()) throw Error("finite chain: initial law has wrong size");
  }

  std::size_t states() const { return P_.size(); }
  std::string name() const { return "finite-chain"; }
  double draw_initial(Stream& s) const { return static_cast<double>(detail::pick(init_, s.uniform())); }
  double step(double x, Stream& s) const {
    const auto i = static_cast<std::size_t>(x);
    return static_cast<double>(detail::pick(P_[i], s.uniform()));
  }

 private:
  std::vector<std::vector<double>> P_;
  std::vector<double> init_;
};

/// n_paths x (n_steps + 1) states, row-major; path p was drawn from stream first_stream + p.
struct PathEnsemble {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::vector<double> states;
  SeedInfo seed{};
  std::string system;

  std::size_t width() const { return n_steps + 1; }
  double at(std::size_t p, std::size_t k) const { return states[p * width() + k]; }
  std::span<const double> path(std::size_t p) const { return {states.data() + p * width(), width()}; }
  std::vector<double> column(std::size_t k) const {
    std::vector<double> c(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) c[p] = at(p, k);
    return c;
  }
  EmpiricalSample sample(std::size_t k) const { return {column(k), seed}; }
};

template <class S>
concept Sampler = requires(const S& s, double x, Stream& st) {
  { s.step(x, st) } -> std::convertible_to<double>;
  { s.draw_initial(st) } -> std::convertible_to<double>;
};

template <Sampler S>
PathEnsemble simulate_paths(const S& sampler, std::size_t n_paths, std::size_t n_steps, std::uint64_t master_seed = kDefaultMasterSeed,
                            unsigned threads = 1, std::uint64_t first_stream = 0) {
  if (n_paths < 1) throw Error("simulate_paths: need at least one path");
  PathEnsemble pe{n_paths, n_steps, std::vector<double>(n_paths * (n_steps + 1)), {master_seed, first_stream}, std::string(sampler.name())};
  parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      Stream s(master_seed, first_stream + p);
      double* row = pe.states.data() + p * pe.width();
      row[0] = sampler.draw_initial(s);
      for (std::size_t k = 0; k < n_steps; ++k) row[k + 1] = sampler.step(row[k], s);
    }
  });
  return pe;
}

/**
 * Deliberately non-Markov control ensemble: from step `lag` on, the branch
 * chosen at step n replays the branch chosen at step n - lag.
 */
inline PathEnsemble simulate_replayed_choices(const BranchSampler& sampler, std::size_t n_paths, std::size_t n_steps, std::size_t lag,
                                              std::uint64_t master_seed = kDefaultMasterSeed) {
  if (lag < 1) throw Error("simulate_replayed_choices: lag must be >= 1");
  PathEnsemble pe{n_paths, n_steps, std::vector<double>(n_paths * (n_steps + 1)), {master_seed, 0}, sampler.name() + "-replayed"};
  std::vector<std::size_t> choice(n_steps);
  for (std::size_t p = 0; p < n_paths; ++p) {
    Stream s(master_seed, p);
    double* row = pe.states.data() + p * pe.width();
    row[0] = sampler.draw_initial(s);
    for (std::size_t k = 0; k < n_steps; ++k) {
      choice[k] = k >= lag ? choice[k - lag] : sampler.choose(row[k], s);
      row[k + 1] = sampler.move(choice[k], row[k]);
    }
  }
  return pe;
}

struct MeanSE {
  double mean = 0;
  double std_error = 0;
  std::size_t count = 0;
};

namespace detail {

struct Accumulator {
  double n = 0, mean = 0, m2 = 0;
  void add(double x) {
    n += 1;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

inline double z_of(double mean, double se) {
  if (se > 0) return mean / se;
  return std::abs(mean) < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Binned E(f(T_{from+1}) | T_from in bin); bins below min_count are absent.
struct ConditionalEstimate {
  Grid grid;
  std::vector<std::optional<double>> values;
  std::vector<std::size_t> counts;
  std::vector<double> std_errors;
};

template <RealFunction F>
ConditionalEstimate estimate_conditional(const PathEnsemble& pe, const F& f, std::size_t from_step, const Grid& bins,
                                         std::size_t min_count = 100) {
  if (from_step >= pe.n_steps) throw Error("estimate_conditional: from_step must be < n_steps");
  std::vector<detail::Accumulator> acc(bins.n());
  for (std::size_t p = 0; p < pe.n_paths; ++p) acc[bins.locate(pe.at(p, from_step))].add(f(pe.at(p, from_step + 1)));
  ConditionalEstimate out{bins, std::vector<std::optional<double>>(bins.n()), std::vector<std::size_t>(bins.n()),
                          std::vector<double>(bins.n(), 0.0)};
  for (std::size_t b = 0; b < bins.n(); ++b) {
    out.counts[b] = static_cast<std::size_t>(acc[b].n);
    if (out.counts[b] == 0 || out.counts[b] < min_count) continue;
    out.values[b] = acc[b].mean;
    out.std_errors[b] = acc[b].std_error();
  }
  return out;
}

/**
 * max over occupied bins of |z| for E[f(T_{n+k}) - g(T_n) | T_n in bin] = 0.
 * The expected value g is taken at the sampled T_n, so there is no bin-width
 * bias. Each bin's standard error is floored at range(f) / count: a branch of
 * probability below 1/count is usually never drawn, and the sample variance
 * alone would then understate the error of a nearly deterministic bin.
 */
template <RealFunction F, RealFunction G>
double conditional_deviation(const PathEnsemble& pe, const F& f, const G& g, std::size_t n, std::size_t k, const Grid& bins,
                             std::size_t min_count = 100) {
  if (n + k > pe.n_steps) throw Error("conditional_deviation: not enough steps");
  std::vector<detail::Accumulator> acc(bins.n());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t p = 0; p < pe.n_paths; ++p) {
    const double x = pe.at(p, n), y = f(pe.at(p, n + k));
    lo = std::min(lo, y);
    hi = std::max(hi, y);
    acc[bins.locate(x)].add(y - g(x));
  }
  const double range = hi - lo;
  double worst = 0;
  for (const auto& a : acc) {
    if (a.n < static_cast<double>(min_count)) continue;
    const double se = std::hypot(a.std_error(), range / a.n);
    worst = std::max(worst, std::abs(detail::z_of(a.mean, se)));
  }
  return worst;
}

/**
 * Markov property check at step n: within each T_n bin, f(T_{n+1}) is regressed
 * linearly on T_n; if the chain is Markov, the residual mean must not depend on
 * the T_{n-1} bin. Returns the max |z| over jointly occupied bins.
 */
template <RealFunction F>
double markov_property_check(const PathEnsemble& pe, const F& f, std::size_t n, const Grid& bins, std::size_t min_count = 100) {
  if (n < 1 || n + 1 > pe.n_steps) throw Error("markov_property_check: need 1 <= n and n+1 <= n_steps");
  const std::size_t B = bins.n();
  struct Fit {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    double alpha = 0, beta = 0, rss = 0;
  };
  std::vector<Fit> fit(B);
  std::vector<std::size_t> mb(pe.n_paths), jb(pe.n_paths);
  std::vector<double> xs(pe.n_paths), ys(pe.n_paths);
  for (std::size_t p = 0; p < pe.n_paths; ++p) {
    xs[p] = pe.at(p, n);
    ys[p] = f(pe.at(p, n + 1));
    mb[p] = bins.locate(xs[p]);
    jb[p] = bins.locate(pe.at(p, n - 1));
    auto& q = fit[mb[p]];
    q.n += 1;
    q.sx += xs[p];
    q.sy += ys[p];
    q.sxx += xs[p] * xs[p];
    q.sxy += xs[p] * ys[p];
  }
  for (auto& q : fit) {
    if (q.n < 3) continue;
    const double mx = q.sx / q.n, my = q.sy / q.n;
    const double vxx = q.sxx / q.n - mx * mx;
    q.beta = vxx > 1e-300 ? (q.sxy / q.n - mx * my) / vxx : 0.0;
    q.alpha = my - q.beta * mx;
  }
  std::map<std::pair<std::size_t, std::size_t>, detail::Accumulator> joint;
  for (std::size_t p = 0; p < pe.n_paths; ++p) {
    auto& q = fit[mb[p]];
    const double e = ys[p] - (q.alpha + q.beta * xs[p]);
    q.rss += e * e;
    joint[{jb[p], mb[p]}].add(e);
  }
  double worst = 0;
  for (const auto& [key, a] : joint) {
    const auto& q = fit[key.second];
    if (a.n < static_cast<double>(min_count) || q.n <= a.n || q.n < 3) continue;
    const double sigma = std::sqrt(q.rss / (q.n - 2));
    if (sigma < 1e-12) continue;
    const double se = sigma * std::sqrt(1.0 / a.n - 1.0 / q.n);
    worst = std::max(worst, std::abs(a.mean / se));
  }
  return worst;
}

/// integral f_0 R(f_1 R(f_2 ... R(f_n h))) d lambda, the inner functions sampled on the operator grid.
template <class Op, RealFunction H>
double nested_operator_expectation(const Op& op, const H& h, const DiscreteMeasure& lambda, const std::vector<RealMap>& fs,
                                   unsigned threads = 1) {
  if (fs.empty() || fs.size() > 6) throw Error("nested_operator_expectation: need 1 to 6 test functions");
  require_same_grid(op.grid(), lambda.grid(), "nested_operator_expectation");
  const Grid& g = op.grid();
  auto cur = GridFunction::sample(g, [&](double x) { return fs.back()(x) * h(x); });
  for (std::size_t k = fs.size() - 1; k-- > 0;) {
    const auto Rg = apply(op, cur, threads);
    cur = GridFunction::sample(g, [&](double x) { return fs[k](x); }) * Rg;
  }
  return integrate(cur, lambda);
}

/// Sample mean of prod_k f_k(T_k) with its standard error.
inline MeanSE path_moment_mc(const PathEnsemble& pe, const std::vector<RealMap>& fs) {
  if (fs.empty() || fs.size() > pe.n_steps + 1) throw Error("path_moment_mc: need 1..n_steps+1 functions");
  detail::Accumulator a;
  for (std::size_t p = 0; p < pe.n_paths; ++p) {
    double v = 1;
    for (std::size_t k = 0; k < fs.size(); ++k) v *= fs[k](pe.at(p, k));
    a.add(v);
  }
  return {a.mean, a.std_error(), pe.n_paths};
}

using PathFunctional = std::function<double(std::span<const double>)>;

struct QuasiInvarianceResult {
  double lhs = 0;
  double rhs = 0;
  double z = 0;
};

/**
 * E[psi] versus E[(psi o sigma_hat)(W o pi_0)], sigma_hat(x_0, x_1, ...) =
 * (sigma(x_0), x_0, x_1, ...). psi reads the first m coordinates.
 */
template <RealFunction W_t>
QuasiInvarianceResult quasi_invariance_check(const PathEnsemble& pe, const RealMap& sigma, const W_t& W, const PathFunctional& psi,
                                             std::size_t m) {
  if (m < 1 || m > pe.n_steps + 1) throw Error("quasi_invariance_check: psi needs 1..n_steps+1 coordinates");
  detail::Accumulator l, r, d;
  std::vector<double> shifted(m);
  for (std::size_t p = 0; p < pe.n_paths; ++p) {
    const auto path = pe.path(p);
    shifted[0] = sigma(path[0]);
    for (std::size_t k = 1; k < m; ++k) shifted[k] = path[k - 1];
    const double a = psi(path.first(m));
    const double b = psi(shifted) * W(path[0]);
    l.add(a);
    r.add(b);
    d.add(a - b);
  }
  return {l.mean, r.mean, detail::z_of(d.mean, d.std_error())};
}

/// Operator view of a sampler's one-step generator on a fixed grid.
template <class S>
struct GeneratorOp {
  const S& sampler;
  Grid grid_;
  const Grid& grid() const { return grid_; }
  bool normalized() const { return true; }
  template <RealFunction F>
  double evaluate(const F& f, double x) const {
    return sampler.generator(f, x);
  }
};

/// R^k f on the operator grid.
template <class Op, RealFunction F>
GridFunction operator_power(const Op& op, const F& f, int k, unsigned threads = 1) {
  auto g = GridFunction::sample(op.grid(), f);
  for (int i = 0; i < k; ++i) g = apply(op, g, threads);
  return g;
}

/// max |z| for E(f(T_{n+k}) | T_n) = (R^k f)(T_n).
template <class Op, RealFunction F>
double power_identity_check(const PathEnsemble& pe, const Op& op, const F& f, int k, const Grid& bins, std::size_t n = 0,
                            unsigned threads = 1) {
  if (k < 1) throw Error("power_identity_check: k must be >= 1");
  const auto Rk = operator_power(op, f, k, threads);
  return conditional_deviation(pe, f, Rk, n, static_cast<std::size_t>(k), bins);
}

/// Martingale check for an R-harmonic h: E(h(T_{n+k}) | T_n) = h(T_n).
template <class Op, RealFunction H>
double martingale_check(const PathEnsemble& pe, const Op& op, const H& h, int k, const Grid& bins, std::size_t n = 0,
                        double harmonic_tol = 1e-6) {
  if (k < 1) throw Error("martingale_check: k must be >= 1");
  const auto Rh = apply(op, h);
  for (std::size_t j = 0; j < op.grid().n(); ++j)
    if (std::abs(Rh[j] - h(op.grid().node(j))) > harmonic_tol)
      throw Error(detail::at_point("martingale_check: h is not harmonic (|Rh - h| > tolerance)", op.grid().node(j)));
  return conditional_deviation(pe, h, h, n, static_cast<std::size_t>(k), bins);
}

/// Martingale lambda^{-n} f(T_n) for an eigenpair R f = lambda f: E(f(T_{n+k}) | T_n) = lambda^k f(T_n).
template <RealFunction F>
double eigen_martingale_check(const PathEnsemble& pe, const F& f, double lambda, int k, const Grid& bins, std::size_t n = 0) {
  const double lk = std::pow(lambda, k);
  return conditional_deviation(
      pe, f, [&](double x) { return lk * f(x); }, n, static_cast<std::size_t>(k), bins);
}

struct TransitionMatrixEstimate {
  std::size_t states = 0;
  std::vector<std::vector<double>> counts;
  std::vector<std::vector<double>> probabilities;
  std::vector<bool> present;  // false for declared states never left
};

inline TransitionMatrixEstimate estimate_transition_matrix(const PathEnsemble& pe, std::size_t n_states) {
  TransitionMatrixEstimate t{n_states, std::vector<std::vector<double>>(n_states, std::vector<double>(n_states, 0.0)), {}, {}};
  auto index = [&](double x) {
    const auto i = static_cast<long>(std::llround(x));
    if (std::abs(x - static_cast<double>(i)) > 0 || i < 0 || i >= static_cast<long>(n_states))
      throw Error("estimate_transition_matrix: state outside the declared set");
    return static_cast<std::size_t>(i);
  };
  for (std::size_t p = 0; p < pe.n_paths; ++p)
    for (std::size_t k = 0; k < pe.n_steps; ++k) t.counts[index(pe.at(p, k))][index(pe.at(p, k + 1))] += 1;
  t.probabilities = t.counts;
  t.present.assign(n_states, false);
  for (std::size_t i = 0; i < n_states; ++i) {
    double s = 0;
    for (double c : t.counts[i]) s += c;
    if (s > 0) {
      t.present[i] = true;
      for (double& v : t.probabilities[i]) v /= s;
    }
  }
  return t;
}

}  // namespace transop
