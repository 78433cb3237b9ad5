#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "transop/error.hpp"
#include "transop/filter.hpp"
#include "transop/grid.hpp"
#include "transop/parallel.hpp"
#include "transop/quadrature.hpp"

namespace transop {

using RealMap = std::function<double(double)>;

namespace detail {

inline constexpr double kClampSlack = 1e-12;

inline std::string at_point(const std::string& what, double x) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at x=" << x;
  return os.str();
}

// Maps y back into the domain of g; tiny round-off escapes are clamped.
inline double admit(const Grid& g, double y, const std::string& who, double x) {
  if (g.is_circle()) {
    if (!std::isfinite(y)) throw DomainError(at_point(who + " is not finite", x));
    return g.wrap(y);
  }
  if (y >= g.lower() && y <= g.upper()) return y;
  if (y >= g.lower() - kClampSlack && y < g.lower()) return g.lower();
  if (y <= g.upper() + kClampSlack && y > g.upper()) return g.upper();
  throw DomainError(at_point(who + " escapes the domain", x));
}

inline double circle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 1.0);
  return std::min(d, 1.0 - d);
}

/**
 * Adds `mass` to row, spread uniformly over [a, b] by overlap with the cells.
 * A degenerate interval deposits everything in the containing cell. On a
 * circle the interval may wrap.
 */
inline void spread(std::span<double> row, const Grid& g, double a, double b, double mass) {
  if (mass == 0) return;
  if (a > b) std::swap(a, b);
  const double w = g.width();
  if (b - a <= 1e-15 * g.length()) {
    row[g.locate(0.5 * (a + b))] += mass;
    return;
  }
  if (!g.is_circle()) {
    a = std::clamp(a, g.lower(), g.upper());
    b = std::clamp(b, g.lower(), g.upper());
    if (b <= a) {
      row[g.locate(a)] += mass;
      return;
    }
  }
  const double len = b - a;
  // Walk cells in unwrapped coordinates.
  const double s0 = (a - g.lower()) / w, s1 = (b - g.lower()) / w;
  long c = static_cast<long>(std::floor(s0));
  const long last = static_cast<long>(std::ceil(s1)) - 1;
  const long n = static_cast<long>(g.n());
  for (; c <= last; ++c) {
    const double lo = std::max(s0, static_cast<double>(c)), hi = std::min(s1, static_cast<double>(c + 1));
    if (hi <= lo) continue;
    long idx = c;
    if (g.is_circle()) idx = ((c % n) + n) % n;
    idx = std::clamp(idx, 0L, n - 1);
    row[static_cast<std::size_t>(idx)] += mass * (hi - lo) * w / len;
  }
}

}  // namespace detail

struct Branch {
  RealMap tau;
  RealMap weight;
  std::string name;
};

/**
 * Endomorphism sigma with inverse branches tau_i and weights p_i:
 * (Rf)(x) = sum_i p_i(x) f(tau_i(x)).
 */
class BranchSystem {
 public:
  BranchSystem(Grid grid, RealMap sigma, std::vector<Branch> branches, bool normalized, std::string name = "branch")
      : grid_(std::move(grid)), sigma_(std::move(sigma)), branches_(std::move(branches)), normalized_(normalized),
        name_(std::move(name)) {
    if (branches_.empty()) throw Error("branch system: no branches");
    validate();
  }

  const Grid& grid() const { return grid_; }
  const std::string& name() const { return name_; }
  bool normalized() const { return normalized_; }
  std::size_t branch_count() const { return branches_.size(); }
  const Branch& branch(std::size_t i) const { return branches_[i]; }
  double sigma(double x) const { return sigma_(x); }
  const RealMap& sigma_map() const { return sigma_; }

  double tau(std::size_t i, double x) const { return detail::admit(grid_, branches_[i].tau(x), "branch " + branches_[i].name, x); }
  double weight(std::size_t i, double x) const { return branches_[i].weight(x); }

  template <RealFunction F>
  double evaluate(const F& f, double x) const {
    double s = 0;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      const double p = branches_[i].weight(x);
      if (p != 0) s += p * f(tau(i, x));
    }
    return s;
  }

  // Row i of the cell kernel: where mass spread uniformly over cell i goes in one move.
  void kernel_row(std::size_t i, std::size_t subcells, std::span<double> row) const {
    const double a = grid_.cell_lower(i), w = grid_.width() / static_cast<double>(subcells);
    for (std::size_t q = 0; q < subcells; ++q) {
      const double lo = a + static_cast<double>(q) * w, hi = lo + w, mid = lo + 0.5 * w;
      for (std::size_t b = 0; b < branches_.size(); ++b) {
        const double p = branches_[b].weight(mid);
        if (p == 0) continue;
        double ta, tb;
        if (grid_.is_circle()) {
          ta = branches_[b].tau(lo);
          tb = branches_[b].tau(hi);
          if (tb < ta && ta - tb > 0.5) tb += 1.0;
        } else {
          ta = tau(b, lo);
          tb = tau(b, hi);
        }
        detail::spread(row, grid_, ta, tb, p / static_cast<double>(subcells));
      }
    }
  }

 private:
  void validate() const {
    for (std::size_t j = 0; j < grid_.n(); ++j) {
      const double x = grid_.node(j);
      double total = 0;
      for (std::size_t i = 0; i < branches_.size(); ++i) {
        const auto& b = branches_[i];
        const double t = b.tau(x);
        if (!std::isfinite(t)) throw DomainError(detail::at_point("branch " + b.name + " is undefined", x));
        const double y = tau(i, x);
        const double back = sigma_(y);
        const double err = grid_.is_circle() ? detail::circle_distance(back, x) : std::abs(back - x);
        if (!(err <= 1e-10)) throw DomainError(detail::at_point("sigma(tau) != identity for branch " + b.name, x));
        const double p = b.weight(x);
        if (!std::isfinite(p) || p < 0) throw NormalizationError(detail::at_point("weight of branch " + b.name + " is negative", x));
        total += p;
      }
      if (normalized_ && std::abs(total - 1.0) > 1e-12)
        throw NormalizationError(detail::at_point("branch weights do not sum to 1", x));
    }
  }

  Grid grid_;
  RealMap sigma_;
  std::vector<Branch> branches_;
  bool normalized_;
  std::string name_;
};

struct Control {
  std::size_t index = 0;
  double u = 0.5;
};

/// Control law nu = p (finite index) optionally times U(0,1).
struct ControlLaw {
  std::vector<double> index_probs;
  bool with_uniform = false;
};

/**
 * (R_F f)(x) = integral f(F(x, y)) dnu(y). The uniform component is integrated
 * with a Gauss-Legendre rule; the index is summed exactly.
 */
class ControlledSystem {
 public:
  using Map = std::function<double(double, Control)>;

  ControlledSystem(Grid grid, Map F, ControlLaw nu, bool affine_in_u, std::string name = "controlled",
                   std::size_t quad_nodes = 512)
      : grid_(std::move(grid)), F_(std::move(F)), nu_(std::move(nu)), affine_in_u_(affine_in_u), name_(std::move(name)) {
    if (nu_.index_probs.empty()) throw Error("controlled system: empty control set");
    double s = 0;
    for (double p : nu_.index_probs) {
      if (!(p >= 0)) throw NormalizationError("controlled system: negative control probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw NormalizationError("controlled system: control law does not sum to 1");
    cumulative_.resize(nu_.index_probs.size());
    std::partial_sum(nu_.index_probs.begin(), nu_.index_probs.end(), cumulative_.begin());
    if (nu_.with_uniform) rule_ = gauss_legendre(quad_nodes, 0.0, 1.0);
  }

  const Grid& grid() const { return grid_; }
  const std::string& name() const { return name_; }
  bool normalized() const { return true; }
  const ControlLaw& law() const { return nu_; }

  double move(double x, Control c) const {
    return detail::admit(grid_, F_(x, c), name_ + " control " + std::to_string(c.index), x);
  }

  template <RealFunction F>
  double evaluate(const F& f, double x) const {
    double s = 0;
    for (std::size_t i = 0; i < nu_.index_probs.size(); ++i) {
      const double p = nu_.index_probs[i];
      if (p == 0) continue;
      if (!nu_.with_uniform) {
        s += p * f(move(x, {i, 0.5}));
        continue;
      }
      double t = 0;
      for (std::size_t q = 0; q < rule_.nodes.size(); ++q) t += rule_.weights[q] * f(move(x, {i, rule_.nodes[q]}));
      s += p * t;
    }
    return s;
  }

  // Inverse-CDF draw of a control from two uniforms.
  Control draw(double v_index, double v_u) const {
    std::size_t i = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), v_index * cumulative_.back()) -
                                             cumulative_.begin());
    i = std::min(i, cumulative_.size() - 1);
    while (nu_.index_probs[i] == 0 && i > 0) --i;
    return {i, v_u};
  }

  void kernel_row(std::size_t i, std::size_t subcells, std::span<double> row) const {
    const double a = grid_.cell_lower(i), w = grid_.width() / static_cast<double>(subcells);
    const std::size_t useg = affine_in_u_ ? 1 : 64;
    for (std::size_t q = 0; q < subcells; ++q) {
      const double lo = a + static_cast<double>(q) * w, mid = lo + 0.5 * w;
      for (std::size_t c = 0; c < nu_.index_probs.size(); ++c) {
        const double p = nu_.index_probs[c] / static_cast<double>(subcells);
        if (p == 0) continue;
        if (!nu_.with_uniform) {
          detail::spread(row, grid_, move(lo, {c, 0.5}), move(lo + w, {c, 0.5}), p);
          continue;
        }
        for (std::size_t s = 0; s < useg; ++s) {
          const double u0 = static_cast<double>(s) / static_cast<double>(useg), u1 = static_cast<double>(s + 1) / static_cast<double>(useg);
          detail::spread(row, grid_, move(mid, {c, u0}), move(mid, {c, u1}), p / static_cast<double>(useg));
        }
      }
    }
  }

 private:
  Grid grid_;
  Map F_;
  ControlLaw nu_;
  bool affine_in_u_;
  std::string name_;
  QuadratureRule rule_;
  std::vector<double> cumulative_;
};

/// (Rf)(t) = (1/N) sum_k |m0((t+k)/N)|^2 f((t+k)/N) on the circle.
class CircleFilterOperator {
 public:
  CircleFilterOperator(Grid grid, WaveletFilter filter)
      : grid_(std::move(grid)), filter_(std::move(filter)), W_(filter_.modulus_squared()) {
    if (!grid_.is_circle()) throw Error("circle filter operator: grid must be a circle");
    if (grid_.n() % static_cast<std::size_t>(filter_.N()) != 0) throw Error("circle filter operator: grid size not divisible by N");
    for (std::size_t j = 0; j < grid_.n(); ++j)
      if (W_(grid_.node(j)) < -1e-12) throw Error("circle filter operator: |m0|^2 negative");
  }

  const Grid& grid() const { return grid_; }
  const WaveletFilter& filter() const { return filter_; }
  const CosinePolynomial& modulus_squared() const { return W_; }
  bool normalized() const { return filter_.normalized(); }
  int N() const { return filter_.N(); }

  template <RealFunction F>
  double evaluate(const F& f, double t) const {
    const double N = filter_.N();
    double s = 0;
    for (int k = 0; k < filter_.N(); ++k) {
      const double w = (grid_.wrap(t) + k) / N;
      s += W_(w) * f(w);
    }
    return s / N;
  }

  template <RealFunction F>
  double evaluate_adjoint(const F& f, double t) const {
    return W_(t) * f(grid_.wrap(filter_.N() * t));
  }

  // Max over nodes of |R1 - 1|.
  double normalization_residual() const {
    double m = 0;
    for (std::size_t j = 0; j < grid_.n(); ++j)
      m = std::max(m, std::abs(evaluate([](double) { return 1.0; }, grid_.node(j)) - 1.0));
    return m;
  }

  void kernel_row(std::size_t i, std::size_t subcells, std::span<double> row) const {
    const double a = grid_.cell_lower(i), w = grid_.width() / static_cast<double>(subcells);
    const double N = filter_.N();
    for (std::size_t q = 0; q < subcells; ++q) {
      const double lo = a + static_cast<double>(q) * w, mid = lo + 0.5 * w;
      for (int k = 0; k < filter_.N(); ++k) {
        const double p = W_((mid + k) / N) / N;
        detail::spread(row, grid_, (lo + k) / N, (lo + w + k) / N, p / static_cast<double>(subcells));
      }
    }
  }

 private:
  Grid grid_;
  WaveletFilter filter_;
  CosinePolynomial W_;
};

enum class GaussTail { ignore, integral_estimate };

/// (Rf)(x) = sum_{n>=1} (n+x)^{-2} f(1/(n+x)), truncated at K branches.
class GaussOperator {
 public:
  GaussOperator(Grid grid, long K, GaussTail tail = GaussTail::integral_estimate) : grid_(std::move(grid)), K_(K), tail_(tail) {
    if (K_ < 2) throw Error("gauss operator: truncation K must be >= 2");
    if (grid_.is_circle() || grid_.lower() != 0.0 || grid_.upper() != 1.0) throw Error("gauss operator: grid must be the interval (0,1)");
  }

  const Grid& grid() const { return grid_; }
  long K() const { return K_; }
  GaussTail tail() const { return tail_; }
  bool normalized() const { return false; }
  // sum_{n>K} (n+x)^{-2} <= 1/K.
  double tail_bound() const { return 1.0 / static_cast<double>(K_); }

  template <RealFunction F>
  double evaluate(const F& f, double x) const {
    double s = 0;
    for (long n = K_; n >= 1; --n) {
      const double y = static_cast<double>(n) + x;
      s += f(1.0 / y) / (y * y);
    }
    if (tail_ == GaussTail::integral_estimate) s += f(0.0) * boost::math::trigamma(static_cast<double>(K_ + 1) + x);
    return s;
  }

  // Exact overlaps: branch k sends cell i onto [1/(k+b), 1/(k+a)]; row i holds (1/width) |tau_k(cell i) cap cell j|.
  void kernel_row(std::size_t i, std::size_t /*subcells*/, std::span<double> row) const {
    const double a = grid_.cell_lower(i), b = grid_.cell_upper(i), w = grid_.width();
    for (long k = 1; k <= K_; ++k) {
      const double lo = 1.0 / (static_cast<double>(k) + b), hi = 1.0 / (static_cast<double>(k) + a);
      detail::spread(row, grid_, lo, hi, (hi - lo) / w);
    }
    if (tail_ == GaussTail::integral_estimate) {
      using boost::math::digamma;
      const double k1 = static_cast<double>(K_ + 1);
      const double mass = (digamma(k1 + b) - digamma(k1 + a)) / w;
      detail::spread(row, grid_, 0.0, 1.0 / (k1 + a), mass);
    }
  }

 private:
  Grid grid_;
  long K_;
  GaussTail tail_;
};

template <class Op>
concept TransferOperator = requires(const Op& op, std::size_t i, std::span<double> row) {
  { op.grid() } -> std::convertible_to<const Grid&>;
  { op.normalized() } -> std::convertible_to<bool>;
  op.kernel_row(i, i, row);
};

/// Applies op at every grid node.
template <class Op, RealFunction F>
GridFunction apply(const Op& op, const F& f, unsigned threads = 1) {
  const Grid& g = op.grid();
  std::vector<double> v(g.n());
  parallel_for(g.n(), threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) v[j] = op.evaluate(f, g.node(j));
  });
  return GridFunction(g, std::move(v));
}

template <class F>
GridFunction apply_branch(const BranchSystem& bs, const F& f, unsigned threads = 1) {
  return apply(bs, f, threads);
}
template <class F>
GridFunction apply_integral(const ControlledSystem& cs, const F& f, unsigned threads = 1) {
  return apply(cs, f, threads);
}
template <class F>
GridFunction apply_ruelle_circle(const CircleFilterOperator& op, const F& f, unsigned threads = 1) {
  return apply(op, f, threads);
}
template <class F>
GridFunction apply_ruelle_adjoint(const CircleFilterOperator& op, const F& f) {
  return GridFunction::sample(op.grid(), [&](double t) { return op.evaluate_adjoint(f, t); });
}
template <class F>
GridFunction apply_gauss(const GaussOperator& op, const F& f, unsigned threads = 1) {
  return apply(op, f, threads);
}

/**
 * Cell kernel K(i, j) = (1/|cell i|) integral over cell i of R(1_{cell j}):
 * for a Markov operator, the law of the next state from a point uniform in
 * cell i. K acts on cell-constant functions; its transpose moves masses.
 */
template <class Op>
Eigen::MatrixXd cell_kernel(const Op& op, std::size_t subcells = 8, unsigned threads = 1) {
  const std::size_t n = op.grid().n();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<std::vector<double>> rows(n);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> row(n);
    for (std::size_t i = b; i < e; ++i) {
      std::fill(row.begin(), row.end(), 0.0);
      op.kernel_row(i, subcells, row);
      for (std::size_t j = 0; j < n; ++j) K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
  });
  return K;
}

/// W = d(lambda R)/d lambda on cells.
struct RadonNikodymWeight {
  GridFunction W;
};

template <class Op>
RadonNikodymWeight radon_nikodym(const Op& op, const DiscreteMeasure& lambda, std::size_t subcells = 8, unsigned threads = 1) {
  require_same_grid(op.grid(), lambda.grid(), "radon_nikodym");
  if (!lambda.is_normalized()) throw NormalizationError("radon_nikodym: reference measure must be normalized");
  const auto K = cell_kernel(op, subcells, threads);
  const std::size_t n = lambda.grid().n();
  std::vector<double> W(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(lambda[j] > 0)) throw Error("radon_nikodym: cell " + std::to_string(j) + " has zero reference mass");
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += lambda[i] * K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    W[j] = s / lambda[j];
  }
  return {GridFunction(lambda.grid(), std::move(W))};
}

/// max over nodes of |R((f o sigma) g) - f R(g)|, with both inner functions sampled on the grid.
template <RealFunction F, RealFunction G>
double pullout_check(const BranchSystem& bs, const F& f, const G& g) {
  const Grid& grid = bs.grid();
  const auto fsg = GridFunction::sample(grid, [&](double x) { return f(bs.sigma(x)) * g(x); });
  const auto gg = GridFunction::sample(grid, g);
  const auto lhs = apply(bs, fsg);
  const auto rg = apply(bs, gg);
  double m = 0;
  for (std::size_t j = 0; j < grid.n(); ++j) m = std::max(m, std::abs(lhs[j] - f(grid.node(j)) * rg[j]));
  return m;
}

}  // namespace transop
