#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "transop/error.hpp"
#include "transop/rng.hpp"

namespace transop {

enum class DomainKind { interval, circle };

/// Uniform cell grid on an interval or a circle; nodes sit at cell midpoints.
class Grid {
 public:
  Grid(DomainKind kind, double lower, double upper, std::size_t n) : kind_(kind), lower_(lower), upper_(upper), n_(n) {
    if (!(lower < upper)) throw Error("grid: lower must be < upper");
    if (n < 2) throw Error("grid: need at least 2 cells");
  }

  static Grid interval(double lower, double upper, std::size_t n) { return Grid(DomainKind::interval, lower, upper, n); }
  static Grid unit_interval(std::size_t n) { return interval(0.0, 1.0, n); }
  static Grid circle(std::size_t n) { return Grid(DomainKind::circle, 0.0, 1.0, n); }

  DomainKind kind() const { return kind_; }
  bool is_circle() const { return kind_ == DomainKind::circle; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double length() const { return upper_ - lower_; }
  std::size_t n() const { return n_; }
  double width() const { return length() / static_cast<double>(n_); }

  double node(std::size_t i) const { return lower_ + (static_cast<double>(i) + 0.5) * width(); }
  double cell_lower(std::size_t i) const { return lower_ + static_cast<double>(i) * width(); }
  double cell_upper(std::size_t i) const { return lower_ + static_cast<double>(i + 1) * width(); }

  std::vector<double> nodes() const {
    std::vector<double> v(n_);
    for (std::size_t i = 0; i < n_; ++i) v[i] = node(i);
    return v;
  }

  // Reduces a circle coordinate into [lower, upper); identity on intervals.
  double wrap(double x) const {
    if (!is_circle()) return x;
    double r = std::fmod(x - lower_, length());
    if (r < 0) r += length();
    if (r >= length()) r = 0.0;
    return lower_ + r;
  }

  bool contains(double x) const { return is_circle() || (x >= lower_ && x <= upper_); }

  // Index of the cell containing x (the upper end of an interval belongs to the last cell).
  std::size_t locate(double x) const {
    x = wrap(x);
    const double s = (x - lower_) / width();
    if (!(s > 0)) return 0;
    const auto i = static_cast<std::size_t>(s);
    return std::min(i, n_ - 1);
  }

  bool operator==(const Grid& o) const {
    return kind_ == o.kind_ && lower_ == o.lower_ && upper_ == o.upper_ && n_ == o.n_;
  }

  std::string describe() const {
    std::ostringstream os;
    os << (is_circle() ? "circle" : "interval") << "[" << lower_ << "," << upper_ << "]/" << n_;
    return os.str();
  }

 private:
  DomainKind kind_;
  double lower_, upper_;
  std::size_t n_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!(a == b)) throw GridMismatch(std::string(where) + ": incompatible grids " + a.describe() + " vs " + b.describe());
}

template <class F>
concept RealFunction = std::invocable<const F&, double> && std::convertible_to<std::invoke_result_t<const F&, double>, double>;

/**
 * Real function sampled at the midpoints of a grid.
 *
 * Off-node evaluation interpolates linearly, wraps around on circles and
 * extrapolates linearly past the outermost nodes of an interval. The
 * extrapolated value is cut to zero when it would change sign relative to the
 * end node, so nonnegative data stays nonnegative.
 */
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.n()) throw Error("grid function: value count does not match grid");
    for (double v : values_)
      if (!std::isfinite(v)) throw Error("grid function: non-finite value");
  }

  template <RealFunction F>
  static GridFunction sample(const Grid& grid, const F& f) {
    std::vector<double> v(grid.n());
    for (std::size_t i = 0; i < grid.n(); ++i) v[i] = f(grid.node(i));
    return GridFunction(grid, std::move(v));
  }

  static GridFunction constant(const Grid& grid, double c) { return GridFunction(grid, std::vector<double>(grid.n(), c)); }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double operator()(double x) const {
    const std::size_t n = grid_.n();
    const double w = grid_.width();
    if (grid_.is_circle()) {
      const double s = (grid_.wrap(x) - grid_.lower()) / w - 0.5;
      double fl = std::floor(s);
      const double t = s - fl;
      long i0 = static_cast<long>(fl);
      const long nn = static_cast<long>(n);
      i0 = ((i0 % nn) + nn) % nn;
      const long i1 = (i0 + 1) % nn;
      return (1.0 - t) * values_[static_cast<std::size_t>(i0)] + t * values_[static_cast<std::size_t>(i1)];
    }
    const double s = (x - grid_.lower()) / w - 0.5;
    if (s <= 0.0) return extrapolate(values_[0], values_[1], -s);
    if (s >= static_cast<double>(n - 1)) return extrapolate(values_[n - 1], values_[n - 2], s - static_cast<double>(n - 1));
    const auto i0 = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(i0);
    return (1.0 - t) * values_[i0] + t * values_[i0 + 1];
  }

  double max_abs() const {
    double m = 0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  // Linear continuation past the end node at distance d (in cells).
  static double extrapolate(double end, double inner, double d) {
    const double v = end + d * (end - inner);
    if ((end > 0 && v < 0) || (end < 0 && v > 0)) return 0.0;
    return v;
  }

  Grid grid_;
  std::vector<double> values_;
};

inline GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid(), "product");
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return GridFunction(a.grid(), std::move(v));
}

inline double max_abs_difference(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a.grid(), b.grid(), "difference");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Nonnegative cell masses; the density view divides by the cell width.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Grid grid, std::vector<double> weights, bool normalized = true)
      : grid_(std::move(grid)), weights_(std::move(weights)), normalized_(normalized) {
    if (weights_.size() != grid_.n()) throw Error("measure: weight count does not match grid");
    for (double& w : weights_) {
      if (!std::isfinite(w)) throw Error("measure: non-finite weight");
      if (w < 0) {
        if (w < -1e-14) throw Error("measure: negative weight");
        w = 0;
      }
    }
    if (normalized_ && std::abs(total() - 1.0) > 1e-12)
      throw NormalizationError("measure flagged normalized but total mass is " + std::to_string(total()));
  }

  static DiscreteMeasure uniform(const Grid& grid) {
    return DiscreteMeasure(grid, std::vector<double>(grid.n(), 1.0 / static_cast<double>(grid.n())));
  }

  static DiscreteMeasure point_mass(const Grid& grid, double x) {
    std::vector<double> w(grid.n(), 0.0);
    w[grid.locate(x)] = 1.0;
    return DiscreteMeasure(grid, std::move(w));
  }

  // Cell masses from an exact cumulative distribution function.
  template <RealFunction F>
  static DiscreteMeasure from_cdf(const Grid& grid, const F& cdf) {
    std::vector<double> w(grid.n());
    double prev = cdf(grid.lower());
    for (std::size_t i = 0; i < grid.n(); ++i) {
      const double next = i + 1 == grid.n() ? cdf(grid.upper()) : cdf(grid.cell_upper(i));
      w[i] = std::max(0.0, next - prev);
      prev = next;
    }
    return DiscreteMeasure(grid, std::move(w), false).normalized();
  }

  // Nonnegative vector rescaled to unit mass.
  static DiscreteMeasure from_weights(const Grid& grid, std::vector<double> w) {
    return DiscreteMeasure(grid, std::move(w), false).normalized();
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  bool is_normalized() const { return normalized_; }

  double total() const {
    // Pairwise sum keeps the 1e-12 normalization check meaningful at large n.
    return pairwise_sum(weights_.data(), weights_.size());
  }

  DiscreteMeasure normalized() const {
    const double t = total();
    if (!(t > 0)) throw NormalizationError("measure: zero total mass");
    std::vector<double> w(weights_);
    for (double& x : w) x /= t;
    return DiscreteMeasure(grid_, std::move(w), true);
  }

  std::vector<double> density() const {
    std::vector<double> d(weights_);
    for (double& x : d) x /= grid_.width();
    return d;
  }

  GridFunction density_function() const { return GridFunction(grid_, density()); }

  // CDF at the n+1 cell boundaries.
  std::vector<double> cdf_at_boundaries() const {
    std::vector<double> c(grid_.n() + 1, 0.0);
    for (std::size_t i = 0; i < grid_.n(); ++i) c[i + 1] = c[i] + weights_[i];
    return c;
  }

  double moment(int k) const {
    double s = 0;
    for (std::size_t i = 0; i < grid_.n(); ++i) s += weights_[i] * std::pow(grid_.node(i), k);
    return s / total();
  }

  double mean() const { return moment(1); }

  double variance() const {
    const double m = mean();
    double s = 0;
    for (std::size_t i = 0; i < grid_.n(); ++i) {
      const double d = grid_.node(i) - m;
      s += weights_[i] * d * d;
    }
    return s / total();
  }

  static double pairwise_sum(const double* p, std::size_t n) {
    if (n <= 16) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += p[i];
      return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(p, h) + pairwise_sum(p + h, n - h);
  }

 private:
  Grid grid_;
  std::vector<double> weights_;
  bool normalized_;
};

/// Realized draws of a random variable together with the stream they came from.
struct EmpiricalSample {
  std::vector<double> points;
  SeedInfo seed_info{};
};

template <RealFunction F>
double integrate(const F& f, const DiscreteMeasure& mu) {
  double s = 0;
  for (std::size_t i = 0; i < mu.grid().n(); ++i) s += f(mu.grid().node(i)) * mu[i];
  return s;
}

inline double integrate(const GridFunction& f, const DiscreteMeasure& mu) {
  require_same_grid(f.grid(), mu.grid(), "integrate");
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * mu[i];
  return s;
}

namespace detail {

// Exact integral over one cell of |a + (b - a) s|, s in [0,1], times the cell width.
inline double abs_linear_integral(double a, double b, double width) {
  if ((a >= 0 && b >= 0) || (a <= 0 && b <= 0)) return 0.5 * width * (std::abs(a) + std::abs(b));
  return 0.5 * width * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

}  // namespace detail

/**
 * W1 distance: integral of |CDF_mu - CDF_nu| with mass spread uniformly in each
 * cell (the CDFs are then piecewise linear and the integral is exact). On a
 * circle the CDF difference is first shifted by its optimal constant.
 */
inline double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_grid(mu.grid(), nu.grid(), "wasserstein1");
  if (!mu.is_normalized() || !nu.is_normalized()) throw NormalizationError("wasserstein1: inputs must be normalized");
  const auto& g = mu.grid();
  const std::size_t n = g.n();
  std::vector<double> d(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i + 1] = d[i] + (mu[i] - nu[i]);
  double shift = 0;
  if (g.is_circle()) {
    // Weighted median of the boundary values minimizes the L1 norm.
    std::vector<double> s(d.begin(), d.end() - 1);
    std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
    shift = s[s.size() / 2];
  }
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) total += detail::abs_linear_integral(d[i] - shift, d[i + 1] - shift, g.width());
  return total;
}

inline DiscreteMeasure histogram(const EmpiricalSample& s, const Grid& grid) {
  if (s.points.empty()) throw Error("histogram: empty sample");
  std::vector<double> w(grid.n(), 0.0);
  for (double x : s.points) {
    if (!grid.contains(x)) throw DomainError("histogram: point outside grid domain");
    w[grid.locate(x)] += 1.0;
  }
  for (double& x : w) x /= static_cast<double>(s.points.size());
  return DiscreteMeasure::from_weights(grid, std::move(w));
}

/// Sup over cell boundaries of |empirical CDF - model CDF|.
inline double ks_distance(const EmpiricalSample& s, const DiscreteMeasure& mu) {
  if (s.points.empty()) throw Error("ks_distance: empty sample");
  const auto& g = mu.grid();
  std::vector<double> pts;
  pts.reserve(s.points.size());
  for (double x : s.points) {
    if (!g.contains(x)) throw DomainError("ks_distance: point outside the measure's domain");
    pts.push_back(g.wrap(x));
  }
  std::sort(pts.begin(), pts.end());
  const auto cdf = mu.cdf_at_boundaries();
  const double total = cdf.back();
  const double m = static_cast<double>(pts.size());
  double worst = 0;
  for (std::size_t i = 1; i <= g.n(); ++i) {
    const double b = i == g.n() ? g.upper() : g.cell_lower(i);
    const auto cnt = static_cast<double>(std::upper_bound(pts.begin(), pts.end(), b) - pts.begin());
    worst = std::max(worst, std::abs(cnt / m - cdf[i] / total));
  }
  return worst;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double worst = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    worst = std::max(worst, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return worst;
}

struct CharFunctionValue {
  double value;
  double log_tail_bound;  // bound on |log| error from dropping factors k > K
};

/// prod_{k=1..K} cos(a^k t), the characteristic function of sum_k omega_k a^k.
inline CharFunctionValue char_function_bernoulli(double a, double t, int K) {
  if (!(a > 0 && a < 1)) throw Error("char_function_bernoulli: need 0 < a < 1");
  if (K < 1) throw Error("char_function_bernoulli: need K >= 1");
  double p = 1, ak = 1;
  for (int k = 1; k <= K; ++k) {
    ak *= a;
    p *= std::cos(ak * t);
  }
  // sum_{k>K} (a^k t)^2 / 2 = (a^{K+1} t)^2 / (2 (1 - a^2))
  const double next = ak * a * t;
  return {p, next * next / (2.0 * (1.0 - a * a))};
}

}  // namespace transop
