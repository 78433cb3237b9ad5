#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "transop/chain.hpp"
#include "transop/error.hpp"
#include "transop/filter.hpp"
#include "transop/grid.hpp"
#include "transop/rng.hpp"

namespace transop {

/// Finite piece (t_0, ..., t_K) of a point of the N-solenoid; N t_{k+1} = t_k mod 1.
struct SolenoidPrefix {
  int N = 2;
  std::vector<double> angles;

  std::size_t size() const { return angles.size(); }
};

namespace detail {

inline double wrap01(double t) {
  double r = t - std::floor(t);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace detail

/// max_k circle distance between N t_{k+1} and t_k.
inline double prefix_defect(const SolenoidPrefix& p) {
  double d = 0;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) d = std::max(d, detail::circle_distance(detail::wrap01(p.N * p.angles[k + 1]), p.angles[k]));
  return d;
}

/// The transition probabilities (1/N) |m0(w)|^2 h(w) / h(t) over the preimages w = (t+j)/N.
template <RealFunction H>
std::vector<double> preimage_probabilities(const WaveletFilter& filter, const H& h, double t) {
  const auto W = filter.modulus_squared();
  const int N = filter.N();
  const double ht = h(t);
  if (!(ht > 0)) throw DomainError(detail::at_point("h must be positive", t));
  std::vector<double> p(static_cast<std::size_t>(N));
  double s = 0;
  for (int j = 0; j < N; ++j) {
    const double w = (t + j) / N;
    p[static_cast<std::size_t>(j)] = std::max(0.0, W(w)) * h(w) / (N * ht);
    s += p[static_cast<std::size_t>(j)];
  }
  if (std::abs(s - 1.0) > 1e-6) throw NormalizationError(detail::at_point("preimage probabilities sum to " + std::to_string(s) + "; h is not harmonic", t));
  return p;
}

template <RealFunction H>
SolenoidPrefix extend_prefix(SolenoidPrefix p, const WaveletFilter& filter, const H& h, Stream& s) {
  if (p.angles.empty()) throw Error("extend_prefix: empty prefix");
  if (p.N != filter.N()) throw Error("extend_prefix: prefix and filter disagree on N");
  const double t = p.angles.back();
  const auto probs = preimage_probabilities(filter, h, t);
  const std::size_t j = detail::pick(probs, s.uniform());
  p.angles.push_back((t + static_cast<double>(j)) / p.N);
  return p;
}

/// (t_0, t_1, ...) -> (N t_0 mod 1, t_0, t_1, ...).
inline SolenoidPrefix shift_hat(SolenoidPrefix p) {
  if (p.angles.empty()) throw Error("shift_hat: empty prefix");
  p.angles.insert(p.angles.begin(), detail::wrap01(p.N * p.angles.front()));
  return p;
}

inline SolenoidPrefix shift_inverse(SolenoidPrefix p) {
  if (p.size() < 2) throw Error("shift_inverse: need a prefix of length >= 2");
  p.angles.erase(p.angles.begin());
  return p;
}

/// (t, t/N, ..., t/N^K) mod 1.
inline SolenoidPrefix embed_line(int N, double t, int K) {
  if (N < 2 || K < 0) throw Error("embed_line: need N >= 2 and K >= 0");
  SolenoidPrefix p{N, {}};
  double x = t;
  for (int k = 0; k <= K; ++k) {
    p.angles.push_back(detail::wrap01(x));
    x /= N;
  }
  return p;
}

/// |m^(k)(t)|^2 = prod_{i<k} |m0(N^i t)|^2 sampled on a circle grid.
struct FilterProduct {
  WaveletFilter filter;
  int k;
  GridFunction values;
};

inline double filter_product_value(const CosinePolynomial& W, int N, int k, double t) {
  double v = 1;
  for (int i = 0; i < k; ++i) {
    v *= W(t);
    t = detail::wrap01(N * t);
  }
  return v;
}

inline FilterProduct filter_product(const WaveletFilter& filter, int k, const Grid& grid) {
  if (!grid.is_circle()) throw Error("filter_product: grid must be a circle");
  if (k < 0) throw Error("filter_product: k must be >= 0");
  const auto W = filter.modulus_squared();
  return {filter, k, GridFunction::sample(grid, [&](double t) { return std::max(0.0, filter_product_value(W, filter.N(), k, t)); })};
}

/// Law of pi_k for the chain started from h dt: density |m^(k)|^2 h, midpoint cell masses.
template <RealFunction H>
DiscreteMeasure pi_k_distribution(const WaveletFilter& filter, const H& h, int k, const Grid& grid) {
  const auto fp = filter_product(filter, k, grid);
  std::vector<double> w(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) w[i] = fp.values[i] * h(grid.node(i)) * grid.width();
  return DiscreteMeasure(grid, std::move(w), false);
}

/// (R^k f)(z) summed exactly over the N^k preimages of z.
template <class F>
auto ruelle_power_at(const CosinePolynomial& W, int N, int k, const F& f, double z) {
  using T = decltype(f(0.0));
  long count = 1;
  for (int i = 0; i < k; ++i) count *= N;
  T s{};
  for (long j = 0; j < count; ++j) {
    const double w = (z + static_cast<double>(j)) / static_cast<double>(count);
    s += filter_product_value(W, N, k, w) * f(w);
  }
  return s / static_cast<double>(count);
}

/// Point n / N^k of Z[1/N].
struct NAdic {
  long n;
  int k;
};

/**
 * L(n / N^k) = (R^k(e_n h))(z), e_n(t) = exp(2 pi i n t), and its Gram matrix
 * G_uv = L(x_u - x_v). Differences are brought to the common denominator
 * N^K, K the largest k in the set.
 */
template <RealFunction H>
class PositiveDefiniteFunction {
 public:
  PositiveDefiniteFunction(WaveletFilter filter, H h, double z, int max_k = 12)
      : filter_(std::move(filter)), h_(std::move(h)), W_(filter_.modulus_squared()), z_(z), max_k_(max_k) {}

  std::complex<double> operator()(long n, int k) const {
    if (k < 0 || k > max_k_) throw Error("pd_function: exponent k out of range");
    const double two_pi = 2.0 * std::numbers::pi;
    return ruelle_power_at(W_, filter_.N(), k,
                           [&](double t) { return std::polar(h_(t), two_pi * static_cast<double>(n) * t); }, z_);
  }

  Eigen::MatrixXcd gram(const std::vector<NAdic>& pts) const {
    int K = 0;
    for (const auto& p : pts) {
      if (p.k < 0) throw Error("pd_function: negative exponent");
      K = std::max(K, p.k);
    }
    std::vector<long> num(pts.size());
    for (std::size_t u = 0; u < pts.size(); ++u) {
      long scale = 1;
      for (int i = pts[u].k; i < K; ++i) scale *= filter_.N();
      num[u] = pts[u].n * scale;
      if (num[u] / scale != pts[u].n) throw Error("pd_function: numerator overflow after reduction to a common denominator");
    }
    const auto m = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXcd G(m, m);
    for (Eigen::Index u = 0; u < m; ++u)
      for (Eigen::Index v = 0; v < m; ++v) G(u, v) = (*this)(num[static_cast<std::size_t>(u)] - num[static_cast<std::size_t>(v)], K);
    return G;
  }

  // Smallest eigenvalue of the real 2m x 2m form [[Re, -Im], [Im, Re]] of G.
  static double min_eigenvalue(const Eigen::MatrixXcd& G) {
    const Eigen::Index m = G.rows();
    Eigen::MatrixXd R(2 * m, 2 * m);
    R << G.real(), -G.imag(), G.imag(), G.real();
    const Eigen::MatrixXd S = 0.5 * (R + R.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  // max |G - G^*|.
  static double hermitian_defect(const Eigen::MatrixXcd& G) { return (G - G.adjoint()).cwiseAbs().maxCoeff(); }

 private:
  WaveletFilter filter_;
  H h_;
  CosinePolynomial W_;
  double z_;
  int max_k_;
};

template <RealFunction H>
PositiveDefiniteFunction<H> pd_function(const WaveletFilter& filter, H h, double z) {
  return PositiveDefiniteFunction<H>(filter, std::move(h), z);
}

/// Random test set of m points n/N^k with |n| <= max_n, 0 <= k <= max_k.
inline std::vector<NAdic> random_nadic_set(std::size_t m, long max_n, int max_k, Stream& s) {
  std::vector<NAdic> pts(m);
  for (auto& p : pts) {
    p.n = static_cast<long>(std::floor(s.uniform() * static_cast<double>(2 * max_n + 1))) - max_n;
    p.k = static_cast<int>(std::floor(s.uniform() * (max_k + 1)));
  }
  return pts;
}

struct ScalingCheck {
  double norm_before = 0;
  double norm_after = 0;
  double z = 0;
};

/// E|psi|^2 versus E[(W o pi_0) |psi o sigma_hat|^2] over an ensemble of solenoid paths.
template <RealFunction W_t>
ScalingCheck apply_scaling_U(const PathEnsemble& pe, const RealMap& sigma, const PathFunctional& psi, const W_t& W, std::size_t m) {
  const auto q = quasi_invariance_check(
      pe, sigma, W,
      [&](std::span<const double> w) {
        const double v = psi(w);
        return v * v;
      },
      m);
  return {q.lhs, q.rhs, q.z};
}

/// Number of stored transitions with circle distance between sigma(x_{k+1}) and x_k above tol.
inline std::size_t solenoid_violations(const PathEnsemble& pe, const RealMap& sigma, bool circle, double tol = 1e-10) {
  std::size_t bad = 0;
  for (std::size_t p = 0; p < pe.n_paths; ++p)
    for (std::size_t k = 0; k < pe.n_steps; ++k) {
      const double a = sigma(pe.at(p, k + 1)), b = pe.at(p, k);
      const double d = circle ? detail::circle_distance(a, b) : std::abs(a - b);
      if (!(d <= tol)) ++bad;
    }
  return bad;
}

}  // namespace transop
