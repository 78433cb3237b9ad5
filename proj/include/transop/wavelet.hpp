#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "transop/error.hpp"
#include "transop/filter.hpp"
#include "transop/grid.hpp"

namespace transop {

/// phi sampled at x = i N^{-J}, i = 0 .. L N^J, on its support [0, L].
struct ScalingFunction {
  int N = 2;
  int J = 0;
  long support = 1;  // L
  std::vector<double> samples;
  int iterations = 0;
  double last_change = 0;  // sup distance between the final two iterates

  long scale() const {
    long s = 1;
    for (int j = 0; j < J; ++j) s *= N;
    return s;
  }
  double step() const { return 1.0 / static_cast<double>(scale()); }
  // Sample by integer index on the N^{-J} lattice; zero off the support.
  double at_index(long i) const { return i >= 0 && i < static_cast<long>(samples.size()) ? samples[static_cast<std::size_t>(i)] : 0.0; }
  double integral() const {
    double s = 0;
    for (double v : samples) s += v;
    return s * step();
  }
};

/// Iterates phi <- sqrt(N) sum_k a_k phi(N . - k) from the unit box.
inline ScalingFunction cascade(const WaveletFilter& filter, int J, int iters) {
  if (!filter.normalized()) throw Error("cascade: filter must be normalized");
  if (iters < 1 || J < 0) throw Error("cascade: need iters >= 1 and J >= 0");
  ScalingFunction phi{filter.N(), J, static_cast<long>(filter.support_width()), {}, 0, 0};
  const long S = phi.scale();
  const long len = phi.support * S + 1;
  if (len > (1L << 26)) throw Error("cascade: resolution too fine");
  phi.samples.assign(static_cast<std::size_t>(len), 0.0);
  for (long i = 0; i < std::min(S, len); ++i) phi.samples[static_cast<std::size_t>(i)] = 1.0;
  const double rN = std::sqrt(static_cast<double>(filter.N()));
  std::vector<double> next(phi.samples.size());
  for (int it = 1; it <= iters; ++it) {
    double change = 0, sup = 0;
    for (long i = 0; i < len; ++i) {
      double s = 0;
      for (std::size_t k = 0; k < filter.coeffs().size(); ++k)
        s += filter.coeffs()[k] * phi.at_index(i * filter.N() - static_cast<long>(k) * S);
      next[static_cast<std::size_t>(i)] = rN * s;
      change = std::max(change, std::abs(next[static_cast<std::size_t>(i)] - phi.samples[static_cast<std::size_t>(i)]));
      sup = std::max(sup, std::abs(next[static_cast<std::size_t>(i)]));
    }
    if (!(sup <= 1e6)) throw ConvergenceError("cascade diverged (sup norm above 1e6)");
    phi.samples.swap(next);
    phi.iterations = it;
    phi.last_change = change;
  }
  return phi;
}

/**
 * (2m+1)^{-1/2} times the indicator of [0, 2m+1), N = 2. It is an exact fixed
 * point of the cascade for WaveletFilter::stretched_haar(m).
 */
inline ScalingFunction box_scaling_function(int m, int J) {
  if (m < 0 || J < 0) throw Error("box_scaling_function: need m >= 0 and J >= 0");
  ScalingFunction phi{2, J, 2L * m + 1, {}, 0, 0};
  const long S = phi.scale();
  phi.samples.assign(static_cast<std::size_t>(phi.support * S + 1), 0.0);
  const double v = 1.0 / std::sqrt(static_cast<double>(phi.support));
  for (long i = 0; i < phi.support * S; ++i) phi.samples[static_cast<std::size_t>(i)] = v;
  return phi;
}

/// max over samples of |sqrt(N) sum_k a_k phi(N x - k) - phi(x)|.
inline double cascade_residual(const WaveletFilter& filter, const ScalingFunction& phi) {
  if (filter.N() != phi.N) throw Error("cascade_residual: N mismatch");
  const long S = phi.scale();
  const double rN = std::sqrt(static_cast<double>(filter.N()));
  double r = 0;
  for (long i = 0; i < static_cast<long>(phi.samples.size()); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < filter.coeffs().size(); ++k) s += filter.coeffs()[k] * phi.at_index(i * filter.N() - static_cast<long>(k) * S);
    r = std::max(r, std::abs(rN * s - phi.at_index(i)));
  }
  return r;
}

/// r_n = integral phi(x+n) phi(x) dx for 0 <= n <= L, and h(t) = sum_n r_n e^{2 pi i n t}.
struct HarmonicSequence {
  std::vector<double> r;
  CosinePolynomial h;

  double autocorr(long n) const { return h.coefficient(n); }
  GridFunction values(const Grid& circle) const { return GridFunction::sample(circle, h); }
};

// Rectangle sums on the lattice; equal to the trapezoid rule when phi vanishes at both ends.
inline HarmonicSequence autocorrelation(const ScalingFunction& phi) {
  const long S = phi.scale();
  std::vector<double> r(static_cast<std::size_t>(phi.support + 1), 0.0);
  for (long n = 0; n <= phi.support; ++n) {
    double s = 0;
    for (long i = 0; i < static_cast<long>(phi.samples.size()); ++i) s += phi.at_index(i + n * S) * phi.samples[static_cast<std::size_t>(i)];
    r[static_cast<std::size_t>(n)] = s * phi.step();
  }
  return {r, CosinePolynomial(r)};
}

/// max over `nodes` circle points of |Rh - h|, Rh computed in coefficient space.
inline double verify_ruelle_fixed(const WaveletFilter& filter, const CosinePolynomial& h, std::size_t nodes = 1024) {
  const auto Rh = ruelle_coefficients(filter, h);
  CosinePolynomial diff = Rh;
  std::vector<double> neg(h.coeffs());
  for (double& c : neg) c = -c;
  diff += CosinePolynomial(neg);
  const Grid g = Grid::circle(nodes);
  double m = 0;
  for (std::size_t j = 0; j < nodes; ++j) m = std::max(m, std::abs(diff(g.node(j))));
  return m;
}

/// (S xi)_n = sum_j a_{n - jN} xi_j on the index window [-size, size].
inline Eigen::MatrixXd slanted_toeplitz(const WaveletFilter& filter, long size) {
  if (size < static_cast<long>(filter.support_width())) throw Error("slanted_toeplitz: window smaller than the filter support");
  const long d = 2 * size + 1;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (long n = -size; n <= size; ++n)
    for (long j = -size; j <= size; ++j) S(n + size, j + size) = filter.coeff(n - j * filter.N());
  return S;
}

/// Finitely supported integer sequence.
using Sequence = std::map<long, double>;

inline Sequence apply_slanted(const WaveletFilter& filter, const Sequence& xi) {
  Sequence out;
  for (const auto& [j, v] : xi)
    for (long k = 0; k <= static_cast<long>(filter.support_width()); ++k) out[k + j * filter.N()] += filter.coeff(k) * v;
  return out;
}

/**
 * sup over x of |K(S xi)(x) - (U K xi)(x)|, (K xi)(x) = sum_n xi_n phi(x - n),
 * (U g)(x) = N^{-1/2} g(x/N). x runs over the lattice of step N^{-(J-1)}
 * covering both supports, so every phi argument is a stored sample.
 */
inline double intertwine_check(const WaveletFilter& filter, const ScalingFunction& phi, const Sequence& xi) {
  if (filter.N() != phi.N) throw Error("intertwine_check: N mismatch");
  if (phi.J < 1) throw Error("intertwine_check: need J >= 1");
  if (xi.empty()) return 0.0;
  const long N = filter.N(), S = phi.scale(), Sc = S / N;  // x = i / Sc
  const Sequence Sxi = apply_slanted(filter, xi);
  const long jmin = xi.begin()->first, jmax = xi.rbegin()->first;
  const long lo = (N * jmin - 1) * Sc, hi = (N * (jmax + phi.support) + 1) * Sc;
  const double rN = std::sqrt(static_cast<double>(N));
  double m = 0;
  for (long i = lo; i <= hi; ++i) {
    double lhs = 0, rhs = 0;
    for (const auto& [n, v] : Sxi) lhs += v * phi.at_index(i * N - n * S);
    for (const auto& [j, v] : xi) rhs += v * phi.at_index(i - j * S);
    m = std::max(m, std::abs(lhs - rhs / rN));
  }
  return m;
}

}  // namespace transop
