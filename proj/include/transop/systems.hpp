#pragma once

// Built-in systems.

#include <cmath>
#include <string>

#include "transop/filter.hpp"
#include "transop/invariant.hpp"
#include "transop/transfer.hpp"

namespace transop::systems {

inline RealMap constant(double c) {
  return [c](double) { return c; };
}

/// sigma(x) = 2x mod 1 with inverse branches x/2 and (x+1)/2.
inline BranchSystem doubling(std::size_t n) {
  return BranchSystem(
      Grid::unit_interval(n), [](double x) { return x < 0.5 ? 2 * x : 2 * x - 1; },
      {{[](double x) { return 0.5 * x; }, constant(0.5), "x/2"}, {[](double x) { return 0.5 * (x + 1); }, constant(0.5), "(x+1)/2"}},
      true, "doubling");
}

/// sigma(x) = 4x(1-x), tau_pm(x) = (1 pm sqrt(1-x))/2, equal weights.
inline BranchSystem logistic(std::size_t n) {
  return BranchSystem(
      Grid::unit_interval(n), [](double x) { return 4 * x * (1 - x); },
      {{[](double x) { return 0.5 * (1 + std::sqrt(std::max(0.0, 1 - x))); }, constant(0.5), "tau+"},
       {[](double x) { return 0.5 * (1 - std::sqrt(std::max(0.0, 1 - x))); }, constant(0.5), "tau-"}},
      true, "logistic");
}

inline double logistic_map(double x) { return 4 * x * (1 - x); }

/// Piecewise-linear sigma^(u) with inverse branches ux and u + (1-u)x, equal weights.
inline BranchSystem parametric(double u, std::size_t n) {
  if (!(u > 0 && u < 1)) throw Error("parametric system: need 0 < u < 1");
  return BranchSystem(
      Grid::unit_interval(n), [u](double x) { return x < u ? x / u : (x - u) / (1 - u); },
      {{[u](double x) { return u * x; }, constant(0.5), "ux"}, {[u](double x) { return u + (1 - u) * x; }, constant(0.5), "u+(1-u)x"}},
      true, "parametric-" + std::to_string(u));
}

/// Closed-form d(lambda R)/d lambda for the parametric system.
inline double parametric_weight(double u, double x) { return x < u ? 1.0 / (2 * u) : 1.0 / (2 * (1 - u)); }

inline BranchSystem identity(std::size_t n) {
  return BranchSystem(
      Grid::unit_interval(n), [](double x) { return x; }, {{[](double x) { return x; }, constant(1.0), "id"}}, true, "identity");
}

/// F(x, (i, u)) = u x for i = 0 and u + (1-u) x for i = 1; i ~ (1/2, 1/2), u ~ U(0,1).
inline ControlledSystem random_control(std::size_t n, std::size_t quad_nodes = 512) {
  return ControlledSystem(
      Grid::unit_interval(n), [](double x, Control c) { return c.index == 0 ? c.u * x : c.u + (1 - c.u) * x; },
      ControlLaw{{0.5, 0.5}, true}, true, "random-control", quad_nodes);
}

/// Closed form of the random-control operator: ((1/x) int_0^x f + (1/(1-x)) int_x^1 f) / 2.
template <class Antiderivative>
double random_control_closed_form(const Antiderivative& Fint, double x) {
  return 0.5 * ((Fint(x) - Fint(0.0)) / x + (Fint(1.0) - Fint(x)) / (1 - x));
}

inline GaussOperator gauss(std::size_t n, long K = 10000, GaussTail tail = GaussTail::integral_estimate) {
  return GaussOperator(Grid::unit_interval(n), K, tail);
}

inline CircleFilterOperator circle(const WaveletFilter& f, std::size_t n) { return CircleFilterOperator(Grid::circle(n), f); }

/**
 * Circle branch system with sigma(t) = Nt mod 1 and the normalized weights
 * p_k(t) = |m0(w)|^2 h(w) / (N h(t)), w = (t+k)/N. Requires Rh = h to 1e-10 at
 * the grid nodes; the weights are then divided by their computed sum instead of
 * N h(t), which stays accurate where h is near a zero.
 */
template <RealFunction H>
BranchSystem circle_chain(const WaveletFilter& filter, const H& h, std::size_t n) {
  const int N = filter.N();
  const auto W = filter.modulus_squared();
  auto raw = [N, W, h](double t, int k) {
    const double w = (t + k) / N;
    return std::max(0.0, W(w)) * h(w);
  };
  auto total = [N, raw](double t) {
    double s = 0;
    for (int j = 0; j < N; ++j) s += raw(t, j);
    return s;
  };
  const Grid g = Grid::circle(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = g.node(i);
    if (!(std::abs(total(t) / N - h(t)) <= 1e-10)) throw NormalizationError(detail::at_point("circle chain: h is not harmonic", t));
  }
  std::vector<Branch> br;
  for (int k = 0; k < N; ++k) {
    br.push_back({[k, N](double t) { return (t + k) / N; },
                  [k, raw, total](double t) {
                    const double s = total(t);
                    return s > 0 ? raw(t, k) / s : 0.0;
                  },
                  "(t+" + std::to_string(k) + ")/N"});
  }
  return BranchSystem(
      g,
      [N](double t) {
        const double y = std::fmod(N * t, 1.0);
        return y < 0 ? y + 1 : y;
      },
      std::move(br), true, "circle-" + filter.name());
}

inline AffineIFS halving() { return AffineIFS({{0.5, 0.0}, {0.5, 0.5}}, {0.5, 0.5}, "halving"); }
inline AffineIFS cantor() { return AffineIFS({{1.0 / 3, 0.0}, {1.0 / 3, 2.0 / 3}}, {0.5, 0.5}, "cantor"); }

/// x -> a(x + 1) or a(x - 1); the invariant law is that of sum_k omega_k a^k.
inline AffineIFS bernoulli(double a) {
  if (!(a > 0 && a < 1)) throw Error("bernoulli: need 0 < a < 1");
  return AffineIFS({{a, a}, {a, -a}}, {0.5, 0.5}, "bernoulli-" + std::to_string(a));
}

inline double bernoulli_radius(double a) { return a / (1 - a); }

}  // namespace transop::systems
