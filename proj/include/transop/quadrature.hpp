#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "transop/error.hpp"

namespace transop {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes mapped to (a, b); Newton on P_n.
inline QuadratureRule gauss_legendre(std::size_t n, double a = 0.0, double b = 1.0) {
  if (n < 1) throw Error("gauss_legendre: need n >= 1");
  QuadratureRule q{std::vector<double>(n), std::vector<double>(n)};
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) - 1.0) * x * p1 - (static_cast<double>(j) - 1.0) * p2) / static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = mid - half * x;
    q.nodes[n - 1 - i] = mid + half * x;
    q.weights[i] = q.weights[n - 1 - i] = half * w;
  }
  return q;
}

}  // namespace transop
