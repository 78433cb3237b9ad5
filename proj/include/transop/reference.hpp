#pragma once

// Closed-form laws used as references: arcsine, Gauss and uniform on [0,1].

#include <cmath>
#include <numbers>

#include "transop/grid.hpp"

namespace transop::reference {

inline double arcsine_density(double x) { return 1.0 / (std::numbers::pi * std::sqrt(x * (1.0 - x))); }
inline double arcsine_cdf(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return 2.0 / std::numbers::pi * std::asin(std::sqrt(x));
}
inline double arcsine_quantile(double u) {
  const double s = std::sin(0.5 * std::numbers::pi * u);
  return s * s;
}

inline double gauss_density(double x) { return 1.0 / (std::numbers::ln2 * (1.0 + x)); }
inline double gauss_cdf(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return std::log2(1.0 + x);
}
inline double gauss_quantile(double u) { return std::exp2(u) - 1.0; }

inline double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

inline DiscreteMeasure arcsine_measure(const Grid& g) { return DiscreteMeasure::from_cdf(g, arcsine_cdf); }
inline DiscreteMeasure gauss_measure(const Grid& g) { return DiscreteMeasure::from_cdf(g, gauss_cdf); }
inline DiscreteMeasure uniform_measure(const Grid& g) { return DiscreteMeasure::uniform(g); }

// L1 distance between the density views of two measures on the same grid.
inline double density_l1(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require_same_grid(a.grid(), b.grid(), "density_l1");
  double s = 0;
  for (std::size_t i = 0; i < a.grid().n(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace transop::reference
