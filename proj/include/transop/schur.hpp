#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "transop/error.hpp"
#include "transop/rng.hpp"

namespace transop {

using cplx = std::complex<double>;
using Poly = std::vector<cplx>;  // coefficient of z^k at index k

namespace detail {

inline cplx horner(const Poly& p, cplx z) {
  cplx s = 0;
  for (std::size_t k = p.size(); k-- > 0;) s = s * z + p[k];
  return s;
}

inline void trim(Poly& p, double rel = 1e-13) {
  double m = 0;
  for (const auto& c : p) m = std::max(m, std::abs(c));
  while (p.size() > 1 && std::abs(p.back()) <= rel * m) p.pop_back();
  if (p.empty()) p.push_back(0.0);
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Poly poly_axpy(const Poly& a, cplx c, const Poly& b) {  // a + c b
  Poly out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += c * b[i];
  return out;
}

}  // namespace detail

/// Schur parameters rho_0, rho_1, ...; `terminated` means the last one is unimodular.
struct SchurParams {
  std::vector<cplx> params;
  bool terminated = false;
  double terminal_defect = 0;  // | |rho_last| - 1 | before normalization
};

/**
 * Function analytic on the disk, either rational p/q (coefficient arrays) or a
 * black-box callable.
 */
class SchurFunction {
 public:
  static SchurFunction rational(Poly num, Poly den) {
    detail::trim(num);
    detail::trim(den);
    if (std::abs(detail::horner(den, 0.0)) == 0.0) throw DomainError("schur function: denominator vanishes at 0");
    SchurFunction s;
    s.num_ = std::move(num);
    s.den_ = std::move(den);
    return s;
  }

  static SchurFunction constant(cplx c) { return rational({c}, {1.0}); }

  static SchurFunction callable(std::function<cplx(cplx)> f) {
    SchurFunction s;
    s.fn_ = std::make_shared<std::function<cplx(cplx)>>(std::move(f));
    return s;
  }

  bool is_rational() const { return fn_ == nullptr; }
  const Poly& numerator() const { return num_; }
  const Poly& denominator() const { return den_; }

  cplx operator()(cplx z) const {
    if (fn_) return (*fn_)(z);
    const cplx q = detail::horner(den_, z);
    if (q == 0.0) throw DomainError("schur function: pole");
    return detail::horner(num_, z) / q;
  }

  cplx at_zero() const {
    if (fn_) return (*fn_)(0.0);
    return num_[0] / den_[0];
  }

 private:
  Poly num_{0.0}, den_{1.0};
  std::shared_ptr<const std::function<cplx(cplx)>> fn_;
};

namespace detail {

// (s(z) - rho) / (z (1 - conj(rho) s(z))) for a black box with s(0) = rho.
inline SchurFunction divided_callable(const SchurFunction& s, cplx rho) {
  return SchurFunction::callable([s, rho](cplx z) -> cplx {
    auto g = [&](cplx w) {
      const cplx v = s(w);
      const cplx d = w * (1.0 - std::conj(rho) * v);
      if (d == 0.0) throw DomainError("schur step: zero denominator");
      return (v - rho) / d;
    };
    if (std::abs(z) >= 0.05) return g(z);
    // Near the removable singularity: discrete Cauchy integral over |w| = 0.9.
    constexpr int M = 256;
    constexpr double r = 0.9;
    cplx acc = 0;
    for (int k = 0; k < M; ++k) {
      const cplx w = std::polar(r, 2.0 * std::numbers::pi * k / M);
      acc += g(w) * w / (w - z);
    }
    return acc / static_cast<double>(M);
  });
}

}  // namespace detail

struct SchurStep {
  cplx rho;
  std::optional<SchurFunction> next;  // empty on termination
  bool terminated = false;
  double terminal_defect = 0;
};

inline constexpr double kSchurTerminal = 1e-8;

/// rho = s(0); next(z) = (s(z) - rho) / (z (1 - conj(rho) s(z))). |rho| >= 1 - 1e-8 terminates.
inline SchurStep schur_step(const SchurFunction& s) {
  const cplx rho = s.at_zero();
  if (!std::isfinite(rho.real()) || !std::isfinite(rho.imag())) throw DomainError("schur step: s(0) is not finite");
  if (std::abs(rho) >= 1.0 - kSchurTerminal) {
    const double a = std::abs(rho);
    return {rho / a, std::nullopt, true, std::abs(a - 1.0)};
  }
  if (!s.is_rational()) return {rho, detail::divided_callable(s, rho), false, 0};
  Poly p = detail::poly_axpy(s.numerator(), -rho, s.denominator());
  double scale = 0;
  for (const auto& c : s.numerator()) scale = std::max(scale, std::abs(c));
  for (const auto& c : s.denominator()) scale = std::max(scale, std::abs(c));
  if (std::abs(p[0]) > 1e-10 * scale) throw Error("schur step: constant term does not cancel");
  p.erase(p.begin());
  if (p.empty()) p.push_back(0.0);
  Poly q = detail::poly_axpy(s.denominator(), -std::conj(rho), s.numerator());
  return {rho, SchurFunction::rational(std::move(p), std::move(q)), false, 0};
}

inline SchurParams extract_params(const SchurFunction& s, int max_depth) {
  if (max_depth < 1) throw Error("extract_params: max_depth must be >= 1");
  SchurParams out;
  SchurFunction cur = s;
  for (int d = 0; d < max_depth; ++d) {
    auto st = schur_step(cur);
    out.params.push_back(st.rho);
    if (st.terminated) {
      out.terminated = true;
      out.terminal_defect = st.terminal_defect;
      break;
    }
    cur = std::move(*st.next);
  }
  return out;
}

/// s_n = (rho_n + z s_{n+1}) / (1 + conj(rho_n) z s_{n+1}), truncated at depth with zero tail.
inline cplx eval_from_params(const SchurParams& p, cplx z, int depth) {
  if (!(std::abs(z) < 1.0)) throw DomainError("eval_from_params: need |z| < 1");
  const int n = std::min<int>(depth, static_cast<int>(p.params.size()));
  cplx s = 0;
  for (int k = n - 1; k >= 0; --k) {
    const cplx rho = p.params[static_cast<std::size_t>(k)];
    const cplx d = 1.0 + std::conj(rho) * z * s;
    if (d == 0.0) throw DomainError("eval_from_params: zero denominator at level " + std::to_string(k));
    s = (rho + z * s) / d;
  }
  return s;
}

inline SchurFunction function_from_params(const SchurParams& p, int depth) {
  return SchurFunction::callable([p, depth](cplx z) { return eval_from_params(p, z, depth); });
}

/// Exact rational function with the given parameters (zero tail).
inline SchurFunction rational_from_params(const SchurParams& p) {
  Poly num{0.0}, den{1.0};
  for (std::size_t k = p.params.size(); k-- > 0;) {
    const cplx rho = p.params[k];
    Poly zp(num.size() + 1, 0.0);
    std::copy(num.begin(), num.end(), zp.begin() + 1);
    Poly n2 = detail::poly_axpy(zp, rho, den);
    Poly d2 = detail::poly_axpy(den, std::conj(rho), zp);
    num = std::move(n2);
    den = std::move(d2);
  }
  return SchurFunction::rational(num, den);
}

/**
 * F(s, rho)(z) = (s(z) - rho) / (z (1 - conj(rho) s(z))). It is analytic on the
 * disk only when rho = s(0); other rho give a pole at 0 and are rejected.
 */
inline SchurFunction schur_move(const SchurFunction& s, cplx rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("schur_move: need |rho| < 1");
  const cplx s0 = s.at_zero();
  if (std::abs(std::abs(s0) - 1.0) < 1e-12 && s.is_rational() && s.numerator().size() == 1 && s.denominator().size() == 1)
    throw DomainError("schur_move: s is a unimodular constant");
  if (std::abs(s0 - rho) > 1e-10) throw DomainError("schur_move: rho != s(0), F(s, rho) has a pole at 0");
  auto st = schur_step(s);
  if (!st.next) throw DomainError("schur_move: s is not strictly contractive at 0");
  return *st.next;
}

/// Inverse step: z -> (rho + z s(z)) / (1 + conj(rho) z s(z)).
inline SchurFunction schur_prepend(const SchurFunction& s, cplx rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("schur_prepend: need |rho| < 1");
  if (s.is_rational()) {
    Poly zp(s.numerator().size() + 1, 0.0);
    std::copy(s.numerator().begin(), s.numerator().end(), zp.begin() + 1);
    return SchurFunction::rational(detail::poly_axpy(zp, rho, s.denominator()), detail::poly_axpy(s.denominator(), std::conj(rho), zp));
  }
  return SchurFunction::callable([s, rho](cplx z) {
    const cplx v = z * s(z);
    return (rho + v) / (1.0 + std::conj(rho) * v);
  });
}

/// prod_k (z - a_k) / (1 - conj(a_k) z).
inline SchurFunction blaschke(const std::vector<cplx>& zeros) {
  Poly num{1.0}, den{1.0};
  for (const auto& a : zeros) {
    if (!(std::abs(a) < 1.0)) throw DomainError("blaschke: zeros must lie in the open disk");
    num = detail::poly_mul(num, {-a, 1.0});
    den = detail::poly_mul(den, {1.0, -std::conj(a)});
  }
  return SchurFunction::rational(num, den);
}

/// Law on the disk |rho| <= radius: uniform or a point mass.
class DiskLaw {
 public:
  static DiskLaw uniform(double radius) {
    if (!(radius >= 0 && radius < 1)) throw Error("disk law: radius must be in [0, 1)");
    return DiskLaw(radius, std::nullopt);
  }
  static DiskLaw point(cplx c, double radius) {
    if (!(radius >= 0 && radius < 1)) throw Error("disk law: radius must be in [0, 1)");
    return DiskLaw(radius, c);
  }

  double radius() const { return radius_; }

  cplx draw(Stream& s) const {
    if (point_) return *point_;
    const double r = radius_ * std::sqrt(s.uniform());
    return std::polar(r, 2.0 * std::numbers::pi * s.uniform());
  }

 private:
  DiskLaw(double r, std::optional<cplx> p) : radius_(r), point_(p) {}
  double radius_;
  std::optional<cplx> point_;
};

inline SchurParams sample_random_schur(const DiskLaw& nu, int depth, Stream& s) {
  if (depth < 1) throw Error("sample_random_schur: depth must be >= 1");
  SchurParams p;
  for (int k = 0; k < depth; ++k) {
    const cplx rho = nu.draw(s);
    if (std::abs(rho) > nu.radius() * (1 + 1e-15)) throw DomainError("sample_random_schur: draw outside the declared disk");
    p.params.push_back(rho);
  }
  return p;
}

}  // namespace transop
