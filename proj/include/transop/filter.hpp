#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "transop/error.hpp"

namespace transop {

/**
 * Even real trigonometric polynomial p(t) = c_0 + 2 sum_{j>=1} c_j cos(2 pi j t),
 * i.e. the Fourier coefficients are c_{|j|}.
 */
class CosinePolynomial {
 public:
  CosinePolynomial() : c_{0.0} {}
  explicit CosinePolynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
    trim();
  }

  static CosinePolynomial constant(double v) { return CosinePolynomial({v}); }

  // Fourier coefficient of index j (either sign).
  double coefficient(long j) const {
    const auto a = static_cast<std::size_t>(std::labs(j));
    return a < c_.size() ? c_[a] : 0.0;
  }

  const std::vector<double>& coeffs() const { return c_; }
  std::size_t degree() const { return c_.size() - 1; }

  double operator()(double t) const {
    // Clenshaw recurrence for sum c_j cos(j theta).
    const double theta = 2.0 * std::numbers::pi * t;
    const double two_cos = 2.0 * std::cos(theta);
    double b1 = 0, b2 = 0;
    for (std::size_t j = c_.size(); j-- > 1;) {
      const double b0 = 2.0 * c_[j] + two_cos * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return c_[0] + b1 * std::cos(theta) - b2;
  }

  CosinePolynomial& operator+=(const CosinePolynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
    for (std::size_t j = 0; j < o.c_.size(); ++j) c_[j] += o.c_[j];
    trim();
    return *this;
  }

  friend CosinePolynomial operator*(const CosinePolynomial& a, const CosinePolynomial& b) {
    const long da = static_cast<long>(a.degree()), db = static_cast<long>(b.degree());
    std::vector<double> out(static_cast<std::size_t>(da + db + 1), 0.0);
    for (long j = -da; j <= da; ++j)
      for (long k = -db; k <= db; ++k) {
        const long s = j + k;
        if (s >= 0) out[static_cast<std::size_t>(s)] += a.coefficient(j) * b.coefficient(k);
      }
    return CosinePolynomial(std::move(out));
  }

 private:
  void trim() {
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

/**
 * Low-pass filter m0(t) = sum_k a_k e^{2 pi i k t} with branching N.
 * Coefficients are indexed from zero; |m0|^2 is kept as its autocorrelation.
 */
class WaveletFilter {
 public:
  WaveletFilter(int N, std::vector<double> coeffs, bool normalized, std::string name = "filter")
      : N_(N), a_(std::move(coeffs)), normalized_(normalized), name_(std::move(name)) {
    if (N_ < 2) throw Error("wavelet filter: N must be >= 2");
    if (a_.empty()) throw Error("wavelet filter: no coefficients");
    if (normalized_ && normalization_defect() > 1e-12)
      throw NormalizationError("wavelet filter '" + name_ + "' flagged normalized but (1/N) sum |m0|^2 != 1");
  }

  static WaveletFilter haar() {
    const double r = 1.0 / std::sqrt(2.0);
    return WaveletFilter(2, {r, r}, true, "haar");
  }

  static WaveletFilter daubechies4() {
    const double s3 = std::sqrt(3.0), d = 4.0 * std::sqrt(2.0);
    return WaveletFilter(2, {(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d}, true, "daub4");
  }

  // Taps at 0 and 2m+1 (box of length 2m+1 refined by N = 2).
  static WaveletFilter stretched_haar(int m) {
    if (m < 0) throw Error("stretched_haar: m must be >= 0");
    std::vector<double> a(static_cast<std::size_t>(2 * m + 2), 0.0);
    a.front() = a.back() = 1.0 / std::sqrt(2.0);
    return WaveletFilter(2, std::move(a), true, "fejer-" + std::to_string(m));
  }

  // Linear B-spline: sqrt(2) ((1 + e^{2 pi i t}) / 2)^2. Not normalized.
  static WaveletFilter linear_spline() {
    const double s = std::sqrt(2.0) / 4.0;
    return WaveletFilter(2, {s, 2 * s, s}, false, "spline1");
  }

  static WaveletFilter zero(int N = 2) { return WaveletFilter(N, {0.0}, false, "zero"); }

  int N() const { return N_; }
  const std::vector<double>& coeffs() const { return a_; }
  double coeff(long k) const { return k >= 0 && k < static_cast<long>(a_.size()) ? a_[static_cast<std::size_t>(k)] : 0.0; }
  std::size_t support_width() const { return a_.size() - 1; }
  bool normalized() const { return normalized_; }
  const std::string& name() const { return name_; }

  // Autocorrelation c_j = sum_k a_k a_{k+j}; |m0(t)|^2 = sum_j c_j e^{2 pi i j t}.
  CosinePolynomial modulus_squared() const {
    std::vector<double> c(a_.size(), 0.0);
    for (std::size_t j = 0; j < a_.size(); ++j)
      for (std::size_t k = 0; k + j < a_.size(); ++k) c[j] += a_[k] * a_[k + j];
    return CosinePolynomial(std::move(c));
  }

  // (1/N) sum_k |m0((t+k)/N)|^2 has coefficients c_{jN}; this is its sup distance to 1.
  double normalization_defect() const {
    const auto w = modulus_squared();
    double d = std::abs(w.coefficient(0) - 1.0);
    for (long j = 1; j * N_ <= static_cast<long>(w.degree()); ++j) d += 2.0 * std::abs(w.coefficient(j * N_));
    return d;
  }

  WaveletFilter scaled(double factor, bool keep_flag_unchecked = false) const {
    std::vector<double> a(a_);
    for (double& x : a) x *= factor;
    WaveletFilter f(N_, std::move(a), false, name_ + "-scaled");
    if (keep_flag_unchecked) f.normalized_ = normalized_;
    return f;
  }

 private:
  int N_;
  std::vector<double> a_;
  bool normalized_;
  std::string name_;
};

/// Ruelle operator in coefficient space: multiply by |m0|^2, keep indices divisible by N.
inline CosinePolynomial ruelle_coefficients(const WaveletFilter& filter, const CosinePolynomial& h) {
  const auto g = filter.modulus_squared() * h;
  std::vector<double> out;
  for (long j = 0; static_cast<std::size_t>(j * filter.N()) <= g.degree(); ++j) out.push_back(g.coefficient(j * filter.N()));
  return CosinePolynomial(std::move(out));
}

}  // namespace transop
