#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "transop/error.hpp"
#include "transop/grid.hpp"
#include "transop/transfer.hpp"

namespace transop {

/**
 * How a transfer operator acts on cell masses.
 *   dual:    mu -> mu R, i.e. integral f d(mu R) = integral R f d mu. Natural for
 *            Markov operators (R1 = 1); columns sum to one.
 *   density: g -> R g on densities. Natural for Perron-Frobenius operators such
 *            as the Gauss operator, whose fixed density is the invariant law of sigma.
 */
enum class UlamAction { dual, density };

inline UlamAction default_action(const BranchSystem&) { return UlamAction::dual; }
inline UlamAction default_action(const ControlledSystem&) { return UlamAction::dual; }
inline UlamAction default_action(const CircleFilterOperator&) { return UlamAction::dual; }
inline UlamAction default_action(const GaussOperator&) { return UlamAction::density; }

/// entries(i, j): mass sent from cell j to cell i.
struct UlamMatrix {
  Grid grid;
  Eigen::MatrixXd entries;
  UlamAction action;

  // Matrix acting on cell-constant functions (the cell kernel).
  Eigen::MatrixXd function_action() const { return action == UlamAction::dual ? Eigen::MatrixXd(entries.transpose()) : entries; }

  double max_column_sum_defect() const {
    double m = 0;
    for (Eigen::Index j = 0; j < entries.cols(); ++j) m = std::max(m, std::abs(entries.col(j).sum() - 1.0));
    return m;
  }
};

struct UlamOptions {
  std::optional<UlamAction> action;
  std::size_t subcells = 8;
  unsigned threads = 1;
};

template <class Op>
UlamMatrix build_ulam(const Op& op, const Grid& grid, UlamOptions opt = {}) {
  require_same_grid(op.grid(), grid, "build_ulam");
  const UlamAction action = opt.action.value_or(default_action(op));
  Eigen::MatrixXd K = cell_kernel(op, opt.subcells, opt.threads);
  Eigen::MatrixXd M = action == UlamAction::dual ? Eigen::MatrixXd(K.transpose()) : K;
  for (Eigen::Index i = 0; i < M.size(); ++i) {
    double& v = M.data()[i];
    if (v < 0) {
      if (v < -1e-14) throw Error("build_ulam: negative transition mass");
      v = 0;
    }
  }
  return {grid, std::move(M), action};
}

struct StationaryResult {
  DiscreteMeasure measure;
  double residual = 0;  // wasserstein1(mu M, mu)
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // successive distances wasserstein1(mu_{k+1}, mu_k)
};

inline DiscreteMeasure push(const UlamMatrix& m, const DiscreteMeasure& mu) {
  Eigen::Map<const Eigen::VectorXd> v(mu.weights().data(), static_cast<Eigen::Index>(mu.grid().n()));
  Eigen::VectorXd out = m.entries * v;
  std::vector<double> w(out.data(), out.data() + out.size());
  for (double x : w)
    if (!std::isfinite(x)) throw ConvergenceError("power iteration diverged (non-finite mass)");
  return DiscreteMeasure::from_weights(m.grid, std::move(w));
}

/// mu_{k+1} = normalize(M mu_k) until successive W1 distance <= tol.
inline StationaryResult power_iterate(const UlamMatrix& m, double tol, int max_iters,
                                      std::optional<DiscreteMeasure> start = std::nullopt) {
  if (!(tol > 0)) throw Error("power_iterate: tol must be positive");
  DiscreteMeasure mu = start ? *start : DiscreteMeasure::uniform(m.grid);
  require_same_grid(mu.grid(), m.grid, "power_iterate");
  StationaryResult r{mu};
  for (int k = 1; k <= max_iters; ++k) {
    DiscreteMeasure next = push(m, mu);
    const double d = wasserstein1(next, mu);
    if (!std::isfinite(d)) throw ConvergenceError("power iteration diverged");
    r.history.push_back(d);
    mu = std::move(next);
    r.iterations = k;
    if (d <= tol) {
      r.converged = true;
      break;
    }
  }
  r.residual = wasserstein1(push(m, mu), mu);
  r.measure = std::move(mu);
  return r;
}

/// Per test function, |integral R f d mu - integral f d mu| with R f evaluated at the nodes.
template <class Op>
std::vector<double> verify_invariance(const DiscreteMeasure& mu, const Op& op, const std::vector<RealMap>& test_fns,
                                      unsigned threads = 1) {
  require_same_grid(mu.grid(), op.grid(), "verify_invariance");
  std::vector<double> out;
  for (const auto& f : test_fns) {
    const auto Rf = apply(op, f, threads);
    out.push_back(std::abs(integrate(Rf, mu) - integrate(f, mu)));
  }
  return out;
}

/// Second eigenpair of the cell kernel (largest real eigenvalue of modulus below 1).
struct EigenPair {
  double value = 0;
  GridFunction function;
};

inline EigenPair subdominant_eigenpair(const UlamMatrix& m) {
  const Eigen::MatrixXd K = m.function_action();
  Eigen::EigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw ConvergenceError("subdominant_eigenpair: eigen solver failed");
  Eigen::Index best = -1;
  double best_abs = -1;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lam = es.eigenvalues()[i];
    if (std::abs(lam.imag()) > 1e-9 || std::abs(lam.real()) > 1.0 - 1e-6) continue;
    if (std::abs(lam.real()) > best_abs) {
      best_abs = std::abs(lam.real());
      best = i;
    }
  }
  if (best < 0) throw ConvergenceError("subdominant_eigenpair: no real subdominant eigenvalue");
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  v /= v.cwiseAbs().maxCoeff();
  return {es.eigenvalues()[best].real(), GridFunction(m.grid, std::vector<double>(v.data(), v.data() + v.size()))};
}

struct AffineMap {
  double slope;
  double offset;
  double operator()(double x) const { return slope * x + offset; }
};

/// Affine iterated function system with constant probabilities.
class AffineIFS {
 public:
  AffineIFS(std::vector<AffineMap> maps, std::vector<double> probs, std::string name = "ifs")
      : maps_(std::move(maps)), probs_(std::move(probs)), name_(std::move(name)) {
    if (maps_.empty() || maps_.size() != probs_.size()) throw Error("affine IFS: need one probability per map");
    double s = 0;
    for (double p : probs_) {
      if (!(p >= 0)) throw NormalizationError("affine IFS: negative probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw NormalizationError("affine IFS: probabilities do not sum to 1");
  }

  const std::vector<AffineMap>& maps() const { return maps_; }
  const std::vector<double>& probs() const { return probs_; }
  const std::string& name() const { return name_; }

  double alpha_bound() const {
    double a = 0;
    for (std::size_t j = 0; j < maps_.size(); ++j) a += probs_[j] * std::abs(maps_[j].slope);
    return a;
  }

  double max_lipschitz() const {
    double a = 0;
    for (const auto& m : maps_) a = std::max(a, std::abs(m.slope));
    return a;
  }

 private:
  std::vector<AffineMap> maps_;
  std::vector<double> probs_;
  std::string name_;
};

/// mu -> sum_j p_j mu o F_j^{-1}; each cell's mass is spread over its image interval.
inline DiscreteMeasure hutchinson_step(const AffineIFS& ifs, const DiscreteMeasure& mu) {
  const Grid& g = mu.grid();
  std::vector<double> out(g.n(), 0.0);
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (mu[i] == 0) continue;
    for (std::size_t j = 0; j < ifs.maps().size(); ++j) {
      const double a = ifs.maps()[j](g.cell_lower(i)), b = ifs.maps()[j](g.cell_upper(i));
      if (!g.is_circle() && (std::min(a, b) < g.lower() - 1e-12 || std::max(a, b) > g.upper() + 1e-12))
        throw DomainError("hutchinson: map " + std::to_string(j) + " of " + ifs.name() + " leaves the domain");
      detail::spread(out, g, a, b, ifs.probs()[j] * mu[i]);
    }
  }
  return DiscreteMeasure::from_weights(g, std::move(out));
}

struct HutchinsonResult {
  StationaryResult stationary;
  std::vector<double> ratios;  // successive distance ratios while the distance is resolvable
  double alpha_bound = 0;
};

inline HutchinsonResult hutchinson_iterate(const AffineIFS& ifs, const DiscreteMeasure& mu0, int iters) {
  if (iters < 1) throw Error("hutchinson_iterate: iters must be >= 1");
  HutchinsonResult r{StationaryResult{mu0}, {}, ifs.alpha_bound()};
  DiscreteMeasure mu = mu0;
  double prev = -1;
  for (int k = 1; k <= iters; ++k) {
    DiscreteMeasure next = hutchinson_step(ifs, mu);
    const double d = wasserstein1(next, mu);
    r.stationary.history.push_back(d);
    if (prev > 1e-12) {
      const double ratio = d / prev;
      if (ratio > 1.0 + 1e-9) throw ConvergenceError("hutchinson: expansion detected (distance ratio " + std::to_string(ratio) + ")");
      r.ratios.push_back(ratio);
    }
    prev = d;
    mu = std::move(next);
    r.stationary.iterations = k;
  }
  r.stationary.residual = wasserstein1(hutchinson_step(ifs, mu), mu);
  r.stationary.converged = true;
  r.stationary.measure = std::move(mu);
  return r;
}

struct ContractionCertificate {
  double ratio;
  double alpha_bound;
};

inline ContractionCertificate contraction_certificate(const AffineIFS& ifs, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double d0 = wasserstein1(mu, nu);
  if (!(d0 > 0)) throw Error("contraction_certificate: measures must differ");
  const double d1 = wasserstein1(hutchinson_step(ifs, mu), hutchinson_step(ifs, nu));
  return {d1 / d0, ifs.alpha_bound()};
}

}  // namespace transop
