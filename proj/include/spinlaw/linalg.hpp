#pragma once
// Dense and matrix-free linear algebra helpers shared by the physics modules.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "spinlaw/error.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

/// A linear map on C^dim given only by its action. `norm_bound` is an a
/// priori upper bound on the operator norm (infinite if unknown).
struct LinearMap {
  Eigen::Index dim = 0;
  std::function<CVector(const CVector&)> apply;
  bool hermitian = false;
  double norm_bound = std::numeric_limits<double>::infinity();
};

inline RVector hermitian_eigenvalues(const CMatrix& m) {
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  detail::ensure(es.info() == Eigen::Success, "hermitian_eigenvalues: eigensolve failed");
  return es.eigenvalues();
}

/// Largest singular value of a dense matrix.
inline double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (detail::max_abs(m - m.adjoint()) <= 1e-13 * std::max(1.0, detail::max_abs(m))) {
    return hermitian_eigenvalues(m).cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline double operator_norm(const Operator& a) { return operator_norm(a.matrix()); }

/// Sum of singular values, i.e. the trace norm.
inline double trace_norm(const CMatrix& m) {
  if (detail::max_abs(m - m.adjoint()) <= 1e-13 * std::max(1.0, detail::max_abs(m))) {
    return hermitian_eigenvalues(m).cwiseAbs().sum();
  }
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues().sum();
}

namespace detail {

struct LanczosResult {
  double lo;
  double hi;
  bool converged;
  double residual = 0;  // max ||H y - theta y|| of the extremal Ritz pairs
};

/// Extremal eigenvalues of a Hermitian map by Lanczos with full
/// reorthogonalization. Converged once both Ritz values are stationary to
/// `tol` relative accuracy; otherwise the last Ritz values are returned,
/// which still lie inside the spectrum.
inline LanczosResult lanczos_extremes(const LinearMap& h, double tol, std::size_t max_iter, std::uint64_t seed) {
  const Eigen::Index n = h.dim;
  max_iter = std::min<std::size_t>(max_iter, static_cast<std::size_t>(n));
  // Deterministic, dense start vector: avoids symmetry sectors a basis vector
  // might be confined to.
  CVector q(n);
  std::uint64_t state = seed * 0x9E3779B97F4A7C15ull + 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    const double re = static_cast<double>(state % 2000003) / 2000003.0 - 0.5;
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    const double im = static_cast<double>(state % 2000003) / 2000003.0 - 0.5;
    q(i) = Complex(re, im);
  }
  q.normalize();

  std::vector<CVector> basis;
  std::vector<double> alpha, beta;
  double prev_lo = 0, prev_hi = 0;
  for (std::size_t k = 0; k < max_iter; ++k) {
    basis.push_back(q);
    CVector w = h.apply(q);
    const double a = q.dot(w).real();
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) w -= b * b.dot(w);
    const double bnorm = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    const Eigen::Map<const RVector> diag(alpha.data(), m);
    const Eigen::Map<const RVector> sub(beta.data(), m - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(m - 1);
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    const bool invariant = bnorm <= 1e-13 * scale;
    if (invariant) return {lo, hi, true, bnorm};
    // Stagnating Ritz values only trigger the real test: the residual
    // ||H y - theta y|| = beta |y_last| of both extremal Ritz pairs.
    if (k >= 4 && std::abs(lo - prev_lo) <= tol * scale && std::abs(hi - prev_hi) <= tol * scale) {
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      // eigenvalue error <= min(r, r^2 / gap), gap taken from the Ritz values
      const double r_lo = bnorm * std::abs(es.eigenvectors()(m - 1, 0));
      const double r_hi = bnorm * std::abs(es.eigenvectors()(m - 1, m - 1));
      auto err = [&](double r, Eigen::Index i, Eigen::Index nb) {
        const double gap = std::abs(es.eigenvalues()(i) - es.eigenvalues()(nb));
        return gap > 0 ? std::min(r, r * r / gap) : r;
      };
      if (std::max(err(r_lo, 0, 1), err(r_hi, m - 1, m - 2)) <= tol * scale) return {lo, hi, true, std::max(r_lo, r_hi)};
    }
    prev_lo = lo;
    prev_hi = hi;
    beta.push_back(bnorm);
    q = w / bnorm;
  }
  return {prev_lo, prev_hi, static_cast<Eigen::Index>(max_iter) == n, 0.0};
}

}  // namespace detail

/// Certified bracket value <= ||M|| <= upper. `value` is the estimate; when
/// Lanczos stalls (clustered extremal spectrum) it is a lower bound and
/// `upper` falls back to the map's a priori bound.
struct NormEstimate {
  double value;
  double upper;
  bool converged;
};

/// Small maps are materialized and solved densely; larger Hermitian ones use
/// Lanczos. Non-Hermitian maps are always materialized, since M^dagger M
/// would need the adjoint action, which maps do not supply.
inline NormEstimate norm_estimate(const LinearMap& m, double tol = 1e-13, std::size_t max_iter = 400) {
  if (m.dim == 0) return {0.0, 0.0, true};
  if (m.dim <= 256 || !m.hermitian) {
    CMatrix dense(m.dim, m.dim);
    for (Eigen::Index j = 0; j < m.dim; ++j) dense.col(j) = m.apply(CVector::Unit(m.dim, j));
    const double v = operator_norm(dense);
    return {v, v, true};
  }
  const auto r = detail::lanczos_extremes(m, tol, max_iter, 1);
  const double v = std::max(std::abs(r.lo), std::abs(r.hi));
  // a converged Ritz value has an eigenvalue within its residual
  if (r.converged) return {v, std::min(v + r.residual, m.norm_bound), true};
  return {v, std::max(v, m.norm_bound), false};
}

/// Operator norm to relative accuracy `tol`; throws ConvergenceError if the
/// bracket from norm_estimate is wider than that.
inline double operator_norm(const LinearMap& m, double tol = 1e-13) {
  const NormEstimate e = norm_estimate(m, tol);
  if (!e.converged && e.upper - e.value > tol * std::max(1.0, e.value)) {
    throw ConvergenceError("operator_norm: Lanczos did not converge and the a priori bound is not tight");
  }
  return e.value;
}

/// Binary entropy h(mu) in nats.
inline double binary_entropy(double mu) {
  auto term = [](double p) { return p > 0 ? -p * std::log(p) : 0.0; };
  return term(mu) + term(1.0 - mu);
}

}  // namespace spinlaw
