#pragma once
// Seeded random states and unitaries for the property suites.

#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

using Rng = std::mt19937_64;

inline CMatrix ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

/// Haar-random pure state.
inline StateVector random_pure_state(Rng& rng, const Block& block) {
  CVector v = ginibre(rng, static_cast<Eigen::Index>(block.dim()), 1).col(0);
  return StateVector::normalized(block, std::move(v));
}

/// rho = G G^dagger / Tr with G of size d x rank; rank = d gives the
/// Hilbert-Schmidt ensemble (full rank almost surely).
inline DensityMatrix random_density(Rng& rng, const Block& block, Eigen::Index rank = 0) {
  const auto d = static_cast<Eigen::Index>(block.dim());
  if (rank <= 0) rank = d;
  const CMatrix g = ginibre(rng, d, rank);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(kTrusted, block, std::move(rho));
}

/// Haar-random unitary: QR of a Ginibre matrix with the phase of R's
/// diagonal divided out.
inline CMatrix random_unitary(Rng& rng, Eigen::Index d) {
  const CMatrix g = ginibre(rng, d, d);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const Complex di = r(i, i);
    if (std::abs(di) > 0) q.col(i) *= di / std::abs(di);
  }
  return q;
}

}  // namespace spinlaw
