#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "spinlaw/exact_engine.hpp"
#include "spinlaw/random.hpp"

using namespace spinlaw;

namespace {

oracle::M two_body(int n, int a, int b, int axis) {
  std::vector<int> axes(n, 0);
  axes[a] = axes[b] = axis;
  return oracle::pauli_string(axes);
}

// Reference Hamiltonians on sites 0..n-1 with the sign conventions
//   gIm: +J ZZ,  XY: -J (XX + YY),  Heisenberg: -J1 (XX + YY) - J2 ZZ.
oracle::M reference_hamiltonian(const ModelSpec& m, int n) {
  oracle::M h = oracle::M::Zero(1 << n, 1 << n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double j1 = coupling_value(m.j1, b - a);
      const double j2 = coupling_value(m.j2, b - a);
      switch (m.kind) {
        case ModelKind::GIm: h += j2 * two_body(n, a, b, 3); break;
        case ModelKind::XY: h -= j1 * (two_body(n, a, b, 1) + two_body(n, a, b, 2)); break;
        case ModelKind::Heisenberg:
          h -= j1 * (two_body(n, a, b, 1) + two_body(n, a, b, 2)) + j2 * two_body(n, a, b, 3);
          break;
      }
    }
  return h;
}

std::vector<ModelSpec> sample_models() {
  return {ModelSpec::gim(Exponential{2.0}), ModelSpec::xy(FiniteRange{0.7, 1}), ModelSpec::xy(Exponential{3.0}),
          ModelSpec::heisenberg(FiniteRange{1.0, 1}, FiniteRange{0.4, 2}),
          ModelSpec::heisenberg(Dyson{2.0}, Exponential{1.5})};
}

}  // namespace

TEST(Hamiltonian, MatchesKroneckerReference) {
  const Block b = Block::interval(0, 4);
  for (const auto& m : sample_models()) {
    const CMatrix ref = reference_hamiltonian(m, 5);
    EXPECT_LT((build_hamiltonian(m, b).matrix() - ref).cwiseAbs().maxCoeff(), 1e-14) << m.descriptor();
    EXPECT_LT((CMatrix(build_sparse_hamiltonian(m, b)) - ref).cwiseAbs().maxCoeff(), 1e-14) << m.descriptor();
  }
}

TEST(Hamiltonian, TwoSiteGImIsDiagonal) {
  const Operator h = build_hamiltonian(ModelSpec::gim(FiniteRange{1.0, 1}), Block::interval(0, 1));
  CMatrix expected = CMatrix::Zero(4, 4);
  expected.diagonal() << 1, -1, -1, 1;
  EXPECT_LT((h.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Hamiltonian, SizeLimits) {
  const ModelSpec m = ModelSpec::xy(FiniteRange{1, 1});
  EXPECT_THROW(build_hamiltonian(m, Block::interval(0, 12)), PreconditionError);
  EXPECT_THROW(build_sparse_hamiltonian(m, Block::interval(0, 16)), PreconditionError);
}

TEST(Spectral, EigenvaluesMatchDenseSolver) {
  for (const auto& m : sample_models()) {
    const CMatrix ref = reference_hamiltonian(m, 6);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ref, Eigen::EigenvaluesOnly);
    const Spectral sp(Block::interval(0, 5), build_sparse_hamiltonian(m, Block::interval(0, 5)));
    EXPECT_LT((sp.eigenvalues() - es.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12) << m.descriptor();
  }
}

TEST(Spectral, ComponentsFollowConservedMagnetization) {
  const Block b = Block::interval(0, 5);
  EXPECT_EQ(Spectral(b, build_sparse_hamiltonian(ModelSpec::xy(FiniteRange{1, 1}), b)).component_count(), 7u);
  EXPECT_EQ(Spectral(b, build_sparse_hamiltonian(ModelSpec::gim(Exponential{2}), b)).component_count(), 64u);
}

TEST(Spectral, PropagationMatchesMatrixExponential) {
  Rng rng(4);
  const Block b = Block::interval(0, 5);
  for (const auto& m : sample_models()) {
    const Spectral sp(b, build_sparse_hamiltonian(m, b));
    const CMatrix ref = reference_hamiltonian(m, 6);
    const StateVector v = random_pure_state(rng, b);
    for (double t : {0.3, -1.1, 5.0}) {
      const CVector expected = oracle::propagator(ref, t) * v.amplitudes();
      EXPECT_LT((sp.propagate(v.amplitudes(), t) - expected).norm(), 1e-12) << m.descriptor() << " " << t;
      EXPECT_LT((evolve(sp, v, t).amplitudes() - expected).norm(), 1e-12);
    }
    const CMatrix u = sp.unitary(0.8);
    EXPECT_LT((u * u.adjoint() - CMatrix::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HeisenbergPicture, DenseAndMatrixFreeRoutesAgree) {
  Rng rng(9);
  const Block b = Block::interval(0, 4);
  const ModelSpec m = ModelSpec::heisenberg(FiniteRange{1.0, 1}, FiniteRange{0.5, 1});
  const Spectral sp(b, build_sparse_hamiltonian(m, b));
  const PauliString p{{1, Axis::X}, {2, Axis::Z}};
  const double t = 0.9;
  const CMatrix u = oracle::propagator(reference_hamiltonian(m, 5), t);
  const CMatrix expected = u.adjoint() * oracle::pauli_string({0, 1, 3, 0, 0}) * u;
  EXPECT_LT((heisenberg_picture(sp, embed(p, b), t).matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
  const LinearMap map = heisenberg_map(sp, p, t);
  const CVector v = random_pure_state(rng, b).amplitudes();
  EXPECT_LT((map.apply(v) - expected * v).norm(), 1e-12);
}

TEST(HeisenbergPicture, ConservedQuantityIsStationary) {
  const Block b = Block::interval(0, 4);
  const ModelSpec m = ModelSpec::xy(Exponential{2.0});
  const Operator h = build_hamiltonian(m, b);
  Operator sz = Operator::zero(b);
  for (SiteIndex x : b.sites()) sz = sz + embed(PauliString::single(x, Axis::Z), b);
  EXPECT_LT((heisenberg_picture(h, sz, 2.7).matrix() - sz.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Maps, EmbedCommutatorAndDifference) {
  Rng rng(12);
  const Block whole = Block::interval(0, 3);
  const Block sub{1, 2};
  const CMatrix a = random_unitary(rng, 4);
  const LinearMap am = dense_map(a, false);
  const CMatrix expected = oracle::kron_all({oracle::pauli(0), a, oracle::pauli(0)});
  const CVector v = random_pure_state(rng, whole).amplitudes();
  EXPECT_LT((embed_map(am, sub, whole).apply(v) - expected * v).norm(), 1e-13);

  const LinearMap x = pauli_map(PauliString::single(0, Axis::X), whole);
  const LinearMap z = pauli_map(PauliString::single(0, Axis::Z), whole);
  // i[X, Z] = 2 Y
  const CVector y = 2.0 * oracle::pauli_string({2, 0, 0, 0}) * v;
  EXPECT_LT((commutator_map(x, z).apply(v) - y).norm(), 1e-14);
  EXPECT_LT(difference_map(x, x).apply(v).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(commutator_map(x, z).norm_bound, 2.0);
}

TEST(LinearAlgebra, LanczosNormMatchesDense) {
  Rng rng(2);
  const CMatrix g = ginibre(rng, 600, 600);
  const CMatrix h = (g + g.adjoint()) / 2.0;
  const LinearMap map = dense_map(h, true);
  const double exact = oracle::herm_norm(h);
  EXPECT_NEAR(operator_norm(map), exact, 1e-10 * exact);
  const NormEstimate e = norm_estimate(map, 1e-13, 5);
  EXPECT_FALSE(e.converged);
  EXPECT_LE(e.value, exact);
  EXPECT_GE(e.upper, exact);
}

TEST(Pulse, PreparesRotatedFerromagnet) {
  const Block b = Block::interval(0, 3);
  const StateVector half = pulse_prepare(b);
  EXPECT_LT((half.amplitudes() - product_state(b, plus_x()).amplitudes()).norm(), 1e-14);
  EXPECT_NEAR(std::norm(pulse_prepare(b, std::numbers::pi / 2).amplitudes()(0)), 1.0, 1e-14);
  EXPECT_NEAR(std::norm(pulse_prepare(b, 0.0).amplitudes()(15)), 1.0, 1e-14);
  EXPECT_EQ(pulse_prepare(std::size_t{4}).block(), Block::centered(4));
  // exp(i theta s2) acting on |down> on each site
  const double th = 0.3;
  const Eigen::Matrix2cd rot = (std::cos(th) * oracle::pauli(0) + Complex(0, std::sin(th)) * oracle::pauli(2));
  const Eigen::Vector2cd site = rot * Eigen::Vector2cd(0, 1);
  EXPECT_LT((pulse_prepare(b, th).amplitudes() - product_state(b, site).amplitudes()).norm(), 1e-14);
}
