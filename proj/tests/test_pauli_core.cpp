#include <gtest/gtest.h>

#include "oracles.hpp"
#include "spinlaw/pauli_core.hpp"
#include "spinlaw/random.hpp"

using namespace spinlaw;

TEST(Block, SortsAndRejectsDuplicates) {
  const Block b{3, -1, 0};
  EXPECT_EQ(b.sites(), (std::vector<SiteIndex>{-1, 0, 3}));
  EXPECT_FALSE(b.is_interval());
  EXPECT_THROW((Block{1, 1}), PreconditionError);
}

TEST(Block, CenteredIntervals) {
  EXPECT_EQ(Block::centered(4), Block::interval(-2, 1));
  EXPECT_EQ(Block::centered(5), Block::interval(-2, 2));
  EXPECT_EQ(Block::centered(1), Block{0});
  EXPECT_TRUE(Block::centered(20).is_interval());
}

TEST(Block, SetOperations) {
  const Block a = Block::interval(0, 3);
  const Block b{2, 5};
  EXPECT_FALSE(a.disjoint(b));
  EXPECT_EQ(a.united(b), (Block{0, 1, 2, 3, 5}));
  EXPECT_EQ(a.minus(b), (Block{0, 1, 3}));
  EXPECT_EQ(a.shifted(10), Block::interval(10, 13));
  EXPECT_TRUE(a.contains(Block{1, 3}));
}

TEST(Block, SmallestSiteIsMostSignificantBit) {
  const Block b = Block::interval(-1, 1);
  EXPECT_EQ(b.bit_of(-1), 2u);
  EXPECT_EQ(b.bit_of(1), 0u);
  // |down, up, up> has index 0b100 = 4
  const StateVector v = StateVector::basis(b, 4);
  EXPECT_NEAR(expectation(v, PauliString::single(-1, Axis::Z)).real(), -1.0, 1e-15);
  EXPECT_NEAR(expectation(v, PauliString::single(0, Axis::Z)).real(), 1.0, 1e-15);
}

TEST(PauliString, EmbedMatchesKroneckerProduct) {
  const Block b = Block::interval(0, 3);
  const PauliString p{{0, Axis::X}, {2, Axis::Y}, {3, Axis::Z}};
  const CMatrix expected = oracle::pauli_string({1, 0, 2, 3});
  EXPECT_LT((embed(p, b).matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PauliString, ApplyMatchesDenseAction) {
  Rng rng(7);
  const Block b = Block::interval(-2, 1);
  const StateVector v = random_pure_state(rng, b);
  for (int ax0 = 0; ax0 < 4; ++ax0) {
    for (int ax3 = 1; ax3 < 4; ++ax3) {
      PauliString p = PauliString::single(1, static_cast<Axis>(ax3));
      if (ax0 > 0) p = p.with(-2, static_cast<Axis>(ax0));
      const CVector dense = oracle::pauli_string({ax0, 0, 0, ax3}) * v.amplitudes();
      EXPECT_LT((apply(p, b, v.amplitudes()) - dense).norm(), 1e-14) << p.to_string();
    }
  }
}

TEST(PauliString, CommutationAgreesWithMatrices) {
  const Block b = Block::interval(0, 2);
  const std::vector<PauliString> ps = {PauliString{{0, Axis::X}, {1, Axis::X}}, PauliString{{0, Axis::Y}, {1, Axis::Y}},
                                       PauliString{{1, Axis::Z}}, PauliString{{0, Axis::Z}, {2, Axis::X}}};
  for (const auto& p : ps)
    for (const auto& q : ps) {
      const Operator c = commutator(embed(p, b), embed(q, b));
      const bool zero = c.matrix().cwiseAbs().maxCoeff() < 1e-14;
      EXPECT_EQ(p.commutes_with(q), zero) << p.to_string() << " " << q.to_string();
    }
}

TEST(PauliString, ProductRuleXYisIZ) {
  const Block b{0};
  const Operator xy = embed(PauliString::single(0, Axis::X), b) * embed(PauliString::single(0, Axis::Y), b);
  const Operator iz = Complex(0, 1) * embed(PauliString::single(0, Axis::Z), b);
  EXPECT_LT((xy.matrix() - iz.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DensityMatrix, RejectsInvalidInput) {
  const Block b{0};
  CMatrix m(2, 2);
  m << 0.5, 0, 0, 0.4;
  EXPECT_THROW(DensityMatrix(b, m), PreconditionError);  // trace
  m << 1.2, 0, 0, -0.2;
  EXPECT_THROW(DensityMatrix(b, m), PreconditionError);  // negative eigenvalue
  m << 0.5, 0.1, 0.3, 0.5;
  EXPECT_THROW(DensityMatrix(b, m), PreconditionError);  // not Hermitian
  EXPECT_THROW(StateVector(b, CVector::Ones(2)), PreconditionError);
}

TEST(PartialTrace, MatchesIndexLoopOracle) {
  Rng rng(11);
  const Block b{-3, 0, 2, 5};
  const DensityMatrix rho = random_density(rng, b);
  const std::vector<std::pair<Block, std::vector<bool>>> cases = {
      {Block{-3}, {true, false, false, false}},
      {Block{0, 5}, {false, true, false, true}},
      {Block{-3, 2, 5}, {true, false, true, true}},
  };
  for (const auto& [keep, mask] : cases) {
    const CMatrix expected = oracle::partial_trace(rho.matrix(), mask);
    EXPECT_LT((partial_trace(rho, keep).matrix() - expected).cwiseAbs().maxCoeff(), 1e-14) << keep.to_string();
  }
}

TEST(PartialTrace, PureStateRouteAgreesWithDensityRoute) {
  Rng rng(5);
  const Block b = Block::interval(0, 5);
  const StateVector v = random_pure_state(rng, b);
  const Block keep{1, 4};
  const CMatrix a = reduced_state(v, keep).matrix();
  const CMatrix c = partial_trace(dm_from_vector(v), keep).matrix();
  EXPECT_LT((a - c).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PartialTrace, ProductStateFactorizes) {
  Eigen::Matrix2cd site;
  site << 0.7, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.3;
  const DensityMatrix rho = product_density(Block::interval(0, 3), site);
  const DensityMatrix one = partial_trace(rho, Block{2});
  EXPECT_LT((one.matrix() - site).cwiseAbs().maxCoeff(), 1e-15);
  const DensityMatrix two = partial_trace(rho, Block{0, 3});
  const CMatrix expected = Eigen::kroneckerProduct(CMatrix(site), CMatrix(site));
  EXPECT_LT((two.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Tensor, OrdersBlocksBySite) {
  Rng rng(3);
  const DensityMatrix a = random_density(rng, Block{4});
  const DensityMatrix b = random_density(rng, Block{1});
  const DensityMatrix ab = tensor(a, b);
  EXPECT_EQ(ab.block(), (Block{1, 4}));
  const CMatrix expected = Eigen::kroneckerProduct(b.matrix(), a.matrix());
  EXPECT_LT((ab.matrix() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProductState, PlusXHasUnitTransverseMagnetization) {
  const StateVector v = product_state(Block::interval(0, 4), plus_x());
  for (SiteIndex x = 0; x <= 4; ++x) {
    EXPECT_NEAR(expectation(v, PauliString::single(x, Axis::X)).real(), 1.0, 1e-14);
    EXPECT_NEAR(expectation(v, PauliString::single(x, Axis::Z)).real(), 0.0, 1e-14);
  }
}

TEST(Random, DensityMatricesAreValid) {
  Rng rng(1);
  for (int rank : {1, 2, 0}) {
    const DensityMatrix r = random_density(rng, Block::interval(0, 2), rank);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r.matrix());
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
    EXPECT_NEAR(r.matrix().trace().real(), 1.0, 1e-12);
  }
  const CMatrix u = random_unitary(rng, 8);
  EXPECT_LT((u * u.adjoint() - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-13);
}
