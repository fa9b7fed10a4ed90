#pragma once
// Finite open-chain Hamiltonians and exact unitary evolution through a
// Hermitian eigendecomposition. Eigensolves run per connected component of
// the Hamiltonian's nonzero pattern, so conserved quantities (magnetization
// for XY/Heisenberg, everything for the diagonal gIm) are exploited without
// being declared.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinlaw/couplings.hpp"
#include "spinlaw/error.hpp"
#include "spinlaw/linalg.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr std::size_t kMaxSparseSites = 16;

struct PauliTerm {
  Complex coeff;
  PauliString string;
};

using PauliSum = std::vector<PauliTerm>;

/// Pair-sum Hamiltonian of the model on Λ (open boundaries), as Pauli terms.
inline PauliSum hamiltonian_terms(const ModelSpec& m, const Block& region) {
  m.validate();
  PauliSum out;
  const auto& s = region.sites();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const SiteIndex r = s[j] - s[i];
      const double j1 = m.kind == ModelKind::GIm ? 0.0 : coupling_value(m.j1, r);
      const double j2 = m.kind == ModelKind::XY ? 0.0 : coupling_value(m.j2, r);
      if (j1 != 0.0) {
        out.push_back({-j1, PauliString{{s[i], Axis::X}, {s[j], Axis::X}}});
        out.push_back({-j1, PauliString{{s[i], Axis::Y}, {s[j], Axis::Y}}});
      }
      if (j2 != 0.0) {
        const double sign = m.kind == ModelKind::GIm ? 1.0 : -1.0;
        out.push_back({sign * j2, PauliString{{s[i], Axis::Z}, {s[j], Axis::Z}}});
      }
    }
  }
  return out;
}

inline SparseMatrix to_sparse(const PauliSum& terms, const Block& block) {
  detail::require(block.size() <= kMaxSparseSites, "to_sparse: block exceeds 16 sites");
  const std::uint64_t dim = block.dim();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(terms.size() * dim);
  for (const auto& term : terms) {
    const auto mk = term.string.masks(block);
    for (std::uint64_t col = 0; col < dim; ++col) {
      trip.emplace_back(static_cast<Eigen::Index>(col ^ mk.flip), static_cast<Eigen::Index>(col),
                        term.coeff * mk.phase(col));
    }
  }
  SparseMatrix h(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  h.setFromTriplets(trip.begin(), trip.end());
  h.prune(Complex(0.0), 0.0);
  return h;
}

inline Operator build_hamiltonian(const ModelSpec& m, const Block& region) {
  detail::require(region.size() <= kMaxDenseSites, "build_hamiltonian: region too large for a dense build (max 12 sites)");
  return Operator(region, CMatrix(to_sparse(hamiltonian_terms(m, region), region)));
}

inline SparseMatrix build_sparse_hamiltonian(const ModelSpec& m, const Block& region) {
  return to_sparse(hamiltonian_terms(m, region), region);
}

/// Eigendecomposition of a Hermitian matrix split along the connected
/// components of its nonzero pattern.
class Spectral {
 public:
  Spectral(Block block, const SparseMatrix& h) : block_(std::move(block)) {
    detail::require(h.rows() == h.cols() && h.rows() == static_cast<Eigen::Index>(block_.dim()),
                    "Spectral: dimension must be 2^|block|");
    const Eigen::Index n = h.rows();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&parent](Eigen::Index i) {
      while (parent[static_cast<std::size_t>(i)] != i) {
        parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        i = parent[static_cast<std::size_t>(i)];
      }
      return i;
    };
    double asym = 0;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
        asym = std::max(asym, std::abs(it.value() - std::conj(h.coeff(it.col(), it.row()))));
        const auto a = find(it.row());
        const auto b = find(it.col());
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
    }
    detail::require(asym <= 1e-12, "Spectral: matrix is not Hermitian");
    std::vector<Eigen::Index> comp_of(static_cast<std::size_t>(n), -1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = find(i);
      auto& c = comp_of[static_cast<std::size_t>(r)];
      if (c < 0) {
        c = static_cast<Eigen::Index>(components_.size());
        components_.emplace_back();
      }
      components_[static_cast<std::size_t>(c)].index.push_back(i);
    }
    for (auto& comp : components_) {
      const auto m = static_cast<Eigen::Index>(comp.index.size());
      if (m == 1) {
        comp.evals = RVector::Constant(1, h.coeff(comp.index[0], comp.index[0]).real());
        comp.evecs = CMatrix::Ones(1, 1);
        continue;
      }
      CMatrix sub(m, m);
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b) sub(a, b) = h.coeff(comp.index[a], comp.index[b]);
      sub = (0.5 * (sub + sub.adjoint())).eval();
      Eigen::SelfAdjointEigenSolver<CMatrix> es(sub);
      detail::ensure(es.info() == Eigen::Success, "Spectral: eigensolve failed");
      comp.evals = es.eigenvalues();
      comp.evecs = es.eigenvectors();
    }
  }

  explicit Spectral(const Operator& h) : Spectral(h.block(), SparseMatrix(h.matrix().sparseView())) {}

  const Block& block() const { return block_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(block_.dim()); }
  std::size_t component_count() const { return components_.size(); }

  RVector eigenvalues() const {
    std::vector<double> all;
    for (const auto& c : components_) all.insert(all.end(), c.evals.data(), c.evals.data() + c.evals.size());
    std::sort(all.begin(), all.end());
    return Eigen::Map<RVector>(all.data(), static_cast<Eigen::Index>(all.size()));
  }

  /// e^{-iHt} v.
  CVector propagate(const CVector& v, double t) const {
    detail::require(v.size() == dim(), "Spectral::propagate: dimension mismatch");
    CVector out(v.size());
    for (const auto& c : components_) {
      const auto m = static_cast<Eigen::Index>(c.index.size());
      CVector x(m);
      for (Eigen::Index a = 0; a < m; ++a) x(a) = v(c.index[static_cast<std::size_t>(a)]);
      CVector y = c.evecs.adjoint() * x;
      for (Eigen::Index a = 0; a < m; ++a) y(a) *= std::polar(1.0, -c.evals(a) * t);
      x = c.evecs * y;
      for (Eigen::Index a = 0; a < m; ++a) out(c.index[static_cast<std::size_t>(a)]) = x(a);
    }
    return out;
  }

  /// Dense e^{-iHt}.
  CMatrix unitary(double t) const {
    detail::require(block_.size() <= kMaxDenseSites, "Spectral::unitary: block too large for a dense matrix");
    CMatrix u = CMatrix::Zero(dim(), dim());
    for (const auto& c : components_) {
      const CMatrix blk = c.evecs * (c.evals.unaryExpr([t](double e) { return std::polar(1.0, -e * t); })).asDiagonal() *
                          c.evecs.adjoint();
      for (std::size_t a = 0; a < c.index.size(); ++a)
        for (std::size_t b = 0; b < c.index.size(); ++b)
          u(c.index[a], c.index[b]) = blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    return u;
  }

 private:
  struct Component {
    std::vector<Eigen::Index> index;
    RVector evals;
    CMatrix evecs;
  };
  Block block_;
  std::vector<Component> components_;
};

inline StateVector evolve(const Spectral& h, const StateVector& v, double t) {
  detail::require(h.block() == v.block(), "evolve: block mismatch");
  return StateVector(v.block(), h.propagate(v.amplitudes(), t));
}

/// e^{-iHt} v.
inline StateVector evolve(const Operator& h, const StateVector& v, double t) {
  detail::require(h.block() == v.block(), "evolve: block mismatch");
  return evolve(Spectral(h), v, t);
}

/// tau_t(A) = e^{iHt} A e^{-iHt}, dense.
inline Operator heisenberg_picture(const Spectral& h, const Operator& a, double t) {
  detail::require(h.block() == a.block(), "heisenberg_picture: block mismatch");
  const CMatrix u = h.unitary(t);
  return Operator(a.block(), u.adjoint() * a.matrix() * u);
}

inline Operator heisenberg_picture(const Operator& h, const Operator& a, double t) {
  detail::require(h.block() == a.block(), "heisenberg_picture: block mismatch");
  return heisenberg_picture(Spectral(h), a, t);
}

// ---------------------------------------------------------------------------
// Matrix-free maps

/// v -> tau_t(P) v = e^{iHt} P e^{-iHt} v. The map refers to `h`, which must
/// outlive it.
inline LinearMap heisenberg_map(const Spectral& h, const PauliString& p, double t) {
  const Block block = h.block();
  detail::require(block.contains(p.support()), "heisenberg_map: Pauli support outside the block");
  return {h.dim(),
          [&h, p, block, t](const CVector& v) { return h.propagate(apply(p, block, h.propagate(v, t)), -t); },
          true, 1.0};
}

/// X acting on the sub-block `sub` of `whole`, identity elsewhere.
inline LinearMap embed_map(const LinearMap& x, const Block& sub, const Block& whole) {
  const auto idx = detail::split_index(whole, sub);
  detail::require(x.dim == static_cast<Eigen::Index>(idx.keep_offsets.size()), "embed_map: dimension mismatch");
  return {static_cast<Eigen::Index>(whole.dim()),
          [x, idx](const CVector& v) {
            CVector out(v.size());
            const auto dk = static_cast<Eigen::Index>(idx.keep_offsets.size());
            CVector piece(dk);
            for (std::uint64_t e : idx.env_offsets) {
              for (Eigen::Index k = 0; k < dk; ++k) piece(k) = v(static_cast<Eigen::Index>(idx.keep_offsets[k] | e));
              const CVector r = x.apply(piece);
              for (Eigen::Index k = 0; k < dk; ++k) out(static_cast<Eigen::Index>(idx.keep_offsets[k] | e)) = r(k);
            }
            return out;
          },
          x.hermitian, x.norm_bound};
}

inline LinearMap dense_map(const CMatrix& m, bool hermitian) {
  return {m.rows(), [m](const CVector& v) { return CVector(m * v); }, hermitian, m.norm() /* Frobenius */};
}

inline LinearMap pauli_map(const PauliString& p, const Block& block) {
  return {static_cast<Eigen::Index>(block.dim()), [p, block](const CVector& v) { return apply(p, block, v); }, true, 1.0};
}

inline LinearMap difference_map(const LinearMap& a, const LinearMap& b) {
  detail::require(a.dim == b.dim, "difference_map: dimension mismatch");
  return {a.dim, [a, b](const CVector& v) { return CVector(a.apply(v) - b.apply(v)); }, a.hermitian && b.hermitian,
          a.norm_bound + b.norm_bound};
}

/// i[X, B]; Hermitian when X and B are.
inline LinearMap commutator_map(const LinearMap& x, const LinearMap& b) {
  detail::require(x.dim == b.dim, "commutator_map: dimension mismatch");
  return {x.dim,
          [x, b](const CVector& v) { return CVector(Complex(0, 1) * (x.apply(b.apply(v)) - b.apply(x.apply(v)))); },
          x.hermitian && b.hermitian, 2.0 * x.norm_bound * b.norm_bound};
}

// ---------------------------------------------------------------------------
// Pulse preparation

/// Product state obtained by rotating every spin of the sigma^3 = -1
/// ferromagnetic ground state by exp(i theta sigma^2):
///   exp(i theta s2)|down> = sin(theta)|up> + cos(theta)|down>.
/// theta = pi/4 gives the sigma^1-polarized state, theta = pi/2 flips to all up.
inline StateVector pulse_prepare(const Block& block, double theta = std::numbers::pi / 4) {
  detail::require(block.size() <= kMaxVectorSites, "pulse_prepare: more than 24 sites");
  return product_state(block, Eigen::Vector2cd(std::sin(theta), std::cos(theta)));
}

inline StateVector pulse_prepare(std::size_t n_sites, double theta = std::numbers::pi / 4) {
  return pulse_prepare(Block::centered(n_sites), theta);
}

}  // namespace spinlaw
