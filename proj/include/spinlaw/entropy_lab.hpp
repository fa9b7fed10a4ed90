#pragma once
// Von Neumann entropy, entropy densities and the entropy inequalities.
// Natural logarithm throughout (k_B = 1).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinlaw/csv.hpp"
#include "spinlaw/error.hpp"
#include "spinlaw/exact_engine.hpp"
#include "spinlaw/gim_dynamics.hpp"
#include "spinlaw/linalg.hpp"
#include "spinlaw/parallel.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

inline constexpr double kEigenFloor = 1e-14;

inline double entropy_of_spectrum(const RVector& ev) {
  double s = 0;
  for (double l : ev)
    if (l >= kEigenFloor) s -= l * std::log(l);
  return std::max(0.0, s);
}

inline double von_neumann(const DensityMatrix& rho) { return entropy_of_spectrum(hermitian_eigenvalues(rho.matrix())); }

// ---------------------------------------------------------------------------
// Entropy density

struct EntropyDensityEstimate {
  std::vector<std::size_t> block_sizes;
  std::vector<double> values;       // S / |block|
  std::vector<double> running_inf;  // min of values[0..i]
  double inf_value = std::numeric_limits<double>::infinity();
};

using StateProvider = std::function<DensityMatrix(const Block&)>;

/// S(block)/|block| for the centered blocks of the given sizes. Consecutive
/// provider outputs must be compatible under restriction within 1e-10.
inline EntropyDensityEstimate entropy_density(const StateProvider& provider, const std::vector<std::size_t>& sizes) {
  detail::require(!sizes.empty(), "entropy_density: no block sizes");
  EntropyDensityEstimate est;
  std::optional<DensityMatrix> prev;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    detail::require(sizes[i] >= 1, "entropy_density: block sizes must be positive");
    detail::require(i == 0 || sizes[i] > sizes[i - 1], "entropy_density: sizes must be ascending");
    const Block b = Block::centered(sizes[i]);
    DensityMatrix rho = provider(b);
    detail::require(rho.block() == b, "entropy_density: provider returned a state on the wrong block");
    if (prev) {
      const DensityMatrix restricted = partial_trace(rho, prev->block());
      detail::require(detail::max_abs(restricted.matrix() - prev->matrix()) <= 1e-10,
                      "entropy_density: provider inconsistent under restriction");
    }
    const double v = von_neumann(rho) / static_cast<double>(sizes[i]);
    est.block_sizes.push_back(sizes[i]);
    est.values.push_back(v);
    est.inf_value = std::min(est.inf_value, v);
    est.running_inf.push_back(est.inf_value);
    prev = std::move(rho);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Fannes

/// sum_k |l1_k - l2_k| over both spectra sorted ascending.
inline double fannes_a(const DensityMatrix& r1, const DensityMatrix& r2) {
  detail::require(r1.block() == r2.block(), "fannes_a: block mismatch");
  RVector a = hermitian_eigenvalues(r1.matrix());
  RVector b = hermitian_eigenvalues(r2.matrix());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return (a - b).cwiseAbs().sum();
}

struct FannesReport {
  double lhs;             // |S1 - S2|
  double rhs;             // |block| a log 2 + e
  double a;
  double trace_distance;  // ||r1 - r2||_1
  bool satisfied;
};

/// Throws CheckFailure if |S1 - S2| <= |block| a log 2 + e or a <= ||r1 - r2||_1 fails.
inline FannesReport fannes_check(const DensityMatrix& r1, const DensityMatrix& r2) {
  const double a = fannes_a(r1, r2);
  FannesReport rep{};
  rep.a = a;
  rep.lhs = std::abs(von_neumann(r1) - von_neumann(r2));
  rep.rhs = static_cast<double>(r1.block().size()) * a * std::numbers::ln2 + std::numbers::e;
  rep.trace_distance = trace_norm(r1.matrix() - r2.matrix());
  rep.satisfied = rep.lhs <= rep.rhs && a <= rep.trace_distance + 1e-12;
  detail::ensure(rep.satisfied, "fannes_check: inequality violated");
  return rep;
}

// ---------------------------------------------------------------------------
// Subadditivity

struct SsaReport {
  double s123, s12, s13, s1, s23, s2, s3;
  double lhs;  // S123 - S12
  double rhs;  // S13 - S1
  bool strong_satisfied;
  bool sub_satisfied;  // S23 <= S2 + S3
};

inline constexpr double kSsaSlack = 1e-9;

/// S123 - S12 <= S13 - S1 for mutually disjoint blocks; Λ1 may be empty, in
/// which case this is subadditivity of S23.
inline SsaReport strong_subadditivity_check(const DensityMatrix& rho, const Block& l1, const Block& l2,
                                            const Block& l3) {
  detail::require(l1.disjoint(l2) && l1.disjoint(l3) && l2.disjoint(l3),
                  "strong_subadditivity_check: blocks must be mutually disjoint");
  const Block all = l1.united(l2).united(l3);
  detail::require(rho.block().contains(all), "strong_subadditivity_check: blocks outside the state's block");
  const DensityMatrix r123 = partial_trace(rho, all);
  auto s = [&r123](const Block& b) { return von_neumann(partial_trace(r123, b)); };
  SsaReport rep{};
  rep.s123 = von_neumann(r123);
  rep.s12 = s(l1.united(l2));
  rep.s13 = s(l1.united(l3));
  rep.s1 = s(l1);
  rep.s23 = s(l2.united(l3));
  rep.s2 = s(l2);
  rep.s3 = s(l3);
  rep.lhs = rep.s123 - rep.s12;
  rep.rhs = rep.s13 - rep.s1;
  rep.strong_satisfied = rep.lhs <= rep.rhs + kSsaSlack;
  rep.sub_satisfied = rep.s23 <= rep.s2 + rep.s3 + kSsaSlack;
  detail::ensure(rep.strong_satisfied && rep.sub_satisfied, "strong_subadditivity_check: inequality violated");
  return rep;
}

// ---------------------------------------------------------------------------
// Mixing

struct MixingReport {
  double lower;  // mu S1 + (1-mu) S2
  double mixed;  // S(mu r1 + (1-mu) r2)
  double upper;  // lower + h(mu)
  bool satisfied;
};

inline MixingReport mixing_bounds_check(const DensityMatrix& r1, const DensityMatrix& r2, double mu) {
  detail::require(mu >= 0.0 && mu <= 1.0, "mixing_bounds_check: mu must lie in [0, 1]");
  detail::require(r1.block() == r2.block(), "mixing_bounds_check: block mismatch");
  MixingReport rep{};
  rep.lower = mu * von_neumann(r1) + (1.0 - mu) * von_neumann(r2);
  rep.mixed = von_neumann(DensityMatrix(kTrusted, r1.block(), mu * r1.matrix() + (1.0 - mu) * r2.matrix()));
  rep.upper = rep.lower + binary_entropy(mu);
  rep.satisfied = rep.lower <= rep.mixed + 1e-9 && rep.mixed <= rep.upper + 1e-9;
  detail::ensure(rep.satisfied, "mixing_bounds_check: two-sided bound violated");
  return rep;
}

/// Per-site entropy of mu (x)^k r1 + (1-mu) (x)^k r2 in excess of the affine
/// value mu s1 + (1-mu) s2 (s_i the single-site entropies).
inline double product_mixture_excess(const Eigen::Matrix2cd& site1, const Eigen::Matrix2cd& site2, double mu,
                                     std::size_t k) {
  const Block b = Block::interval(0, static_cast<SiteIndex>(k) - 1);
  const DensityMatrix p1 = product_density(b, site1);
  const DensityMatrix p2 = product_density(b, site2);
  const MixingReport rep = mixing_bounds_check(p1, p2, mu);
  const double s1 = von_neumann(DensityMatrix(Block{0}, site1));
  const double s2 = von_neumann(DensityMatrix(Block{0}, site2));
  return rep.mixed / static_cast<double>(k) - (mu * s1 + (1.0 - mu) * s2);
}

// ---------------------------------------------------------------------------
// Locality of entropy production

struct EntropyGap {
  double global;  // S of the restriction to Λ0 of the state evolved on Λ
  double local;   // S of the restriction evolved by H_{Λ0} alone
  double gap() const { return global - local; }
};

inline EntropyGap locality_entropy_gap(const ModelSpec& m, const StateVector& v0, double t, const Block& inner) {
  const Block& outer = v0.block();
  detail::require(outer.size() <= kMaxDenseSites, "locality_entropy_gap: region exceeds 12 sites");
  detail::require(outer.contains(inner), "locality_entropy_gap: inner block not contained in the region");
  const Spectral h_outer(outer, build_sparse_hamiltonian(m, outer));
  const DensityMatrix global = reduced_state(evolve(h_outer, v0, t), inner);
  const DensityMatrix start = reduced_state(v0, inner);
  const Spectral h_inner(inner, build_sparse_hamiltonian(m, inner));
  const CMatrix u = h_inner.unitary(t);
  const DensityMatrix local(kTrusted, inner, u * start.matrix() * u.adjoint());
  return {von_neumann(global), von_neumann(local)};
}

// ---------------------------------------------------------------------------
// Second-law experiment

struct SecondLawRow {
  double t;
  std::size_t block_size;
  double entropy_per_site;
};

struct SecondLawTable {
  std::vector<SecondLawRow> rows;  // ordered by t, then block size
  std::size_t n_sites = 0;
  std::string coupling;

  CsvTable to_csv() const {
    CsvTable table({"t", "block_size", "entropy_per_site", "N", "coupling"});
    for (const auto& r : rows) {
      table.add(r.t, static_cast<std::uint64_t>(r.block_size), r.entropy_per_site, static_cast<std::uint64_t>(n_sites),
                coupling);
    }
    return table;
  }

  std::vector<double> series(std::size_t k) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.block_size == k) out.push_back(r.entropy_per_site);
    return out;
  }

  std::vector<double> times(std::size_t k) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.block_size == k) out.push_back(r.t);
    return out;
  }
};

/// Entropy per site of centered blocks of a gIm chain of n_sites started in
/// the sigma^1-polarized product state (or `initial` if given).
inline SecondLawTable second_law_experiment(const CouplingSpec& spec, std::size_t n_sites,
                                            const std::vector<std::size_t>& block_sizes,
                                            const std::vector<double>& t_grid, unsigned threads = 1,
                                            const std::optional<StateVector>& initial = std::nullopt) {
  detail::require(n_sites <= kMaxVectorSites, "second_law_experiment: N exceeds 24");
  for (auto k : block_sizes) detail::require(k >= 1 && k <= std::min<std::size_t>(10, n_sites), "second_law_experiment: bad block size");
  const GImSystem sys{spec, Block::centered(n_sites)};
  const DiagonalPropagator prop(sys);
  const StateVector v0 = initial ? *initial : product_state(sys.region, plus_x());
  detail::require(v0.block() == sys.region, "second_law_experiment: initial state must live on the chain");

  std::vector<std::vector<SecondLawRow>> per_t(t_grid.size());
  parallel_for(
      t_grid.size(),
      [&](std::size_t i) {
        const StateVector vt = prop.evolve(v0, t_grid[i]);
        for (auto k : block_sizes) {
          const double s = von_neumann(reduced_state(vt, Block::centered(k)));
          per_t[i].push_back({t_grid[i], k, s / static_cast<double>(k)});
        }
      },
      threads);
  SecondLawTable table;
  table.n_sites = n_sites;
  table.coupling = descriptor(spec);
  for (auto& rows : per_t) table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  return table;
}

}  // namespace spinlaw
