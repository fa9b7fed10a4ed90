#pragma once
// Lieb-Robinson and NSY local-approximation bounds checked against exact
// finite-chain dynamics.

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "spinlaw/couplings.hpp"
#include "spinlaw/csv.hpp"
#include "spinlaw/error.hpp"
#include "spinlaw/exact_engine.hpp"
#include "spinlaw/linalg.hpp"
#include "spinlaw/parallel.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

struct BoundReport {
  double lhs = 0;
  /// Certified upper bound on lhs; equals lhs unless an iterative norm stalled.
  double lhs_upper = 0;
  double rhs = 0;
  std::string params;
  bool satisfied = false;
  /// NSY only: the bound with the boundary sum taken over all of Z outside
  /// the inner region (always >= rhs).
  double rhs_corollary = std::numeric_limits<double>::quiet_NaN();
};

inline bool bound_holds(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-9); }

/// Exact Hamiltonian data for a model on a region, shared by the checks.
class ChainDynamics {
 public:
  ChainDynamics(ModelSpec m, Block region)
      : model_(std::move(m)), region_(std::move(region)),
        spectral_(std::make_shared<Spectral>(region_, build_sparse_hamiltonian(model_, region_))) {}

  const ModelSpec& model() const { return model_; }
  const Block& region() const { return region_; }
  const Spectral& spectral() const { return *spectral_; }

  /// Matrix-free tau_t^{region}(P); keeps the spectral data alive.
  LinearMap heisenberg(const PauliString& p, double t) const {
    detail::require(region_.contains(p.support()), "ChainDynamics: observable support outside region");
    auto sp = spectral_;
    const Block block = region_;
    return {sp->dim(), [sp, p, block, t](const CVector& v) { return sp->propagate(apply(p, block, sp->propagate(v, t)), -t); },
            true, 1.0};
  }

 private:
  ModelSpec model_;
  Block region_;
  std::shared_ptr<const Spectral> spectral_;
};

// ---------------------------------------------------------------------------
// Lieb-Robinson

/// ||[tau_t(A translated by x), B]|| on the region. Near saturation the
/// extremal spectrum clusters and Lanczos may stall; the estimate is then a
/// lower bound and the upper end of the bracket is 2 ||A|| ||B||.
inline NormEstimate lr_commutator_norm(const ChainDynamics& dyn, const PauliString& a, const PauliString& b,
                                       SiteIndex x, double t, double tol = 1e-10, std::size_t max_iter = 150) {
  const PauliString ax = a.translated(x);
  detail::require(dyn.region().contains(ax.support()) && dyn.region().contains(b.support()),
                  "lr_check: observables must lie inside the region");
  return norm_estimate(commutator_map(dyn.heisenberg(ax, t), pauli_map(b, dyn.region())), tol, max_iter);
}

/// Right-hand side 2||A|| ||B|| exp(-lambda |x| + 2 ||Phi||_lambda |t|) with Pauli norms 1.
inline double lr_rhs(const ModelSpec& m, SiteIndex x, double t, double lambda) {
  const double norm = lambda_norm(m, lambda);
  detail::require(std::isfinite(norm), "lr_check: ||Phi||_lambda is infinite for this lambda");
  return 2.0 * std::exp(-lambda * static_cast<double>(x < 0 ? -x : x) + 2.0 * norm * std::abs(t));
}

inline BoundReport lr_check(const ChainDynamics& dyn, const PauliString& a, const PauliString& b, SiteIndex x,
                            double t, double lambda) {
  const ModelSpec& m = dyn.model();
  if (!m.has_exponential_decay()) {
    throw PreconditionError("lr_check: interaction decays polynomially, ||Phi||_lambda is infinite; use nsy_check");
  }
  BoundReport rep;
  rep.rhs = lr_rhs(m, x, t, lambda);
  const NormEstimate lhs = lr_commutator_norm(dyn, a, b, x, t);
  rep.lhs = lhs.value;
  rep.lhs_upper = lhs.upper;
  rep.satisfied = bound_holds(rep.lhs_upper, rep.rhs);
  std::ostringstream os;
  os << "t=" << t << " x=" << x << " lambda=" << lambda << " model=" << m.descriptor();
  rep.params = os.str();
  return rep;
}

inline BoundReport lr_check(const ModelSpec& m, const PauliString& a, const PauliString& b, SiteIndex x, double t,
                            const Block& region, double lambda) {
  if (!m.has_exponential_decay()) {
    throw PreconditionError("lr_check: interaction decays polynomially, ||Phi||_lambda is infinite; use nsy_check");
  }
  return lr_check(ChainDynamics(m, region), a, b, x, t, lambda);
}

// ---------------------------------------------------------------------------
// NSY

/// I_t(Phi) = (2||A||/C_F) (2 C_F |t| ||Phi||_F) exp(2 C_F |t| ||Phi||_F).
inline double i_t_phi(double phi_f_norm, double c_f, double t, double a_norm = 1.0) {
  detail::require(std::isfinite(phi_f_norm) && std::isfinite(c_f) && c_f > 0, "i_t_phi: constants must be finite");
  const double u = 2.0 * c_f * std::abs(t) * phi_f_norm;
  return 2.0 * a_norm / c_f * u * std::exp(u);
}

inline double i_t_phi(const ModelSpec& m, const FFunction& f, double t, double a_norm = 1.0) {
  return i_t_phi(f_norm(m, f).value, f.c_f(), t, a_norm);
}

/// sum_{x in X} sum_{y in outer \ inner} F(|x-y|).
inline double boundary_f_sum(const Block& support, const Block& inner, const Block& outer, const FFunction& f) {
  const Block shell = outer.minus(inner);
  double s = 0;
  for (SiteIndex x : support.sites())
    for (SiteIndex y : shell.sites()) s += f(static_cast<double>(std::abs(x - y)));
  return s;
}

/// sum_{x in X} sum_{y in Z \ inner} F(|x-y|) = |X| ||F|| - sum over inner.
inline double boundary_f_sum_all(const Block& support, const Block& inner, const FFunction& f) {
  double s = 0;
  for (SiteIndex x : support.sites()) {
    double in = 0;
    for (SiteIndex y : inner.sites()) in += f(static_cast<double>(std::abs(x - y)));
    s += f.norm() - in;
  }
  return s;
}

/// ||tau_t^{outer}(A) - tau_t^{inner}(A)||, matrix-free on the outer region.
inline double nsy_lhs(const ChainDynamics& outer, const ChainDynamics& inner, const PauliString& a, double t) {
  detail::require(outer.region().contains(inner.region()), "nsy_check: inner region must be contained in the outer");
  if (inner.region() == outer.region() || t == 0.0) return 0.0;
  const LinearMap big = outer.heisenberg(a, t);
  const LinearMap small = embed_map(inner.heisenberg(a, t), inner.region(), outer.region());
  return operator_norm(difference_map(big, small));
}

/// Closed form for the gIm and A = sigma^1_x or sigma^2_x:
///   max over spins of outer\inner of 2 |sin(t sum_y J(|y-x|) s_y)|.
inline double nsy_lhs_gim_closed_form(const CouplingSpec& j, SiteIndex x, double t, const Block& inner,
                                      const Block& outer) {
  detail::require(inner.contains(x) && outer.contains(inner), "nsy closed form: need x in inner, inner in outer");
  const Block shell = outer.minus(inner);
  detail::require(shell.size() <= 24, "nsy closed form: shell exceeds 24 sites");
  std::vector<double> jy;
  for (SiteIndex y : shell.sites()) jy.push_back(coupling_value(j, y - x));
  double best = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << jy.size()); ++s) {
    double field = 0;
    for (std::size_t b = 0; b < jy.size(); ++b) field += ((s >> b) & 1u) ? -jy[b] : jy[b];
    best = std::max(best, 2.0 * std::abs(std::sin(t * field)));
  }
  return best;
}

inline BoundReport nsy_check(const ChainDynamics& outer, const ChainDynamics& inner, const PauliString& a, double t,
                             const FFunction& f) {
  const Block support = a.support();
  detail::require(inner.region().contains(support), "nsy_check: support of A not contained in the inner region");
  const ModelSpec& m = outer.model();
  const double phi_f = f_norm(m, f).value;
  const double it = i_t_phi(phi_f, f.c_f(), t);
  BoundReport rep;
  rep.lhs = nsy_lhs(outer, inner, a, t);
  rep.lhs_upper = rep.lhs;
  rep.rhs = it * boundary_f_sum(support, inner.region(), outer.region(), f);
  rep.rhs_corollary = it * boundary_f_sum_all(support, inner.region(), f);
  rep.satisfied = bound_holds(rep.lhs, rep.rhs);
  std::ostringstream os;
  os << "t=" << t << " inner=" << inner.region().to_string() << " outer=" << outer.region().to_string()
     << " A=" << a.to_string() << " model=" << m.descriptor() << " F=" << f.label();
  rep.params = os.str();
  return rep;
}

inline BoundReport nsy_check(const ModelSpec& m, const PauliString& a, double t, const Block& inner, const Block& outer,
                             const FFunction& f) {
  detail::require(outer.size() <= 13, "nsy_check: outer region exceeds 13 sites");
  return nsy_check(ChainDynamics(m, outer), ChainDynamics(m, inner), a, t, f);
}

// ---------------------------------------------------------------------------
// Light cone

struct LightCone {
  std::vector<double> times;
  std::vector<SiteIndex> offsets;
  Eigen::MatrixXd norms;  // norms(i, j) at times[i], offsets[j]
  Eigen::MatrixXd upper;  // certified upper bounds for the same entries

  CsvTable to_csv() const {
    CsvTable table({"t", "x", "norm"});
    for (std::size_t i = 0; i < times.size(); ++i)
      for (std::size_t j = 0; j < offsets.size(); ++j)
        table.add(times[i], offsets[j], norms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    return table;
  }

  /// Largest |offset| whose norm reaches `threshold` at time index i (0 if none).
  SiteIndex front(std::size_t i, double threshold) const {
    SiteIndex best = 0;
    for (std::size_t j = 0; j < offsets.size(); ++j)
      if (norms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= threshold)
        best = std::max(best, offsets[j] < 0 ? -offsets[j] : offsets[j]);
    return best;
  }

  /// Empirical propagation speed: max over t > 0 of (front(t) - front(0+)) / t
  /// using fronts strictly inside the scanned offsets.
  double empirical_velocity(double threshold) const {
    SiteIndex reach = 0;
    for (auto x : offsets) reach = std::max(reach, x < 0 ? -x : x);
    double v = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] <= 0) continue;
      const SiteIndex f = front(i, threshold);
      if (f >= reach) continue;
      v = std::max(v, static_cast<double>(f) / times[i]);
    }
    return v;
  }
};

/// Commutator norms ||[tau_t(A translated by x), B]|| over the grid.
inline LightCone light_cone_scan(const ChainDynamics& dyn, const PauliString& a, const PauliString& b,
                                 const std::vector<double>& t_grid, const std::vector<SiteIndex>& x_grid,
                                 unsigned threads = 1) {
  const auto nt = static_cast<Eigen::Index>(t_grid.size());
  const auto nx = static_cast<Eigen::Index>(x_grid.size());
  LightCone lc{t_grid, x_grid, Eigen::MatrixXd::Zero(nt, nx), Eigen::MatrixXd::Zero(nt, nx)};
  parallel_for(
      t_grid.size() * x_grid.size(),
      [&](std::size_t k) {
        const std::size_t i = k / x_grid.size();
        const std::size_t j = k % x_grid.size();
        const NormEstimate e = lr_commutator_norm(dyn, a, b, x_grid[j], t_grid[i]);
        lc.norms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.value;
        lc.upper(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.upper;
      },
      threads);
  return lc;
}

inline LightCone light_cone_scan(const ModelSpec& m, const PauliString& a, const PauliString& b,
                                 const std::vector<double>& t_grid, const std::vector<SiteIndex>& x_grid,
                                 const Block& region, unsigned threads = 1) {
  detail::require(region.size() <= kMaxDenseSites, "light_cone_scan: region exceeds 12 sites");
  return light_cone_scan(ChainDynamics(m, region), a, b, t_grid, x_grid, threads);
}

}  // namespace spinlaw
