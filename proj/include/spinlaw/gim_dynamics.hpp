#pragma once
// Closed-form dynamics of the generalized Ising model
//   H = (1/2) sum_{x != y} J(|x-y|) s3_x s3_y,
// which is diagonal in the sigma^3 basis.

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "spinlaw/couplings.hpp"
#include "spinlaw/csv.hpp"
#include "spinlaw/error.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

struct GImSystem {
  CouplingSpec coupling;
  Block region;

  /// Region [-n, n].
  static GImSystem symmetric(CouplingSpec c, SiteIndex n) { return {std::move(c), Block::interval(-n, n)}; }

  void validate() const {
    spinlaw::validate(coupling);
    detail::require(!std::holds_alternative<MeanField>(coupling), "GImSystem: MeanField is not a gIm coupling");
    detail::require(region.size() <= kMaxVectorSites, "GImSystem: region exceeds 24 sites");
  }
};

// ---------------------------------------------------------------------------
// Infinite-lattice decay products

struct DecayValue {
  double value;
  SiteIndex truncation_radius;
  double tail_bound;  // bound on |value - infinite product|
};

/// prod_{x != 0} cos(2 J(|x|) t) over Z, truncated at the smallest radius R
/// whose certified log-tail 2 * sum_{n > R} (2 J(n) t)^2 is below tol. The
/// certificate uses |log cos u| <= u^2 for |u| <= 1.
inline DecayValue decay_product(const CouplingSpec& spec, double t, double tol = 1e-12) {
  validate(spec);
  detail::require(tol > 0, "decay_product: tol must be positive");
  detail::require(!std::holds_alternative<MeanField>(spec), "decay_product: MeanField has no lattice profile");
  if (t == 0.0) return {1.0, 0, 0.0};
  auto tail = [&](SiteIndex R) { return 8.0 * t * t * square_tail_bound(spec, R); };
  auto small_angles = [&](SiteIndex R) {
    // |J| is non-increasing for the built-in profiles; sample a few terms for Custom.
    for (SiteIndex n = R + 1; n <= R + 4; ++n)
      if (2.0 * std::abs(coupling_value(spec, n) * t) > 1.0) return false;
    return true;
  };
  auto ok = [&](SiteIndex R) { return small_angles(R) && tail(R) < tol; };

  SiteIndex R = 0;
  if (auto range = coupling_range(spec)) {
    R = *range;
  } else {
    SiteIndex hi = 1;
    while (!ok(hi)) {
      hi *= 2;
      if (hi > (SiteIndex{1} << 30)) throw ConvergenceError("decay_product: tolerance unreachable");
    }
    SiteIndex lo = hi / 2;  // !ok(lo) unless lo == 0
    while (hi - lo > 1) {
      const SiteIndex mid = lo + (hi - lo) / 2;
      (ok(mid) ? hi : lo) = mid;
    }
    R = hi;
  }
  double one_side = 1.0;
  for (SiteIndex n = 1; n <= R; ++n) one_side *= std::cos(2.0 * coupling_value(spec, n) * t);
  const double value = one_side * one_side;
  const double tb = coupling_range(spec) ? 0.0 : std::abs(value) * (1.0 - std::exp(-tail(R)));
  return {value, R, tb};
}

/// (sin 2t / 2t)^2 with the value 1 at t = 0.
inline double vieta_reference(double t) {
  if (t == 0.0) return 1.0;
  const double s = std::sin(2.0 * t) / (2.0 * t);
  return s * s;
}

/// prod_{n >= 1} cos^2(2t / n^alpha).
inline DecayValue dyson_curve(double alpha, double t, double tol = 1e-12) {
  detail::require(alpha > 1.0, "dyson_curve: alpha must exceed 1 (stability)");
  return decay_product(Dyson{alpha}, t, tol);
}

/// Largest c with dyson_curve(alpha, t) <= exp(-c t^{1/alpha}) on the grid.
inline double fit_dyson_c(double alpha, const std::vector<double>& t_grid, double tol = 1e-12) {
  detail::require(alpha > 1.0, "fit_dyson_c: alpha must exceed 1 (stability)");
  double c = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    detail::require(t > 0, "fit_dyson_c: grid times must be positive");
    const double v = dyson_curve(alpha, t, tol).value;
    if (v <= 0.0) continue;  // an exact zero constrains nothing
    c = std::min(c, -std::log(v) / std::pow(t, 1.0 / alpha));
  }
  return c;
}

struct DecayCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<SiteIndex> truncation_radius;
  std::string meta;

  CsvTable to_csv() const {
    CsvTable table({"t", "value", "truncation_radius"});
    for (std::size_t i = 0; i < times.size(); ++i) table.add(times[i], values[i], truncation_radius[i]);
    return table;
  }
};

inline DecayCurve decay_curve(const CouplingSpec& spec, const std::vector<double>& times, double tol = 1e-12) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    detail::require(times[i] > times[i - 1], "decay_curve: times must be strictly increasing");
  }
  DecayCurve curve;
  curve.meta = descriptor(spec);
  for (double t : times) {
    const auto d = decay_product(spec, t, tol);
    curve.times.push_back(t);
    curve.values.push_back(d.value);
    curve.truncation_radius.push_back(d.truncation_radius);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Finite-region evolution

/// prod_{y in region, y != x} cos(2 J(|y - x|) t): the closed-form value of
/// <tau_t(s1_x)> on the sigma^1-polarized product state.
inline double region_cosine_product(const GImSystem& sys, SiteIndex x, double t) {
  double p = 1.0;
  for (SiteIndex y : sys.region.sites())
    if (y != x) p *= std::cos(2.0 * coupling_value(sys.coupling, y - x) * t);
  return p;
}

/// Diagonal energies E_s = sum_{x<y} J(|x-y|) s_x s_y cached for repeated evolution.
class DiagonalPropagator {
 public:
  explicit DiagonalPropagator(GImSystem sys) : sys_(std::move(sys)) {
    sys_.validate();
    const auto& sites = sys_.region.sites();
    const std::size_t n = sites.size();
    // bit b carries site sites[n - 1 - b]
    std::vector<std::vector<double>> jb(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) jb[a][b] = coupling_value(sys_.coupling, sites[n - 1 - a] - sites[n - 1 - b]);
    const std::uint64_t dim = sys_.region.dim();
    energies_.assign(dim, 0.0);
    double e0 = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) e0 += jb[a][b];
    energies_[0] = e0;
    for (std::uint64_t s = 1; s < dim; ++s) {
      const unsigned low = static_cast<unsigned>(std::countr_zero(s));
      const std::uint64_t prev = s ^ (std::uint64_t{1} << low);
      // flipping spin `low` from +1 to -1 changes E by -2 * s_low_old * field
      double field = 0;
      for (std::size_t b = 0; b < n; ++b) {
        if (b == low) continue;
        field += jb[low][b] * (((prev >> b) & 1u) ? -1.0 : 1.0);
      }
      energies_[s] = energies_[prev] - 2.0 * field;
    }
  }

  const GImSystem& system() const { return sys_; }
  const std::vector<double>& energies() const { return energies_; }

  CVector evolve(const CVector& v, double t) const {
    detail::require(v.size() == static_cast<Eigen::Index>(energies_.size()), "evolve_diagonal: dimension mismatch");
    CVector out(v.size());
    for (Eigen::Index s = 0; s < v.size(); ++s) {
      const double ph = -energies_[static_cast<std::size_t>(s)] * t;
      out(s) = v(s) * Complex(std::cos(ph), std::sin(ph));
    }
    return out;
  }

  StateVector evolve(const StateVector& v, double t) const {
    detail::require(v.block() == sys_.region, "evolve_diagonal: state must live on the system region");
    return StateVector(v.block(), evolve(v.amplitudes(), t));
  }

 private:
  GImSystem sys_;
  std::vector<double> energies_;
};

inline StateVector evolve_diagonal(const GImSystem& sys, const StateVector& v0, double t) {
  return DiagonalPropagator(sys).evolve(v0, t);
}

inline DensityMatrix block_state(const DiagonalPropagator& prop, const StateVector& v0, double t, const Block& block) {
  detail::require(prop.system().region.contains(block), "block_state: block not contained in region");
  detail::require(block.size() <= 10, "block_state: block exceeds 10 sites");
  return reduced_state(prop.evolve(v0, t), block);
}

inline DensityMatrix block_state(const GImSystem& sys, const StateVector& v0, double t, const Block& block) {
  return block_state(DiagonalPropagator(sys), v0, t, block);
}

inline DensityMatrix equilibrium_block(const Block& block) { return DensityMatrix::maximally_mixed(block); }

namespace detail {

/// <v| e^{i s3_x theta} sigma^a_x |v> with theta = 2 t P_x and
/// P_x = sum_{y != x} J(|x-y|) s3_y, evaluated matrix-free (a = 1 or 2).
inline double heisenberg_precession(const GImSystem& sys, SiteIndex x, double t, const CVector& v, Axis a) {
  const auto& sites = sys.region.sites();
  const std::size_t n = sites.size();
  const unsigned bx = sys.region.bit_of(x);
  std::vector<double> jx(n, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    if (b != bx) jx[b] = coupling_value(sys.coupling, sites[n - 1 - b] - x);
  }
  const std::uint64_t flip = std::uint64_t{1} << bx;
  Complex acc = 0;
  for (std::uint64_t s = 0; s < static_cast<std::uint64_t>(v.size()); ++s) {
    double p = 0;
    for (std::size_t b = 0; b < n; ++b)
      if (b != bx) p += jx[b] * (((s >> b) & 1u) ? -1.0 : 1.0);
    const double theta = 2.0 * t * p;
    const bool down = (s >> bx) & 1u;
    // sigma^1 |s> = |s^x>;  sigma^2 |up> = i|down>, sigma^2 |down> = -i|up>
    Complex amp = v(static_cast<Eigen::Index>(s));
    if (a == Axis::Y) amp *= down ? Complex(0, -1) : Complex(0, 1);
    const double s3_after = down ? 1.0 : -1.0;
    amp *= std::polar(1.0, s3_after * theta);
    acc += std::conj(v(static_cast<Eigen::Index>(s ^ flip))) * amp;
  }
  return acc.real();
}

}  // namespace detail

/// (<tau_t(s1_x)>, <tau_t(s2_x)>) in `state`, computed from the closed-form
/// Heisenberg operators
///   tau_t(s1_x) = s1_x cos(2 P_x t) - s2_x sin(2 P_x t),
///   tau_t(s2_x) = s2_x cos(2 P_x t) + s1_x sin(2 P_x t),
/// and from Schrodinger evolution of the state; throws CheckFailure if the
/// two routes differ by more than 1e-10.
inline std::pair<double, double> precession_observable(const GImSystem& sys, SiteIndex x, double t,
                                                       const StateVector& state) {
  sys.validate();
  detail::require(sys.region.contains(x), "precession_observable: site not in region");
  detail::require(state.block() == sys.region, "precession_observable: state must live on the region");
  const double h1 = detail::heisenberg_precession(sys, x, t, state.amplitudes(), Axis::X);
  const double h2 = detail::heisenberg_precession(sys, x, t, state.amplitudes(), Axis::Y);
  const StateVector vt = evolve_diagonal(sys, state, t);
  const double s1 = expectation(vt, PauliString::single(x, Axis::X)).real();
  const double s2 = expectation(vt, PauliString::single(x, Axis::Y)).real();
  detail::ensure(std::abs(h1 - s1) <= 1e-10 && std::abs(h2 - s2) <= 1e-10,
                 "precession_observable: Heisenberg and Schrodinger routes disagree");
  return {h1, h2};
}

}  // namespace spinlaw
