#pragma once
// Two-branch sequential measurement model: history weights, posteriors,
// mean-entropy bookkeeping under collapse, purification, an explicit
// apparatus simulation, and the finite-system collapse contrast.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "spinlaw/csv.hpp"
#include "spinlaw/entropy_lab.hpp"
#include "spinlaw/error.hpp"
#include "spinlaw/linalg.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

struct MeasurementModel {
  double mu;  // weight of branch 1
  double p1;  // per-step probability of outcome 0 in branch 1
  double p2;  // same for branch 2
  std::size_t n;

  void validate() const {
    detail::require(mu > 0.0 && mu < 1.0, "MeasurementModel: mu must lie in (0, 1)");
    detail::require(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0, "MeasurementModel: p1, p2 must lie in [0, 1]");
  }
};

struct HistoryWeight {
  double weight;     // W(alpha)
  double posterior;  // probability of branch 1 given alpha; NaN if impossible
  bool possible;
};

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0, comp_ = 0;
};

/// log(p^l (1-p)^(n-l)) with 0 log 0 = 0.
inline double log_branch(double p, std::size_t l, std::size_t n) {
  auto term = [](double q, std::size_t k) {
    if (k == 0) return 0.0;
    return q > 0 ? static_cast<double>(k) * std::log(q) : -std::numeric_limits<double>::infinity();
  };
  return term(p, l) + term(1.0 - p, n - l);
}

inline double binomial_pmf(std::size_t n, double p, std::size_t l) {
  if (p == 0.0) return l == 0 ? 1.0 : 0.0;
  if (p == 1.0) return l == n ? 1.0 : 0.0;
  boost::math::binomial_distribution<double> b(static_cast<double>(n), p);
  return boost::math::pdf(b, static_cast<double>(l));
}

}  // namespace detail

/// Weight and branch-1 posterior of any history with l zeros among n steps.
inline HistoryWeight history_weight_l(const MeasurementModel& m, std::size_t l) {
  m.validate();
  detail::require(l <= m.n, "history_weight: more zeros than steps");
  if (m.n <= 50) {
    const double w1 = m.mu * std::pow(m.p1, static_cast<double>(l)) * std::pow(1.0 - m.p1, static_cast<double>(m.n - l));
    const double w2 =
        (1.0 - m.mu) * std::pow(m.p2, static_cast<double>(l)) * std::pow(1.0 - m.p2, static_cast<double>(m.n - l));
    const double w = w1 + w2;
    if (w == 0.0) return {0.0, std::numeric_limits<double>::quiet_NaN(), false};
    return {w, w1 / w, true};
  }
  const double a = std::log(m.mu) + detail::log_branch(m.p1, l, m.n);
  const double b = std::log1p(-m.mu) + detail::log_branch(m.p2, l, m.n);
  const double hi = std::max(a, b);
  if (hi == -std::numeric_limits<double>::infinity()) return {0.0, std::numeric_limits<double>::quiet_NaN(), false};
  const double log_w = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
  return {std::exp(log_w), std::exp(a - log_w), true};
}

inline HistoryWeight history_weight(const MeasurementModel& m, const std::vector<std::uint8_t>& alpha) {
  detail::require(alpha.size() == m.n, "history_weight: history length must equal n");
  std::size_t zeros = 0;
  for (auto b : alpha) {
    detail::require(b == 0 || b == 1, "history_weight: entries must be 0 or 1");
    zeros += (b == 0);
  }
  return history_weight_l(m, zeros);
}

/// Probability mass of the class of histories with l zeros:
/// mu Bin(n, p1)(l) + (1 - mu) Bin(n, p2)(l).
inline double class_mass(const MeasurementModel& m, std::size_t l) {
  return m.mu * detail::binomial_pmf(m.n, m.p1, l) + (1.0 - m.mu) * detail::binomial_pmf(m.n, m.p2, l);
}

/// sum over histories of f(l) * W, aggregated over l.
template <class F>
double aggregate(const MeasurementModel& m, F&& f) {
  detail::CompensatedSum s;
  for (std::size_t l = 0; l <= m.n; ++l) {
    const double mass = class_mass(m, l);
    if (mass > 0) s.add(mass * f(l));
  }
  return s.value();
}

/// sum_alpha W(alpha); throws CheckFailure unless within 1e-12 of 1.
inline double weight_normalization(const MeasurementModel& m) {
  m.validate();
  const double total = aggregate(m, [](std::size_t) { return 1.0; });
  detail::ensure(std::abs(total - 1.0) <= 1e-12, "weight_normalization: weights do not sum to 1");
  return total;
}

/// Per-branch sums sum_alpha p_i^l (1-p_i)^(n-l) (each should be 1).
inline std::pair<double, double> branch_normalizations(const MeasurementModel& m) {
  detail::CompensatedSum a, b;
  for (std::size_t l = 0; l <= m.n; ++l) {
    a.add(detail::binomial_pmf(m.n, m.p1, l));
    b.add(detail::binomial_pmf(m.n, m.p2, l));
  }
  return {a.value(), b.value()};
}

/// sum_alpha W(alpha) mu_alpha, using the posteriors from history_weight.
inline double posterior_mean(const MeasurementModel& m) {
  m.validate();
  return aggregate(m, [&m](std::size_t l) {
    const auto h = history_weight_l(m, l);
    return h.possible ? h.posterior : 0.0;
  });
}

/// Raw sum over all 2^n histories of f(alpha, W, mu_alpha); n <= 20.
template <class F>
double enumerate_histories(const MeasurementModel& m, F&& f) {
  detail::require(m.n <= 20, "enumerate_histories: n exceeds 20");
  detail::CompensatedSum s;
  std::vector<std::uint8_t> alpha(m.n);
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << m.n); ++i) {
    for (std::size_t k = 0; k < m.n; ++k) alpha[k] = static_cast<std::uint8_t>((i >> k) & 1u);
    const auto h = history_weight(m, alpha);
    if (h.possible) s.add(f(alpha, h.weight, h.posterior));
  }
  return s.value();
}

struct BranchEntropies {
  double s1;
  double s2;
};

struct MeanEntropyAverage {
  double s_av;
  double s_initial;
};

/// Average over histories of the collapsed state's mean entropy,
/// sum_alpha W [mu_alpha s1 + (1 - mu_alpha) s2], against mu s1 + (1 - mu) s2.
inline MeanEntropyAverage mean_entropy_average(const MeasurementModel& m, const BranchEntropies& s) {
  m.validate();
  detail::require(s.s1 >= 0 && s.s1 <= std::numbers::ln2 + 1e-15 && s.s2 >= 0 && s.s2 <= std::numbers::ln2 + 1e-15,
                  "mean_entropy_average: branch entropies must lie in [0, log 2]");
  MeanEntropyAverage out;
  out.s_initial = m.mu * s.s1 + (1.0 - m.mu) * s.s2;
  if (m.n == 0) {
    out.s_av = out.s_initial;
    return out;
  }
  out.s_av = aggregate(m, [&](std::size_t l) {
    const auto h = history_weight_l(m, l);
    return h.posterior * s.s1 + (1.0 - h.posterior) * s.s2;
  });
  detail::ensure(std::abs(out.s_av - out.s_initial) <= 1e-12, "mean_entropy_average: mean entropy not conserved on average");
  return out;
}

struct PurificationRow {
  std::size_t n;
  double undecided_mass;
  double mean_l_over_n_branch1;
  double mean_l_over_n_branch2;
};

/// W-probability of histories with min(mu_alpha, 1 - mu_alpha) > eps, plus
/// the expected zero fraction under each branch.
inline PurificationRow purification_stats(const MeasurementModel& m, double eps) {
  m.validate();
  detail::require(m.p1 != m.p2, "purification_stats: p1 == p2, branches are indistinguishable");
  detail::require(eps >= 0 && eps < 0.5, "purification_stats: eps must lie in [0, 0.5)");
  PurificationRow row{m.n, 0, 0, 0};
  row.undecided_mass = aggregate(m, [&](std::size_t l) {
    const auto h = history_weight_l(m, l);
    return std::min(h.posterior, 1.0 - h.posterior) > eps ? 1.0 : 0.0;
  });
  if (m.n > 0) {
    detail::CompensatedSum a, b;
    for (std::size_t l = 0; l <= m.n; ++l) {
      const double frac = static_cast<double>(l) / static_cast<double>(m.n);
      a.add(detail::binomial_pmf(m.n, m.p1, l) * frac);
      b.add(detail::binomial_pmf(m.n, m.p2, l) * frac);
    }
    row.mean_l_over_n_branch1 = a.value();
    row.mean_l_over_n_branch2 = b.value();
  }
  return row;
}

inline CsvTable purification_table(const std::vector<PurificationRow>& rows) {
  CsvTable t({"n", "undecided_mass", "mean_l_over_n_branch1", "mean_l_over_n_branch2"});
  for (const auto& r : rows)
    t.add(static_cast<std::uint64_t>(r.n), r.undecided_mass, r.mean_l_over_n_branch1, r.mean_l_over_n_branch2);
  return t;
}

// ---------------------------------------------------------------------------
// Apparatus

struct ApparatusResult {
  /// weights[i] = ||v(alpha)||^2 with alpha_k = bit k of i.
  std::vector<double> weights;
  /// Largest |off-diagonal| entry of the pointer reduced density matrix
  /// (computed for n <= 8, else NaN).
  double max_pointer_coherence;
};

/// Explicit state-vector simulation: per branch, n system spins each in
/// sqrt(p)|up> + sqrt(1-p)|down> (outcome 0 = up) and n pointer spins
/// starting down; V_k = P_k + (1 - P_k) flip_k is applied for k = 1..n and the
/// pointer configurations are read off. Throws CheckFailure if any weight
/// differs from history_weight by more than 1e-12.
inline ApparatusResult apparatus_simulate(const MeasurementModel& m) {
  m.validate();
  detail::require(m.n <= 10, "apparatus_simulate: n exceeds 10 (state space 2^(2n))");
  const std::size_t n = m.n;
  // bit layout of the 2n-qubit basis index: system spin k at bit (2n-1-k),
  // pointer spin k at bit (n-1-k); i.e. sites 0..n-1 system, n..2n-1 pointer.
  const std::uint64_t dim = std::uint64_t{1} << (2 * n);
  auto sys_bit = [n](std::size_t k) { return std::uint64_t{1} << (2 * n - 1 - k); };
  auto ptr_bit = [n](std::size_t k) { return std::uint64_t{1} << (n - 1 - k); };

  auto branch_vector = [&](double p) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    std::uint64_t all_ptr_down = 0;
    for (std::size_t k = 0; k < n; ++k) all_ptr_down |= ptr_bit(k);
    for (std::uint64_t sys = 0; sys < (std::uint64_t{1} << n); ++sys) {
      double amp = 1.0;
      std::uint64_t idx = all_ptr_down;
      for (std::size_t k = 0; k < n; ++k) {
        const bool down = (sys >> k) & 1u;
        amp *= down ? std::sqrt(1.0 - p) : std::sqrt(p);
        if (down) idx |= sys_bit(k);
      }
      v(static_cast<Eigen::Index>(idx)) = amp;
    }
    for (std::size_t k = 0; k < n; ++k) {
      CVector next(v.size());
      for (std::uint64_t s = 0; s < dim; ++s) {
        const std::uint64_t target = (s & sys_bit(k)) ? (s ^ ptr_bit(k)) : s;
        next(static_cast<Eigen::Index>(target)) = v(static_cast<Eigen::Index>(s));
      }
      v = std::move(next);
    }
    return v;
  };
  const CVector v1 = branch_vector(m.p1);
  const CVector v2 = branch_vector(m.p2);

  // pointer spin k down <=> outcome alpha_k = 0
  auto alpha_of_pointer = [&](std::uint64_t s) {
    std::uint64_t a = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (!(s & ptr_bit(k))) a |= std::uint64_t{1} << k;
    return a;
  };

  ApparatusResult out;
  out.weights.assign(std::uint64_t{1} << n, 0.0);
  std::vector<double> w1(out.weights.size(), 0.0), w2(out.weights.size(), 0.0);
  for (std::uint64_t s = 0; s < dim; ++s) {
    const auto a = alpha_of_pointer(s);
    w1[a] += std::norm(v1(static_cast<Eigen::Index>(s)));
    w2[a] += std::norm(v2(static_cast<Eigen::Index>(s)));
  }
  std::vector<std::uint8_t> alpha(n);
  for (std::uint64_t a = 0; a < out.weights.size(); ++a) {
    out.weights[a] = m.mu * w1[a] + (1.0 - m.mu) * w2[a];
    for (std::size_t k = 0; k < n; ++k) alpha[k] = static_cast<std::uint8_t>((a >> k) & 1u);
    const auto h = history_weight(m, alpha);
    detail::ensure(std::abs(out.weights[a] - h.weight) <= 1e-12, "apparatus_simulate: weight disagrees with history_weight");
  }

  // Pointer reduced state of the mixture mu |v1><v1| + (1 - mu) |v2><v2|.
  out.max_pointer_coherence = std::numeric_limits<double>::quiet_NaN();
  if (n <= 8) {
    Block whole = Block::interval(0, static_cast<SiteIndex>(2 * n) - 1);
    Block pointers = n == 0 ? Block{} : Block::interval(static_cast<SiteIndex>(n), static_cast<SiteIndex>(2 * n) - 1);
    const auto r1 = reduced_state(StateVector::normalized(whole, v1), pointers);
    const auto r2 = reduced_state(StateVector::normalized(whole, v2), pointers);
    const CMatrix rho = m.mu * r1.matrix() + (1.0 - m.mu) * r2.matrix();
    double off = 0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
      for (Eigen::Index j = 0; j < rho.cols(); ++j)
        if (i != j) off = std::max(off, std::abs(rho(i, j)));
    out.max_pointer_coherence = off;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-system collapse

struct CollapseReport {
  double s_av;                 // sum_alpha Tr(rho P_alpha) S(rho_alpha)
  double s;                    // S(rho)
  std::vector<double> probs;   // Tr(rho P_alpha)
  bool strict_expected;        // at least two branches carry weight
};

/// Averaged entropy after collapse onto an orthogonal complete family of
/// projectors, for a state decoherent with respect to that family. For such
/// a state S(rho) - S_av equals the Shannon entropy of the branch weights, so
/// the reduction is strict exactly when two or more branches carry weight.
inline CollapseReport finite_collapse_average(const DensityMatrix& rho, const std::vector<Operator>& projectors) {
  detail::require(!projectors.empty(), "finite_collapse_average: no projectors");
  const auto d = rho.dim();
  CMatrix total = CMatrix::Zero(d, d);
  for (std::size_t a = 0; a < projectors.size(); ++a) {
    const CMatrix& pa = projectors[a].matrix();
    detail::require(projectors[a].block() == rho.block(), "finite_collapse_average: projector block mismatch");
    detail::require(detail::max_abs(pa * pa - pa) <= 1e-12 && detail::max_abs(pa - pa.adjoint()) <= 1e-12,
                    "finite_collapse_average: not an orthogonal projector");
    for (std::size_t b = a + 1; b < projectors.size(); ++b) {
      detail::require(detail::max_abs(pa * projectors[b].matrix()) <= 1e-12,
                      "finite_collapse_average: projectors are not mutually orthogonal");
      detail::require(operator_norm(CMatrix(projectors[b].matrix() * rho.matrix() * pa)) < 1e-12,
                      "finite_collapse_average: state is not decoherent for the projectors");
    }
    total += pa;
  }
  detail::require(detail::max_abs(total - CMatrix::Identity(d, d)) <= 1e-12,
                  "finite_collapse_average: projectors do not sum to the identity");

  CollapseReport rep{};
  rep.s = von_neumann(rho);
  std::size_t weighted = 0;
  for (const auto& p : projectors) {
    const double w = expectation(rho, p).real();
    rep.probs.push_back(w);
    if (w <= 1e-12) continue;
    ++weighted;
    const CMatrix collapsed = p.matrix() * rho.matrix() * p.matrix() / w;
    rep.s_av += w * von_neumann(DensityMatrix(kTrusted, rho.block(), collapsed));
  }
  rep.strict_expected = weighted >= 2;
  detail::ensure(rep.s_av <= rep.s + 1e-12, "finite_collapse_average: collapse increased the entropy");
  if (rep.strict_expected) {
    detail::ensure(rep.s_av < rep.s - 1e-12, "finite_collapse_average: expected a strict entropy reduction");
  }
  return rep;
}

struct SpectrumReport {
  double max_difference;
  bool satisfied;
};

/// AA^dagger and A^dagger A have the same spectrum (within 1e-10).
inline SpectrumReport svd_spectrum_check(const Operator& a) {
  RVector e1 = hermitian_eigenvalues(a.matrix() * a.matrix().adjoint());
  RVector e2 = hermitian_eigenvalues(a.matrix().adjoint() * a.matrix());
  std::sort(e1.begin(), e1.end());
  std::sort(e2.begin(), e2.end());
  SpectrumReport rep{(e1 - e2).cwiseAbs().maxCoeff(), false};
  rep.satisfied = rep.max_difference <= 1e-10;
  detail::ensure(rep.satisfied, "svd_spectrum_check: spectra of A A^dagger and A^dagger A differ");
  return rep;
}

}  // namespace spinlaw
