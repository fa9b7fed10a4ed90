#pragma once
// Coupling functions J(|x|), F-functions and the interaction norms that enter
// the locality bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "spinlaw/error.hpp"
#include "spinlaw/pauli_core.hpp"

namespace spinlaw {

struct Exponential {
  double xi;
};
struct Dyson {
  double alpha;
};
struct FiniteRange {
  double J;
  SiteIndex L;
};
/// Volume-normalized interaction; the 1/(4|region|) factor belongs to the
/// consumer, so this variant has no lattice profile of its own.
struct MeanField {
  double a;
  double c;
};
/// table[r-1] = J(r) for r = 1..table.size(); beyond the table `tail(r)` if
/// present, else zero.
struct Custom {
  std::vector<double> table;
  std::function<double(SiteIndex)> tail;
  std::string label = "custom";
};

using CouplingSpec = std::variant<Exponential, Dyson, FiniteRange, MeanField, Custom>;

inline CouplingSpec zero_coupling() { return FiniteRange{0.0, 1}; }

inline void validate(const CouplingSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          detail::require(s.xi > 1.0, "Exponential coupling requires xi > 1");
        } else if constexpr (std::is_same_v<T, Dyson>) {
          detail::require(s.alpha > 1.0, "Dyson coupling requires alpha > 1");
        } else if constexpr (std::is_same_v<T, FiniteRange>) {
          detail::require(s.L >= 1, "FiniteRange coupling requires L >= 1");
          detail::require(std::isfinite(s.J), "FiniteRange coupling requires finite J");
        } else if constexpr (std::is_same_v<T, MeanField>) {
          detail::require(std::isfinite(s.a) && std::isfinite(s.c), "MeanField coupling requires finite a, c");
        } else {
          for (double v : s.table) detail::require(std::isfinite(v), "Custom coupling table must be finite");
        }
      },
      spec);
}

inline std::string descriptor(const CouplingSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Exponential>) os << "exponential(xi=" << s.xi << ")";
        else if constexpr (std::is_same_v<T, Dyson>) os << "dyson(alpha=" << s.alpha << ")";
        else if constexpr (std::is_same_v<T, FiniteRange>) os << "finite_range(J=" << s.J << ";L=" << s.L << ")";
        else if constexpr (std::is_same_v<T, MeanField>) os << "mean_field(a=" << s.a << ";c=" << s.c << ")";
        else os << s.label;
      },
      spec);
  return os.str();
}

/// J(|x|); zero at x = 0. For MeanField this is the bare constant c (the
/// sigma^3 sigma^3 strength) before volume normalization.
inline double coupling_value(const CouplingSpec& spec, SiteIndex x) {
  if (x == 0) return 0.0;
  const SiteIndex r = x < 0 ? -x : x;
  return std::visit(
      [r](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Exponential>) return std::pow(s.xi, -static_cast<double>(r));
        else if constexpr (std::is_same_v<T, Dyson>) return std::pow(static_cast<double>(r), -s.alpha);
        else if constexpr (std::is_same_v<T, FiniteRange>) return r <= s.L ? s.J : 0.0;
        else if constexpr (std::is_same_v<T, MeanField>) return s.c;
        else {
          if (static_cast<std::size_t>(r) <= s.table.size()) return s.table[static_cast<std::size_t>(r - 1)];
          return s.tail ? s.tail(r) : 0.0;
        }
      },
      spec);
}

/// Largest r with a nonzero coupling, or nullopt if the support is unbounded.
inline std::optional<SiteIndex> coupling_range(const CouplingSpec& spec) {
  if (const auto* f = std::get_if<FiniteRange>(&spec)) return f->J == 0.0 ? 0 : f->L;
  if (const auto* c = std::get_if<Custom>(&spec)) {
    if (c->tail) return std::nullopt;
    SiteIndex last = 0;
    for (std::size_t i = 0; i < c->table.size(); ++i)
      if (c->table[i] != 0.0) last = static_cast<SiteIndex>(i + 1);
    return last;
  }
  return std::nullopt;
}

struct SeriesValue {
  double value;
  SiteIndex radius;
  double tail_bound;
};

namespace detail {

/// Bounds on sum_{n > R} n^{-p} for p > 1 from convexity:
/// trapezoid gives a lower bound, midpoint an upper bound.
inline std::pair<double, double> power_tail_bounds(SiteIndex R, double p) {
  const double r1 = static_cast<double>(R + 1);
  const double lower = std::pow(r1, 1.0 - p) / (p - 1.0) + 0.5 * std::pow(r1, -p);
  const double upper = std::pow(r1 - 0.5, 1.0 - p) / (p - 1.0);
  return {lower, upper};
}

/// Cauchy-doubling summation of sum_{r >= 1} f(r) beyond a finite prefix.
inline SeriesValue doubling_sum(const std::function<double(SiteIndex)>& f, SiteIndex start, double rel_tol,
                                const std::string& what) {
  double sum = 0;
  SiteIndex r = 1;
  SiteIndex R = std::max<SiteIndex>(start, 16);
  for (; r <= R; ++r) sum += f(r);
  for (int k = 0; k < 26; ++k) {
    double chunk = 0;
    for (; r <= 2 * R; ++r) chunk += f(r);
    sum += chunk;
    R *= 2;
    if (std::abs(chunk) <= rel_tol * std::abs(sum)) return {sum, R, std::abs(chunk)};
  }
  throw ConvergenceError(what + ": partial sums fail the Cauchy test");
}

}  // namespace detail

/// sum over x != 0 in Z of |J(|x|)|, with the truncation radius and a bound on
/// the neglected part (certified for Exponential, Dyson, finite supports).
inline SeriesValue summability(const CouplingSpec& spec) {
  validate(spec);
  detail::require(!std::holds_alternative<MeanField>(spec), "summability: MeanField is volume-normalized");
  constexpr double kRel = 1e-12;
  if (const auto* e = std::get_if<Exponential>(&spec)) {
    double sum = 0;
    SiteIndex R = 0;
    double tail = 2.0 / (e->xi - 1.0);
    while (tail > kRel * std::max(sum, 1e-300)) {
      ++R;
      sum += 2.0 * std::pow(e->xi, -static_cast<double>(R));
      tail = 2.0 * std::pow(e->xi, -static_cast<double>(R)) / (e->xi - 1.0);
    }
    return {sum, R, tail};
  }
  if (const auto* d = std::get_if<Dyson>(&spec)) {
    double sum = 0;
    SiteIndex R = 0;
    for (;;) {
      ++R;
      sum += std::pow(static_cast<double>(R), -d->alpha);
      if (R < 8) continue;
      const auto [lo, hi] = detail::power_tail_bounds(R, d->alpha);
      if (hi - lo <= kRel * sum || R > (SiteIndex{1} << 24)) {
        return {2.0 * (sum + 0.5 * (lo + hi)), R, hi - lo};
      }
    }
  }
  if (auto range = coupling_range(spec)) {
    double sum = 0;
    for (SiteIndex r = 1; r <= *range; ++r) sum += 2.0 * std::abs(coupling_value(spec, r));
    return {sum, *range, 0.0};
  }
  const auto& c = std::get<Custom>(spec);
  auto res = detail::doubling_sum([&](SiteIndex r) { return 2.0 * std::abs(coupling_value(spec, r)); },
                                  static_cast<SiteIndex>(c.table.size()), 1e-11, "summability");
  return res;
}

/// Upper bound on sum_{n > R} J(n)^2 (one side of the lattice).
inline double square_tail_bound(const CouplingSpec& spec, SiteIndex R) {
  if (const auto* e = std::get_if<Exponential>(&spec)) {
    return std::pow(e->xi, -2.0 * static_cast<double>(R)) / (e->xi * e->xi - 1.0);
  }
  if (const auto* d = std::get_if<Dyson>(&spec)) {
    return detail::power_tail_bounds(R, 2.0 * d->alpha).second;
  }
  if (auto range = coupling_range(spec)) {
    double sum = 0;
    for (SiteIndex r = R + 1; r <= *range; ++r) sum += std::pow(coupling_value(spec, r), 2);
    return sum;
  }
  detail::require(!std::holds_alternative<MeanField>(spec), "square_tail_bound: MeanField has no lattice profile");
  // Custom with an unbounded tail: no certificate available, estimate by doubling.
  double chunk_total = 0;
  SiteIndex r = R + 1;
  SiteIndex hi = std::max<SiteIndex>(2 * R, R + 16);
  for (int k = 0; k < 26; ++k) {
    double chunk = 0;
    for (; r <= hi; ++r) chunk += std::pow(coupling_value(spec, r), 2);
    chunk_total += chunk;
    if (chunk <= 1e-3 * chunk_total || chunk_total == 0.0) return 2.0 * chunk_total;
    hi *= 2;
  }
  throw ConvergenceError("square_tail_bound: custom coupling shows no decay");
}

// ---------------------------------------------------------------------------
// Interactions

enum class ModelKind { GIm, XY, Heisenberg };

inline std::string model_name(ModelKind k) {
  switch (k) {
    case ModelKind::GIm: return "gim";
    case ModelKind::XY: return "xy";
    case ModelKind::Heisenberg: return "heisenberg";
  }
  return "?";
}

/// Two-body translation-invariant interaction. With pair sums
///   gIm:        H = sum_{x<y} J2(y-x) s3 s3
///   XY:         H = -sum_{x<y} J1(y-x) (s1 s1 + s2 s2)
///   Heisenberg: H = -sum_{x<y} [J1(y-x) (s1 s1 + s2 s2) + J2(y-x) s3 s3]
/// The gIm sign follows the Ising form used for its closed-form dynamics.
struct ModelSpec {
  ModelKind kind = ModelKind::GIm;
  CouplingSpec j1 = zero_coupling();
  CouplingSpec j2 = zero_coupling();

  static ModelSpec gim(CouplingSpec j) { return {ModelKind::GIm, zero_coupling(), std::move(j)}; }
  static ModelSpec xy(CouplingSpec j) { return {ModelKind::XY, std::move(j), zero_coupling()}; }
  static ModelSpec heisenberg(CouplingSpec j1, CouplingSpec j2) {
    return {ModelKind::Heisenberg, std::move(j1), std::move(j2)};
  }

  void validate() const {
    spinlaw::validate(j1);
    spinlaw::validate(j2);
    detail::require(!std::holds_alternative<MeanField>(j1) && !std::holds_alternative<MeanField>(j2),
                    "ModelSpec: MeanField couplings are not lattice interactions");
  }

  /// ||Phi({x, x+r})||.
  double bond_norm(SiteIndex r) const {
    if (r == 0) return 0.0;
    const double a = kind == ModelKind::GIm ? 0.0 : coupling_value(j1, r);
    const double b = kind == ModelKind::XY ? 0.0 : coupling_value(j2, r);
    // Eigenvalues of a(s1 s1 + s2 s2) + b s3 s3 are b, b, -b + 2a, -b - 2a.
    return std::max({std::abs(b), std::abs(b - 2 * a), std::abs(b + 2 * a)});
  }

  std::optional<SiteIndex> range() const {
    auto r1 = kind == ModelKind::GIm ? std::optional<SiteIndex>(0) : coupling_range(j1);
    auto r2 = kind == ModelKind::XY ? std::optional<SiteIndex>(0) : coupling_range(j2);
    if (!r1 || !r2) return std::nullopt;
    return std::max(*r1, *r2);
  }

  bool has_exponential_decay() const {
    auto ok = [](const CouplingSpec& c) {
      return std::holds_alternative<Exponential>(c) || coupling_range(c).has_value();
    };
    return (kind == ModelKind::GIm || ok(j1)) && (kind == ModelKind::XY || ok(j2));
  }

  /// Decay rate bound: bond norms are O(exp(-rate * r)); infinity for finite range.
  double exponential_rate() const {
    double rate = std::numeric_limits<double>::infinity();
    auto take = [&rate](const CouplingSpec& c) {
      if (const auto* e = std::get_if<Exponential>(&c)) rate = std::min(rate, std::log(e->xi));
    };
    if (kind != ModelKind::GIm) take(j1);
    if (kind != ModelKind::XY) take(j2);
    return rate;
  }

  std::string descriptor() const {
    switch (kind) {
      case ModelKind::GIm: return "gim:" + spinlaw::descriptor(j2);
      case ModelKind::XY: return "xy:" + spinlaw::descriptor(j1);
      case ModelKind::Heisenberg:
        return "heisenberg:" + spinlaw::descriptor(j1) + "/" + spinlaw::descriptor(j2);
    }
    return "?";
  }
};

using InteractionSpec = ModelSpec;

/// ||Phi||_lambda = sum_{x != 0} ||Phi({0,x})|| e^{lambda |x|}; +infinity when divergent.
inline double lambda_norm(const ModelSpec& m, double lambda) {
  detail::require(lambda > 0, "lambda_norm: lambda must be positive");
  m.validate();
  if (auto range = m.range()) {
    double s = 0;
    for (SiteIndex r = 1; r <= *range; ++r) s += 2.0 * m.bond_norm(r) * std::exp(lambda * static_cast<double>(r));
    return s;
  }
  if (!m.has_exponential_decay() || lambda >= m.exponential_rate()) {
    return std::numeric_limits<double>::infinity();
  }
  // Each coupling is a geometric series (or finite); sum until the geometric
  // remainder is negligible. Bond norm is at most 2|J1| + |J2|, each of which
  // decays at least as fast as exp(-rate * r).
  const double q = std::exp(lambda - m.exponential_rate());
  double s = 0;
  for (SiteIndex r = 1;; ++r) {
    const double term = 2.0 * m.bond_norm(r) * std::exp(lambda * static_cast<double>(r));
    s += term;
    // Remainder of sum_{r' > r}: the envelope C q^{r'} with C q^r >= term / 3 is conservative.
    const double envelope = 3.0 * term * q / (1.0 - q);
    if (r > 4 && envelope <= 1e-15 * s) return s;
    if (r > 100000) return s;
  }
}

struct VelocityResult {
  double velocity;
  double lambda;
};

/// min over the grid of 2 ||Phi||_lambda / lambda.
inline VelocityResult lr_velocity(const ModelSpec& m, const std::vector<double>& lambda_grid) {
  VelocityResult best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()};
  for (double l : lambda_grid) {
    const double norm = lambda_norm(m, l);
    if (!std::isfinite(norm)) continue;
    const double v = 2.0 * norm / l;
    if (v < best.velocity) best = {v, l};
  }
  if (!std::isfinite(best.velocity)) {
    throw PreconditionError("lr_velocity: ||Phi||_lambda diverges on every grid point");
  }
  return best;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// F-functions

struct FConstants {
  double norm;               // ||F||
  double c_f;                // C_F
  SiteIndex norm_window;     // radius at which ||F|| was stationary
  SiteIndex c_f_window;      // largest separation sampled for C_F
};

namespace detail {

/// g(d) = sum_z F(|z|) F(|z - d|) / F(d), with the z window grown by doubling.
inline double convolution_ratio(const std::function<double(double)>& f, SiteIndex d, double rel_tol) {
  auto sum_window = [&](SiteIndex w) {
    double s = 0;
    for (SiteIndex z = -w; z <= d + w; ++z) {
      const double dz = static_cast<double>(z < 0 ? -z : z);
      const double dzd = static_cast<double>(z - d < 0 ? d - z : z - d);
      s += f(dz) * f(dzd);
    }
    return s;
  };
  SiteIndex w = 16;
  double prev = sum_window(w);
  for (int k = 0; k < 22; ++k) {
    w *= 2;
    const double cur = sum_window(w);
    if (std::abs(cur - prev) <= rel_tol * cur) return cur / f(static_cast<double>(d));
    prev = cur;
  }
  throw ConvergenceError("F-function: convolution sum not stationary");
}

}  // namespace detail

/// sup_x sum_y F(d(x,y)) and the convolution constant C_F on Z, both by
/// windowed doubling. Separations d where F(d) = 0 are excluded from C_F.
inline FConstants f_function_constants(const std::function<double(double)>& f, double norm_tol = 1e-9,
                                       double cf_tol = 1e-6, SiteIndex max_separation = 4096) {
  FConstants out{};
  {
    double s = f(0.0);
    SiteIndex r = 1;
    SiteIndex R = 16;
    for (; r <= R; ++r) s += 2.0 * f(static_cast<double>(r));
    bool done = false;
    for (int k = 0; k < 26 && !done; ++k) {
      double chunk = 0;
      for (; r <= 2 * R; ++r) chunk += 2.0 * f(static_cast<double>(r));
      s += chunk;
      R *= 2;
      done = chunk <= norm_tol * s;
    }
    if (!done) throw ConvergenceError("F-function: ||F|| not stationary under window doubling");
    out.norm = s;
    out.norm_window = R;
  }
  double sup = 0;
  SiteIndex d = 0;
  SiteIndex D = 8;
  for (; d <= D; ++d)
    if (f(static_cast<double>(d)) > 0) sup = std::max(sup, detail::convolution_ratio(f, d, 1e-10));
  for (;;) {
    if (2 * D > max_separation) throw ConvergenceError("F-function: C_F not stationary (divergence suspected)");
    double next = sup;
    for (; d <= 2 * D; ++d)
      if (f(static_cast<double>(d)) > 0) next = std::max(next, detail::convolution_ratio(f, d, 1e-10));
    D *= 2;
    if (next - sup <= cf_tol * next) {
      out.c_f = next;
      out.c_f_window = D;
      return out;
    }
    sup = next;
  }
}

class FFunction {
 public:
  /// (1 + r)^{-(2 nu + eps)}.
  static FFunction power_law(int nu, double eps) {
    detail::require(nu >= 1 && eps > 0, "FFunction::power_law requires nu >= 1 and eps > 0");
    const double p = 2.0 * nu + eps;
    std::ostringstream os;
    os << "(1+r)^-" << p;
    return FFunction([p](double r) { return std::pow(1.0 + r, -p); }, os.str());
  }

  /// table[r] = F(r); F vanishes beyond the table.
  static FFunction from_table(std::vector<double> table) {
    detail::require(!table.empty() && table[0] > 0, "FFunction: table must start with a positive value");
    for (std::size_t i = 1; i < table.size(); ++i) {
      detail::require(table[i] >= 0 && table[i] <= table[i - 1], "FFunction: table must be non-negative and non-increasing");
    }
    auto shared = std::make_shared<std::vector<double>>(std::move(table));
    return FFunction(
        [shared](double r) {
          const auto i = static_cast<std::size_t>(r);
          return i < shared->size() ? (*shared)[i] : 0.0;
        },
        "table");
  }

  /// Arbitrary profile; constants are computed (and may throw) on construction.
  FFunction(std::function<double(double)> profile, std::string label)
      : f_(std::move(profile)), label_(std::move(label)), constants_(f_function_constants(f_)) {}

  double operator()(double r) const { return f_(r); }
  double norm() const { return constants_.norm; }
  double c_f() const { return constants_.c_f; }
  const FConstants& constants() const { return constants_; }
  const std::string& label() const { return label_; }
  const std::function<double(double)>& profile() const { return f_; }

 private:
  std::function<double(double)> f_;
  std::string label_;
  FConstants constants_;
};

inline FConstants f_function_constants(const FFunction& f) { return f.constants(); }

struct FNormResult {
  double value;
  SiteIndex argmax;  // separation attaining the sup
  SiteIndex window;
};

/// ||Phi||_F = sup_{x != y} sum_{Z contains x,y} ||Phi(Z)|| / F(d(x,y)); for a
/// two-body interaction only Z = {x,y} contributes.
inline FNormResult f_norm(const ModelSpec& m, const FFunction& f, SiteIndex max_window = SiteIndex{1} << 20) {
  m.validate();
  double sup = 0;
  SiteIndex argmax = 0;
  auto scan = [&](SiteIndex lo, SiteIndex hi) {
    for (SiteIndex r = lo; r <= hi; ++r) {
      const double b = m.bond_norm(r);
      if (b == 0.0) continue;
      const double fr = f(static_cast<double>(r));
      if (fr <= 0) throw ConvergenceError("f_norm: F vanishes where the interaction does not");
      const double v = b / fr;
      if (v > sup) {
        sup = v;
        argmax = r;
      }
    }
  };
  if (auto range = m.range()) {
    scan(1, *range);
    return {sup, argmax, *range};
  }
  SiteIndex w = 16;
  scan(1, w);
  for (; w < max_window; w *= 2) {
    const double before = sup;
    scan(w + 1, 2 * w);
    if (sup - before <= 1e-8 * sup && argmax <= w / 2) return {sup, argmax, 2 * w};
  }
  throw ConvergenceError("f_norm: sup keeps growing with the window");
}

}  // namespace spinlaw
