#pragma once
// Finite-block operator algebra for spin-1/2 chains.
//
// Tensor layout convention used everywhere in the library: the sites of a
// Block are kept in ascending order and the smallest site is the leftmost
// tensor factor, i.e. the most significant bit of a basis index. Bit value 0
// is the sigma^3 = +1 ("up") state, bit value 1 is sigma^3 = -1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinlaw/error.hpp"

namespace spinlaw {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using SiteIndex = std::int64_t;

inline constexpr std::size_t kMaxDenseSites = 12;
inline constexpr std::size_t kMaxVectorSites = 24;
inline constexpr double kStateTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Block

class Block {
 public:
  Block() = default;
  Block(std::initializer_list<SiteIndex> sites) : Block(std::vector<SiteIndex>(sites)) {}
  explicit Block(std::vector<SiteIndex> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    detail::require(std::adjacent_find(sites_.begin(), sites_.end()) == sites_.end(),
                    "Block: sites must be pairwise distinct");
    detail::require(sites_.size() <= 62, "Block: more than 62 sites cannot be indexed");
  }

  /// Sites first..last inclusive.
  static Block interval(SiteIndex first, SiteIndex last) {
    std::vector<SiteIndex> s;
    for (SiteIndex x = first; x <= last; ++x) s.push_back(x);
    return Block(std::move(s));
  }

  /// `size` consecutive sites placed as symmetrically as possible around 0:
  /// [-size/2, -size/2 + size - 1].
  static Block centered(std::size_t size) {
    const auto half = static_cast<SiteIndex>(size / 2);
    return interval(-half, -half + static_cast<SiteIndex>(size) - 1);
  }

  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  std::uint64_t dim() const { return std::uint64_t{1} << sites_.size(); }
  const std::vector<SiteIndex>& sites() const { return sites_; }
  SiteIndex front() const { return sites_.front(); }
  SiteIndex back() const { return sites_.back(); }

  bool is_interval() const {
    return sites_.empty() || back() - front() + 1 == static_cast<SiteIndex>(sites_.size());
  }

  std::optional<std::size_t> position(SiteIndex x) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), x);
    if (it == sites_.end() || *it != x) return std::nullopt;
    return static_cast<std::size_t>(it - sites_.begin());
  }

  bool contains(SiteIndex x) const { return position(x).has_value(); }

  bool contains(const Block& other) const {
    return std::includes(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end());
  }

  bool disjoint(const Block& other) const {
    std::vector<SiteIndex> common;
    std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                          std::back_inserter(common));
    return common.empty();
  }

  Block united(const Block& other) const {
    std::vector<SiteIndex> out;
    std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                   std::back_inserter(out));
    return Block(std::move(out));
  }

  Block minus(const Block& other) const {
    std::vector<SiteIndex> out;
    std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                        std::back_inserter(out));
    return Block(std::move(out));
  }

  Block shifted(SiteIndex dx) const {
    auto s = sites_;
    for (auto& x : s) x += dx;
    return Block(std::move(s));
  }

  /// Bit position (0 = least significant) carrying the given site.
  unsigned bit_of(SiteIndex x) const {
    auto p = position(x);
    detail::require(p.has_value(), "Block: site " + std::to_string(x) + " not in block");
    return static_cast<unsigned>(sites_.size() - 1 - *p);
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < sites_.size(); ++i) os << (i ? " " : "") << sites_[i];
    os << '}';
    return os.str();
  }

  friend bool operator==(const Block&, const Block&) = default;

 private:
  std::vector<SiteIndex> sites_;
};

namespace detail {

/// Full-block basis offsets contributed by each configuration of a sub-block
/// (`keep`) and of its complement. Index of (k, e) in `whole` is
/// keep_offsets[k] | env_offsets[e].
struct SplitIndex {
  std::vector<std::uint64_t> keep_offsets;
  std::vector<std::uint64_t> env_offsets;
};

inline std::vector<std::uint64_t> offsets_for(const Block& whole, const Block& part) {
  std::vector<unsigned> bits;
  bits.reserve(part.size());
  for (SiteIndex x : part.sites()) bits.push_back(whole.bit_of(x));
  const std::size_t k = part.size();
  std::vector<std::uint64_t> out(std::uint64_t{1} << k, 0);
  for (std::uint64_t i = 0; i < out.size(); ++i) {
    std::uint64_t full = 0;
    for (std::size_t p = 0; p < k; ++p) {
      if ((i >> (k - 1 - p)) & 1u) full |= std::uint64_t{1} << bits[p];
    }
    out[i] = full;
  }
  return out;
}

inline SplitIndex split_index(const Block& whole, const Block& keep) {
  require(whole.contains(keep), "sub-block " + keep.to_string() + " not contained in " + whole.to_string());
  return {offsets_for(whole, keep), offsets_for(whole, whole.minus(keep))};
}

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PauliString

enum class Axis : std::uint8_t { X = 1, Y = 2, Z = 3 };

inline char axis_name(Axis a) { return a == Axis::X ? 'X' : (a == Axis::Y ? 'Y' : 'Z'); }

/// Bit masks describing the action of a Pauli string on computational basis
/// states of a fixed block: P|s> = phase(s) |s ^ flip>, with
/// phase(s) = i^y_count * (-1)^popcount(s & sign).
struct PauliMasks {
  std::uint64_t flip = 0;
  std::uint64_t sign = 0;
  unsigned y_count = 0;

  Complex phase(std::uint64_t s) const {
    static const Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    Complex p = kIPow[y_count % 4];
    return (std::popcount(s & sign) & 1u) ? -p : p;
  }
};

class PauliString {
 public:
  PauliString() = default;
  PauliString(std::initializer_list<std::pair<const SiteIndex, Axis>> factors) : factors_(factors) {}

  static PauliString single(SiteIndex x, Axis a) { return PauliString{{x, a}}; }

  /// Adds a factor; a site may carry at most one.
  PauliString& with(SiteIndex x, Axis a) {
    detail::require(!factors_.contains(x), "PauliString: site " + std::to_string(x) + " already present");
    factors_.emplace(x, a);
    return *this;
  }

  const std::map<SiteIndex, Axis>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }
  std::size_t weight() const { return factors_.size(); }

  bool has_axis(Axis a) const {
    return std::any_of(factors_.begin(), factors_.end(), [a](const auto& f) { return f.second == a; });
  }

  Block support() const {
    std::vector<SiteIndex> s;
    for (const auto& [x, a] : factors_) s.push_back(x);
    return Block(std::move(s));
  }

  PauliString translated(SiteIndex dx) const {
    PauliString out;
    for (const auto& [x, a] : factors_) out.factors_.emplace(x + dx, a);
    return out;
  }

  /// Pauli strings commute iff they anticommute on an even number of sites.
  bool commutes_with(const PauliString& other) const {
    std::size_t anti = 0;
    for (const auto& [x, a] : factors_) {
      auto it = other.factors_.find(x);
      if (it != other.factors_.end() && it->second != a) ++anti;
    }
    return anti % 2 == 0;
  }

  PauliMasks masks(const Block& block) const {
    PauliMasks m;
    for (const auto& [x, a] : factors_) {
      detail::require(block.contains(x), "PauliString: support outside block " + block.to_string());
      const std::uint64_t bit = std::uint64_t{1} << block.bit_of(x);
      if (a == Axis::X || a == Axis::Y) m.flip |= bit;
      if (a == Axis::Y || a == Axis::Z) m.sign |= bit;
      if (a == Axis::Y) ++m.y_count;
    }
    return m;
  }

  std::string to_string() const {
    if (factors_.empty()) return "I";
    std::ostringstream os;
    bool first = true;
    for (const auto& [x, a] : factors_) {
      os << (first ? "" : "*") << axis_name(a) << x;
      first = false;
    }
    return os.str();
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::map<SiteIndex, Axis> factors_;
};

// ---------------------------------------------------------------------------
// Operator, StateVector, DensityMatrix

class Operator {
 public:
  Operator(Block block, CMatrix matrix) : block_(std::move(block)), matrix_(std::move(matrix)) {
    const auto d = static_cast<Eigen::Index>(block_.dim());
    detail::require(matrix_.rows() == d && matrix_.cols() == d,
                    "Operator: matrix dimension must be 2^|block|");
  }

  static Operator identity(const Block& block) {
    detail::require(block.size() <= kMaxDenseSites, "Operator: block too large for a dense matrix");
    const auto d = static_cast<Eigen::Index>(block.dim());
    return Operator(block, CMatrix::Identity(d, d));
  }

  static Operator zero(const Block& block) {
    detail::require(block.size() <= kMaxDenseSites, "Operator: block too large for a dense matrix");
    const auto d = static_cast<Eigen::Index>(block.dim());
    return Operator(block, CMatrix::Zero(d, d));
  }

  const Block& block() const { return block_; }
  const CMatrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  bool is_hermitian(double tol = 1e-12) const {
    return detail::max_abs(matrix_ - matrix_.adjoint()) <= tol;
  }

 private:
  Block block_;
  CMatrix matrix_;
};

inline Operator operator+(const Operator& a, const Operator& b) {
  detail::require(a.block() == b.block(), "Operator: block mismatch");
  return Operator(a.block(), a.matrix() + b.matrix());
}

inline Operator operator-(const Operator& a, const Operator& b) {
  detail::require(a.block() == b.block(), "Operator: block mismatch");
  return Operator(a.block(), a.matrix() - b.matrix());
}

inline Operator operator*(const Operator& a, const Operator& b) {
  detail::require(a.block() == b.block(), "Operator: block mismatch");
  return Operator(a.block(), a.matrix() * b.matrix());
}

inline Operator operator*(Complex c, const Operator& a) { return Operator(a.block(), c * a.matrix()); }

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

class StateVector {
 public:
  StateVector(Block block, CVector amplitudes) : block_(std::move(block)), amps_(std::move(amplitudes)) {
    detail::require(block_.size() <= kMaxVectorSites, "StateVector: block exceeds 24 sites");
    detail::require(amps_.size() == static_cast<Eigen::Index>(block_.dim()),
                    "StateVector: amplitude count must be 2^|block|");
    detail::require(std::abs(amps_.squaredNorm() - 1.0) <= kStateTolerance,
                    "StateVector: squared norm must be 1 within 1e-12");
  }

  static StateVector normalized(Block block, CVector amplitudes) {
    const double n = amplitudes.norm();
    detail::require(n > 0, "StateVector: zero vector cannot be normalized");
    amplitudes /= n;
    return StateVector(std::move(block), std::move(amplitudes));
  }

  /// Computational basis state |index>.
  static StateVector basis(Block block, std::uint64_t index) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(block.dim()));
    detail::require(index < block.dim(), "StateVector: basis index out of range");
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(block), std::move(v));
  }

  const Block& block() const { return block_; }
  const CVector& amplitudes() const { return amps_; }
  Eigen::Index dim() const { return amps_.size(); }

 private:
  Block block_;
  CVector amps_;
};

/// Tag selecting the DensityMatrix constructor that skips the positivity
/// eigensolve. Intended for results of trace-preserving positive maps
/// (partial traces, unitary conjugation, outer products) of valid states.
struct TrustedTag {};
inline constexpr TrustedTag kTrusted{};

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity (tolerance 1e-12);
  /// stores the symmetrized matrix (rho + rho^dagger)/2.
  DensityMatrix(Block block, CMatrix matrix) : DensityMatrix(kTrusted, std::move(block), std::move(matrix)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_, Eigen::EigenvaluesOnly);
    detail::require(es.info() == Eigen::Success, "DensityMatrix: eigensolve failed");
    detail::require(es.eigenvalues().minCoeff() >= -kStateTolerance,
                    "DensityMatrix: negative eigenvalue below -1e-12");
  }

  DensityMatrix(TrustedTag, Block block, CMatrix matrix) : block_(std::move(block)), rho_(std::move(matrix)) {
    const auto d = static_cast<Eigen::Index>(block_.dim());
    detail::require(rho_.rows() == d && rho_.cols() == d, "DensityMatrix: dimension must be 2^|block|");
    detail::require(detail::max_abs(rho_ - rho_.adjoint()) <= kStateTolerance,
                    "DensityMatrix: not Hermitian within 1e-12");
    detail::require(std::abs(rho_.trace() - Complex(1.0)) <= kStateTolerance,
                    "DensityMatrix: trace differs from 1 by more than 1e-12");
    rho_ = (0.5 * (rho_ + rho_.adjoint())).eval();
  }

  /// (1/2^k) * identity.
  static DensityMatrix maximally_mixed(const Block& block) {
    detail::require(block.size() <= kMaxDenseSites, "DensityMatrix: block too large for a dense matrix");
    const auto d = static_cast<Eigen::Index>(block.dim());
    return DensityMatrix(kTrusted, block, CMatrix::Identity(d, d) / static_cast<double>(d));
  }

  const Block& block() const { return block_; }
  const CMatrix& matrix() const { return rho_; }
  Eigen::Index dim() const { return rho_.rows(); }

 private:
  Block block_;
  CMatrix rho_;
};

// ---------------------------------------------------------------------------
// Operations

/// Dense matrix of a Pauli string on `block`; factors placed by ascending site.
inline Operator embed(const PauliString& s, const Block& block) {
  detail::require(block.contains(s.support()),
                  "embed: support " + s.support().to_string() + " outside block " + block.to_string());
  detail::require(block.size() <= kMaxDenseSites, "embed: block too large for a dense matrix");
  const auto m = s.masks(block);
  const std::uint64_t d = block.dim();
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::uint64_t col = 0; col < d; ++col) {
    out(static_cast<Eigen::Index>(col ^ m.flip), static_cast<Eigen::Index>(col)) = m.phase(col);
  }
  return Operator(block, std::move(out));
}

/// Matrix-free action of a Pauli string on raw amplitudes over `block`.
inline CVector apply(const PauliString& s, const Block& block, const CVector& v) {
  const auto m = s.masks(block);
  CVector out(v.size());
  for (std::uint64_t col = 0; col < static_cast<std::uint64_t>(v.size()); ++col) {
    out(static_cast<Eigen::Index>(col ^ m.flip)) = m.phase(col) * v(static_cast<Eigen::Index>(col));
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const Block& keep) {
  detail::require(rho.block().contains(keep), "partial_trace: keep " + keep.to_string() +
                                                  " not a subset of " + rho.block().to_string());
  if (keep == rho.block()) return rho;
  const auto idx = detail::split_index(rho.block(), keep);
  const auto dk = static_cast<Eigen::Index>(idx.keep_offsets.size());
  const CMatrix& m = rho.matrix();
  CMatrix out = CMatrix::Zero(dk, dk);
  for (Eigen::Index a = 0; a < dk; ++a) {
    for (Eigen::Index b = 0; b < dk; ++b) {
      Complex acc = 0.0;
      for (std::uint64_t e : idx.env_offsets) {
        acc += m(static_cast<Eigen::Index>(idx.keep_offsets[a] | e),
                 static_cast<Eigen::Index>(idx.keep_offsets[b] | e));
      }
      out(a, b) = acc;
    }
  }
  return DensityMatrix(kTrusted, keep, std::move(out));
}

/// Reduced density matrix of a pure state on `keep`, computed without forming
/// the full projector: rho = M M^dagger with M[k][e] = psi[k|e].
inline DensityMatrix reduced_state(const StateVector& v, const Block& keep) {
  detail::require(keep.size() <= kMaxDenseSites, "reduced_state: kept block too large for a dense matrix");
  const auto idx = detail::split_index(v.block(), keep);
  const auto dk = static_cast<Eigen::Index>(idx.keep_offsets.size());
  const auto de = static_cast<Eigen::Index>(idx.env_offsets.size());
  CMatrix m(dk, de);
  const CVector& psi = v.amplitudes();
  for (Eigen::Index k = 0; k < dk; ++k) {
    for (Eigen::Index e = 0; e < de; ++e) {
      m(k, e) = psi(static_cast<Eigen::Index>(idx.keep_offsets[k] | idx.env_offsets[e]));
    }
  }
  CMatrix rho = m * m.adjoint();
  return DensityMatrix(kTrusted, keep, std::move(rho));
}

inline DensityMatrix dm_from_vector(const StateVector& v) {
  detail::require(v.block().size() <= kMaxDenseSites, "dm_from_vector: block too large for a dense matrix");
  return DensityMatrix(kTrusted, v.block(), v.amplitudes() * v.amplitudes().adjoint());
}

inline Complex expectation(const DensityMatrix& rho, const Operator& a) {
  detail::require(rho.block() == a.block(), "expectation: block mismatch");
  return (rho.matrix() * a.matrix()).trace();
}

inline Complex expectation(const StateVector& v, const Operator& a) {
  detail::require(v.block() == a.block(), "expectation: block mismatch");
  return v.amplitudes().dot(a.matrix() * v.amplitudes());
}

/// <v| P |v> for a Pauli string, without building the dense operator.
inline Complex expectation(const StateVector& v, const PauliString& p) {
  return v.amplitudes().dot(apply(p, v.block(), v.amplitudes()));
}

inline Complex expectation(const DensityMatrix& rho, const PauliString& p) {
  return expectation(rho, embed(p, rho.block()));
}

/// Tensor product of states on disjoint blocks, laid out on the union block.
inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  detail::require(a.block().disjoint(b.block()), "tensor: blocks must be disjoint");
  const Block whole = a.block().united(b.block());
  detail::require(whole.size() <= kMaxDenseSites, "tensor: union block too large for a dense matrix");
  const auto oa = detail::offsets_for(whole, a.block());
  const auto ob = detail::offsets_for(whole, b.block());
  const auto d = static_cast<Eigen::Index>(whole.dim());
  CMatrix out(d, d);
  for (std::size_t i = 0; i < oa.size(); ++i)
    for (std::size_t j = 0; j < ob.size(); ++j)
      for (std::size_t k = 0; k < oa.size(); ++k)
        for (std::size_t l = 0; l < ob.size(); ++l)
          out(static_cast<Eigen::Index>(oa[i] | ob[j]), static_cast<Eigen::Index>(oa[k] | ob[l])) =
              a.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
              b.matrix()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
  return DensityMatrix(kTrusted, whole, std::move(out));
}

/// Same single-site 2x2 state on every site of `block`.
inline DensityMatrix product_density(const Block& block, const Eigen::Matrix2cd& site_state) {
  detail::require(block.size() <= kMaxDenseSites, "product_density: block too large for a dense matrix");
  CMatrix out = CMatrix::Ones(1, 1);
  for (std::size_t i = 0; i < block.size(); ++i) {
    CMatrix next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c)
        next.block<2, 2>(2 * r, 2 * c) = out(r, c) * site_state;
    out = std::move(next);
  }
  return DensityMatrix(kTrusted, block, std::move(out));
}

/// Same single-site amplitudes on every site of `block`.
inline StateVector product_state(const Block& block, const Eigen::Vector2cd& site_state) {
  detail::require(block.size() <= kMaxVectorSites, "product_state: block exceeds 24 sites");
  const Eigen::Vector2cd s = site_state.normalized();
  const std::uint64_t d = block.dim();
  const std::size_t n = block.size();
  CVector out(static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < d; ++i) {
    Complex a = 1.0;
    for (std::size_t b = 0; b < n; ++b) a *= s((i >> b) & 1u);
    out(static_cast<Eigen::Index>(i)) = a;
  }
  return StateVector::normalized(block, std::move(out));
}

/// The sigma^1 = +1 eigenvector (|0> + |1>)/sqrt(2).
inline Eigen::Vector2cd plus_x() {
  const double r = 1.0 / std::sqrt(2.0);
  return Eigen::Vector2cd(r, r);
}

}  // namespace spinlaw
