#pragma once
// Mean-field magnetization flow and baker-map coarse-graining.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spinlaw/csv.hpp"
#include "spinlaw/error.hpp"

namespace spinlaw {

// ---------------------------------------------------------------------------
// Mean field

struct MagnetizationState {
  double m1 = 0, m2 = 0, m3 = 0;
  double t = 0;
};

/// dM1/dt = 2(a-c) M2 M3, dM2/dt = -2(a-c) M1 M3, dM3/dt = 0, integrated
/// with classical RK4 from M0.t to t_end (backwards if t_end < M0.t). M3 is
/// carried unchanged. Every `record_every`-th step is kept, plus the end point.
inline std::vector<MagnetizationState> meanfield_flow(double a, double c, const MagnetizationState& m0, double t_end,
                                                      double dt, std::size_t record_every = 1) {
  detail::require(dt > 0, "meanfield_flow: dt must be positive");
  detail::require(record_every >= 1, "meanfield_flow: record_every must be positive");
  const double span = t_end - m0.t;
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(span) / dt - 1e-9));
  const double h = steps == 0 ? 0.0 : span / static_cast<double>(steps);
  const double w = 2.0 * (a - c) * m0.m3;
  auto f = [w](double x, double y) { return std::pair{w * y, -w * x}; };

  std::vector<MagnetizationState> out{m0};
  MagnetizationState s = m0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const auto [k1x, k1y] = f(s.m1, s.m2);
    const auto [k2x, k2y] = f(s.m1 + 0.5 * h * k1x, s.m2 + 0.5 * h * k1y);
    const auto [k3x, k3y] = f(s.m1 + 0.5 * h * k2x, s.m2 + 0.5 * h * k2y);
    const auto [k4x, k4y] = f(s.m1 + h * k3x, s.m2 + h * k3y);
    s.m1 += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
    s.m2 += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    s.t = m0.t + h * static_cast<double>(i);
    if (i % record_every == 0 || i == steps) out.push_back(s);
  }
  return out;
}

inline CsvTable trajectory_table(const std::vector<MagnetizationState>& traj) {
  CsvTable t({"t", "M1", "M2", "M3"});
  for (const auto& s : traj) t.add(s.t, s.m1, s.m2, s.m3);
  return t;
}

// ---------------------------------------------------------------------------
// Baker map

/// Piecewise-constant density on the unit square with 2^x_bits columns (x)
/// and 2^y_bits rows (y); values(i, j) on column i, row j.
struct GridDensity {
  int x_bits = 0;
  int y_bits = 0;
  Eigen::MatrixXd values;

  static GridDensity from_function(int m, const std::function<double(double, double)>& f) {
    detail::require(m >= 0 && m <= 12, "GridDensity: m must lie in [0, 12]");
    const Eigen::Index n = Eigen::Index{1} << m;
    GridDensity g{m, m, Eigen::MatrixXd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        g.values(i, j) = f((static_cast<double>(i) + 0.5) / static_cast<double>(n),
                           (static_cast<double>(j) + 0.5) / static_cast<double>(n));
    g.validate();
    return g;
  }

  static GridDensity uniform(int m) {
    return from_function(m, [](double, double) { return 1.0; });
  }

  /// 2 on the left half x < 1/2, 0 on the right half.
  static GridDensity left_half(int m) {
    return from_function(m, [](double x, double) { return x < 0.5 ? 2.0 : 0.0; });
  }

  double mean() const { return values.mean(); }

  void validate() const {
    detail::require(values.rows() == (Eigen::Index{1} << x_bits) && values.cols() == (Eigen::Index{1} << y_bits),
                    "GridDensity: shape does not match the bit counts");
    detail::require(values.minCoeff() >= 0.0, "GridDensity: negative density");
    detail::require(std::abs(mean() - 1.0) <= 1e-12, "GridDensity: mean must be 1");
  }
};

/// One step of rho -> rho o B^{-1} for the baker map
///   B(x, y) = (2x, y/2) for x < 1/2,  (2x - 1, (y + 1)/2) for x >= 1/2.
/// The image is exactly piecewise constant on a grid with half as many
/// columns and twice as many rows.
inline GridDensity baker_step(const GridDensity& g) {
  detail::require(g.x_bits >= 1, "baker_step: no x resolution left");
  const Eigen::Index cols = Eigen::Index{1} << (g.x_bits - 1);
  const Eigen::Index rows_old = Eigen::Index{1} << g.y_bits;
  GridDensity out{g.x_bits - 1, g.y_bits + 1, Eigen::MatrixXd(cols, 2 * rows_old)};
  for (Eigen::Index i = 0; i < cols; ++i) {
    for (Eigen::Index j = 0; j < 2 * rows_old; ++j) {
      out.values(i, j) = j < rows_old ? g.values(i, j) : g.values(i + cols, j - rows_old);
    }
  }
  return out;
}

/// Averages over 2^k x 2^k coarse cells.
inline Eigen::MatrixXd coarse_grain(const GridDensity& g, int k) {
  detail::require(k >= 0 && k <= g.x_bits && k <= g.y_bits, "coarse_grain: level finer than the grid");
  const Eigen::Index n = Eigen::Index{1} << k;
  const Eigen::Index bx = g.values.rows() / n;
  const Eigen::Index by = g.values.cols() / n;
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = g.values.block(i * bx, j * by, bx, by).mean();
  return out;
}

struct BakerRun {
  std::vector<Eigen::MatrixXd> coarse;  // coarse densities for steps 0..steps
  std::vector<double> max_deviation;    // max |coarse - 1| per step
};

/// Iterates the exact grid transport `steps` times (requires steps <= m - k
/// so the coarse level stays resolved) and coarse-grains every iterate.
inline BakerRun baker_coarse_grain(const GridDensity& rho0, int steps, int k) {
  rho0.validate();
  detail::require(rho0.x_bits == rho0.y_bits, "baker_coarse_grain: initial grid must be square");
  detail::require(k >= 0 && k <= rho0.x_bits, "baker_coarse_grain: coarse level must satisfy k <= m");
  detail::require(steps >= 0 && steps <= rho0.x_bits - k, "baker_coarse_grain: steps exceed m - k");
  BakerRun run;
  GridDensity g = rho0;
  for (int s = 0; s <= steps; ++s) {
    if (s > 0) g = baker_step(g);
    detail::ensure(std::abs(g.mean() - 1.0) <= 1e-12 && g.values.minCoeff() >= 0.0,
                   "baker_coarse_grain: transport lost mass or positivity");
    run.coarse.push_back(coarse_grain(g, k));
    run.max_deviation.push_back((run.coarse.back().array() - 1.0).abs().maxCoeff());
  }
  return run;
}

inline CsvTable baker_table(const BakerRun& run) {
  CsvTable t({"step", "max_deviation"});
  for (std::size_t s = 0; s < run.max_deviation.size(); ++s) t.add(static_cast<std::uint64_t>(s), run.max_deviation[s]);
  return t;
}

}  // namespace spinlaw
