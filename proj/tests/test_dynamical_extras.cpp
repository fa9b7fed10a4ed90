#include <gtest/gtest.h>

#include <cmath>

#include "spinlaw/dynamical_extras.hpp"

using namespace spinlaw;

namespace {

// Cell averages of rho0(B^{-n}(p)) sampled at the midpoints of a 1024 x 1024
// grid, enough to resolve every iterate used below exactly.
Eigen::MatrixXd pullback_oracle(int n, int k) {
  const int cells = 1 << k;
  const int fine = 1024;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cells, cells);
  for (int i = 0; i < fine; ++i)
    for (int j = 0; j < fine; ++j) {
      double x = (i + 0.5) / fine, y = (j + 0.5) / fine;
      for (int s = 0; s < n; ++s) {
        if (y < 0.5) {
          x = x / 2;
          y = 2 * y;
        } else {
          x = (x + 1) / 2;
          y = 2 * y - 1;
        }
      }
      out(i * cells / fine, j * cells / fine) += x < 0.5 ? 2.0 : 0.0;
    }
  return out / static_cast<double>((fine / cells) * (fine / cells));
}

}  // namespace

TEST(MeanField, PolarizedAlongOneStaysPut) {
  const auto traj = meanfield_flow(1.3, 0.2, {2, 0, 0, 0}, 100.0, 0.01, 10);
  for (const auto& s : traj) {
    EXPECT_NEAR(s.m1, 2.0, 1e-8);
    EXPECT_EQ(s.m3, 0.0);
  }
  EXPECT_DOUBLE_EQ(traj.back().t, 100.0);
}

TEST(MeanField, RotationClosedForm) {
  // omega = 2 (a - c) M3 = 1: M1 = cos t, M2 = -sin t
  const auto traj = meanfield_flow(1.0, 0.5, {1, 0, 1, 0}, 10.0, 1e-3, 1);
  for (const auto& s : traj) {
    EXPECT_NEAR(s.m1, std::cos(s.t), 1e-7);
    EXPECT_NEAR(s.m2, -std::sin(s.t), 1e-7);
    EXPECT_EQ(s.m3, 1.0);
  }
}

TEST(MeanField, BackwardIntegrationReturns) {
  const auto fwd = meanfield_flow(2.0, -1.0, {0.3, 0.4, 0.5, 0}, 3.0, 1e-3);
  const auto back = meanfield_flow(2.0, -1.0, fwd.back(), 0.0, 1e-3);
  EXPECT_NEAR(back.back().m1, 0.3, 1e-10);
  EXPECT_NEAR(back.back().m2, 0.4, 1e-10);
  EXPECT_DOUBLE_EQ(back.back().t, 0.0);
  EXPECT_THROW(meanfield_flow(1, 0, {}, 1.0, 0.0), PreconditionError);
}

TEST(Baker, StepConservesMassAndUniformIsFixed) {
  const GridDensity u = GridDensity::uniform(6);
  const BakerRun r = baker_coarse_grain(u, 4, 2);
  for (double d : r.max_deviation) EXPECT_EQ(d, 0.0);
  const GridDensity h = GridDensity::left_half(6);
  const GridDensity s = baker_step(h);
  EXPECT_EQ(s.x_bits, 5);
  EXPECT_EQ(s.y_bits, 7);
  EXPECT_NEAR(s.mean(), 1.0, 1e-15);
}

TEST(Baker, CoarseDensitiesMatchPointPullback) {
  const BakerRun r = baker_coarse_grain(GridDensity::left_half(10), 6, 4);
  for (int n = 0; n <= 6; ++n) {
    const Eigen::MatrixXd expected = pullback_oracle(n, 4);
    EXPECT_LT((r.coarse[n] - expected).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
  EXPECT_LT(r.max_deviation.back(), 0.05);
}

TEST(Baker, ResolutionPrecondition) {
  EXPECT_THROW(baker_coarse_grain(GridDensity::left_half(6), 3, 4), PreconditionError);
  GridDensity bad = GridDensity::uniform(3);
  bad.values(0, 0) = -1;
  EXPECT_THROW(bad.validate(), PreconditionError);
  EXPECT_EQ(baker_table(baker_coarse_grain(GridDensity::uniform(4), 2, 1)).header(),
            (std::vector<std::string>{"step", "max_deviation"}));
}
