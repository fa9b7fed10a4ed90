#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spinlaw/couplings.hpp"

using namespace spinlaw;

namespace {

// Riemann zeta by direct summation plus an Euler-Maclaurin tail.
double zeta(double s) {
  const int n = 100000;
  double sum = 0;
  for (int k = n; k >= 1; --k) sum += std::pow(k, -s);
  const double N = n;
  return sum + std::pow(N, 1 - s) / (s - 1) - 0.5 * std::pow(N, -s) + s / 12.0 * std::pow(N, -s - 1);
}

double brute_tail(double p, SiteIndex R) {
  double s = 0;
  for (SiteIndex k = 2000000; k > R; --k) s += std::pow(static_cast<double>(k), -p);
  return s + std::pow(2000000.0, 1 - p) / (p - 1);
}

}  // namespace

TEST(Couplings, ValuesAndValidation) {
  EXPECT_DOUBLE_EQ(coupling_value(Exponential{2.0}, 3), 0.125);
  EXPECT_DOUBLE_EQ(coupling_value(Exponential{2.0}, -3), 0.125);
  EXPECT_DOUBLE_EQ(coupling_value(Dyson{2.0}, 4), 1.0 / 16);
  EXPECT_DOUBLE_EQ(coupling_value(FiniteRange{0.5, 2}, 2), 0.5);
  EXPECT_DOUBLE_EQ(coupling_value(FiniteRange{0.5, 2}, 3), 0.0);
  EXPECT_DOUBLE_EQ(coupling_value(Exponential{2.0}, 0), 0.0);
  EXPECT_THROW(validate(Exponential{1.0}), PreconditionError);
  EXPECT_THROW(validate(Dyson{1.0}), PreconditionError);
  EXPECT_THROW(validate(FiniteRange{1.0, 0}), PreconditionError);
  EXPECT_EQ(descriptor(FiniteRange{1.5, 2}).find(','), std::string::npos);
}

TEST(Summability, ExponentialIsGeometric) {
  for (double xi : {1.5, 2.0, std::numbers::e, 5.0}) {
    const auto s = summability(Exponential{xi});
    EXPECT_NEAR(s.value, oracle::two_sided_geometric(xi), 1e-11 * s.value) << xi;
    EXPECT_NEAR(s.value, 2.0 / (xi - 1.0), 1e-11 * s.value) << xi;
    EXPECT_LE(s.tail_bound, 1e-12 * s.value);
  }
}

TEST(Summability, DysonIsTwiceZeta) {
  EXPECT_NEAR(summability(Dyson{2.0}).value, std::numbers::pi * std::numbers::pi / 3.0, 1e-10);
  EXPECT_NEAR(summability(Dyson{3.0}).value, 2.0 * zeta(3.0), 1e-10);
  EXPECT_NEAR(summability(Dyson{1.5}).value, 2.0 * zeta(1.5), 1e-8);
}

TEST(Summability, FiniteRangeIsExact) {
  const auto s = summability(FiniteRange{0.5, 3});
  EXPECT_DOUBLE_EQ(s.value, 3.0);
  EXPECT_EQ(s.tail_bound, 0.0);
  EXPECT_THROW(summability(MeanField{1, 1}), PreconditionError);
}

TEST(Summability, CustomTableWithTail) {
  Custom c{{1.0, 0.5}, [](SiteIndex r) { return std::pow(static_cast<double>(r), -3.0); }, "custom"};
  const double expected = 2.0 * (1.0 + 0.5 + (zeta(3.0) - 1.0 - 0.125));
  EXPECT_NEAR(summability(c).value, expected, 1e-9);
}

TEST(Summability, DecreasesInDecayParameters) {
  double prev = std::numeric_limits<double>::infinity();
  for (double xi = 1.2; xi < 6; xi += 0.4) {
    const double v = summability(Exponential{xi}).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  prev = std::numeric_limits<double>::infinity();
  for (double a = 1.3; a < 5; a += 0.3) {
    const double v = summability(Dyson{a}).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(TailBounds, PowerTailBracketsBruteForce) {
  for (double p : {2.0, 4.0, 6.0})
    for (SiteIndex R : {1, 10, 100}) {
      const auto [lo, hi] = detail::power_tail_bounds(R, p);
      const double exact = brute_tail(p, R);
      EXPECT_LE(lo, exact * (1 + 1e-12)) << p << " " << R;
      EXPECT_GE(hi, exact * (1 - 1e-12)) << p << " " << R;
    }
}

TEST(TailBounds, SquareTailDominatesSum) {
  for (SiteIndex R : {0, 3, 20}) {
    double e = 0, d = 0;
    for (SiteIndex n = R + 1; n < 200000; ++n) {
      e += std::pow(2.0, -2.0 * static_cast<double>(n));
      d += std::pow(static_cast<double>(n), -4.0);
    }
    EXPECT_GE(square_tail_bound(Exponential{2.0}, R), e * (1 - 1e-12));
    EXPECT_GE(square_tail_bound(Dyson{2.0}, R), d);
  }
}

TEST(Models, BondNorms) {
  EXPECT_DOUBLE_EQ(ModelSpec::gim(Exponential{2.0}).bond_norm(1), 0.5);
  EXPECT_DOUBLE_EQ(ModelSpec::xy(FiniteRange{1.0, 1}).bond_norm(1), 2.0);
  // a(XX+YY) + b ZZ with a = -1, b = -0.5 has eigenvalues -0.5, -0.5, 2.5, -1.5
  EXPECT_DOUBLE_EQ(ModelSpec::heisenberg(FiniteRange{1.0, 1}, FiniteRange{0.5, 1}).bond_norm(1), 2.5);
  EXPECT_EQ(ModelSpec::xy(FiniteRange{1.0, 1}).bond_norm(2), 0.0);
}

TEST(LambdaNorm, ExponentialGImClosedForm) {
  const ModelSpec m = ModelSpec::gim(Exponential{std::numbers::e * std::numbers::e});
  for (double lambda : {0.3, 1.0, 1.7}) {
    const double q = std::exp(lambda) / (std::numbers::e * std::numbers::e);
    EXPECT_NEAR(lambda_norm(m, lambda), 2.0 * q / (1.0 - q), 1e-12 * lambda_norm(m, lambda)) << lambda;
  }
  EXPECT_TRUE(std::isinf(lambda_norm(m, 2.0)));
  EXPECT_TRUE(std::isinf(lambda_norm(ModelSpec::gim(Dyson{2.0}), 0.1)));
}

TEST(LambdaNorm, NearestNeighborVelocity) {
  const ModelSpec gim = ModelSpec::gim(FiniteRange{1.0, 1});
  EXPECT_NEAR(lambda_norm(gim, 1.0), 2.0 * std::numbers::e, 1e-14);
  // 2 ||Phi||_lambda / lambda = 4 e^lambda / lambda is minimal at lambda = 1
  const auto v = lr_velocity(gim, linspace(0.5, 1.5, 101));
  EXPECT_NEAR(v.velocity, 4.0 * std::numbers::e, 1e-12);
  EXPECT_NEAR(v.lambda, 1.0, 1e-12);
  const auto vxy = lr_velocity(ModelSpec::xy(FiniteRange{1.0, 1}), linspace(0.5, 1.5, 101));
  EXPECT_NEAR(vxy.velocity, 8.0 * std::numbers::e, 1e-12);
  EXPECT_THROW(lr_velocity(ModelSpec::gim(Dyson{2.0}), {0.5, 1.0}), PreconditionError);
}

TEST(FFunction, PowerLawNormIsZetaSum) {
  const FFunction f = FFunction::power_law(1, 1.0);  // (1+r)^-3
  EXPECT_NEAR(f.norm(), 1.0 + 2.0 * (zeta(3.0) - 1.0), 1e-8);
  EXPECT_NEAR(f.norm(), 1.4041138063191885, 1e-8);
}

TEST(FFunction, ConvolutionConstantMatchesBruteForce) {
  const FFunction f = FFunction::power_law(1, 1.0);
  auto g = [](SiteIndex d) {
    double s = 0;
    for (SiteIndex z = -60000; z <= d + 60000; ++z)
      s += std::pow(1.0 + std::abs(static_cast<double>(z)), -3) * std::pow(1.0 + std::abs(static_cast<double>(z - d)), -3);
    return s * std::pow(1.0 + d, 3);
  };
  double best = 0;
  for (SiteIndex d = 0; d <= 40; ++d) best = std::max(best, g(d));
  EXPECT_GE(f.c_f(), best * (1 - 1e-6));
  EXPECT_LE(f.c_f(), best * (1 + 1e-4));
}

TEST(FFunction, ConvolutionInequalityOnSampledTriples) {
  const FFunction f = FFunction::power_law(1, 1.0);
  for (SiteIndex x = -12; x <= 12; x += 3)
    for (SiteIndex y = -12; y <= 12; y += 4) {
      double s = 0;
      for (SiteIndex z = -20000; z <= 20000; ++z)
        s += f(static_cast<double>(std::abs(x - z))) * f(static_cast<double>(std::abs(z - y)));
      EXPECT_LE(s, f.c_f() * f(static_cast<double>(std::abs(x - y))) * (1 + 1e-9)) << x << " " << y;
    }
}

TEST(FFunction, TableValidation) {
  EXPECT_THROW(FFunction::from_table({1.0, 0.5, 0.7}), PreconditionError);
  EXPECT_THROW(FFunction::power_law(0, 1.0), PreconditionError);
  const FFunction f = FFunction::from_table({1.0, 0.25});
  EXPECT_DOUBLE_EQ(f.norm(), 1.5);
  EXPECT_DOUBLE_EQ(f(5.0), 0.0);
}

TEST(FNorm, ExponentialGImAgainstPowerLaw) {
  const FFunction f = FFunction::power_law(1, 1.0);
  const ModelSpec m = ModelSpec::gim(Exponential{2.0});
  const auto r = f_norm(m, f);
  // sup_r 2^-r (1+r)^3 = 8 at r = 3
  EXPECT_DOUBLE_EQ(r.value, 8.0);
  EXPECT_EQ(r.argmax, 3);
  for (SiteIndex d = 1; d <= 200; ++d) EXPECT_LE(m.bond_norm(d), r.value * f(static_cast<double>(d)) * (1 + 1e-12));
}

TEST(FNorm, DivergesForSlowDecay) {
  const FFunction f = FFunction::power_law(1, 1.0);
  EXPECT_THROW(f_norm(ModelSpec::gim(Dyson{2.0}), f), ConvergenceError);
  EXPECT_NO_THROW(f_norm(ModelSpec::gim(Dyson{4.0}), f));
}
