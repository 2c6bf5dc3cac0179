#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "deltaball/eigenfunctions.hpp"
#include "deltaball/krein.hpp"

using namespace deltaball;
using namespace deltaball::eigen;

namespace {

constexpr double kFigureAlpha = 1.0 / (20.0 * pi);

const ModeCatalog &catalog() {
  static const ModeCatalog cat(BallDomain{1.0, 8, 60});
  return cat;
}

RadialEigenfunction nth_s_wave(double alpha, double R, int j) {
  const auto roots = spectrum::s_wave_roots(alpha, R, j);
  return s_wave_eigenfunction(roots.back(), alpha, R);
}

RadialEigenfunction bound(double alpha, double R) {
  return bound_state_eigenfunction(*spectrum::bound_state(alpha, R), alpha, R);
}

double quadrature_overlap(const RadialEigenfunction &a, const RadialEigenfunction &b) {
  return quadrature::integrate_composite(
      [&](double r) { return 4.0 * pi * a.reduced(r) * b.reduced(r); }, 0.0, a.radius, 64, 32);
}

// max over an interior grid of |-(r u)'' - E (r u)|, relative to max |E r u|,
// with the fourth-order five-point second difference at step 1e-4.
double fd_residual(const RadialEigenfunction &u) {
  const double h = 1e-4;
  double num = 0.0, den = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double r = u.radius * i / 100.0;
    const double d2 = (-u.reduced(r + 2 * h) + 16.0 * u.reduced(r + h) - 30.0 * u.reduced(r) +
                       16.0 * u.reduced(r - h) - u.reduced(r - 2 * h)) /
                      (12.0 * h * h);
    num = std::max(num, std::abs(-d2 - u.energy * u.reduced(r)));
    den = std::max(den, std::abs(u.energy * u.reduced(r)));
  }
  return num / den;
}

double coefficient_norm(const ModeCoefficients &c) {
  double s = 0.0;
  for (const auto &v : c)
    s += std::norm(v);
  return std::sqrt(s);
}

} // namespace

TEST(SWaveEigenfunction, VanishesAtBoundaryAndPositiveNearCenter) {
  for (double alpha : {-0.5, 0.0, kFigureAlpha, 3.0})
    for (int j = 1; j <= 6; ++j) {
      const auto u = nth_s_wave(alpha, 1.4, j);
      EXPECT_EQ(u.value(1.4), 0.0);
      EXPECT_GT(u.value(1e-6), 0.0);
      EXPECT_GT(u.charge, 0.0);
    }
}

TEST(SWaveEigenfunction, ChargeMatchesGreenSingularity) {
  const BallDomain d{1.0, 8, 60};
  for (int j : {1, 2, 5}) {
    const auto u = nth_s_wave(kFigureAlpha, 1.0, j);
    EXPECT_NEAR(u.charge, 4.0 * pi * u.norm_const * std::sin(u.rate), 1e-14);
    const double r = 1e-4;
    const cplx g = green::green_eval(d, u.spectral_parameter(), Point3::Zero(), Point3(0.0, 0.0, r));
    EXPECT_NEAR(u.value(r) / g.real(), u.charge, 1e-8 * u.charge);
    EXPECT_NEAR(r * u.value(r), u.charge / (4.0 * pi), 1e-3 * u.charge);
  }
}

TEST(SWaveEigenfunction, NormByQuadrature) {
  for (double alpha : {-0.05, 0.0, kFigureAlpha, 1e8})
    for (int j : {1, 2, 10, 40})
      EXPECT_NEAR(quadrature_norm(nth_s_wave(alpha, 1.0, j)), 1.0, 1e-8) << alpha << " " << j;
}

TEST(SWaveEigenfunction, OrthogonalityByQuadrature) {
  for (double alpha : {-1.0, kFigureAlpha, 2.0}) {
    std::vector<RadialEigenfunction> fs;
    if (auto b = spectrum::bound_state(alpha, 1.0))
      fs.push_back(bound_state_eigenfunction(*b, alpha, 1.0));
    for (const auto &p : spectrum::s_wave_roots(alpha, 1.0, 8))
      fs.push_back(s_wave_eigenfunction(p, alpha, 1.0));
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t j = 0; j < fs.size(); ++j) {
        const double q = quadrature_overlap(fs[i], fs[j]);
        EXPECT_NEAR(q, i == j ? 1.0 : 0.0, 1e-7);
        EXPECT_NEAR(overlap(fs[i], fs[j]), q, 1e-12);
      }
  }
}

TEST(SWaveEigenfunction, CrossStrengthOverlapMatchesQuadrature) {
  const auto a = nth_s_wave(0.3, 1.2, 2);
  const auto b = nth_s_wave(-0.2, 1.2, 3);
  const auto c = bound(-0.5, 1.2);
  EXPECT_NEAR(overlap(a, b), quadrature_overlap(a, b), 1e-12);
  EXPECT_NEAR(overlap(c, a), quadrature_overlap(c, a), 1e-12);
  EXPECT_NEAR(overlap(c, bound(-2.0, 1.2)), quadrature_overlap(c, bound(-2.0, 1.2)), 1e-12);
}

TEST(SWaveEigenfunction, FiniteDifferenceResidual) {
  for (double alpha : {-0.5, 0.0, kFigureAlpha, 3.0})
    for (int j : {1, 3, 8})
      EXPECT_LT(fd_residual(nth_s_wave(alpha, 1.0, j)), 1e-7);
}

TEST(SWaveEigenfunction, ThresholdRoot) {
  const double R = 1.5;
  const double alpha = -1.0 / (4.0 * pi * R);
  const auto roots = spectrum::s_wave_roots(alpha, R, 3);
  const auto u0 = s_wave_eigenfunction(roots[0], alpha, R);
  EXPECT_EQ(u0.energy, 0.0);
  EXPECT_NEAR(quadrature_norm(u0), 1.0, 1e-10);
  const auto u1 = s_wave_eigenfunction(roots[1], alpha, R);
  EXPECT_NEAR(overlap(u0, u1), 0.0, 1e-10);
}

TEST(SWaveEigenfunction, UncertifiedInputRejected) {
  spectrum::SpectralPoint p;
  p.value = 5.0;
  p.kind = spectrum::PointKind::s_wave_root;
  try {
    s_wave_eigenfunction(p, 0.1, 1.0);
    FAIL();
  } catch (const NumericalError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::uncertified_input);
  }
  p.value = -1.0;
  p.kind = spectrum::PointKind::bound_state;
  EXPECT_THROW(bound_state_eigenfunction(p, -1.0, 1.0), NumericalError);
}

TEST(BoundStateEigenfunction, Certificates) {
  for (double alpha : {-1.0 / (2.0 * pi), -1.0, -10.0}) {
    const auto u = bound(alpha, 1.0);
    EXPECT_EQ(u.value(1.0), 0.0);
    EXPECT_LT(fd_residual(u), 1e-7);
    EXPECT_NEAR(quadrature_norm(u), 1.0, 1e-8);
    EXPECT_GT(u.value(1e-3), 0.0);
  }
  const auto near = bound(-1.0 / (4.0 * pi) * (1.0 + 1e-8), 1.0);
  EXPECT_NEAR(quadrature_norm(near), 1.0, 1e-8);
}

TEST(DomainMembership, EigenfunctionRedecomposed) {
  const auto &cat = catalog();
  for (double alpha : {-1.0, kFigureAlpha, 2.0}) {
    std::vector<RadialEigenfunction> fs = s_wave_basis(alpha, 1.0, 4);
    for (const auto &u : fs) {
      const auto st = decompose(cat, u, 1.0);
      const auto rep = verify_domain_membership(cat, st, alpha);
      EXPECT_LT(rep.residual, 1e-8);
      EXPECT_TRUE(rep.member);
      // The wrong strength fails.
      EXPECT_FALSE(verify_domain_membership(cat, st, alpha + 0.1).member);
    }
  }
}

TEST(DomainMembership, ClosedFormCenterValueMatchesSeriesTrend) {
  // The regular part's mode series converges to the closed-form center value.
  const auto &cat = catalog();
  const auto u = nth_s_wave(kFigureAlpha, 1.0, 1);
  auto st = decompose(cat, u, 1.0);
  const cplx closed = *st.regular_at_center;
  st.regular_at_center.reset();
  const auto rep = verify_domain_membership(cat, st, kFigureAlpha);
  EXPECT_LT(std::abs(rep.regular_at_center - closed), 1e-2 * std::abs(closed));
}

TEST(DomainMembership, InheritedModeHasNullCharge) {
  const auto &cat = catalog();
  const auto st = mode_state(cat, cat.index_of({1, 0, 1}), 1.0);
  const auto rep = verify_domain_membership(cat, st, kFigureAlpha);
  EXPECT_EQ(st.charge, cplx(0.0));
  EXPECT_EQ(rep.residual, 0.0);
}

TEST(DomainMembership, ZeroChargeZeroCenterValue) {
  const auto &cat = catalog();
  WaveState st;
  st.regular = cat.zero_coefficients();
  st.regular[cat.index_of({2, 1, 3})] = cplx(0.4, 0.1);
  st.regular[cat.index_of({1, -1, 7})] = -2.0;
  EXPECT_EQ(verify_domain_membership(cat, st, -3.0).residual, 0.0);
}

TEST(ActionConsistency, HamiltonianActsAsEigenvalue) {
  const auto &cat = catalog();
  for (double alpha : {-1.0, kFigureAlpha}) {
    for (const auto &u : s_wave_basis(alpha, 1.0, 3)) {
      const auto st = decompose(cat, u, 1.0);
      const auto hu = hamiltonian_coefficients(cat, st);
      const auto uu = state_coefficients(cat, st);
      ModeCoefficients diff(hu.size());
      for (std::size_t i = 0; i < hu.size(); ++i)
        diff[i] = hu[i] - u.energy * uu[i];
      EXPECT_LT(coefficient_norm(diff), 1e-6);
      // Coefficients decay like 1/k, so the truncated norm sits a little below 1.
      EXPECT_GT(coefficient_norm(uu), 0.9);
      EXPECT_LE(coefficient_norm(uu), 1.0 + 1e-12);
    }
  }
}

TEST(ResidueProjector, ScaledResolventRecoversEigenfunction) {
  const auto &cat = catalog();
  const double alpha = kFigureAlpha;
  const double a[1] = {alpha};
  const auto spec = krein::ExtensionSpec::local({Point3::Zero()}, a);
  for (int j : {1, 2}) {
    const auto u = nth_s_wave(alpha, 1.0, j);
    const auto uc = state_coefficients(cat, decompose(cat, u, 1.0));
    const double eps = 1e-6;
    const cplx z = -u.energy + eps;
    const auto res = krein::krein_resolvent_apply(cat, spec, z, uc);
    cplx ip{};
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < uc.size(); ++i) {
      const cplx v = (z + u.energy) * res.result[i];
      ip += std::conj(v) * uc[i];
      n1 += std::norm(v);
      n2 += std::norm(uc[i]);
    }
    EXPECT_GT(std::abs(ip) / std::sqrt(n1 * n2), 1.0 - 1e-6);
  }
}

TEST(Completeness, RandomProfileCaptured) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double alpha : {-1.0, 0.0, kFigureAlpha}) {
    const double c0 = u(rng), c1 = u(rng), c2 = u(rng);
    auto f = [&](double r) { return (1.0 - r) * (c0 + c1 * r + c2 * r * r + 2.0); };
    const double total = quadrature::integrate_composite(
        [&](double r) { return 4.0 * pi * r * r * f(r) * f(r); }, 0.0, 1.0, 16, 32);
    double got = 0.0;
    for (const auto &e : s_wave_basis(alpha, 1.0, 40))
      got += std::pow(project_profile(e, f), 2);
    EXPECT_GE(got / total, 1.0 - 1e-3) << "alpha=" << alpha;
    EXPECT_LE(got / total, 1.0 + 1e-10);
  }
}
