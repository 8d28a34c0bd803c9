#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mlab/corpus.hpp"
#include "mlab/error.hpp"
#include "mlab/fields.hpp"
#include "mlab/functionals.hpp"
#include "mlab/io.hpp"

using namespace mlab;

namespace {

double bump(double x) { return 0.05 * x * x * (1 - x) * (1 - x) + 0.1 * x * x * x; }
SymplecticPotential perturbed(std::size_t n = kDefaultGridN) { return SymplecticPotential::from_function(n, bump); }
SymplecticPotential constant_g(double c, std::size_t n = kDefaultGridN) {
  return SymplecticPotential::from_function(n, [c](double) { return c; });
}

GridMeasure moment_density(std::size_t n, const std::function<double(double)>& f) {
  std::vector<double> d(n + 1);
  for (std::size_t i = 0; i <= n; ++i) d[i] = f(static_cast<double>(i) / n);
  return GridMeasure::make(Coordinate::moment, UniformGrid{0, 1, n}, d);
}

std::vector<double> direction(const SymplecticPotential& u) {
  std::vector<double> w(u.size());
  const auto x = u.x();
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = 0.3 * std::sin(M_PI * x[j]) * std::cos(3 * x[j]) + 0.1 * x[j];
  return w;
}

}  // namespace

TEST(Energy, ZeroAndConstants) {
  EXPECT_EQ(energy_E(SymplecticPotential::fubini_study()), 0.0);
  // g = -c means u = c
  EXPECT_NEAR(energy_E(constant_g(-0.7)), 1.4, 1e-12);
}

TEST(Energy, TwoTimesIntegralOfG) {
  // continuum identity E = -2 integral of g, checked by refinement
  const double e512 = energy_E(perturbed(512)), e1024 = energy_E(perturbed(1024));
  const double oracle = -2.0 * (0.05 / 30.0 + 0.1 / 4.0);
  EXPECT_LT(std::abs(e1024 - oracle), std::abs(e512 - oracle) + 1e-15);
  EXPECT_NEAR(e1024, oracle, 1e-6);
}

TEST(Energy, RadialDerivativePairing) {
  const auto p = inverse_legendre(perturbed());
  const auto s = p.s();
  std::vector<double> v(s.size()), f(s.size());
  const auto pp = d2(p.phi(), p.h());
  for (std::size_t i = 0; i < s.size(); ++i) {
    v[i] = logistic(s[i]) * (1 - logistic(s[i])) * std::cos(s[i] / 3);
    f[i] = 2 * v[i] * pp[i];
  }
  const auto chk = taylor_check(
      [&](double h) {
        auto q = p.phi();
        for (std::size_t i = 0; i < q.size(); ++i) q[i] += h * v[i];
        return energy_E_radial(RadialPotential(p.window(), q));
      },
      trapezoid(f, p.h()));
  EXPECT_GE(chk.order, 1.9);
  EXPECT_NEAR(energy_E_radial_derivative(p, v), trapezoid(f, p.h()), 1e-6);
}

TEST(EnergyT, ZeroConstantsAndRicci) {
  const auto ric = ricci_reference(Coordinate::moment);
  EXPECT_EQ(energy_ET(SymplecticPotential::fubini_study(), ric), 0.0);
  EXPECT_NEAR(energy_ET(constant_g(-0.5), ric), 1.0, 1e-12);
}

TEST(EnergyT, DerivativeIsPairingWithT) {
  const auto u = perturbed();
  const auto T = moment_density(kDefaultGridN, [](double x) { return 1 + 0.5 * std::cos(2 * M_PI * x); });
  const auto w = direction(u);
  const auto m = pulled_density(u, T);
  std::vector<double> f(w.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = -w[j] * m[j];
  const auto F = energy_T_functional(T);
  const auto chk = taylor_check(
      [&](double h) {
        auto g = u.g();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += h * w[j];
        return F.value(g);
      },
      trapezoid(f, u.h()));
  EXPECT_GE(chk.order, 1.9);
}

TEST(Entropy, SelfIsZeroAndNonnegative) {
  const auto mu0 = moment_density(512, [](double) { return 1.0; });
  EXPECT_EQ(entropy(mu0, mu0), 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  for (int r = 0; r < 10; ++r) {
    const double a = U(rng), b = U(rng);
    auto mu = moment_density(512, [&](double x) { return a + b * x * x; });
    for (double& d : mu.density) d /= mu.mass;
    mu.mass = 1;
    EXPECT_GE(entropy(mu, mu0), -1e-12);
  }
}

TEST(Entropy, GaussianClosedForm) {
  const UniformGrid sg{-30, 30, 6000};
  auto gauss = [&](double m, double sd) {
    std::vector<double> d;
    for (double s : sg.nodes()) d.push_back(std::exp(-0.5 * std::pow((s - m) / sd, 2)) / (sd * std::sqrt(2 * M_PI)));
    return GridMeasure::make(Coordinate::s_axis, sg, d);
  };
  const double m1 = 0.3, s1 = 1.2, m2 = -0.5, s2 = 1.7;
  const double kl = std::log(s2 / s1) + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2 * s2 * s2) - 0.5;
  EXPECT_NEAR(entropy(gauss(m1, s1), gauss(m2, s2)), kl, 1e-5);
}

TEST(Entropy, SingularGivesInfinity) {
  auto mu0 = moment_density(64, [](double x) { return x < 0.5 ? 2.0 : 0.0; });
  auto mu = moment_density(64, [](double) { return 1.0; });
  EXPECT_TRUE(std::isinf(entropy(mu, mu0)));
}

TEST(EntropyGap, LegendreDuality) {
  const auto mu0 = moment_density(1024, [](double x) { return 0.5 + x; });
  const auto mu = moment_density(1024, [](double x) { return 1 + 0.5 * std::sin(2 * M_PI * x); });
  const double H = entropy(mu, mu0);
  EXPECT_NEAR(entropy_legendre_gap(mu, mu0, std::vector<double>(1025, 0.0)), H, 1e-12);
  std::vector<double> opt(1025);
  for (std::size_t i = 0; i < opt.size(); ++i) opt[i] = std::log(mu.density[i] / mu0.density[i]);
  EXPECT_LE(std::abs(entropy_legendre_gap(mu, mu0, opt)), 1e-6);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N(0, 1);
  for (int r = 0; r < 50; ++r) {
    const double a = N(rng), b = N(rng), c = N(rng);
    std::vector<double> f(1025);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double x = i / 1024.0;
      f[i] = a * std::sin(5 * x) + b * x * x + c * std::cos(11 * x);
    }
    EXPECT_GE(entropy_legendre_gap(mu, mu0, f), -1e-9);
  }
}

TEST(Mabuchi, VanishesOnConstants) {
  EXPECT_EQ(mabuchi(SymplecticPotential::fubini_study()), 0.0);
  EXPECT_NEAR(mabuchi(constant_g(0.9)), 0.0, 1e-12);
  EXPECT_NEAR(mabuchi_donaldson(constant_g(0.9)), 0.0, 1e-12);
}

TEST(Mabuchi, GradientIsCurvaturePairing) {
  const auto u = perturbed();
  const auto w = direction(u);
  const auto S = scalar_curvature(u);
  std::vector<double> f(w.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = (S[j] - 2) * w[j];
  const auto M = mabuchi_functional();
  const auto chk = taylor_check(
      [&](double h) {
        auto g = u.g();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += h * w[j];
        return M.value(g);
      },
      trapezoid(f, u.h()));
  EXPECT_GE(chk.order, 1.9);
}

TEST(Mabuchi, TwoDiscretizationsAgree) {
  for (const auto& u : generate_corpus(6, 5)) EXPECT_NEAR(mabuchi(u), mabuchi_donaldson(u), 1e-5);
}

TEST(LocalFunctional, JetDerivativesMatchDifferences) {
  const auto u = perturbed(128);
  const auto w = direction(u);
  const auto M = mabuchi_functional();
  const double d = M.directional(u.g(), w), d2 = M.second_directional(u.g(), w);
  auto f = [&](double h) {
    auto g = u.g();
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += h * w[j];
    return M.value(g);
  };
  const double h = 1e-4;
  EXPECT_NEAR((f(h) - f(-h)) / (2 * h), d, 1e-8 * (1 + std::abs(d)));
  EXPECT_NEAR((f(h) - 2 * f(0) + f(-h)) / (h * h), d2, 1e-4 * (1 + std::abs(d2)));
  const auto H = M.hessian(u.g());
  Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  EXPECT_NEAR(wv.dot(H * wv), d2, 1e-9 * (1 + std::abs(d2)));
}

TEST(ConvexityScan, ConstantAndShiftPaths) {
  const auto u = perturbed();
  const auto r = convexity_scan(constant_path(u, 9));
  for (double d : r.second_diffs) EXPECT_NEAR(d, 0.0, 1e-12);
  std::vector<double> g = u.g();
  for (double& v : g) v -= 0.3;
  const auto r2 = convexity_scan(weak_geodesic(u, SymplecticPotential(u.cells(), g), 9));
  for (double v : r2.values) EXPECT_NEAR(v, r2.values.front(), 1e-7);
}

TEST(ConvexityScan, MainCheckAndEndpoints) {
  const auto a = SymplecticPotential::fubini_study(), b = perturbed();
  const auto r = convexity_scan(weak_geodesic(a, b, 65));
  EXPECT_GE(r.min_second_diff, -1e-6 * r.scale());
  EXPECT_EQ(r.values.front(), mabuchi(a));
  EXPECT_EQ(r.values.back(), mabuchi(b));
}

TEST(ConvexityScan, RefusesNonGeodesic) {
  const auto a = SymplecticPotential::fubini_study(256), b = perturbed(256);
  EXPECT_THROW(convexity_scan(subgeodesic_make(a, b, 0.1, 9)), Error);
}

TEST(FunctionalReport, DifferencesRecomputeExactly) {
  const auto r = FunctionalReport::from_values({0, 0.5, 1, 1.5}, {1.0, 0.25, 3.0, -2.0});
  ASSERT_EQ(r.second_diffs.size(), 2u);
  EXPECT_EQ(r.second_diffs[0], 1.0 - 0.5 + 3.0);
  EXPECT_EQ(r.second_diffs[1], 0.25 - 6.0 - 2.0);
  EXPECT_EQ(r.min_second_diff, r.second_diffs[1]);
  std::ostringstream ss;
  write_report_csv(ss, r);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "t,value,d1,d2");
}

TEST(SecondVariation, ConstantPath) {
  const auto r = second_variation_check(constant_path(perturbed(256), 9));
  EXPECT_NEAR(r.discrepancy, 0.0, 1e-12);
  for (double v : r.lhs) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(SecondVariation, RefinementAndPositivity) {
  const auto r512 = second_variation_check(weak_geodesic(SymplecticPotential::fubini_study(512), perturbed(512), 33));
  const auto r1024 = second_variation_check(weak_geodesic(SymplecticPotential::fubini_study(1024), perturbed(1024), 65));
  EXPECT_LT(r1024.discrepancy, r512.discrepancy);
  EXPECT_GE(r1024.min_integrand, -1e-8);
}

TEST(Subslope, TrivialAndFubiniStudy) {
  const auto u = perturbed();
  const auto r = subslope_check(u, u);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_NEAR(r.rhs, 0.0, 1e-12);
  const auto fs = SymplecticPotential::fubini_study();
  for (const auto& v : generate_corpus(8, 8)) {
    EXPECT_GE(mabuchi(v), -1e-6);
    const auto s = subslope_check(fs, v);
    EXPECT_GE(s.slack, -1e-4);
    EXPECT_GE(s.fprime0, s.pairing - 1e-6);
  }
}

TEST(Calabi, ZeroAndRefinement) {
  EXPECT_NEAR(calabi_energy(SymplecticPotential::fubini_study()), 0.0, 1e-20);
  EXPECT_NEAR(calabi_energy(constant_g(0.4)), 0.0, 1e-20);
  auto f = [](double x) { return 0.05 * x * x * (1 - x) * (1 - x); };
  const double c512 = calabi_energy(SymplecticPotential::from_function(512, f));
  const double c1024 = calabi_energy(SymplecticPotential::from_function(1024, f));
  EXPECT_GT(c1024, 0.0);
  EXPECT_NEAR(c512 / c1024, 1.0, 5e-3);
}

TEST(Twisted, VanishOnConstants) {
  const auto mu = moment_density(1024, [](double x) { return 1 + 0.5 * std::cos(2 * M_PI * x); });
  const auto alpha = TwistForm::multiple_of_reference(0.2);
  EXPECT_NEAR(twisted_F_mu(constant_g(0.6), mu), 0.0, 1e-9);
  EXPECT_NEAR(twisted_F_alpha(constant_g(0.6), alpha), 0.0, 1e-12);
}

TEST(Twisted, ConvexAlongGeodesics) {
  const auto mu = moment_density(1024, [](double x) { return 1 + 0.5 * std::cos(2 * M_PI * x) + 0.2 * x; });
  const auto U = generate_corpus(10, 5);
  for (std::size_t i = 0; i + 1 < U.size(); ++i) {
    const auto r = functional_scan(weak_geodesic(U[i], U[i + 1], 33), F_mu_functional(mu));
    EXPECT_GE(r.min_second_diff, -1e-10);
  }
}

TEST(Twisted, DifferenceBoundedAlongOrbit) {
  const auto mu = moment_density(1024, [](double x) { return 1 + 0.5 * std::cos(2 * M_PI * x); });
  const auto nu = moment_density(1024, [](double x) { return 0.5 + x * x * 1.5; });
  const auto ray = orbit_ray(SymplecticPotential::fubini_study(), GradientField{}, 2.0, 17);
  const auto a = functional_scan(ray, F_mu_functional(mu)), b = functional_scan(ray, F_mu_functional(nu));
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    lo = std::min(lo, a.values[i] - b.values[i]);
    hi = std::max(hi, a.values[i] - b.values[i]);
  }
  const double growth = std::min(a.values.back() - a.values.front(), b.values.back() - b.values.front());
  EXPECT_GT(growth, 0.3);
  EXPECT_LT(hi - lo, 0.5 * growth);
}

TEST(StrictConvexity, ConstantPathAndPoincare) {
  const auto mu0 = moment_density(256, [](double) { return 1.0; });
  EXPECT_NEAR(poincare_constant(mu0), 2.0, 1e-3);
  const auto r = strict_convexity_Imu(constant_path(perturbed(), 9), mu0);
  EXPECT_NEAR(r.gap, 0.0, 1e-12);
  EXPECT_NEAR(r.bound, 0.0, 1e-12);
  const auto g = strict_convexity_Imu(weak_geodesic(SymplecticPotential::fubini_study(), perturbed(), 33), mu0);
  EXPECT_GT(g.gap, 0.0);
  EXPECT_GE(g.gap, g.bound - 1e-6);
}

TEST(Property, EntropyConvexAlongAffineMeasures) {
  const auto mu0 = moment_density(512, [](double x) { return 0.5 + x; });
  const auto a = moment_density(512, [](double x) { return 2 * x; });
  const auto b = moment_density(512, [](double x) { return 1 + 0.9 * std::sin(2 * M_PI * x); });
  const double Ha = entropy(a, mu0), Hb = entropy(b, mu0);
  for (double s = 0.1; s < 1; s += 0.1) {
    std::vector<double> d(a.density.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = s * b.density[i] + (1 - s) * a.density[i];
    const auto m = GridMeasure::make(Coordinate::moment, a.grid, d);
    EXPECT_LE(entropy(m, mu0), s * Hb + (1 - s) * Ha + 1e-9);
  }
}

TEST(Property, EntropyLowerSemicontinuityProxy) {
  const auto mu0 = moment_density(512, [](double x) { return 0.5 + x; });
  const auto mu = moment_density(512, [](double x) { return 1 + 0.5 * std::cos(3 * x); });
  const double H = entropy(mu, mu0);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    std::vector<double> d(mu.density.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = mu.density[i] * (1 + eps * std::sin(40.0 * i / 512.0));
    EXPECT_GE(entropy(GridMeasure::make(Coordinate::moment, mu.grid, d), mu0), H - 1e-6 - 2 * eps);
  }
}

TEST(Property, ConvexityOnCorpus) {
  const auto U = generate_corpus(12, 6);
  for (std::size_t i = 0; i + 1 < U.size(); ++i) {
    const auto r = convexity_scan(weak_geodesic(U[i], U[i + 1], 33));
    EXPECT_GE(r.min_second_diff, -1e-6 * r.scale()) << i;
  }
}
