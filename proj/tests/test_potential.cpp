#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mlab/corpus.hpp"
#include "mlab/error.hpp"
#include "mlab/io.hpp"
#include "mlab/potential.hpp"

using namespace mlab;

namespace {

// brute-force sup over a fine grid, refined around the best node
double sup_oracle(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
  double best = -INFINITY, arg = lo;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + (hi - lo) * i / n;
    const double v = f(y);
    if (v > best) best = v, arg = y;
  }
  double a = std::max(lo, arg - (hi - lo) / n), b = std::min(hi, arg + (hi - lo) / n);
  for (int it = 0; it < 200; ++it) {
    const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (f(m1) < f(m2))
      a = m1;
    else
      b = m2;
  }
  return std::max(best, f(0.5 * (a + b)));
}

double wiggle(double x) { return 0.05 * x * x * (1 - x) * (1 - x) + 0.1 * x * x * x; }

}  // namespace

TEST(SymplecticPotential, FubiniStudyHasZeroSmoothPart) {
  const auto fs = SymplecticPotential::fubini_study(64);
  for (double g : fs.g()) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(fs.size(), 65u);
}

TEST(SymplecticPotential, RejectsNonConvexWithNode) {
  // L'' = 1/(x(1-x)) + g'' < 0 near x = 1/2 when g'' = -10
  std::vector<double> g(129);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = i / 128.0;
    g[i] = -5.0 * x * x;
  }
  try {
    SymplecticPotential(128, g);
    FAIL() << "accepted a non-convex potential";
  } catch (const ConvexityError& e) {
    const double x = e.node() / 128.0;
    EXPECT_GT(x, 0.1);
    EXPECT_LT(x, 0.9);
  }
}

TEST(SymplecticPotential, RejectsNonFinite) {
  std::vector<double> g(65, 0.0);
  g[7] = NAN;
  EXPECT_THROW(SymplecticPotential(64, g), Error);
}

TEST(Legendre, FubiniStudyIsZeroSmoothPart) {
  std::vector<double> phi;
  const UniformGrid sg{-40, 40, 8192};
  for (double s : sg.nodes()) phi.push_back(softplus(s));
  const auto L = legendre(RadialPotential(40, phi));
  double e = 0;
  for (double g : L.g()) e = std::max(e, std::abs(g));
  EXPECT_LT(e, 1e-8);
}

TEST(Legendre, ConstantShift) {
  std::vector<double> phi;
  const UniformGrid sg{-40, 40, 8192};
  for (double s : sg.nodes()) phi.push_back(softplus(s) + 0.7);
  const auto L = legendre(RadialPotential(40, phi));
  for (double g : L.g()) EXPECT_NEAR(g, -0.7, 1e-8);
}

TEST(Legendre, TanhPerturbationAgainstSupOracle) {
  // tanh damped by the FS density so that phi'' stays positive
  auto phi_f = [](double s) { return softplus(s) + 0.1 * std::tanh(s) * logistic(s) * (1 - logistic(s)); };
  std::vector<double> phi;
  const UniformGrid sg{-40, 40, 8192};
  for (double s : sg.nodes()) phi.push_back(phi_f(s));
  const auto L = legendre(RadialPotential(40, phi), 256);
  double gmax = 0, err = 0;
  const auto x = L.x();
  for (std::size_t j = 8; j + 8 < x.size(); j += 8) {
    const double sup = sup_oracle([&](double s) { return x[j] * s - phi_f(s); }, -40, 40);
    const double Lsing = x[j] * std::log(x[j]) + (1 - x[j]) * std::log(1 - x[j]);
    err = std::max(err, std::abs(L.g()[j] + Lsing - sup));
    gmax = std::max(gmax, std::abs(L.g()[j]));
  }
  EXPECT_GT(gmax, 1e-3);
  EXPECT_LT(err, 1e-6);
}

TEST(InverseLegendre, FubiniStudyClosedForm) {
  const auto p = inverse_legendre(SymplecticPotential::fubini_study());
  const auto s = p.s();
  double e = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s[i]) <= 10) e = std::max(e, std::abs(p.phi()[i] - softplus(s[i])));
  EXPECT_LT(e, 1e-8);
}

TEST(InverseLegendre, ConstantG) {
  const auto p = inverse_legendre(SymplecticPotential::from_function(kDefaultGridN, [](double) { return 0.3; }));
  const auto s = p.s();
  for (std::size_t i = 0; i < s.size(); i += 97) EXPECT_NEAR(p.phi()[i], softplus(s[i]) - 0.3, 1e-8);
}

TEST(InverseLegendre, RoundTripOnCorpus) {
  for (const auto& u : generate_corpus(3, 6)) {
    const auto back = legendre(inverse_legendre(u), u.cells());
    double e = 0;
    for (std::size_t j = 0; j < u.size(); ++j) e = std::max(e, std::abs(back.g()[j] - u.g()[j]));
    EXPECT_LT(e, 1e-6);
  }
}

TEST(InverseLegendre, AgainstSupOracle) {
  const auto u = SymplecticPotential::from_function(kDefaultGridN, wiggle);
  const auto p = inverse_legendre(u);
  const auto s = p.s();
  for (std::size_t i = 3000; i < 5200; i += 311) {
    const double sup = sup_oracle(
        [&](double x) {
          if (x <= 0 || x >= 1) return -wiggle(std::clamp(x, 0.0, 1.0));
          return x * s[i] - (x * std::log(x) + (1 - x) * std::log(1 - x) + wiggle(x));
        },
        0.0, 1.0);
    EXPECT_NEAR(p.phi()[i], sup, 1e-7) << "s = " << s[i];
  }
}

TEST(InverseLegendre, WindowTooSmall) {
  EXPECT_THROW(inverse_legendre(SymplecticPotential::fubini_study(), 3.0), ResolutionError);
}

TEST(LegendreInvolution, RadialRoundTrip) {
  const auto u = SymplecticPotential::from_function(kDefaultGridN, wiggle);
  const auto p = inverse_legendre(u);
  const auto p2 = inverse_legendre(legendre(p));
  double e = 0;
  const auto s = p.s();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s[i]) < 30) e = std::max(e, std::abs(p.phi()[i] - p2.phi()[i]));
  EXPECT_LT(e, 1e-6);
}

TEST(MomentMeasure, FubiniStudyDensity) {
  const auto m = moment_measure(inverse_legendre(SymplecticPotential::fubini_study()));
  EXPECT_EQ(m.coordinate, Coordinate::s_axis);
  const auto s = m.grid.nodes();
  double e = 0;
  for (std::size_t i = 0; i < s.size(); ++i) e = std::max(e, std::abs(m.density[i] - logistic(s[i]) * (1 - logistic(s[i]))));
  EXPECT_LT(e, 1e-5);
  EXPECT_LE(m.mass, 1.0);
  EXPECT_GE(m.mass, 1.0 - 1e-6);
}

TEST(MomentMeasure, ConstantShiftInvariant) {
  const auto p = inverse_legendre(SymplecticPotential::from_function(kDefaultGridN, wiggle));
  std::vector<double> q = p.phi();
  for (double& v : q) v += 2.5;
  const auto a = moment_measure(p), b = moment_measure(RadialPotential(p.window(), q));
  for (std::size_t i = 0; i < a.density.size(); ++i) EXPECT_NEAR(a.density[i], b.density[i], 1e-9);
}

TEST(MomentMeasure, PushforwardIsLebesgue) {
  // integral of f(phi'(s)) phi''(s) ds equals integral of f(x) dx
  const auto p = inverse_legendre(SymplecticPotential::from_function(kDefaultGridN, wiggle));
  const auto m = moment_measure(p);
  const auto dphi = d1_fourth(p.phi(), p.h());
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> f(dphi.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(dphi[i], k) * m.density[i];
    EXPECT_NEAR(trapezoid(f, p.h()), 1.0 / (k + 1), 1e-6) << k;
  }
}

TEST(ScalarCurvature, FubiniStudyIsTwo) {
  for (double v : scalar_curvature(SymplecticPotential::fubini_study())) EXPECT_NEAR(v, 2.0, 1e-6);
  for (double v : scalar_curvature(SymplecticPotential::from_function(kDefaultGridN, [](double) { return -1.5; })))
    EXPECT_NEAR(v, 2.0, 1e-6);
}

TEST(ScalarCurvature, MeanIsTwo) {
  const auto u = SymplecticPotential::from_function(kDefaultGridN, [](double x) { return 0.05 * x * x * (1 - x) * (1 - x); });
  const auto S = scalar_curvature(u);
  double spread = 0;
  for (double v : S) spread = std::max(spread, std::abs(v - 2));
  EXPECT_GT(spread, 1e-3);
  EXPECT_NEAR(trapezoid(S, u.h()), 2.0, 1e-4);
  for (const auto& w : generate_corpus(11, 6)) EXPECT_NEAR(trapezoid(scalar_curvature(w), w.h()), 2.0, 1e-4);
}

TEST(ScalarCurvature, CoarseGridRejected) {
  EXPECT_THROW(scalar_curvature(SymplecticPotential::fubini_study(4)), ResolutionError);
}

TEST(RicciReference, MassAndDensity) {
  const auto m = ricci_reference(Coordinate::s_axis);
  EXPECT_NEAR(m.mass, 2.0, 1e-8);
  const auto s = m.grid.nodes();
  for (std::size_t i = 0; i < s.size(); i += 101) EXPECT_NEAR(m.density[i], 2 * logistic(s[i]) * (1 - logistic(s[i])), 1e-14);
  const auto mm = ricci_reference(Coordinate::moment);
  EXPECT_NEAR(trapezoid(mm.density, mm.grid.step()), 2.0, 1e-12);
}

TEST(GridMeasure, RejectsNegativeDensity) {
  std::vector<double> d(11, 1.0);
  d[3] = -0.1;
  EXPECT_THROW(GridMeasure::make(Coordinate::moment, UniformGrid{0, 1, 10}, d), Error);
}

TEST(Serialization, BitExactRoundTrip) {
  const auto u = generate_corpus(5, 3)[1];
  const json j = json::parse(to_json(u).dump());
  const auto back = symplectic_from_json(j);
  EXPECT_EQ(back.g(), u.g());
  const auto p = inverse_legendre(u);
  const auto pb = radial_from_json(json::parse(to_json(p).dump()));
  EXPECT_EQ(pb.phi(), p.phi());
  EXPECT_EQ(pb.window(), p.window());
  const auto m = moment_measure(p);
  const auto mb = measure_from_json(json::parse(to_json(m).dump()));
  EXPECT_EQ(mb.density, m.density);
  EXPECT_TRUE(mb.grid == m.grid);
}

// random convex g: convexity certified, Legendre round trip holds
TEST(Property, RandomPotentialsRoundTrip) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (int r = 0; r < 5; ++r) {
    const double a = U(rng), b = U(rng), c = U(rng);
    const auto u = SymplecticPotential::from_function(512, [&](double x) { return a * x * x + b * std::sin(3 * x) + c * x * x * x * x; });
    const auto back = legendre(inverse_legendre(u), 512);
    for (std::size_t j = 0; j < u.size(); j += 17) EXPECT_NEAR(back.g()[j], u.g()[j], 1e-6);
    const auto S = scalar_curvature(u);
    EXPECT_NEAR(trapezoid(S, u.h()), 2.0, 1e-4);
  }
}
