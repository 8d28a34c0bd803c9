#include "mlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "mlab/error.hpp"

namespace mlab {

FunctionalReport FunctionalReport::from_values(std::vector<double> t, std::vector<double> values) {
  FunctionalReport r;
  r.t_grid = std::move(t);
  r.values = std::move(values);
  const std::size_t n = r.values.size();
  for (std::size_t i = 0; i + 1 < n; ++i) r.first_diffs.push_back(r.values[i + 1] - r.values[i]);
  r.min_second_diff = n >= 3 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d = r.values[i - 1] - 2.0 * r.values[i] + r.values[i + 1];
    r.second_diffs.push_back(d);
    r.min_second_diff = std::min(r.min_second_diff, d);
  }
  return r;
}

double FunctionalReport::scale() const {
  double s = 1.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

// ---------------------------------------------------------------------------

namespace {

Jet chart_eval(const ChartDensity& m, const Jet& x0) {
  return x0.chain(m(x0.v), m.prime(x0.v), m.double_prime(x0.v));
}

}  // namespace

LocalFunctional energy_functional() {
  return LocalFunctional([](double x, const Jet& g, const Jet& gp, const Jet& gpp) {
    const auto c = chart_terms(x, g, gp, gpp);
    return c.u * (Jet(1.0) + c.J);
  });
}

LocalFunctional energy_T_functional(const GridMeasure& T) {
  ChartDensity m(T);
  return LocalFunctional([m](double x, const Jet& g, const Jet& gp, const Jet& gpp) {
    const auto c = chart_terms(x, g, gp, gpp);
    return c.u * chart_eval(m, c.x0) * c.J;
  });
}

LocalFunctional entropy_functional() {
  return LocalFunctional([](double x, const Jet& g, const Jet& gp, const Jet& gpp) {
    const auto c = chart_terms(x, g, gp, gpp);
    return -log(c.J);
  });
}

LocalFunctional mabuchi_functional() {
  // (Rbar/2) E - E^{Ric} + H with Ric(omega_0) = 2 omega_0: u(1+J) - 2uJ - log J
  return LocalFunctional([](double x, const Jet& g, const Jet& gp, const Jet& gpp) {
    const auto c = chart_terms(x, g, gp, gpp);
    return c.u * (Jet(1.0) + c.J) - Jet(2.0) * c.u * c.J - log(c.J);
  });
}

LocalFunctional mabuchi_donaldson_functional() {
  return LocalFunctional(
      [](double x, const Jet& g, const Jet&, const Jet& gpp) {
        return -log(Jet(1.0) + (x * (1.0 - x)) * gpp) - Jet(2.0) * g;
      },
      1.0, 1.0);
}

LocalFunctional F_mu_functional(const GridMeasure& mu) {
  return energy_T_functional(mu) + (-0.5 * mu.mass) * energy_functional();
}

LocalFunctional F_alpha_functional(const TwistForm& alpha) {
  return energy_T_functional(alpha.as_measure()) + (-0.5 * alpha.mass) * energy_functional();
}

double energy_E(const SymplecticPotential& u) { return energy_functional().value(u.g()); }
double energy_ET(const SymplecticPotential& u, const GridMeasure& T) { return energy_T_functional(T).value(u.g()); }
double mabuchi(const SymplecticPotential& u) { return mabuchi_functional().value(u.g()); }
double mabuchi_donaldson(const SymplecticPotential& u) { return mabuchi_donaldson_functional().value(u.g()); }
double twisted_F_mu(const SymplecticPotential& u, const GridMeasure& mu) { return F_mu_functional(mu).value(u.g()); }
double twisted_F_alpha(const SymplecticPotential& u, const TwistForm& alpha) {
  return F_alpha_functional(alpha).value(u.g());
}

double calabi_energy(const SymplecticPotential& u) {
  std::vector<double> S = scalar_curvature(u);
  for (double& v : S) v = (v - kRbar) * (v - kRbar);
  return trapezoid(S, u.h());
}

double energy_E_radial(const RadialPotential& p) {
  const std::vector<double> s = p.s();
  const std::vector<double> pp = d2(p.phi(), p.h());
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x0 = logistic(s[i]);
    f[i] = (p.phi()[i] - softplus(s[i])) * (pp[i] + x0 * (1.0 - x0));
  }
  return trapezoid(f, p.h());
}

double energy_E_radial_derivative(const RadialPotential& p, std::span<const double> v) {
  const std::vector<double> s = p.s();
  const std::vector<double> pp = d2(p.phi(), p.h());
  const std::vector<double> vpp = d2(v, p.h());
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x0 = logistic(s[i]);
    f[i] = v[i] * (pp[i] + x0 * (1.0 - x0)) + (p.phi()[i] - softplus(s[i])) * vpp[i];
  }
  return trapezoid(f, p.h());
}

// ---------------------------------------------------------------------------

double entropy(const GridMeasure& mu, const GridMeasure& mu0, double floor) {
  if (mu.coordinate != mu0.coordinate || !(mu.grid == mu0.grid))
    throw GridMismatchError("entropy needs both measures on one grid");
  std::vector<double> f(mu.density.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = mu.density[i], p0 = mu0.density[i];
    if (p <= 0.0) continue;
    if (p0 < floor) {
      if (p < floor) continue;
      return std::numeric_limits<double>::infinity();
    }
    f[i] = p * std::log(p / p0);
  }
  return trapezoid(f, mu.grid.step());
}

double entropy_legendre_gap(const GridMeasure& mu, const GridMeasure& mu0, std::span<const double> f) {
  if (f.size() != mu.density.size()) throw GridMismatchError("test function has the wrong size");
  const double H = entropy(mu, mu0);
  const double h = mu.grid.step();
  double fmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (mu0.density[i] > 0) fmax = std::max(fmax, f[i]);
  std::vector<double> a(f.size()), b(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    a[i] = mu.density[i] > 0 ? f[i] * mu.density[i] : 0.0;
    b[i] = mu0.density[i] > 0 ? std::exp(f[i] - fmax) * mu0.density[i] : 0.0;
  }
  return H - (trapezoid(a, h) - (fmax + std::log(trapezoid(b, h))));
}

// ---------------------------------------------------------------------------

FunctionalReport functional_scan(const MetricPath& path, const LocalFunctional& F) {
  std::vector<double> vals;
  vals.reserve(path.size());
  for (const auto& sl : path.slices) vals.push_back(F.value(sl.g()));
  return FunctionalReport::from_values(path.t_grid.nodes(), std::move(vals));
}

FunctionalReport convexity_scan(const MetricPath& path) {
  if (path.kind != PathKind::geodesic)
    throw Error("convexity_scan needs a geodesic; use a subharmonicity scan for other paths");
  return functional_scan(path, mabuchi_functional());
}

SecondVariation second_variation_check(const MetricPath& path, double residual_threshold) {
  if (path.kind == PathKind::generic) {
    const double r = hmae_residual(path);
    if (r > residual_threshold)
      throw Error("second variation needs a geodesic regime; residual " + std::to_string(r));
  }
  const LocalFunctional M = mabuchi_functional();
  SecondVariation out;
  out.min_integrand = std::numeric_limits<double>::infinity();
  const std::size_t T = path.size();
  const double h = path.slices.front().h();
  const std::vector<double> x = path.slices.front().x();
  for (std::size_t i = 1; i + 1 < T; ++i) {
    const auto& g = path.slices[i].g();
    const std::vector<double> gt = path.g_t(i), gtt = path.g_tt(i);
    out.lhs.push_back(M.second_directional(g, gt) + M.directional(g, gtt));

    const std::vector<double> gpp = d2(g, h), gppp = d1(gpp, h);
    const std::vector<double> Ltxx = d2(gt, h), Lttxx = d2(gtt, h), Lttx = d1(gtt, h);
    std::vector<double> f(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double w = x[j] * (1.0 - x[j]);
      const double den = 1.0 + w * gpp[j];
      const double hh = w / den;  // 1 / L_xx
      const double Ptt = -Lttxx[j] * hh + Ltxx[j] * Ltxx[j] * hh * hh;
      const double Lxxx_h2 = (-(1.0 - 2.0 * x[j]) + w * w * gppp[j]) / (den * den);
      // -P_x L_ttx / L_xx = L_xxx h^2 L_ttx
      f[j] = Ptt + Lxxx_h2 * Lttx[j];
      if (j > 0 && j + 1 < x.size()) out.min_integrand = std::min(out.min_integrand, hh * f[j]);
    }
    out.rhs.push_back(trapezoid(f, h));
    out.discrepancy = std::max(out.discrepancy, std::abs(out.lhs.back() - out.rhs.back()));
  }
  if (T < 3) out.min_integrand = 0.0;
  return out;
}

Subslope subslope_check(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  Subslope r;
  const LocalFunctional M = mabuchi_functional();
  r.lhs = M.value(u1.g()) - M.value(u0.g());
  const double d = mabuchi_distance(u0, u1);
  r.rhs = -d * std::sqrt(calabi_energy(u0));
  r.slack = r.lhs - r.rhs;
  std::vector<double> delta(u0.size());
  for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = u1.g()[j] - u0.g()[j];
  r.fprime0 = M.directional(u0.g(), delta);
  // velocity at fixed point is -delta at the moment point
  std::vector<double> S = scalar_curvature(u0);
  for (std::size_t j = 0; j < S.size(); ++j) S[j] = (S[j] - kRbar) * delta[j];
  r.pairing = trapezoid(S, u0.h());
  return r;
}

double poincare_constant(const GridMeasure& mu, std::size_t cells) {
  ChartDensity m(mu);
  const UniformGrid xg{0.0, 1.0, cells};
  const double h = xg.step();
  const int n = static_cast<int>(cells + 1);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n), B = Eigen::MatrixXd::Zero(n, n);
  const std::vector<double> q = trapezoid_weights(cells + 1, h);
  for (int i = 0; i < n; ++i) B(i, i) = q[i] * std::max(m(xg.node(i)), 1e-300);
  for (int c = 0; c + 1 < n; ++c) {
    const double xm = 0.5 * (xg.node(c) + xg.node(c + 1));
    const double w = xm * (1.0 - xm) * std::max(m(xm), 0.0) / h;
    K(c, c) += w;
    K(c + 1, c + 1) += w;
    K(c, c + 1) -= w;
    K(c + 1, c) -= w;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, B);
  if (es.info() != Eigen::Success) throw ConvergenceError("Poincare eigenproblem failed");
  // eigenvalue 0 belongs to the constants
  return es.eigenvalues()(1);
}

StrictConvexity strict_convexity_Imu(const MetricPath& path, const GridMeasure& mu) {
  if (path.kind == PathKind::generic) throw Error("strict convexity needs a geodesic or subgeodesic");
  StrictConvexity r;
  const LocalFunctional I = energy_T_functional(mu);
  const std::size_t T = path.size();
  const double f0 = I.directional(path.slices.front().g(), path.g_t(0));
  const double f1 = I.directional(path.slices.back().g(), path.g_t(T - 1));
  r.gap = f1 - f0;
  r.A = ChartDensity(mu).min_value();
  r.C = 0.0;
  for (const auto& sl : path.slices) {
    const std::vector<double> x = sl.x(), gp = sl.gp(), gpp = sl.gpp();
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto c = chart_terms(x[j], sl.g()[j], gp[j], gpp[j]);
      r.C = std::max(r.C, 1.0 / c.J);
    }
  }
  if (!std::isfinite(r.C) || r.C > 1e8)
    throw Error("density ratio of the path against omega_0 is unbounded (C = " + std::to_string(r.C) + ")");
  r.delta = poincare_constant(mu);
  r.distance = metric_distance(path.slices.front(), path.slices.back());
  r.bound = r.delta * r.A / (r.C * r.C) * r.distance * r.distance;
  return r;
}

GradientCheck taylor_check(const std::function<double(double)>& f, double derivative, std::array<double, 2> h) {
  GradientCheck c;
  c.derivative = derivative;
  c.h = h;
  const double f0 = f(0.0);
  for (int k = 0; k < 2; ++k) c.remainder[k] = std::abs(f(h[k]) - f0 - h[k] * derivative);
  c.order = std::log(c.remainder[0] / c.remainder[1]) / std::log(h[0] / h[1]);
  return c;
}

}  // namespace mlab
