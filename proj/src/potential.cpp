#include "mlab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlab/error.hpp"

namespace mlab {

double logistic(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

double logit(double x) { return std::log(x) - std::log1p(-x); }

namespace {

double entropy_part(double x) {
  double a = x > 0 ? x * std::log(x) : 0.0;
  double b = x < 1 ? (1.0 - x) * std::log1p(-x) : 0.0;
  return a + b;
}

}  // namespace

// ---------------------------------------------------------------------------

SymplecticPotential::SymplecticPotential(std::size_t cells, std::vector<double> g)
    : grid_{0.0, 1.0, cells}, g_(std::move(g)) {
  if (cells < 4) throw ResolutionError("symplectic potential needs at least 4 cells");
  if (g_.size() != cells + 1) throw GridMismatchError("g has the wrong number of samples");
  validate(g_, grid_.step());
}

SymplecticPotential SymplecticPotential::fubini_study(std::size_t cells) {
  return SymplecticPotential(cells, std::vector<double>(cells + 1, 0.0));
}

SymplecticPotential SymplecticPotential::from_function(std::size_t cells,
                                                       const std::function<double(double)>& g) {
  UniformGrid grid{0.0, 1.0, cells};
  std::vector<double> v(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) v[i] = g(grid.node(i));
  return SymplecticPotential(cells, std::move(v));
}

void SymplecticPotential::validate(std::span<const double> g, double h) {
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(g[i])) throw ConvexityError("g is not finite", i);
  std::vector<double> L(n);
  for (std::size_t i = 0; i < n; ++i) L[i] = entropy_part(i == n - 1 ? 1.0 : i * h) + g[i];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double x = i * h;
    const double d2L = L[i - 1] - 2.0 * L[i] + L[i + 1];
    const double d2g = (g[i - 1] - 2.0 * g[i] + g[i + 1]) / (h * h);
    if (d2L < -kConvexTol || 1.0 + x * (1.0 - x) * d2g <= 0.0)
      throw ConvexityError("symplectic potential is not strictly convex", i);
  }
}

std::vector<double> SymplecticPotential::L() const {
  std::vector<double> out(g_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = entropy_part(grid_.node(i)) + g_[i];
  return out;
}

std::vector<double> SymplecticPotential::gp() const { return d1(g_, h()); }
std::vector<double> SymplecticPotential::gpp() const { return d2(g_, h()); }

// ---------------------------------------------------------------------------

RadialPotential::RadialPotential(double window, std::vector<double> phi)
    : grid_{-window, window, phi.size() - 1}, phi_(std::move(phi)) {
  if (phi_.size() < 5) throw ResolutionError("radial potential needs at least 5 samples");
  if (!(window > 0)) throw ResolutionError("window must be positive");
  validate(phi_, grid_.step());
}

void RadialPotential::validate(std::span<const double> phi, double h) {
  const std::size_t n = phi.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(phi[i])) throw ConvexityError("phi is not finite", i);
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (phi[i - 1] - 2.0 * phi[i] + phi[i + 1] < -kConvexTol)
      throw ConvexityError("radial potential is not convex", i);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double slope = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
    if (slope < -1e-9 || slope > 1.0 + 1e-9)
      throw ConvexityError("radial slope leaves [0,1]", i);
  }
}

// ---------------------------------------------------------------------------

GridMeasure GridMeasure::make(Coordinate c, UniformGrid grid, std::vector<double> density) {
  GridMeasure m{c, grid, std::move(density), 0.0};
  if (m.density.size() != grid.size()) throw GridMismatchError("density has the wrong number of samples");
  m.mass = trapezoid(m.density, grid.step());
  m.validate();
  return m;
}

void GridMeasure::validate() const {
  if (density.size() != grid.size()) throw GridMismatchError("density has the wrong number of samples");
  for (std::size_t i = 0; i < density.size(); ++i)
    if (!(density[i] >= 0.0)) throw Error("measure density negative at node " + std::to_string(i));
  const double q = trapezoid(density, grid.step());
  if (std::abs(q - mass) > 1e-8 * std::max(1.0, std::abs(mass)))
    throw Error("stored mass disagrees with quadrature");
}

TwistForm TwistForm::make(UniformGrid grid, std::vector<double> density) {
  GridMeasure m = GridMeasure::make(Coordinate::moment, grid, std::move(density));
  return TwistForm{m.grid, std::move(m.density), m.mass};
}

TwistForm TwistForm::multiple_of_reference(double c, std::size_t cells) {
  return make(UniformGrid{0.0, 1.0, cells}, std::vector<double>(cells + 1, c));
}

GridMeasure TwistForm::as_measure() const { return GridMeasure{Coordinate::moment, grid, density, mass}; }

ChartDensity::ChartDensity(const GridMeasure& m) {
  std::vector<double> v;
  UniformGrid chart{0.0, 1.0, m.grid.cells};
  if (m.coordinate == Coordinate::moment) {
    if (m.grid.lo != 0.0 || m.grid.hi != 1.0) throw GridMismatchError("moment measure must live on [0,1]");
    v = m.density;
  } else {
    chart.cells = 1024;
    CubicSpline ds(m.density, m.grid.lo, m.grid.step());
    v.resize(chart.size());
    for (std::size_t i = 1; i < chart.cells; ++i) {
      const double x0 = chart.node(i);
      const double s = std::clamp(logit(x0), m.grid.lo, m.grid.hi);
      v[i] = std::max(0.0, ds(s)) / (x0 * (1.0 - x0));
    }
    v.front() = 2.0 * v[1] - v[2];
    v.back() = 2.0 * v[chart.cells - 1] - v[chart.cells - 2];
  }
  min_ = *std::min_element(v.begin(), v.end());
  spline_ = CubicSpline(v, 0.0, chart.step());
}

// ---------------------------------------------------------------------------

RadialEvaluator::RadialEvaluator(const SymplecticPotential& L) : g_(L.g(), 0.0, L.h()) {
  for (double v : L.gp()) gp_bound_ = std::max(gp_bound_, std::abs(v));
}

double RadialEvaluator::y_of_s(double s) const {
  // F(y) = y + g'(logistic(y)) - s is strictly increasing
  double lo = s - gp_bound_ - 1.0, hi = s + gp_bound_ + 1.0;
  double y = s - gp(logistic(s));
  y = std::clamp(y, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double x = logistic(y);
    const double F = y + gp(x) - s;
    if (F > 0) hi = y;
    else lo = y;
    const double dF = 1.0 + gpp(x) * x * (1.0 - x);
    double next = y - F / dF;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 4e-16 * (1.0 + std::abs(y)) || hi - lo <= 4e-16 * (1.0 + std::abs(y))) {
      return next;
    }
    y = next;
  }
  return y;
}

double RadialEvaluator::phi(double s) const {
  const double y = y_of_s(s);
  const double x = logistic(y);
  // x s - x log x - (1-x) log(1-x) - g(x)
  return x * s + x * softplus(-y) + (1.0 - x) * softplus(y) - g(x);
}

double RadialEvaluator::phi_pp(double s) const {
  const double y = y_of_s(s);
  const double x = logistic(y);
  const double w = x * (1.0 - x);
  return w / (1.0 + w * gpp(x));
}

// ---------------------------------------------------------------------------

RadialPotential inverse_legendre(const SymplecticPotential& L, double window, std::size_t s_cells) {
  RadialEvaluator ev(L);
  const double deficit = ev.x_of_s(-window) + (1.0 - ev.x_of_s(window));
  if (deficit > 1e-6)
    throw ResolutionError("window " + std::to_string(window) + " leaves slope mass " +
                          std::to_string(deficit) + " unresolved");
  UniformGrid sg{-window, window, s_cells};
  std::vector<double> phi(sg.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = ev.phi(sg.node(i));
  return RadialPotential(window, std::move(phi));
}

SymplecticPotential legendre(const RadialPotential& p, std::size_t cells) {
  const double S = p.window();
  const double hs = p.h();
  CubicSpline sp(p.phi(), -S, hs);
  const double slope_lo = sp.prime(-S), slope_hi = sp.prime(S);
  UniformGrid xg{0.0, 1.0, cells};
  std::vector<double> g(cells + 1);
  for (std::size_t i = 1; i < cells; ++i) {
    const double x = xg.node(i);
    if (x <= slope_lo || x >= slope_hi)
      throw ResolutionError("window too small: moment node " + std::to_string(i) + " has no dual point");
    double lo = -S, hi = S, s = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double F = sp.prime(s) - x;
      if (F > 0) hi = s;
      else lo = s;
      const double dF = sp.double_prime(s);
      double next = dF > 0 ? s - F / dF : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - s) <= 1e-15 * (1.0 + std::abs(s)) || hi - lo < 1e-14;
      s = next;
      if (done) break;
    }
    g[i] = x * s - sp(s) - entropy_part(x);
  }
  g[0] = -p.phi().front();
  g[cells] = S - p.phi().back();
  return SymplecticPotential(cells, std::move(g));
}

GridMeasure moment_measure(const RadialPotential& p) {
  std::vector<double> dens = d2(p.phi(), p.h());
  for (double& d : dens) d = std::max(d, 0.0);
  GridMeasure m = GridMeasure::make(Coordinate::s_axis, p.grid(), std::move(dens));
  // total slope gained across the window
  const std::vector<double> slope = d1(p.phi(), p.h());
  m.mass = slope.back() - slope.front();
  m.validate();
  return m;
}

std::vector<double> scalar_curvature(const SymplecticPotential& L) {
  if (L.cells() < 8) throw ResolutionError("grid too coarse for scalar curvature");
  const std::vector<double> x = L.x();
  const std::vector<double> gpp = L.gpp();
  std::vector<double> hinv(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = x[i] * (1.0 - x[i]);
    hinv[i] = w / (1.0 + w * gpp[i]);
  }
  std::vector<double> S = d2(hinv, L.h());
  for (std::size_t i = 0; i < S.size(); ++i) {
    S[i] = -S[i];
    if (!std::isfinite(S[i])) throw ResolutionError("scalar curvature not finite at node " + std::to_string(i));
  }
  return S;
}

GridMeasure ricci_reference(Coordinate c, std::size_t cells, double window) {
  if (c == Coordinate::moment)
    return GridMeasure::make(c, UniformGrid{0.0, 1.0, cells}, std::vector<double>(cells + 1, 2.0));
  UniformGrid sg{-window, window, kDefaultSCells};
  std::vector<double> d(sg.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = logistic(sg.node(i));
    d[i] = 2.0 * x * (1.0 - x);
  }
  return GridMeasure::make(c, sg, std::move(d));
}

}  // namespace mlab
