#include "mlab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlab/error.hpp"

namespace mlab {

const char* to_string(PathKind k) {
  switch (k) {
    case PathKind::geodesic: return "geodesic";
    case PathKind::subgeodesic: return "subgeodesic";
    default: return "generic";
  }
}

PathKind path_kind_from_string(const std::string& s) {
  if (s == "geodesic") return PathKind::geodesic;
  if (s == "subgeodesic") return PathKind::subgeodesic;
  if (s == "generic") return PathKind::generic;
  throw ConfigError("unknown path kind '" + s + "'");
}

std::vector<double> MetricPath::g_t(std::size_t i) const {
  const std::size_t T = size();
  if (T < 3) throw ResolutionError("path needs at least 3 t-nodes");
  const double k = dt();
  const auto& a = slices;
  const std::size_t n = a[0].size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (i == 0) out[j] = (-3.0 * a[0].g()[j] + 4.0 * a[1].g()[j] - a[2].g()[j]) / (2.0 * k);
    else if (i == T - 1)
      out[j] = (3.0 * a[T - 1].g()[j] - 4.0 * a[T - 2].g()[j] + a[T - 3].g()[j]) / (2.0 * k);
    else out[j] = (a[i + 1].g()[j] - a[i - 1].g()[j]) / (2.0 * k);
  }
  return out;
}

std::vector<double> MetricPath::g_tt(std::size_t i) const {
  const std::size_t T = size();
  if (T < 3) throw ResolutionError("path needs at least 3 t-nodes");
  const std::size_t c = std::clamp<std::size_t>(i, 1, T - 2);
  const double k = dt();
  const std::size_t n = slices[0].size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = (slices[c - 1].g()[j] - 2.0 * slices[c].g()[j] + slices[c + 1].g()[j]) / (k * k);
  return out;
}

double Hessian2::min_eig() const noexcept {
  const double m = 0.5 * (tt + ss);
  const double r = std::hypot(0.5 * (tt - ss), ts);
  return m - r;
}

Hessian2 phi_hessian(double Lxx, double Ltx, double Ltt) {
  Hessian2 H;
  H.ss = 1.0 / Lxx;
  H.ts = -Ltx / Lxx;
  H.tt = -Ltt + Ltx * Ltx / Lxx;
  return H;
}

namespace {

void require_same_grid(const SymplecticPotential& a, const SymplecticPotential& b) {
  if (!(a.grid() == b.grid()))
    throw GridMismatchError("endpoints live on different moment grids; resample first");
}

}  // namespace

MetricPath weak_geodesic(const SymplecticPotential& u0, const SymplecticPotential& u1, std::size_t t_nodes) {
  require_same_grid(u0, u1);
  if (t_nodes < 2) throw ResolutionError("path needs at least 2 t-nodes");
  MetricPath p{UniformGrid{0.0, 1.0, t_nodes - 1}, {}, PathKind::geodesic};
  const std::size_t n = u0.size();
  for (std::size_t i = 0; i < t_nodes; ++i) {
    const double t = p.t_grid.node(i);
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = (1.0 - t) * u0.g()[j] + t * u1.g()[j];
    p.slices.emplace_back(u0.cells(), std::move(g));
  }
  return p;
}

MetricPath constant_path(const SymplecticPotential& u, std::size_t t_nodes) {
  return weak_geodesic(u, u, t_nodes);
}

MetricPath subgeodesic_make(const SymplecticPotential& u0, const SymplecticPotential& u1, double bulge,
                            std::size_t t_nodes) {
  require_same_grid(u0, u1);
  if (bulge < 0) throw Error("bulge must be nonnegative");
  if (t_nodes < 3) throw ResolutionError("path needs at least 3 t-nodes");
  MetricPath p{UniformGrid{0.0, 1.0, t_nodes - 1}, {}, PathKind::subgeodesic};
  const std::vector<double> x = u0.x();
  const std::size_t n = u0.size();
  for (std::size_t i = 0; i < t_nodes; ++i) {
    const double t = p.t_grid.node(i);
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j)
      g[j] = (1.0 - t) * u0.g()[j] + t * u1.g()[j] + bulge * t * (1.0 - t) * (1.0 + 4.0 * x[j] * (1.0 - x[j]));
    p.slices.emplace_back(u0.cells(), std::move(g));
  }
  std::size_t worst = 0;
  const double m = min_phi_hessian_eigenvalue(p, &worst);
  if (m < -1e-10) throw ConvexityError("subgeodesic Hessian not PSD, min eigenvalue " + std::to_string(m), worst);
  return p;
}

MetricPath radial_affine_path(const SymplecticPotential& u0, const SymplecticPotential& u1, std::size_t t_nodes) {
  require_same_grid(u0, u1);
  const RadialPotential p0 = inverse_legendre(u0), p1 = inverse_legendre(u1);
  MetricPath p{UniformGrid{0.0, 1.0, t_nodes - 1}, {}, PathKind::generic};
  for (std::size_t i = 0; i < t_nodes; ++i) {
    const double t = p.t_grid.node(i);
    if (i == 0) {
      p.slices.push_back(u0);
      continue;
    }
    if (i + 1 == t_nodes) {
      p.slices.push_back(u1);
      continue;
    }
    std::vector<double> phi(p0.phi().size());
    for (std::size_t j = 0; j < phi.size(); ++j) phi[j] = (1.0 - t) * p0.phi()[j] + t * p1.phi()[j];
    p.slices.push_back(legendre(RadialPotential(p0.window(), std::move(phi)), u0.cells()));
  }
  return p;
}

double min_phi_hessian_eigenvalue(const MetricPath& path, std::size_t* worst) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = path.slices.front().size();
  const double h = path.slices.front().h();
  const std::vector<double> x = path.slices.front().x();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::vector<double> gpp = path.slices[i].gpp();
    const std::vector<double> gt = path.g_t(i);
    const std::vector<double> gtx = d1(gt, h);
    const std::vector<double> gtt = path.g_tt(i);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const double Lxx = 1.0 / (x[j] * (1.0 - x[j])) + gpp[j];
      const double e = phi_hessian(Lxx, gtx[j], gtt[j]).min_eig();
      if (e < best) {
        best = e;
        if (worst) *worst = i * n + j;
      }
    }
  }
  return best;
}

HessianField fd_phi_hessian(const MetricPath& path, double window, std::size_t s_cells) {
  const std::size_t T = path.size();
  if (T < 3) throw ResolutionError("hmae residual needs at least 3 t-nodes");
  if (s_cells == 0)
    s_cells = static_cast<std::size_t>(std::llround(2.0 * window / path.dt()));
  HessianField f{path.t_grid, UniformGrid{-window, window, s_cells}, {}};
  const std::size_t M = f.s_grid.size();
  std::vector<double> Phi(T * M);
  for (std::size_t i = 0; i < T; ++i) {
    RadialEvaluator ev(path.slices[i]);
    for (std::size_t j = 0; j < M; ++j) Phi[i * M + j] = ev.phi(f.s_grid.node(j));
  }
  const double dt = path.dt(), ds = f.s_grid.step();
  f.values.assign(T * M, Hessian2{});
  for (std::size_t i = 1; i + 1 < T; ++i)
    for (std::size_t j = 1; j + 1 < M; ++j) {
      auto P = [&](std::size_t a, std::size_t b) { return Phi[a * M + b]; };
      Hessian2 H;
      H.tt = (P(i - 1, j) - 2.0 * P(i, j) + P(i + 1, j)) / (dt * dt);
      H.ss = (P(i, j - 1) - 2.0 * P(i, j) + P(i, j + 1)) / (ds * ds);
      H.ts = (P(i + 1, j + 1) - P(i + 1, j - 1) - P(i - 1, j + 1) + P(i - 1, j - 1)) / (4.0 * dt * ds);
      f.values[i * M + j] = H;
    }
  return f;
}

double hmae_residual(const MetricPath& path, double window, std::size_t s_cells) {
  const HessianField f = fd_phi_hessian(path, window, s_cells);
  double r = 0.0;
  for (std::size_t i = 1; i + 1 < f.t_grid.size(); ++i)
    for (std::size_t j = 1; j + 1 < f.s_grid.size(); ++j) r = std::max(r, std::abs(f.at(i, j).det()));
  return r;
}

std::vector<double> path_velocity(const MetricPath& path, std::size_t i) {
  const std::size_t T = path.size();
  if (T < 2) throw ResolutionError("velocity needs at least 2 t-nodes");
  if (i >= T) throw std::out_of_range("slice index");
  // stencil offsets and weights (divided by dt afterwards)
  std::vector<std::pair<long, double>> st;
  const long ii = static_cast<long>(i), TT = static_cast<long>(T);
  if (T == 2) st = {{0, -1.0}, {1, 1.0}};
  if (T == 2 && i == 1) st = {{-1, -1.0}, {0, 1.0}};
  if (T >= 3) {
    if (i == 0) st = {{0, -1.5}, {1, 2.0}, {2, -0.5}};
    else if (ii == TT - 1) st = {{0, 1.5}, {-1, -2.0}, {-2, 0.5}};
    else if (ii >= 2 && ii + 2 < TT) st = {{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
    else st = {{-1, -0.5}, {1, 0.5}};
  }
  const SymplecticPotential& base = path.slices[i];
  const std::size_t n = base.size();
  const std::vector<double> x = base.x();
  std::vector<double> out(n, 0.0);
  RadialEvaluator ev0(base);
  std::vector<double> s(n);
  for (std::size_t j = 1; j + 1 < n; ++j) s[j] = logit(x[j]) + ev0.gp(x[j]);
  for (const auto& [off, w] : st) {
    const SymplecticPotential& sl = path.slices[static_cast<std::size_t>(ii + off)];
    RadialEvaluator ev(sl);
    for (std::size_t j = 1; j + 1 < n; ++j) out[j] += w * ev.phi(s[j]);
    // Phi(t, -inf) = -g_t(0) and Phi(t, s) - s -> -g_t(1) as s -> +inf
    out[0] -= w * sl.g().front();
    out[n - 1] -= w * sl.g().back();
  }
  for (double& v : out) v /= path.dt();
  return out;
}

std::vector<double> endpoint_velocity(const MetricPath& path, End end) {
  return path_velocity(path, end == End::start ? 0 : path.size() - 1);
}

namespace {

std::vector<double> start_velocity(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  require_same_grid(u0, u1);
  const double eps = 1.0 / 1024.0;
  MetricPath p{UniformGrid{0.0, 2.0 * eps, 2}, {}, PathKind::geodesic};
  for (int i = 0; i < 3; ++i) {
    const double t = i * eps;
    std::vector<double> g(u0.size());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = (1.0 - t) * u0.g()[j] + t * u1.g()[j];
    p.slices.emplace_back(u0.cells(), std::move(g));
  }
  return endpoint_velocity(p, End::start);
}

}  // namespace

double mabuchi_distance(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  std::vector<double> v = start_velocity(u0, u1);
  for (double& a : v) a *= a;
  return std::sqrt(trapezoid(v, u0.h()));
}

double metric_distance(const SymplecticPotential& u0, const SymplecticPotential& u1) {
  std::vector<double> v = start_velocity(u0, u1);
  const double mean = trapezoid(v, u0.h());
  for (double& a : v) a = (a - mean) * (a - mean);
  return std::sqrt(trapezoid(v, u0.h()));
}

}  // namespace mlab
