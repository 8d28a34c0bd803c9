#pragma once

// Paths of potentials, weak geodesics, subgeodesics and the Mabuchi distance.
// Time t is the real part of the strip coordinate, so plurisubharmonicity of
// an invariant path means convexity of Phi(t, s) in two real variables.

#include <cstddef>
#include <string>
#include <vector>

#include "mlab/grid.hpp"
#include "mlab/potential.hpp"

namespace mlab {

enum class PathKind { geodesic, subgeodesic, generic };

const char* to_string(PathKind k);
PathKind path_kind_from_string(const std::string& s);

struct MetricPath {
  UniformGrid t_grid;
  std::vector<SymplecticPotential> slices;
  PathKind kind = PathKind::generic;

  std::size_t size() const noexcept { return slices.size(); }
  double dt() const noexcept { return t_grid.step(); }
  /// dg/dt and d^2g/dt^2 at slice i, at fixed moment point. Second order,
  /// one-sided at the ends (exact for paths quadratic in t).
  std::vector<double> g_t(std::size_t i) const;
  std::vector<double> g_tt(std::size_t i) const;
};

/// Symmetric 2x2 matrix in the (t, s) variables.
struct Hessian2 {
  double tt = 0.0, ts = 0.0, ss = 0.0;
  double det() const noexcept { return tt * ss - ts * ts; }
  double min_eig() const noexcept;
};

/// Hessians over a (t, s) grid, row-major in t.
struct HessianField {
  UniformGrid t_grid, s_grid;
  std::vector<Hessian2> values;
  const Hessian2& at(std::size_t i, std::size_t j) const { return values[i * s_grid.size() + j]; }
};

/// Hessian of Phi in (t, s) from partial Legendre identities at a moment point.
Hessian2 phi_hessian(double Lxx, double Ltx, double Ltt);

MetricPath weak_geodesic(const SymplecticPotential& u0, const SymplecticPotential& u1,
                         std::size_t t_nodes = 65);
MetricPath constant_path(const SymplecticPotential& u, std::size_t t_nodes = 65);
/// g_t = (1-t) g0 + t g1 + bulge t(1-t) (1 + 4x(1-x)); checked plurisubharmonic.
MetricPath subgeodesic_make(const SymplecticPotential& u0, const SymplecticPotential& u1, double bulge,
                            std::size_t t_nodes = 65);
/// Straight line between the radial potentials (not a geodesic in general).
MetricPath radial_affine_path(const SymplecticPotential& u0, const SymplecticPotential& u1,
                              std::size_t t_nodes = 65);

/// Minimum eigenvalue of Hess Phi over interior (t, x) nodes, via the partial
/// Legendre identities. `worst` receives the flattened node index.
double min_phi_hessian_eigenvalue(const MetricPath& path, std::size_t* worst = nullptr);

/// Hess Phi by centered differences of the radial representation on [-window, window].
/// s_cells = 0 picks the s-spacing equal to the t-spacing.
HessianField fd_phi_hessian(const MetricPath& path, double window = 8.0, std::size_t s_cells = 0);
/// max |det Hess Phi| over interior nodes of fd_phi_hessian.
double hmae_residual(const MetricPath& path, double window = 8.0, std::size_t s_cells = 0);

enum class End { start, finish };

/// du/dt at fixed s, at the endpoint, on that endpoint's moment grid.
std::vector<double> endpoint_velocity(const MetricPath& path, End end);
/// du/dt at fixed s at slice i (fourth order in the interior).
std::vector<double> path_velocity(const MetricPath& path, std::size_t i);

double mabuchi_distance(const SymplecticPotential& u0, const SymplecticPotential& u1);
/// Distance between the metrics, i.e. minimized over additive constants.
double metric_distance(const SymplecticPotential& u0, const SymplecticPotential& u1);

}  // namespace mlab
