#pragma once

// Weighted Bergman kernels of the adjoint bundle at level k on the sphere.
// The basis is z^j dz, j = 0..k-2, orthogonal for radial weights, with norms
//   N_j(t) = integral of exp((j+1) s - k phi_t(s)) ds.
// The constant angular factor 2 pi is dropped everywhere.

#include <cstddef>
#include <limits>
#include <vector>

#include "mlab/geodesic.hpp"
#include "mlab/potential.hpp"

namespace mlab {

struct BergmanSystem {
  int k = 0;
  MetricPath path;
  /// [t][j]: log N_j(t) and its first two t-derivatives
  std::vector<std::vector<double>> log_norms, d1_log_norms, d2_log_norms;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(k - 1); }
  const UniformGrid& t_grid() const noexcept { return path.t_grid; }
};

struct BergmanMeasure {
  int k = 0;
  UniformGrid grid;  // s-axis, or radius for the disc model
  std::vector<double> density;
  double mass = 0.0;
};

/// Norms by composite Gauss-Kronrod (7/15) quadrature in the moment variable,
/// in the log domain. Throws ConvergenceError naming the worst (j, t).
BergmanSystem assemble(const MetricPath& path, int k, double rel_tol = 1e-10);

BergmanMeasure bergman_measure(const BergmanSystem& sys, std::size_t t_index, double window = kDefaultWindow,
                               std::size_t s_cells = kDefaultSCells);

/// Total variation distance of b_k from phi'' ds on the window, per k.
std::vector<double> tv_convergence(const SymplecticPotential& u, const std::vector<int>& k_list,
                                   double window = kDefaultWindow, std::size_t s_cells = kDefaultSCells);

/// Bergman measure on the unit disc for a radial weight sampled on [0,1]
/// (density against Lebesgue measure, basis z^j, j = 0..k-1).
BergmanMeasure disc_bergman(const std::vector<double>& phi, int k);

/// Hessians of G(t, s) = log sum_j exp((j+1) s - log N_j(t)) over the
/// scan grid (two t boundary layers excluded when the path is long enough).
HessianField log_kernel_hessian(const BergmanSystem& sys, double window = 8.0, std::size_t s_cells = 256);
/// Same field by centered differences of G, for cross-checking.
HessianField log_kernel_hessian_fd(const BergmanSystem& sys, double window = 8.0, std::size_t s_cells = 256);

double psh_variation_check(const BergmanSystem& sys, double window = 8.0, std::size_t s_cells = 256);
/// min eigenvalue of Hess(log b_k) + k Hess(Phi)
double decomposition_inequality(const BergmanSystem& sys, double window = 8.0, std::size_t s_cells = 256);

inline constexpr double kNoTruncation = std::numeric_limits<double>::infinity();

struct MixedPositivity {
  double min_pairing = 0.0;
  std::size_t truncated_nodes = 0;
};
/// min over nodes of MD(Hess Psi_A, Hess Phi), Psi_A = max(log b_k, chi - A),
/// chi = -k Phi - log(phi_FS'').
MixedPositivity mixed_positivity(const BergmanSystem& sys, double A = kNoTruncation, double window = 8.0,
                                 std::size_t s_cells = 256);

/// Mixed discriminant pairing A_tt B_ss + A_ss B_tt - 2 A_ts B_ts.
double mixed_pairing(const Hessian2& A, const Hessian2& B);

/// Replaces log N_j(t) by log N_j(t) - c t(1-t), which is no longer concave in t.
BergmanSystem mutate_norms(const BergmanSystem& sys, double c);

}  // namespace mlab
