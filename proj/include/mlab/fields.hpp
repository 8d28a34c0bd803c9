#pragma once

// Holomorphic gradient fields of the model, hamiltonians and their pairings,
// the Lichnerowicz operator (Hessian of the K-energy) and the perturbation and
// uniqueness experiments built on it.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mlab/functionals.hpp"
#include "mlab/geodesic.hpp"
#include "mlab/potential.hpp"

namespace mlab {

/// V = c z d/dz. The flow of Re V translates s by 2 per unit time.
struct GradientField {
  std::string name = "z_dz";
  double c = 1.0;
  /// hamiltonian against omega_u in the moment coordinate of u: c (x - 1/2)
  std::vector<double> hamiltonian_in_x(const SymplecticPotential& u) const;
};

/// Hamiltonian of V for omega_u on the moment grid of u, normalized to mean
/// zero against omega_u.
std::vector<double> hamiltonian(const GradientField& V, const SymplecticPotential& u);
/// max |h_u(s) - (h_0(s) + V(u)(s))| on an s-grid, where the left side comes
/// from the moment map and the right side from differentiating u = phi - phi_FS.
double hamiltonian_shift_residual(const GradientField& V, const SymplecticPotential& u, double window = 20.0,
                                  std::size_t s_cells = 4096);

/// A function on the sphere given through the reference chart x0 in [0,1].
struct ChartFunction {
  std::function<double(double)> f, df;
};

struct IbpCheck {
  double lhs = 0, rhs = 0, residual = 0;
};
/// Integral of b dd^c a (s-grid) against minus the omega-gradient pairing of
/// a and b (moment grid of the metric potential L).
IbpCheck ibp_identity_check(const SymplecticPotential& L, const ChartFunction& a, const ChartFunction& b,
                            double window = 40.0, std::size_t s_cells = kDefaultSCells);

double inner_product(const GradientField& V, const GradientField& W, const SymplecticPotential& u,
                     double window = kDefaultWindow, std::size_t s_cells = kDefaultSCells);
double futaki(const GradientField& V, const SymplecticPotential& u);

/// E_V along the path, by integrating its t-derivative in t.
FunctionalReport energy_EV(const MetricPath& path, const GradientField& V, double window = 30.0,
                           std::size_t s_cells = 3072);

/// Hessian form of the K-energy in g, Q = D2^T diag(q / L''^2) D2, and the
/// operator diag(1/q) Q, self-adjoint for the omega_u inner product.
struct LinearOperatorOnFunctions {
  Eigen::MatrixXd reduced;  // v -> v'' / L'', so that form = reduced^T diag(q) reduced
  Eigen::MatrixXd form;
  Eigen::MatrixXd op;
  std::vector<double> weights;
};
LinearOperatorOnFunctions lichnerowicz(const SymplecticPotential& u);

struct LinearizedSolution {
  std::vector<double> dg;  // g-variation; the potential moves by -dg at fixed moment point
  double residual = 0.0;   // sup-norm residual relative to the right-hand side
  double pairing_const = 0.0, pairing_x = 0.0;
};
/// Solves Q dg = rhs on the complement of span{1, x} after checking that rhs
/// annihilates that kernel (CompatibilityError otherwise).
LinearizedSolution solve_kernel_projected(const LinearOperatorOnFunctions& Q, std::span<const double> rhs,
                                          double compat_tol = 1e-4);
/// nu: signed density against omega_u (dx) on the moment grid of u.
LinearizedSolution solve_linearized(const SymplecticPotential& u, std::span<const double> nu,
                                    double compat_tol = 1e-4);

/// Density of mu pulled to the moment coordinate of u: m(x0(x)) J(x).
std::vector<double> pulled_density(const SymplecticPotential& u, const GridMeasure& mu);

struct PerturbationOrder {
  std::vector<double> s, norms;
  double slope = 0.0;
  double critical_norm = 0.0;
};
/// Gradient of M + s F_mu at g0 + s dg0, with Q dg0 = -grad F_mu (or dg0 = 0
/// when `use_v0` is false), measured in the l1 norm dual to sup-norm tests.
PerturbationOrder perturbation_order_check(const SymplecticPotential& u0, const GridMeasure& mu,
                                           const std::vector<double>& s_list, bool use_v0 = true);

/// Pullbacks of u0 by the flow of Re V for t in [0, t_max]: g - 2 c t x.
MetricPath orbit_ray(const SymplecticPotential& u0, const GradientField& V, double t_max,
                     std::size_t t_nodes = 65);

struct OrbitMinimum {
  double tau = 0.0, value = 0.0;
  double pairing = 0.0;  // d F_mu against the hamiltonian at the minimizer
  bool convex = false;
  std::vector<double> taus, profile;
};
OrbitMinimum orbit_minimize(const SymplecticPotential& u0, const GridMeasure& mu, double t_max = 2.0,
                            std::size_t samples = 65);

struct DescentStep {
  int iter = 0;
  double value = 0, grad_norm = 0, residual = 0;
};
struct TwistedSolution {
  SymplecticPotential u;
  std::vector<DescentStep> trace;
  double residual = 0.0;
};
struct DescentOptions {
  int max_iter = 200;
  double grad_tol = 1e-6;
};
/// Damped Newton descent on M + F_alpha over g with backtracking line search.
/// Gauge: g(0) is held fixed, and g(1) too when alpha vanishes.
std::vector<TwistedSolution> twisted_csc_solve(const TwistForm& alpha,
                                               const std::vector<SymplecticPotential>& starts,
                                               const DescentOptions& opt = {});
/// sup |S - tr alpha - const| away from the two ends
double twisted_residual(const SymplecticPotential& u, const TwistForm& alpha);

/// sup-norm distance after removing the best constant (or affine function).
double sup_distance_mod(std::span<const double> a, std::span<const double> b, bool affine);

}  // namespace mlab
