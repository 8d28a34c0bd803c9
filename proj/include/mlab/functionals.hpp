#pragma once

// Energies, entropy, K-energy, twisted functionals and the convexity checks
// built on them. Functionals of a symplectic potential are evaluated as local
// discrete sums over the moment grid (see LocalFunctional), so their
// gradients and Hessians in g are exact.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "mlab/geodesic.hpp"
#include "mlab/local_functional.hpp"
#include "mlab/potential.hpp"

namespace mlab {

inline constexpr double kRbar = 2.0;

struct FunctionalReport {
  std::vector<double> t_grid, values, first_diffs, second_diffs;
  double min_second_diff = 0.0;

  /// second differences are undivided: f[i-1] - 2 f[i] + f[i+1]
  static FunctionalReport from_values(std::vector<double> t, std::vector<double> values);
  double scale() const;
};

// -- local functionals -------------------------------------------------------

LocalFunctional energy_functional();
LocalFunctional energy_T_functional(const GridMeasure& T);
/// entropy of omega_u relative to omega_0
LocalFunctional entropy_functional();
/// E - E^{Ric} + H, with Rbar = 2 and n = 1
LocalFunctional mabuchi_functional();
/// -sum q log(1 + x(1-x) g'') + g_0 + g_N - 2 sum q g; same continuum limit
LocalFunctional mabuchi_donaldson_functional();
LocalFunctional F_mu_functional(const GridMeasure& mu);
LocalFunctional F_alpha_functional(const TwistForm& alpha);

double energy_E(const SymplecticPotential& u);
double energy_ET(const SymplecticPotential& u, const GridMeasure& T);
double mabuchi(const SymplecticPotential& u);
double mabuchi_donaldson(const SymplecticPotential& u);
double calabi_energy(const SymplecticPotential& u);
double twisted_F_mu(const SymplecticPotential& u, const GridMeasure& mu);
double twisted_F_alpha(const SymplecticPotential& u, const TwistForm& alpha);

/// The energy on the radial side: integral of (phi - phi_FS)(phi'' + phi_FS'') ds.
double energy_E_radial(const RadialPotential& p);
/// Exact derivative of energy_E_radial along samples v of the s-grid.
double energy_E_radial_derivative(const RadialPotential& p, std::span<const double> v);

// -- entropy -----------------------------------------------------------------

/// Relative entropy with 0 log 0 = 0. Nodes where both densities are below
/// `floor` are dropped; +infinity when mu charges a node where mu0 < floor.
double entropy(const GridMeasure& mu, const GridMeasure& mu0, double floor = 1e-14);
double entropy_legendre_gap(const GridMeasure& mu, const GridMeasure& mu0, std::span<const double> f);

// -- scans ---------------------------------------------------------------------

FunctionalReport functional_scan(const MetricPath& path, const LocalFunctional& F);
/// K-energy along a geodesic; refuses other path kinds.
FunctionalReport convexity_scan(const MetricPath& path);

struct SecondVariation {
  double discrepancy = 0.0;    // max over interior t of |M'' - integral of MD|
  double min_integrand = 0.0;  // min pointwise MD
  std::vector<double> lhs, rhs;
};
SecondVariation second_variation_check(const MetricPath& path, double residual_threshold = 1e-2);

struct Subslope {
  double lhs = 0, rhs = 0, slack = 0;
  double fprime0 = 0, pairing = 0;
};
Subslope subslope_check(const SymplecticPotential& u0, const SymplecticPotential& u1);

/// Smallest nonzero Rayleigh quotient of the Dirichlet form of omega_0 against mu.
double poincare_constant(const GridMeasure& mu, std::size_t cells = 256);

struct StrictConvexity {
  double gap = 0, bound = 0;
  double delta = 0, A = 0, C = 0, distance = 0;
};
StrictConvexity strict_convexity_Imu(const MetricPath& path, const GridMeasure& mu);

// -- gradient checks ---------------------------------------------------------

struct GradientCheck {
  double derivative = 0.0;
  std::array<double, 2> h{1e-3, 1e-4};
  std::array<double, 2> remainder{};
  double order = 0.0;
};
/// Taylor remainders |f(h) - f(0) - h f'(0)| at two step sizes and their
/// observed order in h (2 when f'(0) is the true derivative).
GradientCheck taylor_check(const std::function<double(double)>& f, double derivative,
                           std::array<double, 2> h = {1e-3, 1e-4});

}  // namespace mlab
