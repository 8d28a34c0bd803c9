#pragma once

// S^1-invariant potentials on the sphere in the two dual pictures:
// symplectic L(x) on the moment interval [0,1] and radial phi(s), s = log|z|^2.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mlab/grid.hpp"
#include "mlab/spline.hpp"

namespace mlab {

inline constexpr std::size_t kDefaultGridN = 1024;
inline constexpr double kDefaultWindow = 40.0;
inline constexpr std::size_t kDefaultSCells = 8192;
inline constexpr double kConvexTol = 1e-12;

double logistic(double s);
double softplus(double s);  // log(1 + e^s) without overflow
double logit(double x);

/// L(x) = x log x + (1-x) log(1-x) + g(x), sampled through g on a uniform grid.
class SymplecticPotential {
 public:
  /// Validates discrete convexity; throws ConvexityError naming the node.
  SymplecticPotential(std::size_t cells, std::vector<double> g);

  static SymplecticPotential fubini_study(std::size_t cells = kDefaultGridN);
  static SymplecticPotential from_function(std::size_t cells, const std::function<double(double)>& g);

  const UniformGrid& grid() const noexcept { return grid_; }
  std::size_t cells() const noexcept { return grid_.cells; }
  std::size_t size() const noexcept { return g_.size(); }
  double h() const noexcept { return grid_.step(); }
  const std::vector<double>& g() const noexcept { return g_; }
  std::vector<double> x() const { return grid_.nodes(); }

  std::vector<double> L() const;
  std::vector<double> gp() const;   // one-sided at the ends
  std::vector<double> gpp() const;  // one-sided at the ends

  /// Throws ConvexityError if invalid.
  static void validate(std::span<const double> g, double h);

 private:
  UniformGrid grid_;
  std::vector<double> g_;
};

/// phi(s) sampled on [-S, S].
class RadialPotential {
 public:
  RadialPotential(double window, std::vector<double> phi);

  const UniformGrid& grid() const noexcept { return grid_; }
  double window() const noexcept { return grid_.hi; }
  double h() const noexcept { return grid_.step(); }
  const std::vector<double>& phi() const noexcept { return phi_; }
  std::vector<double> s() const { return grid_.nodes(); }

  static void validate(std::span<const double> phi, double h);

 private:
  UniformGrid grid_;
  std::vector<double> phi_;
};

enum class Coordinate { moment, s_axis };

/// Density samples on a uniform grid. For Coordinate::moment the density is
/// taken against dx0 where x0 = logistic(s) is the reference moment chart.
struct GridMeasure {
  Coordinate coordinate = Coordinate::moment;
  UniformGrid grid;
  std::vector<double> density;
  double mass = 0.0;

  static GridMeasure make(Coordinate c, UniformGrid grid, std::vector<double> density);
  void validate() const;
};

/// A nonnegative (1,1)-form, stored by its density on the reference chart.
struct TwistForm {
  UniformGrid grid;
  std::vector<double> density;
  double mass = 0.0;

  static TwistForm make(UniformGrid grid, std::vector<double> density);
  /// c * omega_0
  static TwistForm multiple_of_reference(double c, std::size_t cells = kDefaultGridN);
  GridMeasure as_measure() const;
};

/// Smooth evaluation of a measure's density on the reference chart x0 in [0,1].
class ChartDensity {
 public:
  ChartDensity() = default;
  explicit ChartDensity(const GridMeasure& m);
  explicit ChartDensity(const TwistForm& a) : ChartDensity(a.as_measure()) {}

  double operator()(double x0) const { return spline_(x0); }
  double prime(double x0) const { return spline_.prime(x0); }
  double double_prime(double x0) const { return spline_.double_prime(x0); }
  double min_value() const noexcept { return min_; }

 private:
  CubicSpline spline_;
  double min_ = 0.0;
};

/// Continuous extension of a symplectic potential (cubic spline of g) and the
/// radial dual evaluated pointwise through y + g'(logistic(y)) = s, x = logistic(y).
class RadialEvaluator {
 public:
  explicit RadialEvaluator(const SymplecticPotential& L);

  double g(double x) const { return g_(x); }
  double gp(double x) const { return g_.prime(x); }
  double gpp(double x) const { return g_.double_prime(x); }
  double Lxx(double x) const { return 1.0 / (x * (1.0 - x)) + gpp(x); }

  /// logit of the moment point above s.
  double y_of_s(double s) const;
  double x_of_s(double s) const { return logistic(y_of_s(s)); }
  double phi(double s) const;
  /// phi'' at s, as 1 / L''(x(s)).
  double phi_pp(double s) const;

 private:
  CubicSpline g_;
  double gp_bound_ = 0.0;
};

RadialPotential inverse_legendre(const SymplecticPotential& L, double window = kDefaultWindow,
                                 std::size_t s_cells = kDefaultSCells);
SymplecticPotential legendre(const RadialPotential& p, std::size_t cells = kDefaultGridN);

GridMeasure moment_measure(const RadialPotential& p);

/// S = -(1/L'')'' at every node (one-sided stencils at the two ends).
std::vector<double> scalar_curvature(const SymplecticPotential& L);

/// Ric(omega_0) = 2 omega_0 in the requested coordinate.
GridMeasure ricci_reference(Coordinate c = Coordinate::moment, std::size_t cells = kDefaultGridN,
                            double window = kDefaultWindow);

}  // namespace mlab
