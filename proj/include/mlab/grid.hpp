#pragma once

// Uniform grids, finite-difference stencils and quadrature rules shared by
// every module. All derivative stencils are second order, centered in the
// interior and one-sided at the two end nodes.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mlab {

struct UniformGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t cells = 1;

  std::size_t size() const noexcept { return cells + 1; }
  double step() const noexcept { return (hi - lo) / static_cast<double>(cells); }
  double node(std::size_t i) const noexcept {
    // exact end nodes regardless of rounding in step()
    if (i == cells) return hi;
    return lo + static_cast<double>(i) * step();
  }
  std::vector<double> nodes() const;

  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

/// One row of a sparse difference operator: sum_k coef[k] * f[first + k].
struct StencilRow {
  std::size_t first = 0;
  std::size_t len = 0;
  std::array<double, 4> coef{};
};

StencilRow d1_row(std::size_t i, std::size_t n, double h);
StencilRow d2_row(std::size_t i, std::size_t n, double h);

std::vector<double> d1(std::span<const double> f, double h);
std::vector<double> d2(std::span<const double> f, double h);

/// out += D^T w for the operator whose rows are produced by `row`.
void add_d1_transpose(std::span<const double> w, double h, std::span<double> out);
void add_d2_transpose(std::span<const double> w, double h, std::span<double> out);

/// Trapezoid weights for n nodes of spacing h.
std::vector<double> trapezoid_weights(std::size_t n, double h);
double trapezoid(std::span<const double> f, double h);
/// Composite Simpson; falls back to trapezoid on the last cell when the
/// number of cells is odd.
double simpson(std::span<const double> f, double h);
std::vector<double> cumulative_trapezoid(std::span<const double> f, double h);

/// Second differences (f[i-1] - 2 f[i] + f[i+1]) / h^2 at interior nodes.
std::vector<double> second_differences(std::span<const double> f, double h);

/// Fourth-order centered first and second derivatives (interior nodes only;
/// the two outermost layers fall back to second order).
std::vector<double> d1_fourth(std::span<const double> f, double h);
std::vector<double> d2_fourth(std::span<const double> f, double h);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mlab
