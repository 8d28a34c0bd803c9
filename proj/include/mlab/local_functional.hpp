#pragma once

// Discrete functionals of the form
//   F(g) = sum_i q_i f(x_i, g_i, (D1 g)_i, (D2 g)_i) + c0 g_0 + c1 g_N
// with q the trapezoid weights. Gradients and Hessians are exact (jets).

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "mlab/jet.hpp"

namespace mlab {

class LocalFunctional {
 public:
  using Integrand = std::function<Jet(double x, const Jet& g, const Jet& gp, const Jet& gpp)>;

  LocalFunctional() = default;
  explicit LocalFunctional(Integrand f, double c0 = 0.0, double c1 = 0.0)
      : terms_{{std::move(f), 1.0}}, c0_(c0), c1_(c1) {}

  double value(std::span<const double> g) const;
  std::vector<double> gradient(std::span<const double> g) const;
  Eigen::SparseMatrix<double> hessian(std::span<const double> g) const;
  /// sum_i grad_i w_i
  double directional(std::span<const double> g, std::span<const double> w) const;
  /// d^2/dt^2 F(g + t w) at t = 0
  double second_directional(std::span<const double> g, std::span<const double> w) const;

  LocalFunctional& operator+=(const LocalFunctional& o);
  LocalFunctional& operator*=(double c);
  friend LocalFunctional operator+(LocalFunctional a, const LocalFunctional& b) { return a += b; }
  friend LocalFunctional operator*(double c, LocalFunctional a) { return a *= c; }

 private:
  struct Term {
    Integrand f;
    double scale;
  };
  Jet eval(double x, double g, double gp, double gpp) const;

  std::vector<Term> terms_;
  double c0_ = 0.0;
  double c1_ = 0.0;
};

/// u, J, x0 of the chart change for a symplectic potential with smooth part g:
///   u  = x g' - g - log(1 - x + x e^{g'})
///   x0 = x e^{g'} / (1 - x + x e^{g'})
///   J  = dx0/dx
template <class T>
struct ChartTerms {
  T u, J, x0;
};

template <class T>
ChartTerms<T> chart_terms(double x, const T& g, const T& gp, const T& gpp) {
  using std::exp;
  using std::log;
  const T E1 = exp(gp);
  const T den = T(1.0 - x) + x * E1;
  ChartTerms<T> c;
  c.u = x * gp - g - log(den);
  c.x0 = x * E1 / den;
  c.J = E1 * (T(1.0) + (x * (1.0 - x)) * gpp) / (den * den);
  return c;
}

}  // namespace mlab
