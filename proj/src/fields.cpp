#include "mlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <Eigen/SparseCholesky>

#include "mlab/error.hpp"

namespace mlab {

std::vector<double> GradientField::hamiltonian_in_x(const SymplecticPotential& u) const {
  const std::vector<double> x = u.x();
  const double mean = trapezoid(x, u.h());
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = c * (x[i] - mean);
  return h;
}

std::vector<double> hamiltonian(const GradientField& V, const SymplecticPotential& u) {
  // omega_u = dx on the moment interval and iota_V omega_u = -c dx: the moment
  // coordinate itself, recentred
  return V.hamiltonian_in_x(u);
}

double hamiltonian_shift_residual(const GradientField& V, const SymplecticPotential& u, double window,
                                  std::size_t s_cells) {
  RadialEvaluator ev(u);
  const UniformGrid sg{-window, window, s_cells};
  const std::vector<double> s = sg.nodes();
  std::vector<double> uu(s.size()), x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    uu[i] = ev.phi(s[i]) - softplus(s[i]);
    x[i] = ev.x_of_s(s[i]);
  }
  const std::vector<double> du = d1_fourth(uu, sg.step());
  double r = 0.0;
  for (std::size_t i = 2; i + 2 < s.size(); ++i) {
    const double lhs = V.c * (x[i] - 0.5);
    const double rhs = V.c * (logistic(s[i]) - 0.5 + du[i]);
    r = std::max(r, std::abs(lhs - rhs));
  }
  return r;
}

IbpCheck ibp_identity_check(const SymplecticPotential& L, const ChartFunction& a, const ChartFunction& b,
                            double window, std::size_t s_cells) {
  IbpCheck out;
  const UniformGrid sg{-window, window, s_cells};
  const std::vector<double> s = sg.nodes();
  std::vector<double> av(s.size()), bv(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x0 = logistic(s[i]);
    av[i] = a.f(x0);
    bv[i] = b.f(x0);
  }
  const std::vector<double> app = d2_fourth(av, sg.step());
  std::vector<double> f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) f[i] = bv[i] * app[i];
  out.lhs = trapezoid(f, sg.step());

  const std::vector<double> x = L.x(), gp = L.gp(), gpp = L.gpp();
  std::vector<double> r(x.size(), 0.0);
  for (std::size_t j = 1; j + 1 < x.size(); ++j) {
    const auto c = chart_terms(x[j], L.g()[j], gp[j], gpp[j]);
    const double w = x[j] * (1.0 - x[j]);
    const double sp = c.x0 * (1.0 - c.x0);  // ds-derivative of x0
    r[j] = a.df(c.x0) * b.df(c.x0) * sp * sp * (1.0 + w * gpp[j]) / w;
  }
  out.rhs = -trapezoid(r, L.h());
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

double inner_product(const GradientField& V, const GradientField& W, const SymplecticPotential& u, double window,
                     std::size_t s_cells) {
  const RadialPotential p = inverse_legendre(u, window, s_cells);
  const std::vector<double> p1 = d1_fourth(p.phi(), p.h()), p2 = d2_fourth(p.phi(), p.h());
  std::vector<double> f(p1.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = p1[i] * p2[i];
  const double mean = trapezoid(f, p.h()) / trapezoid(p2, p.h());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (p1[i] - mean) * (p1[i] - mean) * p2[i];
  return V.c * W.c * trapezoid(f, p.h());
}

double futaki(const GradientField& V, const SymplecticPotential& u) {
  const std::vector<double> S = scalar_curvature(u), h = hamiltonian(V, u);
  std::vector<double> f(S.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (S[i] - kRbar) * h[i];
  return trapezoid(f, u.h());
}

FunctionalReport energy_EV(const MetricPath& path, const GradientField& V, double window, std::size_t s_cells) {
  const std::size_t T = path.size();
  if (T < 5) throw ResolutionError("energy_EV needs at least 5 t-nodes");
  const UniformGrid sg{-window, window, s_cells};
  const std::vector<double> s = sg.nodes();
  std::vector<std::vector<double>> phi(T, std::vector<double>(s.size()));
  for (std::size_t i = 0; i < T; ++i) {
    RadialEvaluator ev(path.slices[i]);
    for (std::size_t j = 0; j < s.size(); ++j) phi[i][j] = ev.phi(s[j]);
  }
  const double dt = path.dt();
  auto phi_t = [&](std::size_t i, std::size_t j) {
    auto f = [&](long k) { return phi[static_cast<std::size_t>(k)][j]; };
    const long ii = static_cast<long>(i), n = static_cast<long>(T);
    if (ii == 0) return (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) / (12 * dt);
    if (ii == 1) return (-3 * f(0) - 10 * f(1) + 18 * f(2) - 6 * f(3) + f(4)) / (12 * dt);
    if (ii == n - 1)
      return (25 * f(n - 1) - 48 * f(n - 2) + 36 * f(n - 3) - 16 * f(n - 4) + 3 * f(n - 5)) / (12 * dt);
    if (ii == n - 2)
      return (3 * f(n - 1) + 10 * f(n - 2) - 18 * f(n - 3) + 6 * f(n - 4) - f(n - 5)) / (12 * dt);
    return (f(ii - 2) - 8 * f(ii - 1) + 8 * f(ii + 1) - f(ii + 2)) / (12 * dt);
  };
  std::vector<double> D(T);
  for (std::size_t i = 0; i < T; ++i) {
    const std::vector<double> p1 = d1_fourth(phi[i], sg.step()), p2 = d2_fourth(phi[i], sg.step());
    std::vector<double> f(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) f[j] = p1[j] * p2[j];
    const double mean = trapezoid(f, sg.step()) / trapezoid(p2, sg.step());
    for (std::size_t j = 0; j < s.size(); ++j) f[j] = phi_t(i, j) * V.c * (p1[j] - mean) * p2[j];
    D[i] = trapezoid(f, sg.step());
  }
  // cumulative Simpson on pairs of cells, with a cubic correction for odd nodes
  std::vector<double> vals(T, 0.0);
  for (std::size_t i = 1; i < T; ++i) {
    if (i % 2 == 0) {
      vals[i] = vals[i - 2] + dt / 3.0 * (D[i - 2] + 4.0 * D[i - 1] + D[i]);
    } else if (i + 1 < T) {
      vals[i] = vals[i - 1] + dt / 12.0 * (5.0 * D[i - 1] + 8.0 * D[i] - D[i + 1]);
    } else {
      vals[i] = vals[i - 1] + dt / 12.0 * (-D[i - 2] + 8.0 * D[i - 1] + 5.0 * D[i]);
    }
  }
  return FunctionalReport::from_values(path.t_grid.nodes(), std::move(vals));
}

LinearOperatorOnFunctions lichnerowicz(const SymplecticPotential& u) {
  if (u.cells() < 8) throw ResolutionError("lichnerowicz needs at least 8 cells");
  const std::size_t n = u.size();
  const double h = u.h();
  const std::vector<double> x = u.x(), gpp = u.gpp();
  LinearOperatorOnFunctions op;
  op.weights = trapezoid_weights(n, h);
  Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd w(static_cast<Eigen::Index>(n)), inv_lpp(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const StencilRow r = d2_row(i, n, h);
    for (std::size_t k = 0; k < r.len; ++k)
      D2(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r.first + k)) = r.coef[k];
    const double xx = x[i] * (1.0 - x[i]);
    const double inv = xx / (1.0 + xx * gpp[i]);  // 1 / L''
    inv_lpp(static_cast<Eigen::Index>(i)) = inv;
    w(static_cast<Eigen::Index>(i)) = op.weights[i] * inv * inv;
  }
  op.reduced = inv_lpp.asDiagonal() * D2;
  op.form = D2.transpose() * w.asDiagonal() * D2;
  op.form = 0.5 * (op.form + op.form.transpose());
  op.op = op.form;
  for (std::size_t i = 0; i < n; ++i) op.op.row(static_cast<Eigen::Index>(i)) /= op.weights[i];
  return op;
}

LinearizedSolution solve_kernel_projected(const LinearOperatorOnFunctions& Q, std::span<const double> rhs,
                                          double compat_tol) {
  using LD = long double;
  using MatL = Eigen::Matrix<LD, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<LD, Eigen::Dynamic, 1>;
  const Eigen::Index n = Q.form.rows();
  if (static_cast<Eigen::Index>(rhs.size()) != n) throw GridMismatchError("right-hand side size");
  LinearizedSolution out;
  VecL b(n), one = VecL::Ones(n), xs(n);
  LD babs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i) = rhs[static_cast<std::size_t>(i)];
    xs(i) = static_cast<LD>(i) / static_cast<LD>(n - 1);
    babs += std::abs(b(i));
  }
  out.pairing_const = static_cast<double>(b.sum());
  out.pairing_x = static_cast<double>(b.dot(xs));
  const double tol = compat_tol * static_cast<double>(babs);
  if (std::abs(out.pairing_const) > tol)
    throw CompatibilityError("right-hand side pairs with constants", out.pairing_const);
  if (std::abs(out.pairing_x) > tol)
    throw CompatibilityError("right-hand side pairs with the hamiltonian x", out.pairing_x);

  // orthonormal basis of span{1, x}
  MatL K(n, 2);
  K.col(0) = one / std::sqrt(static_cast<LD>(n));
  VecL e = xs - K.col(0) * K.col(0).dot(xs);
  K.col(1) = e / e.norm();
  b -= K * (K.transpose() * b);

  const MatL A = Q.form.cast<LD>();
  const LD rho = A.diagonal().cwiseAbs().maxCoeff();
  const MatL M = A + rho * K * K.transpose();
  Eigen::LDLT<MatL> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("factorization of the projected operator failed");
  VecL w = ldlt.solve(b);
  for (int it = 0; it < 4; ++it) w += ldlt.solve(b - M * w);
  w -= K * (K.transpose() * w);

  out.dg.resize(static_cast<std::size_t>(n));
  VecL wd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.dg[static_cast<std::size_t>(i)] = static_cast<double>(w(i));
    wd(i) = out.dg[static_cast<std::size_t>(i)];
  }
  const LD bn = b.cwiseAbs().maxCoeff();
  out.residual = bn > 0 ? static_cast<double>((A * wd - b).cwiseAbs().maxCoeff() / bn) : 0.0;
  return out;
}

LinearizedSolution solve_linearized(const SymplecticPotential& u, std::span<const double> nu, double compat_tol) {
  if (nu.size() != u.size()) throw GridMismatchError("nu must live on the moment grid of u");
  const LinearOperatorOnFunctions Q = lichnerowicz(u);
  std::vector<double> b(nu.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = Q.weights[i] * nu[i];
  return solve_kernel_projected(Q, b, compat_tol);
}

std::vector<double> pulled_density(const SymplecticPotential& u, const GridMeasure& mu) {
  const ChartDensity m(mu);
  const std::vector<double> x = u.x(), gp = u.gp(), gpp = u.gpp();
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto c = chart_terms(x[j], u.g()[j], gp[j], gpp[j]);
    out[j] = m(c.x0) * c.J;
  }
  return out;
}

namespace {

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += std::abs(a);
  return s;
}

}  // namespace

PerturbationOrder perturbation_order_check(const SymplecticPotential& u0, const GridMeasure& mu,
                                           const std::vector<double>& s_list, bool use_v0) {
  const LocalFunctional M = mabuchi_donaldson_functional();
  const LocalFunctional Fmu = F_mu_functional(mu);
  PerturbationOrder out;
  out.critical_norm = l1(M.gradient(u0.g()));
  if (out.critical_norm > 1e-8)
    throw Error("perturbation_order_check: start is not critical (gradient " + std::to_string(out.critical_norm) +
                ")");
  std::vector<double> v0(u0.size(), 0.0);
  if (use_v0) {
    std::vector<double> rhs = Fmu.gradient(u0.g());
    for (double& r : rhs) r = -r;
    v0 = solve_kernel_projected(lichnerowicz(u0), rhs).dg;
  }
  for (double s : s_list) {
    std::vector<double> g = u0.g();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * v0[i];
    SymplecticPotential::validate(g, u0.h());
    std::vector<double> gr = M.gradient(g);
    const std::vector<double> gf = Fmu.gradient(g);
    for (std::size_t i = 0; i < gr.size(); ++i) gr[i] += s * gf[i];
    out.s.push_back(s);
    out.norms.push_back(l1(gr));
  }
  out.slope = loglog_slope(out.s, out.norms);
  return out;
}

MetricPath orbit_ray(const SymplecticPotential& u0, const GradientField& V, double t_max, std::size_t t_nodes) {
  MetricPath p{UniformGrid{0.0, t_max, t_nodes - 1}, {}, PathKind::geodesic};
  const std::vector<double> x = u0.x();
  for (std::size_t i = 0; i < t_nodes; ++i) {
    const double t = p.t_grid.node(i);
    std::vector<double> g = u0.g();
    for (std::size_t j = 0; j < g.size(); ++j) g[j] -= 2.0 * V.c * t * x[j];
    p.slices.emplace_back(u0.cells(), std::move(g));
  }
  return p;
}

OrbitMinimum orbit_minimize(const SymplecticPotential& u0, const GridMeasure& mu, double t_max, std::size_t samples) {
  const LocalFunctional F = F_mu_functional(mu);
  const std::vector<double> x = u0.x();
  auto shifted = [&](double tau) {
    std::vector<double> g = u0.g();
    for (std::size_t j = 0; j < g.size(); ++j) g[j] -= 2.0 * tau * x[j];
    return g;
  };
  auto f = [&](double tau) { return F.value(shifted(tau)); };
  OrbitMinimum out;
  const UniformGrid tg{-t_max, t_max, samples - 1};
  std::size_t best = 0;
  for (std::size_t i = 0; i < tg.size(); ++i) {
    out.taus.push_back(tg.node(i));
    out.profile.push_back(f(tg.node(i)));
    if (out.profile[i] < out.profile[best]) best = i;
  }
  double scale = 1.0;
  for (double v : out.profile) scale = std::max(scale, std::abs(v));
  out.convex = true;
  for (std::size_t i = 1; i + 1 < out.profile.size(); ++i)
    if (out.profile[i - 1] - 2.0 * out.profile[i] + out.profile[i + 1] < -1e-10 * scale) out.convex = false;
  if (best == 0 || best + 1 == tg.size())
    throw ConvergenceError("orbit_minimize: minimum at the edge of [-t_max, t_max]");
  const auto r = boost::math::tools::brent_find_minima(f, tg.node(best - 1), tg.node(best + 1), 40);
  out.tau = r.first;
  out.value = r.second;
  std::vector<double> hv(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) hv[j] = x[j] - 0.5;
  out.pairing = F.directional(shifted(out.tau), hv);
  return out;
}

double twisted_residual(const SymplecticPotential& u, const TwistForm& alpha) {
  const ChartDensity a(alpha);
  const std::vector<double> S = scalar_curvature(u), x = u.x(), gp = u.gp(), gpp = u.gpp();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t j = 4; j + 4 < x.size(); ++j) {
    const auto c = chart_terms(x[j], u.g()[j], gp[j], gpp[j]);
    const double r = S[j] - a(c.x0) * c.J;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return 0.5 * (hi - lo);
}

namespace {

TwistedSolution descend(const LocalFunctional& F, const SymplecticPotential& start, const TwistForm& alpha,
                        bool pin_both, const DescentOptions& opt) {
  const std::size_t n = start.size();
  const double h = start.h();
  const std::vector<double> q = trapezoid_weights(n, h);
  // free unknowns: all nodes except the gauge-pinned ones
  std::vector<long> idx(n, -1);
  long m = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (!(i == 0 || (pin_both && i + 1 == n))) idx[i] = m++;

  std::vector<double> g = start.g();
  double val = F.value(g);
  TwistedSolution out{start, {}, 0.0};
  int flat = 0;
  for (int it = 0;; ++it) {
    const std::vector<double> grad = F.gradient(g);
    double gn = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (idx[i] >= 0) gn = std::max(gn, std::abs(grad[i]) / q[i]);
    SymplecticPotential cur(start.cells(), g);
    out.trace.push_back({it, val, gn, twisted_residual(cur, alpha)});
    if (gn < opt.grad_tol) {
      out.u = std::move(cur);
      out.residual = out.trace.back().residual;
      return out;
    }
    if (it >= opt.max_iter) {
      std::string hist;
      for (const auto& st : out.trace) hist += " " + std::to_string(st.residual);
      throw ConvergenceError("twisted_csc_solve: no convergence in " + std::to_string(opt.max_iter) +
                             " iterations (gradient " + std::to_string(gn) + "); residual history:" + hist);
    }

    const Eigen::SparseMatrix<double> H = F.hessian(g);
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < H.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator e(H, k); e; ++e)
        if (idx[static_cast<std::size_t>(e.row())] >= 0 && idx[static_cast<std::size_t>(e.col())] >= 0)
          trip.emplace_back(idx[static_cast<std::size_t>(e.row())], idx[static_cast<std::size_t>(e.col())], e.value());
    Eigen::SparseMatrix<double> Hr(m, m);
    Hr.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(m);
    for (std::size_t i = 0; i < n; ++i)
      if (idx[i] >= 0) rhs(idx[i]) = -grad[i];

    Eigen::VectorXd p;
    double shift = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::SparseMatrix<double> A = Hr;
      if (shift > 0) {
        Eigen::SparseMatrix<double> I(m, m);
        I.setIdentity();
        A += shift * I;
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
      if (ldlt.info() == Eigen::Success) {
        p = ldlt.solve(rhs);
        if (ldlt.info() == Eigen::Success && p.dot(rhs) > 0) break;
      }
      p.resize(0);
      shift = shift == 0.0 ? 1e-8 * Hr.diagonal().cwiseAbs().maxCoeff() : 10.0 * shift;
    }
    if (p.size() == 0) p = rhs;

    const double slope = -p.dot(rhs);
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(val));
    // Newton decrement under rounding three times running: stationary as far as F can tell
    flat = -slope < noise ? flat + 1 : 0;
    if (flat >= 3) {
      out.u = std::move(cur);
      out.residual = out.trace.back().residual;
      return out;
    }
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      std::vector<double> trial = g;
      for (std::size_t i = 0; i < n; ++i)
        if (idx[i] >= 0) trial[i] += step * p(idx[i]);
      try {
        SymplecticPotential::validate(trial, h);
      } catch (const ConvexityError&) {
        continue;
      }
      const double tv = F.value(trial);
      // once the predicted decrease is below rounding in F, accept any step that
      // does not raise F beyond rounding
      const bool ok = -slope < noise ? tv <= val + noise : tv <= val + 1e-4 * step * slope;
      if (std::isfinite(tv) && ok) {
        g = std::move(trial);
        val = tv;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::string hist;
      for (const auto& st : out.trace) hist += " " + std::to_string(st.residual);
      throw ConvergenceError("twisted_csc_solve: line search failed at gradient " + std::to_string(gn) +
                             "; residual history:" + hist);
    }
  }
}

}  // namespace

std::vector<TwistedSolution> twisted_csc_solve(const TwistForm& alpha, const std::vector<SymplecticPotential>& starts,
                                               const DescentOptions& opt) {
  for (double d : alpha.density)
    if (d < 0) throw Error("twisted_csc_solve: alpha must be nonnegative");
  const LocalFunctional F = mabuchi_donaldson_functional() + F_alpha_functional(alpha);
  const bool pin_both = alpha.mass == 0.0;
  std::vector<TwistedSolution> out;
  for (const auto& s : starts) out.push_back(descend(F, s, alpha, pin_both, opt));
  return out;
}

double sup_distance_mod(std::span<const double> a, std::span<const double> b, bool affine) {
  if (a.size() != b.size() || a.size() < 2) throw GridMismatchError("sup_distance_mod: size mismatch");
  const std::size_t n = a.size();
  Eigen::MatrixXd B(static_cast<Eigen::Index>(n), affine ? 2 : 1);
  Eigen::VectorXd d(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    B(r, 0) = 1.0;
    if (affine) B(r, 1) = static_cast<double>(i) / static_cast<double>(n - 1);
    d(r) = a[i] - b[i];
  }
  const Eigen::VectorXd c = B.colPivHouseholderQr().solve(d);
  return (d - B * c).cwiseAbs().maxCoeff();
}

}  // namespace mlab
