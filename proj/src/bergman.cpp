#include "mlab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mlab/error.hpp"
#include "mlab/spline.hpp"

namespace mlab {

namespace {

constexpr double kNegligible = 80.0;  // log-units below the peak that are dropped

// Gauss-Kronrod 15 rule on [-1,1]: nodes, Kronrod weights, Gauss-7 weights (0 off the Gauss nodes).
struct GK15 {
  std::array<double, 15> node{}, wk{}, wg{};
  GK15() {
    const auto& a = boost::math::quadrature::gauss_kronrod<double, 15>::abscissa();
    const auto& k = boost::math::quadrature::gauss_kronrod<double, 15>::weights();
    const auto& g = boost::math::quadrature::gauss<double, 7>::weights();
    // a[0] = 0, a[m] increasing; Gauss nodes are the even m
    node[7] = 0.0;
    wk[7] = k[0];
    wg[7] = g[0];
    for (int m = 1; m < 8; ++m) {
      node[7 + m] = a[m];
      node[7 - m] = -a[m];
      wk[7 + m] = wk[7 - m] = k[m];
      wg[7 + m] = wg[7 - m] = (m % 2 == 0) ? g[m / 2] : 0.0;
    }
  }
};

const GK15& gk15() {
  static const GK15 rule;
  return rule;
}

double log_sum_exp(const std::vector<double>& a) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

// Everything the norm integrands need at the quadrature nodes of one slice.
struct SliceNodes {
  std::size_t cells = 0;
  std::vector<double> x, w_k, w_g;  // weights already scaled by the half-width
  std::vector<double> lx, l1x, gp, base;  // base = k g + log(1 + x(1-x) g'')
  std::vector<double> Lt, Ltt, Ltx, Lxx;
};

SliceNodes build_nodes(const CubicSpline& g, const CubicSpline* gt, const CubicSpline* gtt, std::size_t cells,
                       int k) {
  const GK15& r = gk15();
  SliceNodes s;
  s.cells = cells;
  const std::size_t n = cells * 15;
  for (auto* v : {&s.x, &s.w_k, &s.w_g, &s.lx, &s.l1x, &s.gp, &s.base, &s.Lt, &s.Ltt, &s.Ltx, &s.Lxx})
    v->resize(n, 0.0);
  const double h = 1.0 / static_cast<double>(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const double mid = (c + 0.5) * h, half = 0.5 * h;
    for (int m = 0; m < 15; ++m) {
      const std::size_t i = c * 15 + m;
      const double x = mid + half * r.node[m];
      const double w = x * (1.0 - x);
      s.x[i] = x;
      s.w_k[i] = half * r.wk[m];
      s.w_g[i] = half * r.wg[m];
      s.lx[i] = std::log(x);
      s.l1x[i] = std::log1p(-x);
      s.gp[i] = g.prime(x);
      const double gpp = g.double_prime(x);
      s.base[i] = k * g(x) + std::log1p(w * gpp);
      s.Lxx[i] = 1.0 / w + gpp;
      if (gt) {
        s.Lt[i] = (*gt)(x);
        s.Ltx[i] = gt->prime(x);
        s.Ltt[i] = (*gtt)(x);
      }
    }
  }
  return s;
}

struct NormResult {
  double log_norm = 0, d1 = 0, d2 = 0, rel_err = 0;
};

NormResult integrate_norm(const SliceNodes& s, int k, int j) {
  const std::size_t n = s.x.size();
  std::vector<double> l(n);
  double lmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    l[i] = j * s.lx[i] + (k - j - 2) * s.l1x[i] + (j + 1 - k * s.x[i]) * s.gp[i] + s.base[i];
    lmax = std::max(lmax, l[i]);
  }
  double K = 0, err = 0, m1 = 0, m2 = 0, mtt = 0;
  for (std::size_t c = 0; c < s.cells; ++c) {
    double cmax = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < 15; ++m) cmax = std::max(cmax, l[c * 15 + m]);
    if (cmax < lmax - kNegligible) continue;
    double kc = 0, gc = 0;
    for (int m = 0; m < 15; ++m) {
      const std::size_t i = c * 15 + m;
      const double e = std::exp(l[i] - lmax);
      const double wk = s.w_k[i] * e;
      kc += wk;
      gc += s.w_g[i] * e;
      m1 += wk * s.Lt[i];
      m2 += wk * s.Lt[i] * s.Lt[i];
      mtt += wk * (s.Ltt[i] - s.Ltx[i] * s.Ltx[i] / s.Lxx[i]);
    }
    K += kc;
    err += std::abs(kc - gc);
  }
  NormResult r;
  r.log_norm = lmax + std::log(K);
  r.rel_err = err / K;
  const double mean = m1 / K, var = std::max(0.0, m2 / K - mean * mean);
  r.d1 = k * mean;
  r.d2 = static_cast<double>(k) * k * var + k * (mtt / K);
  return r;
}

}  // namespace

BergmanSystem assemble(const MetricPath& path, int k, double rel_tol) {
  if (k < 3) throw Error("Bergman level k must be at least 3");
  if (path.slices.empty()) throw Error("empty path");
  BergmanSystem sys;
  sys.k = k;
  sys.path = path;
  const std::size_t T = path.size();
  const std::size_t J = static_cast<std::size_t>(k - 1);
  sys.log_norms.assign(T, std::vector<double>(J));
  sys.d1_log_norms.assign(T, std::vector<double>(J, 0.0));
  sys.d2_log_norms.assign(T, std::vector<double>(J, 0.0));
  double worst = 0;
  std::size_t worst_j = 0, worst_t = 0;
  for (std::size_t i = 0; i < T; ++i) {
    const SymplecticPotential& sl = path.slices[i];
    CubicSpline g(sl.g(), 0.0, sl.h()), gt, gtt;
    const bool moving = T >= 3;
    if (moving) {
      gt = CubicSpline(path.g_t(i), 0.0, sl.h());
      gtt = CubicSpline(path.g_tt(i), 0.0, sl.h());
    }
    const SliceNodes base = build_nodes(g, moving ? &gt : nullptr, moving ? &gtt : nullptr, sl.cells(), k);
    for (std::size_t j = 0; j < J; ++j) {
      NormResult r = integrate_norm(base, k, static_cast<int>(j));
      for (std::size_t split = 2; r.rel_err > rel_tol && split <= 16; split *= 2) {
        const SliceNodes fine =
            build_nodes(g, moving ? &gt : nullptr, moving ? &gtt : nullptr, sl.cells() * split, k);
        r = integrate_norm(fine, k, static_cast<int>(j));
      }
      if (r.rel_err > worst) {
        worst = r.rel_err;
        worst_j = j;
        worst_t = i;
      }
      sys.log_norms[i][j] = r.log_norm;
      sys.d1_log_norms[i][j] = r.d1;
      sys.d2_log_norms[i][j] = r.d2;
    }
  }
  if (worst > rel_tol)
    throw ConvergenceError("norm quadrature did not converge at j=" + std::to_string(worst_j) +
                           ", t-index " + std::to_string(worst_t));
  return sys;
}

BergmanMeasure bergman_measure(const BergmanSystem& sys, std::size_t t_index, double window, std::size_t s_cells) {
  const RadialEvaluator ev(sys.path.slices.at(t_index));
  BergmanMeasure m{sys.k, UniformGrid{-window, window, s_cells}, {}, 0.0};
  const std::vector<double>& ln = sys.log_norms[t_index];
  std::vector<double> a(ln.size());
  m.density.resize(m.grid.size());
  for (std::size_t i = 0; i < m.density.size(); ++i) {
    const double s = m.grid.node(i);
    const double kphi = sys.k * ev.phi(s);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = (j + 1.0) * s - kphi - ln[j];
    m.density[i] = std::exp(log_sum_exp(a)) / sys.k;
  }
  m.mass = trapezoid(m.density, m.grid.step());
  return m;
}

std::vector<double> tv_convergence(const SymplecticPotential& u, const std::vector<int>& k_list, double window,
                                   std::size_t s_cells) {
  MetricPath single{UniformGrid{0.0, 1.0, 1}, {u}, PathKind::geodesic};
  const RadialEvaluator ev(u);
  const UniformGrid sg{-window, window, s_cells};
  std::vector<double> pp(sg.size());
  for (std::size_t i = 0; i < pp.size(); ++i) pp[i] = ev.phi_pp(sg.node(i));
  std::vector<double> out;
  for (int k : k_list) {
    const BergmanMeasure b = bergman_measure(assemble(single, k), 0, window, s_cells);
    std::vector<double> d(pp.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::abs(b.density[i] - pp[i]);
    out.push_back(trapezoid(d, sg.step()));
  }
  return out;
}

BergmanMeasure disc_bergman(const std::vector<double>& phi, int k) {
  if (phi.size() < 5) throw ResolutionError("disc weight needs at least 5 radial samples");
  if (k < 1) throw Error("level k must be positive");
  const std::size_t cells = phi.size() - 1;
  const double h = 1.0 / static_cast<double>(cells);
  {
    const std::vector<double> p1 = d1(phi, h), p2 = d2(phi, h);
    double scale = 1.0;
    for (double v : p2) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 1; i < phi.size(); ++i)
      if (p2[i] + p1[i] / (i * h) < -1e-8 * scale)
        throw Error("disc weight is not subharmonic at radius node " + std::to_string(i));
  }
  const CubicSpline sp(phi, 0.0, h);
  const double pmin = *std::min_element(phi.begin(), phi.end());
  const GK15& r = gk15();
  // log of 2 pi integral of r^{2j+1} exp(-k (phi - pmin)) dr
  std::vector<double> xs, ws, base;
  for (std::size_t c = 0; c < cells; ++c)
    for (int m = 0; m < 15; ++m) {
      const double x = (c + 0.5) * h + 0.5 * h * r.node[m];
      xs.push_back(x);
      ws.push_back(0.5 * h * r.wk[m]);
      base.push_back(-k * (sp(x) - pmin));
    }
  std::vector<double> log_norm(static_cast<std::size_t>(k));
  std::vector<double> l(xs.size());
  for (int j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) l[i] = (2.0 * j + 1.0) * std::log(xs[i]) + base[i] + std::log(ws[i]);
    log_norm[j] = std::log(2.0 * std::numbers::pi) + log_sum_exp(l);
  }
  BergmanMeasure m{k, UniformGrid{0.0, 1.0, cells}, std::vector<double>(phi.size()), 0.0};
  std::vector<double> a(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double rr = i * h;
    const double w = -k * (phi[i] - pmin);
    if (i == 0) {
      m.density[i] = std::exp(w - log_norm[0]) / k;
      continue;
    }
    for (int j = 0; j < k; ++j) a[j] = 2.0 * j * std::log(rr) + w - log_norm[j];
    m.density[i] = std::exp(log_sum_exp(a)) / k;
  }
  std::vector<double> f(phi.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 2.0 * std::numbers::pi * m.density[i] * i * h;
  m.mass = trapezoid(f, h);
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<std::size_t, std::size_t> scan_t_range(const BergmanSystem& sys) {
  const std::size_t T = sys.path.size();
  if (T < 3) throw ResolutionError("Hessian scan needs at least 3 t-nodes");
  if (T >= 7) return {2, T - 2};
  return {0, T};
}

// Hessian of G at (t_i, s) from the analytic t-derivatives of log N_j.
Hessian2 g_hessian(const BergmanSystem& sys, std::size_t i, double s, double* G = nullptr) {
  const auto& l = sys.log_norms[i];
  const auto& l1 = sys.d1_log_norms[i];
  const auto& l2 = sys.d2_log_norms[i];
  const std::size_t J = l.size();
  std::vector<double> a(J);
  for (std::size_t j = 0; j < J; ++j) a[j] = (j + 1.0) * s - l[j];
  const double lse = log_sum_exp(a);
  if (G) *G = lse;
  double Ee = 0, Ee2 = 0, Ed = 0, Ed2 = 0, Eed = 0, Edd = 0;
  for (std::size_t j = 0; j < J; ++j) {
    const double p = std::exp(a[j] - lse);
    const double e = j + 1.0;
    Ee += p * e;
    Ee2 += p * e * e;
    Ed += p * l1[j];
    Ed2 += p * l1[j] * l1[j];
    Eed += p * e * l1[j];
    Edd += p * l2[j];
  }
  Hessian2 H;
  H.ss = Ee2 - Ee * Ee;
  H.ts = -(Eed - Ee * Ed);
  H.tt = -Edd + (Ed2 - Ed * Ed);
  return H;
}

struct PhiAt {
  double phi = 0;
  Hessian2 hess;
};

// Radial potential and its (t, s) Hessian for one slice.
class SlicePhi {
 public:
  SlicePhi(const MetricPath& p, std::size_t i)
      : ev_(p.slices[i]),
        gt_(p.g_t(i), 0.0, p.slices[i].h()),
        gtt_(p.g_tt(i), 0.0, p.slices[i].h()) {}
  PhiAt at(double s) const {
    const double x = ev_.x_of_s(s);
    return {ev_.phi(s), phi_hessian(ev_.Lxx(x), gt_.prime(x), gtt_(x))};
  }

 private:
  RadialEvaluator ev_;
  CubicSpline gt_, gtt_;
};

}  // namespace

double mixed_pairing(const Hessian2& A, const Hessian2& B) {
  return A.tt * B.ss + A.ss * B.tt - 2.0 * A.ts * B.ts;
}

HessianField log_kernel_hessian(const BergmanSystem& sys, double window, std::size_t s_cells) {
  HessianField f{sys.t_grid(), UniformGrid{-window, window, s_cells}, {}};
  const std::size_t M = f.s_grid.size();
  f.values.assign(sys.path.size() * M, Hessian2{});
  const auto [lo, hi] = scan_t_range(sys);
  for (std::size_t i = lo; i < hi; ++i)
    for (std::size_t j = 0; j < M; ++j) f.values[i * M + j] = g_hessian(sys, i, f.s_grid.node(j));
  return f;
}

HessianField log_kernel_hessian_fd(const BergmanSystem& sys, double window, std::size_t s_cells) {
  HessianField f{sys.t_grid(), UniformGrid{-window, window, s_cells}, {}};
  const std::size_t T = sys.path.size(), M = f.s_grid.size();
  std::vector<double> G(T * M);
  for (std::size_t i = 0; i < T; ++i)
    for (std::size_t j = 0; j < M; ++j) g_hessian(sys, i, f.s_grid.node(j), &G[i * M + j]);
  f.values.assign(T * M, Hessian2{});
  const double dt = sys.path.dt(), ds = f.s_grid.step();
  for (std::size_t i = 1; i + 1 < T; ++i)
    for (std::size_t j = 1; j + 1 < M; ++j) {
      auto P = [&](std::size_t a, std::size_t b) { return G[a * M + b]; };
      Hessian2& H = f.values[i * M + j];
      H.tt = (P(i - 1, j) - 2.0 * P(i, j) + P(i + 1, j)) / (dt * dt);
      H.ss = (P(i, j - 1) - 2.0 * P(i, j) + P(i, j + 1)) / (ds * ds);
      H.ts = (P(i + 1, j + 1) - P(i + 1, j - 1) - P(i - 1, j + 1) + P(i - 1, j - 1)) / (4.0 * dt * ds);
    }
  return f;
}

double psh_variation_check(const BergmanSystem& sys, double window, std::size_t s_cells) {
  const HessianField f = log_kernel_hessian(sys, window, s_cells);
  const auto [lo, hi] = scan_t_range(sys);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i < hi; ++i)
    for (std::size_t j = 0; j < f.s_grid.size(); ++j) m = std::min(m, f.at(i, j).min_eig());
  return m;
}

double decomposition_inequality(const BergmanSystem& sys, double window, std::size_t s_cells) {
  const auto [lo, hi] = scan_t_range(sys);
  const UniformGrid sg{-window, window, s_cells};
  const double k = sys.k;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i < hi; ++i) {
    const SlicePhi sp(sys.path, i);
    for (std::size_t j = 0; j < sg.size(); ++j) {
      const double s = sg.node(j);
      const Hessian2 B = sp.at(s).hess;
      // log b_k = log-sum-exp of (j+1)s - log N_j - k Phi, minus log k
      Hessian2 logb = g_hessian(sys, i, s);
      logb.tt -= k * B.tt;
      logb.ts -= k * B.ts;
      logb.ss -= k * B.ss;
      const Hessian2 D{logb.tt + k * B.tt, logb.ts + k * B.ts, logb.ss + k * B.ss};
      m = std::min(m, D.min_eig());
    }
  }
  return m;
}

MixedPositivity mixed_positivity(const BergmanSystem& sys, double A, double window, std::size_t s_cells) {
  const auto [lo, hi] = scan_t_range(sys);
  const UniformGrid sg{-window, window, s_cells};
  const double k = sys.k;
  MixedPositivity out;
  out.min_pairing = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i < hi; ++i) {
    const SlicePhi sp(sys.path, i);
    for (std::size_t j = 0; j < sg.size(); ++j) {
      const double s = sg.node(j);
      const PhiAt P = sp.at(s);
      const Hessian2& B = P.hess;
      double G = 0;
      const Hessian2 HG = g_hessian(sys, i, s, &G);
      const double log_b = G - k * P.phi - std::log(k);
      const double chi0 = softplus(s) + softplus(-s);
      const double chi = -k * P.phi + chi0;
      double md;
      if (std::isfinite(A) && chi - A > log_b) {
        ++out.truncated_nodes;
        const double x0 = logistic(s);
        md = -2.0 * k * B.det() + 2.0 * x0 * (1.0 - x0) * B.tt;
      } else {
        md = mixed_pairing(HG, B) - 2.0 * k * B.det();
      }
      out.min_pairing = std::min(out.min_pairing, md);
    }
  }
  return out;
}

BergmanSystem mutate_norms(const BergmanSystem& sys, double c) {
  BergmanSystem m = sys;
  for (std::size_t i = 0; i < m.path.size(); ++i) {
    const double t = m.t_grid().node(i);
    for (std::size_t j = 0; j < m.dim(); ++j) {
      m.log_norms[i][j] -= c * t * (1.0 - t);
      m.d1_log_norms[i][j] -= c * (1.0 - 2.0 * t);
      m.d2_log_norms[i][j] += 2.0 * c;
    }
  }
  return m;
}

}  // namespace mlab
