#include "mlab/local_functional.hpp"

#include <stdexcept>

#include "mlab/grid.hpp"

namespace mlab {

Jet LocalFunctional::eval(double x, double g, double gp, double gpp) const {
  const Jet G = Jet::variable(g, 0), G1 = Jet::variable(gp, 1), G2 = Jet::variable(gpp, 2);
  Jet acc(0.0);
  for (const Term& t : terms_) {
    Jet v = t.f(x, G, G1, G2);
    if (t.scale != 1.0) v *= Jet(t.scale);
    acc += v;
  }
  return acc;
}

namespace {

struct Nodes {
  std::size_t n;
  double h;
  std::vector<double> q, gp, gpp;
};

Nodes prepare(std::span<const double> g) {
  if (g.size() < 5) throw std::invalid_argument("local functional needs at least 5 nodes");
  Nodes nd;
  nd.n = g.size();
  nd.h = 1.0 / static_cast<double>(nd.n - 1);
  nd.q = trapezoid_weights(nd.n, nd.h);
  nd.gp = d1(g, nd.h);
  nd.gpp = d2(g, nd.h);
  return nd;
}

double node_x(std::size_t i, std::size_t n) { return i + 1 == n ? 1.0 : i / static_cast<double>(n - 1); }

}  // namespace

double LocalFunctional::value(std::span<const double> g) const {
  const Nodes nd = prepare(g);
  double acc = c0_ * g.front() + c1_ * g.back();
  for (std::size_t i = 0; i < nd.n; ++i) acc += nd.q[i] * eval(node_x(i, nd.n), g[i], nd.gp[i], nd.gpp[i]).v;
  return acc;
}

std::vector<double> LocalFunctional::gradient(std::span<const double> g) const {
  const Nodes nd = prepare(g);
  std::vector<double> w0(nd.n), w1(nd.n), w2(nd.n);
  for (std::size_t i = 0; i < nd.n; ++i) {
    const Jet j = eval(node_x(i, nd.n), g[i], nd.gp[i], nd.gpp[i]);
    w0[i] = nd.q[i] * j.d[0];
    w1[i] = nd.q[i] * j.d[1];
    w2[i] = nd.q[i] * j.d[2];
  }
  std::vector<double> out = w0;
  add_d1_transpose(w1, nd.h, out);
  add_d2_transpose(w2, nd.h, out);
  out.front() += c0_;
  out.back() += c1_;
  return out;
}

Eigen::SparseMatrix<double> LocalFunctional::hessian(std::span<const double> g) const {
  const Nodes nd = prepare(g);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nd.n * 81);
  for (std::size_t i = 0; i < nd.n; ++i) {
    const Jet j = eval(node_x(i, nd.n), g[i], nd.gp[i], nd.gpp[i]);
    StencilRow rows[3];
    rows[0].first = i;
    rows[0].len = 1;
    rows[0].coef = {1.0, 0, 0, 0};
    rows[1] = d1_row(i, nd.n, nd.h);
    rows[2] = d2_row(i, nd.n, nd.h);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double hab = nd.q[i] * j.h[a][b];
        if (hab == 0.0) continue;
        for (std::size_t ka = 0; ka < rows[a].len; ++ka)
          for (std::size_t kb = 0; kb < rows[b].len; ++kb)
            trip.emplace_back(static_cast<int>(rows[a].first + ka), static_cast<int>(rows[b].first + kb),
                              hab * rows[a].coef[ka] * rows[b].coef[kb]);
      }
  }
  Eigen::SparseMatrix<double> H(static_cast<int>(nd.n), static_cast<int>(nd.n));
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

double LocalFunctional::directional(std::span<const double> g, std::span<const double> w) const {
  const std::vector<double> gr = gradient(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < gr.size(); ++i) acc += gr[i] * w[i];
  return acc;
}

double LocalFunctional::second_directional(std::span<const double> g, std::span<const double> w) const {
  const Nodes nd = prepare(g);
  const std::vector<double> w1 = d1(w, nd.h), w2 = d2(w, nd.h);
  double acc = 0.0;
  for (std::size_t i = 0; i < nd.n; ++i) {
    const Jet j = eval(node_x(i, nd.n), g[i], nd.gp[i], nd.gpp[i]);
    const double r[3] = {w[i], w1[i], w2[i]};
    double s = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) s += j.h[a][b] * r[a] * r[b];
    acc += nd.q[i] * s;
  }
  return acc;
}

LocalFunctional& LocalFunctional::operator+=(const LocalFunctional& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  c0_ += o.c0_;
  c1_ += o.c1_;
  return *this;
}

LocalFunctional& LocalFunctional::operator*=(double c) {
  for (Term& t : terms_) t.scale *= c;
  c0_ *= c;
  c1_ *= c;
  return *this;
}

}  // namespace mlab
