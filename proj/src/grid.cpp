#include "mlab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace mlab {

std::vector<double> UniformGrid::nodes() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
  return out;
}

StencilRow d1_row(std::size_t i, std::size_t n, double h) {
  StencilRow r;
  if (n < 3) throw std::invalid_argument("d1_row: need at least 3 nodes");
  if (i == 0) {
    r.first = 0;
    r.len = 3;
    r.coef = {-1.5 / h, 2.0 / h, -0.5 / h, 0.0};
  } else if (i == n - 1) {
    r.first = n - 3;
    r.len = 3;
    r.coef = {0.5 / h, -2.0 / h, 1.5 / h, 0.0};
  } else {
    r.first = i - 1;
    r.len = 3;
    r.coef = {-0.5 / h, 0.0, 0.5 / h, 0.0};
  }
  return r;
}

StencilRow d2_row(std::size_t i, std::size_t n, double h) {
  StencilRow r;
  if (n < 4) throw std::invalid_argument("d2_row: need at least 4 nodes");
  const double h2 = h * h;
  if (i == 0) {
    r.first = 0;
    r.len = 4;
    r.coef = {2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2};
  } else if (i == n - 1) {
    r.first = n - 4;
    r.len = 4;
    r.coef = {-1.0 / h2, 4.0 / h2, -5.0 / h2, 2.0 / h2};
  } else {
    r.first = i - 1;
    r.len = 3;
    r.coef = {1.0 / h2, -2.0 / h2, 1.0 / h2, 0.0};
  }
  return r;
}

namespace {

template <class RowFn>
std::vector<double> apply(std::span<const double> f, double h, RowFn row) {
  const std::size_t n = f.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const StencilRow r = row(i, n, h);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.len; ++k) acc += r.coef[k] * f[r.first + k];
    out[i] = acc;
  }
  return out;
}

template <class RowFn>
void add_transpose(std::span<const double> w, double h, std::span<double> out, RowFn row) {
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    const StencilRow r = row(i, n, h);
    for (std::size_t k = 0; k < r.len; ++k) out[r.first + k] += r.coef[k] * w[i];
  }
}

}  // namespace

std::vector<double> d1(std::span<const double> f, double h) { return apply(f, h, d1_row); }
std::vector<double> d2(std::span<const double> f, double h) { return apply(f, h, d2_row); }

void add_d1_transpose(std::span<const double> w, double h, std::span<double> out) {
  add_transpose(w, h, out, d1_row);
}
void add_d2_transpose(std::span<const double> w, double h, std::span<double> out) {
  add_transpose(w, h, out, d2_row);
}

std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  if (n > 0) {
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
  }
  return w;
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double acc = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
  return acc * h;
}

double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 3) return trapezoid(f, h);
  std::size_t cells = n - 1;
  double tail = 0.0;
  if (cells % 2 == 1) {
    tail = 0.5 * h * (f[n - 2] + f[n - 1]);
    --cells;
  }
  double acc = f[0] + f[cells];
  for (std::size_t i = 1; i < cells; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
  return acc * h / 3.0 + tail;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return out;
}

std::vector<double> second_differences(std::span<const double> f, double h) {
  std::vector<double> out;
  if (f.size() < 3) return out;
  out.reserve(f.size() - 2);
  for (std::size_t i = 1; i + 1 < f.size(); ++i)
    out.push_back((f[i - 1] - 2.0 * f[i] + f[i + 1]) / (h * h));
  return out;
}

std::vector<double> d1_fourth(std::span<const double> f, double h) {
  std::vector<double> out = d1(f, h);
  for (std::size_t i = 2; i + 2 < f.size(); ++i)
    out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  return out;
}

std::vector<double> d2_fourth(std::span<const double> f, double h) {
  std::vector<double> out = d2(f, h);
  for (std::size_t i = 2; i + 2 < f.size(); ++i)
    out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) /
             (12.0 * h * h);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("loglog_slope: need >= 2 paired samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace mlab
