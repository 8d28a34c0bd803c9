#pragma once

// Second-order forward-mode numbers in three variables. Used for exact
// derivatives of the local integrands F(x, g, g', g'') of the discrete
// functionals.

#include <array>
#include <cmath>

namespace mlab {

struct Jet {
  double v = 0.0;
  std::array<double, 3> d{};
  std::array<std::array<double, 3>, 3> h{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet variable(double value, int idx) {
    Jet j(value);
    j.d[idx] = 1.0;
    return j;
  }

  // f(this) given f, f', f'' at this->v
  Jet chain(double f0, double f1, double f2) const {
    Jet r(f0);
    for (int a = 0; a < 3; ++a) {
      r.d[a] = f1 * d[a];
      for (int b = 0; b < 3; ++b) r.h[a][b] = f1 * h[a][b] + f2 * d[a] * d[b];
    }
    return r;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int a = 0; a < 3; ++a) {
      d[a] += o.d[a];
      for (int b = 0; b < 3; ++b) h[a][b] += o.h[a][b];
    }
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int a = 0; a < 3; ++a) {
      d[a] -= o.d[a];
      for (int b = 0; b < 3; ++b) h[a][b] -= o.h[a][b];
    }
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    Jet r(v * o.v);
    for (int a = 0; a < 3; ++a) {
      r.d[a] = d[a] * o.v + v * o.d[a];
      for (int b = 0; b < 3; ++b)
        r.h[a][b] = h[a][b] * o.v + v * o.h[a][b] + d[a] * o.d[b] + d[b] * o.d[a];
    }
    return *this = r;
  }
  Jet& operator/=(const Jet& o) { return *this *= o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v)); }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, const Jet& b) { return a *= b; }
inline Jet operator/(Jet a, const Jet& b) { return a /= b; }
inline Jet operator-(const Jet& a) { return Jet(0.0) - a; }

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.v);
  return a.chain(e, e, e);
}
inline Jet log(const Jet& a) { return a.chain(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace mlab
