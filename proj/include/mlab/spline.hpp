#pragma once

// C^2 cubic interpolant of samples on a uniform grid. End slopes come from
// one-sided second-order differences of the samples.

#include <memory>
#include <span>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

namespace mlab {

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::span<const double> values, double lo, double h) {
    const std::size_t n = values.size();
    double left = 0.0, right = 0.0;
    if (n >= 3) {
      left = (-1.5 * values[0] + 2.0 * values[1] - 0.5 * values[2]) / h;
      right = (0.5 * values[n - 3] - 2.0 * values[n - 2] + 1.5 * values[n - 1]) / h;
    }
    impl_ = std::make_shared<Impl>(values.begin(), values.end(), lo, h, left, right);
  }

  bool empty() const noexcept { return !impl_; }
  double operator()(double x) const { return (*impl_)(x); }
  double prime(double x) const { return impl_->prime(x); }
  double double_prime(double x) const { return impl_->double_prime(x); }

 private:
  using Impl = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  std::shared_ptr<const Impl> impl_;
};

}  // namespace mlab
