#include "mlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mlab/error.hpp"

namespace mlab {

SymplecticPotential glued_profile(std::size_t cells) {
  return SymplecticPotential::from_function(cells, [](double x) {
    const double d = std::max(x - 0.5, 0.0);
    return 0.5 * d * d;
  });
}

namespace {

struct Profile {
  double a2, a3, a4, amp, center, width;
  double operator()(double x) const {
    const double y = x - 0.5, z = (x - center) / width;
    return a2 * y * y + a3 * y * y * y + a4 * y * y * y * y + amp * std::exp(-0.5 * z * z);
  }
  double second(double x) const {
    const double y = x - 0.5, z = (x - center) / width;
    return 2 * a2 + 6 * a3 * y + 12 * a4 * y * y + amp * (z * z - 1.0) / (width * width) * std::exp(-0.5 * z * z);
  }
};

}  // namespace

std::vector<SymplecticPotential> generate_corpus(std::uint64_t seed, std::size_t count, std::size_t cells) {
  if (count == 0) throw ConfigError("generate_corpus: count must be >= 1");
  std::vector<SymplecticPotential> out;
  out.push_back(SymplecticPotential::fubini_study(cells));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  while (out.size() + 1 < count) {
    Profile p{U(rng), U(rng), U(rng), 0.05 * U(rng), 0.5 + 0.3 * U(rng), 0.15 + 0.05 * U(rng)};
    double mx = 0.0;
    for (int i = 0; i <= 2048; ++i) mx = std::max(mx, std::abs(p.second(i / 2048.0)));
    const double sc = mx > 1.8 ? 1.8 / mx : 1.0;
    out.push_back(SymplecticPotential::from_function(cells, [&](double x) { return sc * p(x); }));
  }
  if (count >= 2) out.push_back(glued_profile(cells));
  return out;
}

}  // namespace mlab
