// One line per acceptance criterion. Tolerances are pinned here, not read from
// the library defaults.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mlab/experiments.hpp"

using namespace mlab;

namespace {

struct Criterion {
  int id;
  std::string experiment;
  std::map<std::string, double> tol;
  double per_unit_seconds = 0;  // runtime budget per pair or run; 0 means none
  double units = 1;
};

const std::vector<Criterion> kCriteria = {
    {1, "convexity", {{"second_diff", 1e-6}}, 60.0, 21},
    {2, "endpoint-continuity", {{"endpoint", 1e-8}}},
    {3, "subslope", {{"slack", 1e-4}, {"fs_minimum", 1e-6}}},
    {4, "bergman-mass", {{"mass", 1e-8}}},
    {5, "bergman-tv", {{"fs_tv64", 0.08}, {"regression", 1e-9}}},
    {6, "psh-variation", {{"min_eig", 1e-6}}},
    {7, "mixed-positivity", {{"decomposition", 1e-6}, {"pairing", 1e-8}, {"a_stability", 1e-4}}},
    {8, "hmae-residual", {{"ratio", 3.5}}},
    {9, "gradient-checks", {{"order", 1.9}}},
    {10, "entropy-duality", {{"gap", 1e-9}, {"optimal", 1e-6}}},
    {11,
     "fields-identities",
     {{"hamiltonian", 1e-6},
      {"ibp", 1e-5},
      {"inner_product_spread", 1e-5},
      {"inner_product_fs", 1e-6},
      {"futaki", 1e-5},
      {"ev_linearity", 1e-5}}},
    {12, "linearized-solvability", {{"residual", 1e-8}}},
    {13, "perturbation", {{"slope", 1.9}, {"control", 0.15}}},
    {14, "uniqueness-twisted", {{"agreement", 1e-4}, {"fs_distance", 1e-4}, {"residual", 1e-5}}, 300.0, 6},
    {15, "strict-convexity", {{"slack", 1e-6}}},
};

}  // namespace

int main() {
  int failed = 0;
  for (const auto& c : kCriteria) {
    ExperimentConfig cfg;
    cfg.experiment = c.experiment;
    cfg.tolerances = c.tol;
    std::string detail;
    bool pass = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cfg.validate();
      const RunResult r = run(cfg, false);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      pass = r.ok();
      if (const Check* f = r.first_failure())
        detail = f->name + ": " + std::to_string(f->measured) + " " + f->relation + " " + std::to_string(f->bound);
      if (c.per_unit_seconds > 0) {
        const double per = secs / c.units;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.2fs per unit, budget %.0fs", per, c.per_unit_seconds);
        if (per >= c.per_unit_seconds) pass = false;
        detail += (detail.empty() ? "" : "; ") + std::string(buf);
      }
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.1fs", secs);
      detail += (detail.empty() ? "" : "; ") + std::string(buf);
    } catch (const std::exception& e) {
      detail = std::string("error: ") + e.what();
    }
    if (!pass) ++failed;
    std::printf("criterion %2d %-24s %s  %s\n", c.id, c.experiment.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(kCriteria.size()) - failed, kCriteria.size());
  return failed == 0 ? 0 : 1;
}
