// mlab_cli run <experiment> [flags] | generate-corpus [flags]

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "mlab/corpus.hpp"
#include "mlab/error.hpp"
#include "mlab/experiments.hpp"

using namespace mlab;

namespace {

std::vector<int> parse_k_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t c = s.find(',', pos);
    const std::string tok = s.substr(pos, c == std::string::npos ? std::string::npos : c - pos);
    if (!tok.empty()) {
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ConfigError("invalid config:\n  k_list: '" + tok + "' is not an integer");
      }
    }
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on S^1-invariant Kahler metrics of the Riemann sphere"};
  app.require_subcommand(1);
  app.footer(csv_documentation());

  std::string config_path, out_dir, k_str, experiment;
  std::uint64_t seed = 0;
  std::size_t grid_n = 0, t_nodes = 0, count = 22;
  std::vector<std::string> overrides;

  auto* run_cmd = app.add_subcommand("run", "run one experiment");
  run_cmd->add_option("experiment", experiment, "experiment name")->required()->check(CLI::IsMember(experiment_names()));
  run_cmd->add_option("--config", config_path, "JSON config file");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seed", seed, "corpus seed");
  run_cmd->add_option("--k", k_str, "comma-separated levels, e.g. 8,16,32");
  run_cmd->add_option("--grid-n", grid_n, "moment grid cells");
  run_cmd->add_option("--t-nodes", t_nodes, "t-nodes per path");
  run_cmd->add_option("--tol-override", overrides, "KEY=VAL, repeatable");

  auto* gen_cmd = app.add_subcommand("generate-corpus", "write the test corpus as JSON");
  gen_cmd->add_option("--seed", seed, "seed");
  gen_cmd->add_option("--count", count, "number of potentials (>= 1)");
  gen_cmd->add_option("--grid-n", grid_n, "moment grid cells");
  gen_cmd->add_option("--out", out_dir, "output file (stdout when empty)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      const auto U = generate_corpus(seed, count, grid_n ? grid_n : kDefaultGridN);
      json j = {{"seed", seed}, {"potentials", json::array()}};
      for (const auto& u : U) j["potentials"].push_back(to_json(u));
      if (out_dir.empty())
        std::cout << j.dump() << "\n";
      else
        write_text(out_dir, j.dump() + "\n");
      return 0;
    }

    json cj = json::object();
    if (!config_path.empty()) cj = json::parse(read_text(config_path));
    if (cj.contains("experiment") && cj["experiment"] != experiment)
      throw ConfigError("invalid config:\n  experiment: config says " + cj["experiment"].dump() +
                        " but the command line says '" + experiment + "'");
    cj["experiment"] = experiment;
    if (!out_dir.empty()) cj["output_dir"] = out_dir;
    if (run_cmd->count("--seed")) cj["seed"] = seed;
    if (run_cmd->count("--k")) cj["k_list"] = parse_k_list(k_str);
    if (grid_n) cj["grid"]["N"] = grid_n;
    if (t_nodes) cj["grid"]["t_nodes"] = t_nodes;
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError("invalid config:\n  --tol-override: expected KEY=VAL, got " + o);
      try {
        cj["tolerances"][o.substr(0, eq)] = std::stod(o.substr(eq + 1));
      } catch (const std::invalid_argument&) {
        throw ConfigError("invalid config:\n  tolerances." + o.substr(0, eq) + ": not a number");
      }
    }
    const ExperimentConfig cfg = ExperimentConfig::from_json(cj);
    const RunResult r = run(cfg);
    for (const auto& c : r.checks)
      std::printf("%-4s %-50s %.6g %s %.6g\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.measured, c.relation.c_str(),
                  c.bound);
    if (const Check* f = r.first_failure()) {
      std::fprintf(stderr, "first violated assertion: %s\n", f->name.c_str());
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
