#include "mlab/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mlab/error.hpp"

namespace mlab {

namespace {

json grid_nodes(const UniformGrid& g) { return g.nodes(); }

UniformGrid grid_from_nodes(const json& nodes) {
  const auto v = nodes.get<std::vector<double>>();
  if (v.size() < 2) throw ConfigError("grid needs at least two nodes");
  const UniformGrid g{v.front(), v.back(), v.size() - 1};
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != g.node(i)) throw GridMismatchError("grid is not uniform");
  return g;
}

}  // namespace

json to_json(const SymplecticPotential& u) {
  return {{"grid_n", u.cells()}, {"window", nullptr}, {"representation", "symplectic"}, {"values", u.g()}};
}

json to_json(const RadialPotential& p) {
  return {{"grid_n", p.grid().cells}, {"window", p.window()}, {"representation", "radial"}, {"values", p.phi()}};
}

json to_json(const GridMeasure& m) {
  return {{"coordinate", m.coordinate == Coordinate::moment ? "moment" : "s_axis"},
          {"nodes", grid_nodes(m.grid)},
          {"density", m.density}};
}

json to_json(const MetricPath& p) {
  json slices = json::array();
  for (const auto& s : p.slices) slices.push_back(to_json(s));
  return {{"t_grid", grid_nodes(p.t_grid)}, {"kind", to_string(p.kind)}, {"slices", slices}};
}

json to_json(const BergmanSystem& sys) {
  return {{"k", sys.k}, {"t_grid", grid_nodes(sys.t_grid())}, {"log_norms", sys.log_norms}};
}

json to_json(const Eigen::MatrixXd& a) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back(a(i, j));
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

SymplecticPotential symplectic_from_json(const json& j) {
  if (j.at("representation") != "symplectic") throw ConfigError("expected a symplectic potential");
  auto v = j.at("values").get<std::vector<double>>();
  const auto n = j.at("grid_n").get<std::size_t>();
  if (v.size() != n + 1) throw GridMismatchError("values do not match grid_n");
  return SymplecticPotential(n, std::move(v));
}

RadialPotential radial_from_json(const json& j) {
  if (j.at("representation") != "radial") throw ConfigError("expected a radial potential");
  auto v = j.at("values").get<std::vector<double>>();
  if (v.size() != j.at("grid_n").get<std::size_t>() + 1) throw GridMismatchError("values do not match grid_n");
  return RadialPotential(j.at("window").get<double>(), std::move(v));
}

GridMeasure measure_from_json(const json& j) {
  const std::string c = j.at("coordinate");
  if (c != "moment" && c != "s_axis") throw ConfigError("unknown coordinate " + c);
  return GridMeasure::make(c == "moment" ? Coordinate::moment : Coordinate::s_axis, grid_from_nodes(j.at("nodes")),
                           j.at("density").get<std::vector<double>>());
}

MetricPath path_from_json(const json& j) {
  MetricPath p{grid_from_nodes(j.at("t_grid")), {}, path_kind_from_string(j.at("kind"))};
  for (const auto& s : j.at("slices")) p.slices.push_back(symplectic_from_json(s));
  if (p.slices.size() != p.t_grid.size()) throw GridMismatchError("slice count does not match t_grid");
  return p;
}

std::string format_double(double v) { return fmt::format("{}", v); }

void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<CsvRow>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
}

void write_report_csv(std::ostream& os, const FunctionalReport& r) {
  std::vector<CsvRow> rows;
  const std::size_t n = r.values.size();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back({format_double(r.t_grid[i]), format_double(r.values[i]),
                    i + 1 < n ? format_double(r.first_diffs[i]) : "",
                    i > 0 && i + 1 < n ? format_double(r.second_diffs[i - 1]) : ""});
  }
  write_csv(os, {"t", "value", "d1", "d2"}, rows);
}

void write_residual_csv(std::ostream& os, const HessianField& f) {
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < f.t_grid.size(); ++i)
    for (std::size_t j = 0; j < f.s_grid.size(); ++j) {
      const Hessian2& h = f.at(i, j);
      rows.push_back({format_double(f.t_grid.node(i)), format_double(f.s_grid.node(j)), format_double(h.det()),
                      format_double(h.min_eig())});
    }
  write_csv(os, {"t", "s", "det", "min_eig"}, rows);
}

void write_descent_csv(std::ostream& os, const std::vector<DescentStep>& trace) {
  std::vector<CsvRow> rows;
  for (const auto& s : trace)
    rows.push_back({std::to_string(s.iter), format_double(s.value), format_double(s.grad_norm),
                    format_double(s.residual)});
  write_csv(os, {"iter", "value", "grad_norm", "residual"}, rows);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream f(file, std::ios::binary);
  if (!f) throw Error("cannot write " + file.string());
  f << text;
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) throw Error("cannot read " + file.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace mlab
