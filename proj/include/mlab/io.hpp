#pragma once

// JSON and CSV serialization. Doubles are written in shortest round-trip form,
// so reading back gives bit-identical samples.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "mlab/bergman.hpp"
#include "mlab/fields.hpp"
#include "mlab/functionals.hpp"
#include "mlab/geodesic.hpp"
#include "mlab/potential.hpp"

namespace mlab {

using nlohmann::json;

json to_json(const SymplecticPotential& u);
json to_json(const RadialPotential& p);
json to_json(const GridMeasure& m);
json to_json(const MetricPath& p);
json to_json(const BergmanSystem& sys);
json to_json(const Eigen::MatrixXd& a);  // {rows, cols, data} row-major

SymplecticPotential symplectic_from_json(const json& j);
RadialPotential radial_from_json(const json& j);
GridMeasure measure_from_json(const json& j);
MetricPath path_from_json(const json& j);

std::string format_double(double v);

using CsvRow = std::vector<std::string>;
void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<CsvRow>& rows);

/// t, value, d1, d2 (d1 forward differences, d2 centered; blank where undefined)
void write_report_csv(std::ostream& os, const FunctionalReport& r);
/// t, s, det, min_eig
void write_residual_csv(std::ostream& os, const HessianField& f);
/// iter, value, grad_norm, residual
void write_descent_csv(std::ostream& os, const std::vector<DescentStep>& trace);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace mlab
