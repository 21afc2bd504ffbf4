#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "affine/bodies.hpp"
#include "affine/gaussians.hpp"
#include "affine/verifier.hpp"
#include "json.hpp"

namespace affine::io {

using nlohmann::json;

/// A JSON document that violates one of the schemas in schemas/.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path);

/// Matrices are row-major arrays of rows.
json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const json& j);

/// {"dim": int, "kind": ..., "params": {...}}; schemas/body.schema.json lists
/// the params of each kind. The interval [-alpha1, alpha2] is
/// {"alpha1": ..., "alpha2": ...}; linear images nest {"A": ..., "body": {...}}.
json body_to_json(const BodySpec& k);
BodySpec body_from_json(const json& j);

/// Description of a generalized Gaussian or uniform law:
///   {"n": int, "m": int, "p": real, "lambda": real | "inf",
///    "law": "generalized_gaussian" | "uniform",
///    "contour": "euclidean" | {"body": BodySpec} | {"polar_projection": {"Q": BodySpec}},
///    "A": matrix (optional)}
/// The polar projection contour is required when m > 1.
GaussianSpec spec_from_json(const json& j);

/// Resolved settings of one CLI invocation; embedded in every record it writes.
struct RunConfig {
  std::string command;
  std::vector<std::string> targets;
  std::string params_path;
  std::uint64_t seed = 1;
  std::optional<std::size_t> mc_samples;
  std::optional<double> tol;
  std::string profile = "desk";
  int jobs = 1;
  std::string out;
  std::string format = "csv";
  json extra = json::object();
};

json config_to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);
/// Config from a RunConfig JSON file or from any record that embeds one
/// (report JSON, report CSV header, sample sidecar).
RunConfig read_run_config(const std::string& path);

/// Version tag of the report CSV layout.
inline constexpr int kReportCsvVersion = 1;
/// check_id, n, m, p, lambda, Q_kind, lhs, lhs_stderr, rhs, rhs_stderr, ratio, pass, seed, mc_samples
const std::vector<std::string>& report_csv_columns();

json estimate_to_json(const Estimate& e);
Estimate estimate_from_json(const json& j);
json report_to_json(const CheckReport& r);
CheckReport report_from_json(const json& j);

/// Header comment lines (version and config), the column row, then one row per report.
void write_reports_csv(std::ostream& os, const std::vector<CheckReport>& reports, const json& config);
/// {"format": "affine-reports", "version": 1, "config": ..., "reports": [...]}
void write_reports_json(std::ostream& os, const std::vector<CheckReport>& reports, const json& config);

/// Reports from a file written by either writer. CSV rows carry only the
/// fixed columns; stderr columns come back as std_error.
std::vector<CheckReport> read_reports(const std::string& path);

/// Shortest decimal string that parses back to the same double; inf and nan spelled out.
std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace affine::io
