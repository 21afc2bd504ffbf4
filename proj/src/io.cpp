#include "affine/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "affine/scalar_kernels.hpp"

namespace affine::io {

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return parse_double(j.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw SchemaError(where + ": expected a number");
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw SchemaError(where + ": expected an integer");
  return j.get<int>();
}

Vec vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array of numbers");
  Vec v;
  for (const auto& x : j) v.push_back(number(x, where));
  return v;
}

json number_json(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: " + s);
  return x;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

json matrix_to_json(const Matrix& a) {
  json rows = json::array();
  for (int i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("matrix: expected a nonempty array of rows");
  std::vector<Vec> rows;
  for (const auto& r : j) rows.push_back(vector(r, "matrix row"));
  for (const auto& r : rows)
    if (r.size() != rows.front().size() || r.empty()) throw SchemaError("matrix: rows must have equal nonzero length");
  return Matrix::from_rows(rows);
}

json body_to_json(const BodySpec& k) {
  json params = json::object();
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, body::Ball>) {
          params["radius"] = d.radius;
        } else if constexpr (std::is_same_v<T, body::Ellipsoid>) {
          params["A"] = matrix_to_json(d.a);
        } else if constexpr (std::is_same_v<T, body::Interval>) {
          params["alpha1"] = d.lower;
          params["alpha2"] = d.upper;
        } else if constexpr (std::is_same_v<T, body::Vertices>) {
          params["vertices"] = d.points;
        } else if constexpr (std::is_same_v<T, body::Facets>) {
          json fs = json::array();
          for (const auto& f : d.facets) fs.push_back({{"normal", f.normal}, {"area", f.area}, {"offset", f.offset}});
          params["facets"] = fs;
        } else if constexpr (std::is_same_v<T, body::LqBall>) {
          params["q"] = number_json(d.q);
        } else {
          params["A"] = matrix_to_json(d.a);
          params["body"] = body_to_json(*d.base);
        }
      },
      k.data());
  const std::string kind = k.kind() == BodyKind::ball ? "euclidean_ball" : to_string(k.kind());
  return {{"dim", k.dim()}, {"kind", kind}, {"params", params}};
}

BodySpec body_from_json(const json& j) {
  const std::string where = "BodySpec";
  const int dim = integer(require(j, "dim", where), where + ".dim");
  if (dim < 1 || dim > kMaxDim) throw SchemaError(where + ".dim: out of range");
  const json& kind_j = require(j, "kind", where);
  if (!kind_j.is_string()) throw SchemaError(where + ".kind: expected a string");
  const std::string kind = kind_j.get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (!params.is_object()) throw SchemaError(where + ".params: expected an object");
  auto check_dim = [&](int got) {
    if (got != dim) throw SchemaError(where + ": dim " + std::to_string(dim) + " does not match the data (" + std::to_string(got) + ")");
  };
  try {
    if (kind == "euclidean_ball" || kind == "ball") {
      return BodySpec::ball(dim, params.contains("radius") ? number(params.at("radius"), "ball.radius") : 1.0);
    }
    if (kind == "ellipsoid") {
      const Matrix a = matrix_from_json(require(params, "A", "ellipsoid.params"));
      check_dim(a.rows());
      return BodySpec::ellipsoid(a);
    }
    if (kind == "interval") {
      check_dim(1);
      return BodySpec::interval(number(require(params, "alpha1", "interval.params"), "interval.alpha1"),
                                number(require(params, "alpha2", "interval.params"), "interval.alpha2"));
    }
    if (kind == "polytope_vertices") {
      const json& vs = require(params, "vertices", "polytope_vertices.params");
      if (!vs.is_array()) throw SchemaError("polytope_vertices.vertices: expected an array");
      std::vector<Vec> pts;
      for (const auto& v : vs) {
        pts.push_back(vector(v, "polytope_vertices.vertices"));
        check_dim(static_cast<int>(pts.back().size()));
      }
      return BodySpec::polytope_vertices(std::move(pts));
    }
    if (kind == "polytope_facets") {
      const json& fs = require(params, "facets", "polytope_facets.params");
      if (!fs.is_array()) throw SchemaError("polytope_facets.facets: expected an array");
      std::vector<Facet> facets;
      for (const auto& f : fs) {
        Facet x;
        x.normal = vector(require(f, "normal", "facet"), "facet.normal");
        check_dim(static_cast<int>(x.normal.size()));
        x.area = number(require(f, "area", "facet"), "facet.area");
        x.offset = number(require(f, "offset", "facet"), "facet.offset");
        facets.push_back(std::move(x));
      }
      return BodySpec::polytope_facets(dim, std::move(facets));
    }
    if (kind == "lq_ball") {
      return BodySpec::lq_ball(dim, number(require(params, "q", "lq_ball.params"), "lq_ball.q"));
    }
    if (kind == "cube") {
      return BodySpec::cube(dim, params.contains("half") ? number(params.at("half"), "cube.half") : 1.0);
    }
    if (kind == "linear_image") {
      const Matrix a = matrix_from_json(require(params, "A", "linear_image.params"));
      check_dim(a.rows());
      return BodySpec::linear_image(a, body_from_json(require(params, "body", "linear_image.params")));
    }
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where + " (" + kind + "): " + e.what());
  }
  throw SchemaError(where + ".kind: unknown kind \"" + kind + "\"");
}

GaussianSpec spec_from_json(const json& j) {
  const std::string where = "GaussianSpec";
  const int n = integer(require(j, "n", where), where + ".n");
  const int m = j.contains("m") ? integer(j.at("m"), where + ".m") : 1;
  if (n < 1 || m < 1 || n * m > kMaxDim) throw SchemaError(where + ": n, m out of range");
  const std::string law = j.value("law", std::string("generalized_gaussian"));
  if (law != "generalized_gaussian" && law != "uniform") throw SchemaError(where + ".law: unknown law \"" + law + "\"");
  const json contour = j.value("contour", json("euclidean"));
  try {
    std::optional<GaussianSpec> spec;
    if (law == "generalized_gaussian" || contour.contains("polar_projection")) {
      const double p = number(require(j, "p", where), where + ".p");
      const double lambda = law == "uniform" ? kLambdaInfinity : number(require(j, "lambda", where), where + ".lambda");
      if (contour.is_object() && contour.contains("polar_projection")) {
        const BodySpec q = body_from_json(require(contour.at("polar_projection"), "Q", "contour.polar_projection"));
        if (q.dim() != m) throw SchemaError(where + ": Q must have dimension m");
        if (law == "uniform")
          spec = GaussianSpec::uniform(ContourGauge::polar_projection(n, q, p), {n, m});
        else
          spec = GaussianSpec::matrix(n, q, p, lambda);
      } else if (m > 1) {
        throw SchemaError(where + ": matrix laws (m > 1) need the polar_projection contour");
      } else if (contour == json("euclidean")) {
        spec = GaussianSpec::standard(n, p, lambda);
      } else if (contour.is_object() && contour.contains("body")) {
        const BodySpec k = body_from_json(contour.at("body"));
        if (k.dim() != n) throw SchemaError(where + ": contour body must have dimension n");
        spec = GaussianSpec(ContourGauge::of_body(k), {n, 1}, p, lambda);
      } else {
        throw SchemaError(where + ".contour: expected \"euclidean\", {\"body\": ...} or {\"polar_projection\": ...}");
      }
    } else {
      if (m > 1) throw SchemaError(where + ": matrix laws (m > 1) need the polar_projection contour");
      if (contour == json("euclidean")) {
        spec = GaussianSpec::uniform(ContourGauge::euclidean_norm(n), {n, 1});
      } else if (contour.is_object() && contour.contains("body")) {
        const BodySpec k = body_from_json(contour.at("body"));
        if (k.dim() != n) throw SchemaError(where + ": contour body must have dimension n");
        spec = GaussianSpec::uniform(ContourGauge::of_body(k), {n, 1});
      } else {
        throw SchemaError(where + ".contour: expected \"euclidean\", {\"body\": ...} or {\"polar_projection\": ...}");
      }
    }
    if (j.contains("A")) {
      const Matrix a = matrix_from_json(j.at("A"));
      if (a.rows() != n || a.cols() != n) throw SchemaError(where + ".A: must be n x n");
      spec = spec->linear_image(a);
    }
    return *spec;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(where + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw SchemaError(where + ": " + e.what());
  }
}

json config_to_json(const RunConfig& c) {
  json j = {{"command", c.command}, {"targets", c.targets}, {"seed", c.seed},   {"profile", c.profile},
            {"jobs", c.jobs},       {"format", c.format},   {"extra", c.extra}};
  if (!c.params_path.empty()) j["params"] = c.params_path;
  if (!c.out.empty()) j["out"] = c.out;
  if (c.mc_samples) j["mc_samples"] = *c.mc_samples;
  if (c.tol) j["tol"] = *c.tol;
  return j;
}

RunConfig config_from_json(const json& j) {
  const json& c = j.contains("config") ? j.at("config") : j;
  RunConfig r;
  try {
    r.command = c.at("command").get<std::string>();
    if (c.contains("targets")) r.targets = c.at("targets").get<std::vector<std::string>>();
    r.params_path = c.value("params", std::string());
    r.seed = c.value("seed", std::uint64_t{1});
    if (c.contains("mc_samples")) r.mc_samples = c.at("mc_samples").get<std::size_t>();
    if (c.contains("tol")) r.tol = c.at("tol").get<double>();
    r.profile = c.value("profile", std::string("desk"));
    r.jobs = c.value("jobs", 1);
    r.out = c.value("out", std::string());
    r.format = c.value("format", std::string("csv"));
    r.extra = c.value("extra", json::object());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("RunConfig: ") + e.what());
  }
  return r;
}

RunConfig read_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string first;
  std::getline(in, first);
  if (first.rfind("# affine-reports-csv", 0) == 0) {
    std::string line;
    const std::string tag = "# config: ";
    while (std::getline(in, line) && line.rfind("#", 0) == 0)
      if (line.rfind(tag, 0) == 0) return config_from_json(json::parse(line.substr(tag.size())));
    throw SchemaError(path + ": CSV header carries no config");
  }
  std::stringstream rest;
  rest << first << "\n" << in.rdbuf();
  try {
    return config_from_json(json::parse(rest.str()));
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols = {"check_id", "n",          "m",     "p",    "lambda", "Q_kind",
                                                "lhs",      "lhs_stderr", "rhs",   "rhs_stderr", "ratio", "pass",
                                                "seed",     "mc_samples"};
  return cols;
}

json estimate_to_json(const Estimate& e) {
  return {{"value", number_json(e.value)},         {"std_error", number_json(e.std_error)},
          {"error_bound", number_json(e.error_bound)}, {"samples", e.samples},
          {"valid", e.valid},                     {"method", e.method}};
}

Estimate estimate_from_json(const json& j) {
  Estimate e;
  e.value = number(j.at("value"), "estimate.value");
  e.std_error = number(j.at("std_error"), "estimate.std_error");
  e.error_bound = number(j.value("error_bound", json(0.0)), "estimate.error_bound");
  e.samples = j.value("samples", std::size_t{0});
  e.valid = j.value("valid", true);
  e.method = j.value("method", std::string("exact"));
  return e;
}

json report_to_json(const CheckReport& r) {
  return {{"check_id", r.check_id},
          {"label", r.label},
          {"mode", to_string(r.mode)},
          {"n", r.n},
          {"m", r.m},
          {"p", number_json(r.p)},
          {"lambda", number_json(r.lambda)},
          {"Q_kind", r.q_kind},
          {"lhs", estimate_to_json(r.lhs)},
          {"rhs", estimate_to_json(r.rhs)},
          {"ratio", number_json(r.ratio)},
          {"ratio_stderr", number_json(r.ratio_stderr)},
          {"tol", number_json(r.tol)},
          {"pass", r.pass},
          {"seed", r.seed},
          {"mc_samples", r.mc_samples},
          {"params", r.params},
          {"note", r.note}};
}

CheckReport report_from_json(const json& j) {
  CheckReport r;
  try {
    r.check_id = j.at("check_id").get<std::string>();
    r.label = j.value("label", std::string());
    r.mode = parse_check_mode(j.value("mode", std::string("inequality")));
    r.n = j.at("n").get<int>();
    r.m = j.at("m").get<int>();
    r.p = number(j.at("p"), "report.p");
    r.lambda = number(j.at("lambda"), "report.lambda");
    r.q_kind = j.value("Q_kind", std::string("none"));
    r.lhs = estimate_from_json(j.at("lhs"));
    r.rhs = estimate_from_json(j.at("rhs"));
    r.ratio = number(j.at("ratio"), "report.ratio");
    r.ratio_stderr = number(j.value("ratio_stderr", json(0.0)), "report.ratio_stderr");
    r.tol = number(j.value("tol", json(kTolFloor)), "report.tol");
    r.pass = j.at("pass").get<bool>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.mc_samples = j.value("mc_samples", std::size_t{0});
    r.params = j.value("params", json::object());
    r.note = j.value("note", std::string());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("CheckReport: ") + e.what());
  }
  return r;
}

void write_reports_csv(std::ostream& os, const std::vector<CheckReport>& reports, const json& config) {
  os << "# affine-reports-csv v" << kReportCsvVersion << "\n";
  os << "# config: " << config.dump() << "\n";
  const auto& cols = report_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : reports) {
    os << csv_field(r.check_id) << ',' << r.n << ',' << r.m << ',' << format_double(r.p) << ','
       << format_double(r.lambda) << ',' << csv_field(r.q_kind) << ',' << format_double(r.lhs.value) << ','
       << format_double(r.lhs.std_error) << ',' << format_double(r.rhs.value) << ','
       << format_double(r.rhs.std_error) << ',' << format_double(r.ratio) << ',' << (r.pass ? "true" : "false")
       << ',' << r.seed << ',' << r.mc_samples << "\n";
  }
}

void write_reports_json(std::ostream& os, const std::vector<CheckReport>& reports, const json& config) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  const json doc = {{"format", "affine-reports"}, {"version", kReportCsvVersion}, {"config", config}, {"reports", arr}};
  os << doc.dump(2) << "\n";
}

std::vector<CheckReport> read_reports(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string first;
  std::getline(in, first);
  std::vector<CheckReport> out;
  if (first.rfind("# affine-reports-csv", 0) == 0) {
    const std::string version = first.substr(first.rfind(" v") + 2);
    if (version != std::to_string(kReportCsvVersion)) throw SchemaError(path + ": unsupported CSV version " + version);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto fields = split_csv(line);
      if (!header) {
        if (fields != report_csv_columns()) throw SchemaError(path + ": unexpected CSV columns");
        header = true;
        continue;
      }
      if (fields.size() != report_csv_columns().size()) throw SchemaError(path + ": malformed row: " + line);
      CheckReport r;
      try {
        r.check_id = fields[0];
        r.n = std::stoi(fields[1]);
        r.m = std::stoi(fields[2]);
        r.p = parse_double(fields[3]);
        r.lambda = parse_double(fields[4]);
        r.q_kind = fields[5];
        r.lhs.value = parse_double(fields[6]);
        r.lhs.std_error = parse_double(fields[7]);
        r.rhs.value = parse_double(fields[8]);
        r.rhs.std_error = parse_double(fields[9]);
        r.ratio = parse_double(fields[10]);
        if (fields[11] != "true" && fields[11] != "false") throw SchemaError("pass must be true or false");
        r.pass = fields[11] == "true";
        r.seed = std::stoull(fields[12]);
        r.mc_samples = std::stoull(fields[13]);
      } catch (const std::logic_error& e) {
        throw SchemaError(path + ": malformed row: " + line);
      }
      out.push_back(std::move(r));
    }
    if (!header) throw SchemaError(path + ": missing CSV header");
    return out;
  }
  std::stringstream rest;
  rest << first << "\n" << in.rdbuf();
  json doc;
  try {
    doc = json::parse(rest.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": neither a report CSV nor JSON: " + e.what());
  }
  if (doc.value("format", std::string()) != "affine-reports") throw SchemaError(path + ": not an affine-reports document");
  for (const auto& r : doc.at("reports")) out.push_back(report_from_json(r));
  return out;
}

}  // namespace affine::io
