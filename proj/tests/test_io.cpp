#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "affine/io.hpp"
#include "affine/scalar_kernels.hpp"
#include "doctest.h"

using namespace affine;
using io::json;

namespace {

std::string temp_path(const std::string& name) { return "test_io_" + name; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

bool same_oracles(const BodySpec& a, const BodySpec& b) {
  const std::vector<Vec> dirs = a.dim() == 1 ? std::vector<Vec>{{1.0}, {-1.0}}
                                             : std::vector<Vec>{{1.0, 0.0}, {0.6, -0.8}, {-0.28, 0.96}};
  for (const auto& u : dirs)
    if (a.gauge(u) != b.gauge(u)) return false;
  return a.key() == b.key();
}

CheckReport sample_report(int i) {
  CheckReport r;
  r.check_id = i % 2 ? "check_jensen_ball" : "check_c_norm";
  r.label = "case, \"quoted\" #" + std::to_string(i);
  r.mode = CheckMode::equality;
  r.n = 2;
  r.m = 1 + i % 2;
  r.p = 2.5;
  r.lambda = i == 0 ? kInf : 0.9;
  r.q_kind = "interval";
  r.lhs = Estimate{1.0 / 3.0, 1e-3, 0.0, 1000, true, "mc"};
  r.rhs = Estimate::exact(std::sqrt(2.0));
  settle(r);
  r.seed = 18446744073709551557ull;
  r.params = {{"A", 1}};
  r.note = "n";
  return r;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::numeric_limits<double>::denorm_min(), kInf, -kInf}) {
    CAPTURE(x);
    CHECK(io::parse_double(io::format_double(x)) == x);
  }
  CHECK(std::isnan(io::parse_double(io::format_double(std::nan("")))));
  CHECK(io::format_double(kInf) == "inf");
  CHECK_THROWS(io::parse_double("1.5x"));
}

TEST_CASE("matrices are row-major arrays of rows") {
  const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
  const json j = io::matrix_to_json(a);
  CHECK(j == json::parse("[[1.0,2.0],[3.0,4.0]]"));
  const Matrix b = io::matrix_from_json(j);
  CHECK(b(0, 1) == 2.0);
  CHECK(b(1, 0) == 3.0);
  CHECK_THROWS_AS(io::matrix_from_json(json::parse("[[1,2],[3]]")), io::SchemaError);
}

TEST_CASE("every body kind round-trips") {
  std::vector<Facet> square;
  for (Vec n : {Vec{1, 0}, Vec{0, 1}, Vec{-1, 0}, Vec{0, -1}}) square.push_back(Facet{n, 2.0, 1.0});
  const std::vector<BodySpec> bodies = {
      BodySpec::ball(2, 1.5),
      BodySpec::ellipsoid(Matrix{{2.0, 0.5}, {0.0, 1.0}}),
      BodySpec::interval(0.5, 2.0),
      BodySpec::polytope_vertices({{1, 0}, {0, 1}, {-1, -1}}),
      BodySpec::polytope_facets(2, square),
      BodySpec::lq_ball(2, 3.0),
      BodySpec::lq_ball(2, kInf),
      BodySpec::cube(2, 0.5),
      BodySpec::linear_image(Matrix{{1.0, 1.0}, {0.0, 2.0}}, BodySpec::lq_ball(2, 1.0)),
  };
  for (const auto& k : bodies) {
    CAPTURE(k.describe());
    const json j = io::body_to_json(k);
    const BodySpec back = io::body_from_json(json::parse(j.dump()));
    CHECK(same_oracles(k, back));
    CHECK(io::body_to_json(back) == j);
  }
  CHECK(io::body_to_json(BodySpec::ball(3))["kind"] == "euclidean_ball");
}

TEST_CASE("body schema violations are reported") {
  auto bad = [](const char* text) { return io::body_from_json(json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"kind":"euclidean_ball"})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"kind":"polygon"})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"kind":"interval","params":{"alpha1":1,"alpha2":1}})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":1,"kind":"interval","params":{"alpha1":1}})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":1,"kind":"interval","params":{"alpha1":0,"alpha2":0}})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"kind":"ellipsoid","params":{"A":[[1,0],[2,0]]}})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"kind":"polytope_facets","params":{"facets":[{"normal":[2,0],"area":1,"offset":1}]}})"),
                  io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":3,"kind":"ellipsoid","params":{"A":[[1,0],[0,1]]}})"), io::SchemaError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"kind":"lq_ball","params":{"q":0.5}})"), io::SchemaError);
}

TEST_CASE("Gaussian specs from JSON") {
  SUBCASE("standard vector law") {
    const auto g = io::spec_from_json(json::parse(R"({"n":2,"p":2,"lambda":1})"));
    const auto z = GaussianSpec::standard(2, 2.0, 1.0);
    const Vec x{0.3, -1.2};
    CHECK(g.density(x) == z.density(x));
    CHECK(g.n() == 2);
    CHECK(g.m() == 1);
  }
  SUBCASE("uniform law with lambda inf and a linear image") {
    const auto g = io::spec_from_json(json::parse(
        R"({"n":2,"law":"uniform","p":2,"contour":{"body":{"dim":2,"kind":"cube"}},"A":[[2,0],[0,1]]})"));
    CHECK(g.kind() == LawKind::uniform);
    CHECK(g.contour(Vec{1.9, 0.0}) == doctest::Approx(0.95));
    CHECK(g.density(Vec{1.9, 0.0}) == doctest::Approx(1.0 / 8.0));
  }
  SUBCASE("lambda above one") {
    const auto g = io::spec_from_json(json::parse(R"({"n":2,"p":2,"lambda":2.5})"));
    CHECK(g.lambda() == 2.5);
  }
  SUBCASE("matrix law") {
    const auto g = io::spec_from_json(json::parse(
        R"({"n":2,"m":1,"p":2,"lambda":1,"contour":{"polar_projection":{"Q":{"dim":1,"kind":"interval","params":{"alpha1":1,"alpha2":1}}}}})"));
    CHECK(g.q().has_value());
    CHECK(g.m() == 1);
  }
  SUBCASE("errors") {
    auto bad = [](const char* text) { return io::spec_from_json(json::parse(text)); };
    CHECK_THROWS_AS(bad(R"({"n":2,"m":2,"p":2,"lambda":1})"), io::SchemaError);
    CHECK_THROWS_AS(bad(R"({"n":2,"p":2})"), io::SchemaError);
    CHECK_THROWS_AS(bad(R"({"n":2,"p":2,"lambda":0.3})"), io::SchemaError);
    CHECK_THROWS_AS(bad(R"({"n":2,"p":2,"lambda":1,"law":"cauchy"})"), io::SchemaError);
    CHECK_THROWS_AS(bad(R"({"n":2,"p":2,"lambda":1,"A":[[1,0,0],[0,1,0]]})"), io::SchemaError);
  }
}

TEST_CASE("RunConfig round-trips") {
  io::RunConfig c;
  c.command = "verify";
  c.targets = {"check_c_norm", "all"};
  c.seed = 18446744073709551615ull;
  c.mc_samples = 12345;
  c.tol = 0.02;
  c.profile = "quick";
  c.jobs = 3;
  c.out = "x.csv";
  c.format = "json";
  c.extra = {{"k", "v"}};
  const auto back = io::config_from_json(json::parse(io::config_to_json(c).dump()));
  CHECK(io::config_to_json(back) == io::config_to_json(c));
  CHECK(back.seed == c.seed);
  CHECK(*back.mc_samples == 12345);
  io::RunConfig bare;
  bare.command = "constants";
  const auto b2 = io::config_from_json(io::config_to_json(bare));
  CHECK_FALSE(b2.mc_samples.has_value());
  CHECK_FALSE(b2.tol.has_value());
}

TEST_CASE("report CSV has the fixed versioned columns and round-trips") {
  const std::vector<CheckReport> reports = {sample_report(0), sample_report(1)};
  io::RunConfig cfg;
  cfg.command = "verify";
  cfg.targets = {"all"};
  const std::string path = temp_path("reports.csv");
  {
    std::ofstream os(path);
    io::write_reports_csv(os, reports, io::config_to_json(cfg));
  }
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "# affine-reports-csv v1");
  CHECK(l2.rfind("# config: ", 0) == 0);
  CHECK(l3 == "check_id,n,m,p,lambda,Q_kind,lhs,lhs_stderr,rhs,rhs_stderr,ratio,pass,seed,mc_samples");

  const auto back = io::read_reports(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].check_id == reports[i].check_id);
    CHECK(back[i].lambda == reports[i].lambda);
    CHECK(back[i].lhs.value == reports[i].lhs.value);
    CHECK(back[i].lhs.std_error == reports[i].lhs.std_error);
    CHECK(back[i].rhs.value == reports[i].rhs.value);
    CHECK(back[i].ratio == reports[i].ratio);
    CHECK(back[i].pass == reports[i].pass);
    CHECK(back[i].seed == reports[i].seed);
    CHECK(back[i].mc_samples == reports[i].mc_samples);
  }
  const auto c = io::read_run_config(path);
  CHECK(c.command == "verify");
  CHECK(c.targets == std::vector<std::string>{"all"});
  std::remove(path.c_str());
}

TEST_CASE("report JSON round-trips every field") {
  const std::vector<CheckReport> reports = {sample_report(0), sample_report(1)};
  io::RunConfig cfg;
  cfg.command = "verify";
  cfg.seed = 9;
  const std::string path = temp_path("reports.json");
  {
    std::ofstream os(path);
    io::write_reports_json(os, reports, io::config_to_json(cfg));
  }
  const auto back = io::read_reports(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(io::report_to_json(back[i]) == io::report_to_json(reports[i]));
  CHECK(io::read_run_config(path).seed == 9);
  std::remove(path.c_str());
}

TEST_CASE("malformed report files are rejected") {
  const std::string path = temp_path("bad.csv");
  write_file(path, "# affine-reports-csv v2\ncheck_id\n");
  CHECK_THROWS_AS(io::read_reports(path), io::SchemaError);
  write_file(path, "# affine-reports-csv v1\ncheck_id,n\n");
  CHECK_THROWS_AS(io::read_reports(path), io::SchemaError);
  write_file(path, "{\"format\":\"other\"}");
  CHECK_THROWS_AS(io::read_reports(path), io::SchemaError);
  write_file(path, "not json");
  CHECK_THROWS_AS(io::read_reports(path), io::SchemaError);
  std::remove(path.c_str());
  CHECK_THROWS(io::read_reports(temp_path("missing.csv")));
}
