#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "affine/io.hpp"
#include "affine/operators.hpp"
#include "affine/scalar_kernels.hpp"
#include "affine/verifier.hpp"

using namespace affine;
using io::json;

namespace {

constexpr double kRaiseFactor = 4.0;
constexpr double kRaiseCap = 64.0;
constexpr std::size_t kDefaultSamples = 1'000'000;

struct Common {
  std::uint64_t seed = 1;
  std::optional<std::size_t> mc_samples;
  std::optional<double> tol;
  std::string out;
  std::string format;
  int jobs = 1;
  std::string profile;
  std::string config;
};

void add_common(CLI::App* cmd, Common& c, bool with_verify_flags) {
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--mc-samples", c.mc_samples, "Monte Carlo sample count");
  cmd->add_option("--tol", c.tol, "Target tolerance; the budget is raised when it is below 3 stderr");
  cmd->add_option("--out", c.out, "Output path (stdout when omitted)");
  cmd->add_option("--format", c.format, "Output format");
  if (with_verify_flags) {
    cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--profile", c.profile, "Budget profile: quick, desk or full (default: $AFFINE_PROFILE or desk)");
    cmd->add_option("--config", c.config, "Re-run the config embedded in a report or config file");
  }
}

io::RunConfig base_config(const std::string& command, const Common& c, const std::string& default_format) {
  io::RunConfig cfg;
  cfg.command = command;
  cfg.seed = c.seed;
  cfg.mc_samples = c.mc_samples;
  cfg.tol = c.tol;
  cfg.out = c.out;
  cfg.format = c.format.empty() ? default_format : c.format;
  cfg.jobs = c.jobs;
  cfg.profile = c.profile.empty() ? profile_from_env().name : c.profile;
  return cfg;
}

void require_format(const io::RunConfig& cfg, std::initializer_list<const char*> allowed) {
  for (const char* f : allowed)
    if (cfg.format == f) return;
  throw CLI::ValidationError("--format", "unsupported format " + cfg.format);
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

// Single writer for every artifact of a run.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

Vec parse_point(const std::string& s) {
  Vec v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(io::parse_double(item));
  if (v.empty()) throw CLI::ValidationError("--point", "expected comma separated numbers");
  return v;
}

double norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void write_record(const io::RunConfig& cfg, json record) {
  record["config"] = io::config_to_json(cfg);
  Output out(cfg.out);
  out.stream() << record.dump(2) << "\n";
}

// constants ------------------------------------------------------------------

int run_constants(io::RunConfig cfg, const std::vector<int>& ns, const std::vector<double>& ps,
                  const std::vector<std::string>& lambdas) {
  require_format(cfg, {"csv", "json"});
  cfg.extra = {{"n", ns}, {"p", ps}, {"lambda", lambdas}};
  json rows = json::array();
  for (int n : ns)
    for (double p : ps)
      for (const auto& ls : lambdas) {
        const double lambda = io::parse_double(ls);
        if (!(lambda > lambda_threshold(n, p))) {
          warn("skipping n=" + std::to_string(n) + " p=" + io::format_double(p) + " lambda=" + ls +
               ": lambda must exceed n/(n+p)");
          continue;
        }
        const double np = n / p;
        double beta = std::nan("");
        if (lambda < 1.0) beta = beta_fn(np, 1.0 / (1.0 - lambda) - np);
        else if (lambda > 1.0 && !is_lambda_infinite(lambda)) beta = beta_fn(np, lambda / (lambda - 1.0));
        const double c = is_lambda_infinite(lambda) ? std::nan("") : c_norm(n, p, lambda);
        rows.push_back({{"n", n},
                        {"p", p},
                        {"lambda", io::format_double(lambda)},
                        {"omega_n", omega(n)},
                        {"c_norm", io::format_double(c)},
                        {"D_np", d_base(n, p)},
                        {"D_np_lambda", io::format_double(d_sharp(n, p, lambda))},
                        {"beta", io::format_double(beta)}});
      }
  Output out(cfg.out);
  auto& os = out.stream();
  if (cfg.format == "json") {
    os << json{{"config", io::config_to_json(cfg)}, {"constants", rows}}.dump(2) << "\n";
    return 0;
  }
  os << "# config: " << io::config_to_json(cfg).dump() << "\n";
  os << "n,p,lambda,omega_n,c_norm,D_np,D_np_lambda,beta\n";
  for (const auto& r : rows)
    os << r["n"].get<int>() << ',' << io::format_double(r["p"]) << ',' << r["lambda"].get<std::string>() << ','
       << io::format_double(r["omega_n"]) << ',' << r["c_norm"].get<std::string>() << ','
       << io::format_double(r["D_np"]) << ',' << r["D_np_lambda"].get<std::string>() << ','
       << r["beta"].get<std::string>() << "\n";
  return 0;
}

// eval / volume ----------------------------------------------------------------

struct PpbArgs {
  bool ppb = false;
  int n = 0;
  int m = 0;
  double p = 2.0;
  std::string q;
  std::string k;
  std::string method;
};

void add_ppb(CLI::App* cmd, PpbArgs& a) {
  cmd->add_flag("--ppb", a.ppb, "Use the polar projection body of K (default: the unit ball)");
  cmd->add_option("--n", a.n, "Dimension of K");
  cmd->add_option("--m", a.m, "Dimension of Q (checked against the Q file)");
  cmd->add_option("--p", a.p, "Moment order p >= 1");
  cmd->add_option("--Q", a.q, "BodySpec JSON for Q");
  cmd->add_option("--K", a.k, "BodySpec JSON for K");
  cmd->add_option("--method", a.method, "exact or mc (default: exact up to dimension 3)");
}

struct PpbInputs {
  BodySpec q;
  std::optional<BodySpec> k;
  int n;
};

PpbInputs load_ppb(const PpbArgs& a, io::RunConfig& cfg) {
  if (a.q.empty()) throw CLI::ValidationError("--Q", "required with --ppb");
  if (!(a.p >= 1.0)) throw CLI::ValidationError("--p", "must be at least 1");
  BodySpec q = io::body_from_json(io::read_json_file(a.q));
  if (a.m && a.m != q.dim()) throw CLI::ValidationError("--m", "does not match the dimension of Q");
  std::optional<BodySpec> k;
  int n = a.n;
  if (!a.k.empty()) {
    k = io::body_from_json(io::read_json_file(a.k));
    if (n && n != k->dim()) throw CLI::ValidationError("--n", "does not match the dimension of K");
    n = k->dim();
  }
  if (n < 1) throw CLI::ValidationError("--n", "required");
  cfg.params_path = a.k.empty() ? a.q : a.q + "," + a.k;
  cfg.extra["n"] = n;
  cfg.extra["m"] = q.dim();
  cfg.extra["p"] = a.p;
  cfg.extra["Q"] = io::body_to_json(q);
  if (k) cfg.extra["K"] = io::body_to_json(*k);
  return {q, k, n};
}

Method pick_method(const PpbArgs& a, int flat_dim) {
  if (!a.method.empty()) return parse_method(a.method);
  return flat_dim <= 3 ? Method::exact : Method::mc;
}

int run_eval(io::RunConfig cfg, const PpbArgs& a, const std::string& body_path, const std::string& spec_path,
             const std::string& point_s) {
  const Vec x = parse_point(point_s);
  cfg.extra["point"] = x;
  json record;
  const int given = int(!body_path.empty()) + int(!spec_path.empty()) + int(a.ppb);
  if (given != 1) throw CLI::ValidationError("eval", "give exactly one of --body, --spec, --ppb");
  if (!body_path.empty()) {
    cfg.params_path = body_path;
    const BodySpec k = io::body_from_json(io::read_json_file(body_path));
    if (static_cast<int>(x.size()) != k.dim()) throw CLI::ValidationError("--point", "dimension mismatch");
    record["body"] = io::body_to_json(k);
    record["support"] = io::format_double(k.support(x));
    record["gauge"] = io::format_double(k.gauge(x));
    const double r = norm(x);
    if (r > 0.0) {
      Vec u = x;
      for (double& v : u) v /= r;
      record["radial"] = io::format_double(k.radial(u));
    }
  } else if (!spec_path.empty()) {
    cfg.params_path = spec_path;
    const json sj = io::read_json_file(spec_path);
    const GaussianSpec g = io::spec_from_json(sj);
    if (static_cast<int>(x.size()) != g.dim()) throw CLI::ValidationError("--point", "dimension mismatch");
    record["spec"] = sj;
    record["contour"] = io::format_double(g.contour(x));
    record["density"] = io::format_double(g.density(x));
    record["log_density"] = io::format_double(g.log_density(x));
  } else {
    const auto in = load_ppb(a, cfg);
    const PolarProjectionBody body(in.k.value_or(BodySpec::ball(in.n)), in.q, a.p);
    if (static_cast<int>(x.size()) != body.flat_dim())
      throw CLI::ValidationError("--point", "expected n*m entries, column stacked");
    record["gauge"] = io::estimate_to_json(body.gauge_estimate(x));
  }
  write_record(cfg, record);
  return 0;
}

int run_volume(io::RunConfig cfg, const PpbArgs& a, const std::string& body_path) {
  if (!body_path.empty() == a.ppb) throw CLI::ValidationError("volume", "give exactly one of --body, --ppb");
  json record;
  if (!body_path.empty()) {
    cfg.params_path = body_path;
    const BodySpec k = io::body_from_json(io::read_json_file(body_path));
    record["body"] = io::body_to_json(k);
    record["volume"] = io::estimate_to_json(Estimate::exact(k.volume()));
    write_record(cfg, record);
    return 0;
  }
  const auto in = load_ppb(a, cfg);
  const int d = in.n * in.q.dim();
  const Method method = pick_method(a, d);
  cfg.extra["method"] = to_string(method);
  Budget budget;
  budget.seed = cfg.seed;
  budget.samples = cfg.mc_samples.value_or(kDefaultSamples);
  auto compute = [&](const Budget& b) {
    if (!in.k) return ppb_ball_volume(in.n, in.q, a.p, method, b);
    const PolarProjectionBody body(*in.k, in.q, a.p);
    return ppb_volume(body, method, b);
  };
  Estimate vol = compute(budget);
  const std::size_t base = budget.samples;
  while (cfg.tol && method == Method::mc && 3.0 * vol.std_error > *cfg.tol * std::abs(vol.value)) {
    if (budget.samples * kRaiseFactor > base * kRaiseCap) {
      warn("tolerance " + io::format_double(*cfg.tol) + " not reached at the budget cap of " +
           std::to_string(budget.samples) + " samples");
      break;
    }
    budget.samples = static_cast<std::size_t>(budget.samples * kRaiseFactor);
    warn("3 stderr exceeds the tolerance; raising the budget to " + std::to_string(budget.samples) + " samples");
    vol = compute(budget);
  }
  cfg.extra["samples_used"] = budget.samples;
  record["volume"] = io::estimate_to_json(vol);
  write_record(cfg, record);
  return 0;
}

// sample -----------------------------------------------------------------------

int run_sample(io::RunConfig cfg, const std::string& spec_path, std::size_t count) {
  if (cfg.format != "csv" && cfg.format != "binary")
    throw CLI::ValidationError("--format", "sample writes csv or binary");
  if (spec_path.empty()) throw CLI::ValidationError("--spec", "required");
  if (cfg.format == "binary" && cfg.out.empty()) throw CLI::ValidationError("--out", "required for binary output");
  cfg.params_path = spec_path;
  const json sj = io::read_json_file(spec_path);
  const GaussianSpec g = io::spec_from_json(sj);
  cfg.extra["count"] = count;
  const SampleCloud cloud = sample(g, count, cfg.seed);
  if (cfg.format == "binary") {
    std::ofstream os(cfg.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + cfg.out);
    os.write(reinterpret_cast<const char*>(cloud.data.data()),
             static_cast<std::streamsize>(cloud.data.size() * sizeof(double)));
  } else {
    Output out(cfg.out);
    auto& os = out.stream();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const auto x = cloud.point(i);
      for (std::size_t j = 0; j < x.size(); ++j) os << (j ? "," : "") << io::format_double(x[j]);
      os << "\n";
    }
  }
  if (!cfg.out.empty()) {
    const json sidecar = {{"spec", sj},
                          {"seed", cfg.seed},
                          {"count", cloud.size()},
                          {"n", cloud.shape.n},
                          {"m", cloud.shape.m},
                          {"layout", "one row per sample, column stacked"},
                          {"dtype", cfg.format == "binary" ? "float64 native endian" : "decimal text"},
                          {"provenance", cloud.provenance},
                          {"config", io::config_to_json(cfg)}};
    std::ofstream os(cfg.out + ".json");
    os << sidecar.dump(2) << "\n";
  }
  return 0;
}

// verify / report ----------------------------------------------------------------

Profile make_profile(const io::RunConfig& cfg, double factor) {
  Profile prof = Profile::named(cfg.profile);
  prof.scale *= factor;
  if (cfg.mc_samples) prof.mc_samples = static_cast<std::size_t>(*cfg.mc_samples * factor);
  if (cfg.tol) prof.tol_eq = *cfg.tol;
  return prof;
}

std::vector<CheckJob> build_jobs(const io::RunConfig& cfg, double factor) {
  std::vector<CheckJob> jobs;
  for (const auto& t : cfg.targets) {
    auto more = make_jobs(t, make_profile(cfg, factor), cfg.seed);
    jobs.insert(jobs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  std::stable_sort(jobs.begin(), jobs.end(), [](const CheckJob& a, const CheckJob& b) { return a.check_id < b.check_id; });
  return jobs;
}

bool uses_mc(const CheckReport& r) { return r.ratio_stderr > 0.0; }

void write_reports(const io::RunConfig& cfg, const std::vector<CheckReport>& reports) {
  Output out(cfg.out);
  if (cfg.format == "json") io::write_reports_json(out.stream(), reports, io::config_to_json(cfg));
  else io::write_reports_csv(out.stream(), reports, io::config_to_json(cfg));
}

int run_verify(io::RunConfig cfg) {
  require_format(cfg, {"csv", "json"});
  for (auto& t : cfg.targets) t = t == "all" ? t : canonical_check_id(t);
  std::vector<CheckJob> jobs = build_jobs(cfg, 1.0);
  std::vector<CheckReport> reports = run_jobs(jobs, cfg.jobs);

  if (cfg.tol) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      double factor = 1.0;
      while (reports[i].mode == CheckMode::equality && uses_mc(reports[i]) &&
             3.0 * reports[i].ratio_stderr > *cfg.tol) {
        if (factor * kRaiseFactor > kRaiseCap) {
          warn(reports[i].check_id + " [" + reports[i].label + "]: tolerance not reached at the budget cap");
          break;
        }
        factor *= kRaiseFactor;
        warn(reports[i].check_id + " [" + reports[i].label + "]: 3 stderr " +
             io::format_double(3.0 * reports[i].ratio_stderr) + " exceeds the tolerance; budget x" +
             io::format_double(factor));
        reports[i] = run_jobs({build_jobs(cfg, factor)[i]}, 1).front();
        reports[i].params["budget_factor"] = factor;
      }
    }
  }

  write_reports(cfg, reports);
  std::size_t failed = 0;
  for (const auto& r : reports)
    if (!r.pass) {
      ++failed;
      std::cerr << "FAIL " << r.check_id << " [" << r.label << "] ratio=" << io::format_double(r.ratio)
                << (r.note.empty() ? "" : " (" + r.note + ")") << "\n";
    }
  std::cerr << reports.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? 0 : 1;
}

int run_report(io::RunConfig cfg, const std::vector<std::string>& inputs) {
  require_format(cfg, {"csv", "json"});
  std::vector<CheckReport> all;
  for (const auto& path : inputs) {
    auto rs = io::read_reports(path);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  cfg.targets = inputs;
  std::stable_sort(all.begin(), all.end(), [](const CheckReport& a, const CheckReport& b) { return a.check_id < b.check_id; });

  struct Row {
    std::size_t total = 0, passed = 0;
    double min_ratio = kInf, max_ratio = -kInf;
  };
  std::map<std::string, Row> table;
  for (const auto& r : all) {
    Row& row = table[r.check_id];
    ++row.total;
    row.passed += r.pass;
    row.min_ratio = std::min(row.min_ratio, r.ratio);
    row.max_ratio = std::max(row.max_ratio, r.ratio);
  }
  if (!cfg.out.empty()) write_reports(cfg, all);
  std::printf("%-28s %8s %8s %8s %14s %14s\n", "check_id", "reports", "passed", "failed", "min_ratio", "max_ratio");
  std::size_t failed = 0;
  for (const auto& [id, row] : table) {
    failed += row.total - row.passed;
    std::printf("%-28s %8zu %8zu %8zu %14.8g %14.8g\n", id.c_str(), row.total, row.passed, row.total - row.passed,
                row.min_ratio, row.max_ratio);
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine moment-entropy toolkit: constants, sampling, volumes and verification"};
  app.require_subcommand(1);

  Common c_const, c_eval, c_sample, c_volume, c_verify, c_report;

  auto* constants = app.add_subcommand("constants", "Tabulate omega_n, c_{p,lambda}, D_{n,p}, D_{n,p,lambda} and Beta");
  std::vector<int> ns{1, 2, 3};
  std::vector<double> ps{1.0, 2.0};
  std::vector<std::string> lambdas{"1"};
  constants->add_option("--n", ns, "Dimensions")->delimiter(',');
  constants->add_option("--p", ps, "Moment orders")->delimiter(',');
  constants->add_option("--lambda", lambdas, "Renyi orders (inf allowed)")->delimiter(',');
  add_common(constants, c_const, false);

  auto* eval = app.add_subcommand("eval", "Evaluate body, law or polar projection body oracles at a point");
  PpbArgs eval_ppb;
  std::string eval_body, eval_spec, eval_point;
  eval->add_option("--body", eval_body, "BodySpec JSON");
  eval->add_option("--spec", eval_spec, "GaussianSpec JSON");
  eval->add_option("--point", eval_point, "Comma separated coordinates (column stacked for matrices)")->required();
  add_ppb(eval, eval_ppb);
  add_common(eval, c_eval, false);

  auto* sample_cmd = app.add_subcommand("sample", "Draw an exact sample cloud");
  std::string sample_spec;
  std::size_t sample_count = 1000;
  sample_cmd->add_option("--spec", sample_spec, "GaussianSpec JSON")->required();
  sample_cmd->add_option("--count", sample_count, "Number of samples")->check(CLI::PositiveNumber);
  add_common(sample_cmd, c_sample, false);

  auto* volume = app.add_subcommand("volume", "Volume of a body or of a polar projection body");
  PpbArgs vol_ppb;
  std::string vol_body;
  volume->add_option("--body", vol_body, "BodySpec JSON");
  add_ppb(volume, vol_ppb);
  add_common(volume, c_volume, false);

  auto* verify = app.add_subcommand("verify", "Run checks by id, or all of them");
  std::vector<std::string> verify_targets;
  verify->add_option("targets", verify_targets, "check ids or 'all'");
  add_common(verify, c_verify, true);

  auto* report = app.add_subcommand("report", "Aggregate report files into one table");
  std::vector<std::string> report_inputs;
  report->add_option("inputs", report_inputs, "Report files (CSV or JSON)")->required();
  add_common(report, c_report, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*constants) return run_constants(base_config("constants", c_const, "csv"), ns, ps, lambdas);
    if (*eval) return run_eval(base_config("eval", c_eval, "json"), eval_ppb, eval_body, eval_spec, eval_point);
    if (*sample_cmd) return run_sample(base_config("sample", c_sample, "csv"), sample_spec, sample_count);
    if (*volume) return run_volume(base_config("volume", c_volume, "json"), vol_ppb, vol_body);
    if (*verify) {
      io::RunConfig cfg = base_config("verify", c_verify, "csv");
      if (!c_verify.config.empty()) {
        cfg = io::read_run_config(c_verify.config);
        if (cfg.command != "verify") throw io::SchemaError(c_verify.config + ": not a verify config");
        cfg.out = c_verify.out;
        if (!c_verify.format.empty()) cfg.format = c_verify.format;
      } else {
        if (verify_targets.empty()) throw CLI::ValidationError("verify", "give check ids or 'all'");
        cfg.targets = verify_targets;
      }
      return run_verify(cfg);
    }
    if (*report) return run_report(base_config("report", c_report, "csv"), report_inputs);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
