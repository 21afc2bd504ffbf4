// Runs the acceptance suite by criterion and prints one PASS/FAIL line per
// criterion. Exit status is 0 iff every criterion passes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "affine/io.hpp"
#include "affine/verifier.hpp"

using namespace affine;

namespace {

struct Criterion {
  int id;
  const char* title;
  double limit_s;  // <= 0: no limit of its own
};

const Criterion kCriteria[] = {
    {1, "constant layer c_norm against radial quadrature, 1e-8", 1.0},
    {2, "polar projection ball radius, m=1, 1e-6", 5.0},
    {3, "Carlson-Levin: three branches tight to 1e-7, 100 random densities each", 30.0},
    {4, "ball body entropy bound: quadrature 1e-6, MC within 2%", 60.0},
    {5, "sphere theorem n=2, m in {1,2}, p=2: inequality and equality family", 300.0},
    {6, "main theorem n=2, m in {1,2}, p=2, lambda=1: equality and m=1 constant", 300.0},
    {7, "ball maximizes the polar projection volume functional", 0.0},
    {8, "centroid support of the polar projection ball within 1%", 0.0},
    {9, "limits: D_{n,p}^{n/p} -> n and N_inf of uniform clouds", 0.0},
    {10, "property suites with zero violations; verify all under 30 minutes", 1800.0},
};

struct Outcome {
  std::vector<CheckReport> reports;
  double seconds = 0.0;
};

Outcome run(const std::vector<CheckJob>& jobs, int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.reports = run_jobs(jobs, workers);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

std::string summary(const std::vector<CheckReport>& reports) {
  std::map<std::string, std::pair<int, int>> by_id;
  for (const auto& r : reports) {
    auto& [total, failed] = by_id[r.check_id];
    ++total;
    failed += !r.pass;
  }
  std::string s;
  for (const auto& [id, c] : by_id) {
    if (!s.empty()) s += ", ";
    s += id.substr(6) + " " + std::to_string(c.first - c.second) + "/" + std::to_string(c.first);
  }
  return s;
}

void print_failures(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass)
      std::printf("    failed: %s [%s] %s ratio=%.9g stderr=%.3g tol=%.3g %s\n", r.check_id.c_str(), r.label.c_str(),
                  to_string(r.mode).c_str(), r.ratio, r.ratio_stderr, r.tol, r.note.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const Profile profile = profile_from_env();
  const std::uint64_t seed = 1;
  const int workers = std::max(1u, std::thread::hardware_concurrency());
  const std::string out_path = argc > 1 ? argv[1] : "acceptance_reports.csv";
  std::printf("acceptance: profile=%s seed=%llu workers=%d\n", profile.name.c_str(),
              static_cast<unsigned long long>(seed), workers);
  std::fflush(stdout);

  std::map<int, std::vector<CheckJob>> by_criterion;
  for (auto& job : make_jobs("all", profile, seed)) by_criterion[job.criterion].push_back(std::move(job));

  std::vector<CheckReport> all;
  double total_s = 0.0;
  bool ok = true;
  auto report_line = [&](const Criterion& c, const Outcome& o, double limit_s, double measured_s) {
    const bool reports_ok = std::all_of(o.reports.begin(), o.reports.end(), [](const CheckReport& r) { return r.pass; });
    const bool time_ok = limit_s <= 0.0 || measured_s < limit_s;
    const bool pass = reports_ok && time_ok && !o.reports.empty();
    ok = ok && pass;
    std::printf("%s criterion %d: %s | %s | %.1fs", pass ? "PASS" : "FAIL", c.id, c.title, summary(o.reports).c_str(),
                measured_s);
    if (limit_s > 0.0) std::printf(" (limit %.0fs%s)", limit_s, time_ok ? "" : ", exceeded");
    std::printf("\n");
    print_failures(o.reports);
    std::fflush(stdout);
  };

  Outcome crit10;
  for (const auto& c : kCriteria) {
    Outcome o = run(by_criterion[c.id], workers);
    total_s += o.seconds;
    all.insert(all.end(), o.reports.begin(), o.reports.end());
    if (c.id == 10) {
      crit10 = std::move(o);
      continue;
    }
    report_line(c, o, c.limit_s, o.seconds);
  }

  Outcome extra = run(by_criterion[0], workers);
  total_s += extra.seconds;
  all.insert(all.end(), extra.reports.begin(), extra.reports.end());

  // The runtime limit of criterion 10 covers the whole suite.
  report_line(kCriteria[9], crit10, kCriteria[9].limit_s, total_s);
  const bool extra_ok = std::all_of(extra.reports.begin(), extra.reports.end(), [](const CheckReport& r) { return r.pass; });
  std::printf("INFO supplementary checks: %s | %s | %.1fs\n", extra_ok ? "all pass" : "failures", summary(extra.reports).c_str(),
              extra.seconds);
  print_failures(extra.reports);
  ok = ok && extra_ok;

  std::stable_sort(all.begin(), all.end(), [](const CheckReport& a, const CheckReport& b) { return a.check_id < b.check_id; });
  io::RunConfig cfg;
  cfg.command = "verify";
  cfg.targets = {"all"};
  cfg.seed = seed;
  cfg.profile = profile.name;
  cfg.jobs = workers;
  cfg.out = out_path;
  std::ofstream os(out_path);
  io::write_reports_csv(os, all, io::config_to_json(cfg));
  std::printf("acceptance: %zu reports written to %s, total %.1fs, %s\n", all.size(), out_path.c_str(), total_s,
              ok ? "ALL PASS" : "FAILURES");
  return ok ? 0 : 1;
}
