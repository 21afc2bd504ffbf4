#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <cstdlib>

#include "affine/io.hpp"
#include "affine/operators.hpp"
#include "affine/scalar_kernels.hpp"
#include "affine/verifier.hpp"
#include "doctest.h"

using namespace affine;

namespace {

const BodySpec kInterval = BodySpec::interval(1.0, 1.0);

CheckOptions mode(CheckMode m, double tol_eq = -1.0) {
  CheckOptions o;
  o.mode = m;
  o.tol_eq = tol_eq;
  return o;
}

CheckReport manual(CheckMode m, double lhs, double lhs_se, double rhs, double tol = kTolFloor) {
  CheckReport r;
  r.mode = m;
  r.tol = tol;
  r.lhs = Estimate{lhs, lhs_se, 0.0, lhs_se > 0 ? 100u : 0u, true, lhs_se > 0 ? "mc" : "exact"};
  r.rhs = Estimate::exact(rhs);
  settle(r);
  return r;
}

// int_0^inf s^{q-1} exp(-a s^2) ds.
double gauss_moment(double q, double a) { return std::tgamma(q / 2) / (2 * std::pow(a, q / 2)); }

std::string dump(const CheckReport& r) { return io::report_to_json(r).dump(); }

}  // namespace

TEST_CASE("settle: inequality margin is 3 stderr plus the floor") {
  CHECK(manual(CheckMode::inequality, 1.0, 0.0, 1.0).pass);
  CHECK(manual(CheckMode::inequality, 1.0 - 5e-10, 0.0, 1.0).pass);
  CHECK_FALSE(manual(CheckMode::inequality, 1.0 - 1e-8, 0.0, 1.0).pass);
  CHECK(manual(CheckMode::inequality, 0.97, 0.01, 1.0).pass);
  CHECK_FALSE(manual(CheckMode::inequality, 0.96, 0.01, 1.0).pass);
  const auto r = manual(CheckMode::inequality, 2.0, 0.0, 4.0);
  CHECK(r.ratio == doctest::Approx(0.5));
  CHECK_FALSE(r.pass);
}

TEST_CASE("settle: equality uses max(3 stderr, tol)") {
  CHECK(manual(CheckMode::equality, 1.02, 0.0, 1.0, 0.03).pass);
  CHECK_FALSE(manual(CheckMode::equality, 1.04, 0.0, 1.0, 0.03).pass);
  CHECK(manual(CheckMode::equality, 1.04, 0.02, 1.0, 0.03).pass);
  CHECK(manual(CheckMode::equality, 0.98, 0.0, 1.0, 0.03).pass);
  CHECK_FALSE(manual(CheckMode::equality, 1.0 + 2e-6, 0.0, 1.0, 1e-6).pass);
}

TEST_CASE("settle: sensitivity needs a move beyond 3 stderr") {
  CHECK(manual(CheckMode::sensitivity, 1.1, 0.01, 1.0).pass);
  CHECK_FALSE(manual(CheckMode::sensitivity, 1.02, 0.01, 1.0).pass);
  CHECK_FALSE(manual(CheckMode::sensitivity, 1.0, 0.0, 1.0).pass);
}

TEST_CASE("settle: invalid estimates never pass") {
  CheckReport r;
  r.mode = CheckMode::inequality;
  r.lhs = Estimate::exact(2.0);
  r.rhs = Estimate::exact(1.0);
  r.rhs.valid = false;
  settle(r);
  CHECK_FALSE(r.pass);
  CHECK(r.note == "invalid estimate");
}

TEST_CASE("check modes round-trip through strings") {
  for (auto m : {CheckMode::inequality, CheckMode::equality, CheckMode::sensitivity})
    CHECK(parse_check_mode(to_string(m)) == m);
  CHECK(parse_check_mode("equality-tightness") == CheckMode::equality);
  CHECK_THROWS_AS(parse_check_mode("tight"), std::invalid_argument);
}

TEST_CASE("Carlson-Levin extremizers are tight") {
  const auto eq = mode(CheckMode::equality, 1e-7);
  SUBCASE("lambda = 1, n = 2, p = 2, a = b = 1") {
    const auto r = check_carlson_levin(2, 2.0, 1.0, carlson_levin_extremizer(2.0, 1.0, 1.0, 1.0),
                                       CarlsonLevinBranch::log, eq);
    CHECK(r.pass);
    CHECK(std::abs(r.ratio - 1.0) < 1e-7);
  }
  SUBCASE("lambda = 2, p = 2, n = 1, a = 1, b = 2") {
    const auto r = check_carlson_levin(1, 2.0, 2.0, carlson_levin_extremizer(2.0, 2.0, 1.0, 2.0),
                                       CarlsonLevinBranch::above_one, eq);
    CHECK(r.pass);
    CHECK(std::abs(r.ratio - 1.0) < 1e-7);
  }
  SUBCASE("lambda = 0.8, n = 3, p = 1") {
    const auto r = check_carlson_levin(3, 1.0, 0.8, carlson_levin_extremizer(1.0, 0.8, 2.0, 0.7),
                                       CarlsonLevinBranch::below_one, eq);
    CHECK(r.pass);
    CHECK(std::abs(r.ratio - 1.0) < 1e-7);
  }
}

TEST_CASE("Carlson-Levin on a two-Gaussian mixture matches closed-form moments") {
  const int n = 2;
  const double p = 2.0, lambda = 0.8;
  const double w1 = 0.7, a1 = 1.0, w2 = 0.3, a2 = 0.25;
  RadialProfile f{[=](double s) { return w1 * std::exp(-a1 * s * s) + w2 * std::exp(-a2 * s * s); }, kInf, "mixture"};
  const auto r = check_carlson_levin(n, p, lambda, f, CarlsonLevinBranch::below_one, mode(CheckMode::inequality));
  CHECK(r.pass);
  CHECK(r.ratio > 1.0);

  const double area = 2 * kPi;
  const double i0 = area * (w1 * gauss_moment(n, a1) + w2 * gauss_moment(n, a2));
  const double ip = area * (w1 * gauss_moment(n + p, a1) + w2 * gauss_moment(n + p, a2));
  boost::math::quadrature::exp_sinh<double> es;
  const double il = area * es.integrate([&](double s) { return s * std::pow(f.phi(s), lambda); });
  const double e = n * (1 - lambda) / (p * lambda);
  const double dn = std::pow(d_sharp(n, p, lambda), n / p) / area;
  CHECK(r.lhs.value == doctest::Approx(std::pow(i0, 1 - e) * std::pow(ip, e)).epsilon(1e-9));
  CHECK(r.rhs.value == doctest::Approx(std::pow(il, 1 / lambda) * std::pow(dn, (1 - lambda) / lambda)).epsilon(1e-9));
}

TEST_CASE("Carlson-Levin reports divergent integrals and rejects a mismatched branch") {
  RadialProfile heavy{[](double s) { return std::pow(1.0 + s, -3.5); }, kInf, "heavy tail"};
  const auto r = check_carlson_levin(2, 2.0, 1.0, heavy, CarlsonLevinBranch::log, mode(CheckMode::inequality));
  CHECK_FALSE(r.pass);
  CHECK(r.note.rfind("divergent integral", 0) == 0);
  CHECK_THROWS_AS(check_carlson_levin(2, 2.0, 1.0, heavy, CarlsonLevinBranch::above_one, {}), std::invalid_argument);
}

TEST_CASE("ball body entropy bound: standard laws are tight, the square is not") {
  for (double lambda : {0.9, 1.0, 2.0}) {
    CAPTURE(lambda);
    const auto r = check_prop_ball_entropy(2.0, lambda, GaussianSpec::standard(2, 2.0, lambda), mode(CheckMode::equality));
    CHECK(r.pass);
    CHECK(std::abs(r.ratio - 1.0) < 1e-6);
  }
  const auto sq = check_prop_ball_entropy(2.0, 1.0, GaussianSpec::uniform(ContourGauge::of_body(BodySpec::cube(2)), {2, 1}),
                                          mode(CheckMode::inequality));
  CHECK(sq.pass);
  CHECK(sq.ratio > 1.0);
}

TEST_CASE("Jensen ball chain") {
  const auto z = check_jensen_ball(2.0, GaussianSpec::standard(2, 2.0, 1.0), mode(CheckMode::equality, 1e-7));
  CHECK(z.pass);
  const auto ball = check_jensen_ball(2.0, GaussianSpec::uniform(ContourGauge::euclidean_norm(2), {2, 1}),
                                      mode(CheckMode::equality, 1e-8));
  CHECK(ball.pass);
  const Matrix a{{3.0, 0.0}, {0.0, 1.0}};
  const auto strict = check_jensen_ball(2.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(a.inverse().transpose()),
                                        mode(CheckMode::inequality));
  CHECK(strict.pass);
  CHECK(strict.ratio > 1.01);
}

TEST_CASE("sensitivity guard: a degraded extremizer fails equality and passes the guard") {
  const Matrix degrade{{1.5, 0.0}, {0.0, 1.0}};
  const auto g = GaussianSpec::standard(2, 2.0, 1.0).linear_image(degrade);
  CHECK_FALSE(check_jensen_ball(2.0, g, mode(CheckMode::equality, 1e-7)).pass);
  CHECK(check_jensen_ball(2.0, g, mode(CheckMode::sensitivity)).pass);
  CHECK_FALSE(check_jensen_ball(2.0, GaussianSpec::standard(2, 2.0, 1.0), mode(CheckMode::sensitivity)).pass);
}

TEST_CASE("moment-entropy: dilates are tight, anisotropic images are strict") {
  const auto z = GaussianSpec::standard(2, 2.0, 1.0);
  const auto dil = check_moment_entropy_vec(2.0, 1.0, z.linear_image(Matrix::diagonal(Vec{3.0, 3.0})), mode(CheckMode::equality, 1e-8));
  CHECK(dil.pass);
  CHECK(std::abs(dil.ratio - 1.0) < 1e-8);
  const auto an = check_moment_entropy_vec(2.0, 1.0, z.linear_image(Matrix::diagonal(Vec{2.0, 1.0})), mode(CheckMode::inequality));
  CHECK(an.pass);
  CHECK(an.ratio > 1.0 + 1e-3);
  const auto un = check_moment_entropy_vec(2.0, 1.5, GaussianSpec::uniform(ContourGauge::euclidean_norm(2), {2, 1}),
                                           mode(CheckMode::inequality));
  CHECK(un.pass);
}

TEST_CASE("sphere theorem with f = g = 1 has the double integral 2 pi^2") {
  const SphereFn one = [](std::span<const double>) { return 1.0; };
  const auto r = check_theorem_sphere(2, 1, 2.0, kInterval, one, one, mode(CheckMode::inequality));
  CHECK(r.lhs.value == doctest::Approx(2 * kPi * kPi).epsilon(1e-8));
  CHECK(r.pass);
}

TEST_CASE("star body lemma for two balls reduces to pi^2/8") {
  const StarFunction ball{2, [](std::span<const double>) { return 1.0; }, kInf, {}};
  const auto r = check_lemma_LZBS(2, 1, 2.0, kInterval, ball, ball, mode(CheckMode::inequality));
  CHECK(r.lhs.value == doctest::Approx(kPi * kPi / 8).epsilon(1e-8));
  CHECK(r.pass);
  CHECK(r.ratio >= 1.0);
}

TEST_CASE("main theorem constant agrees with the closed form at m = 1") {
  for (double p : {1.0, 2.0, 3.5}) {
    CAPTURE(p);
    const auto r = check_theorem_main_constant(2, p, 1.0, mode(CheckMode::equality, 1e-8));
    CHECK(r.pass);
  }
}

TEST_CASE("reverse Hoelder") {
  const Grid unit = Grid::gauss_legendre(0.0, 1.0);
  const auto eq = check_reverse_holder(
      0.5, [](double x) { return 1 + x * x; }, [](double x) { return std::pow(1 + x * x, -0.5); }, unit,
      mode(CheckMode::equality, 1e-10));
  CHECK(eq.pass);
  const Fn1 one = [](double) { return 1.0; };
  const auto ones = check_reverse_holder(0.3, one, one, unit, mode(CheckMode::equality, 1e-12));
  CHECK(ones.lhs.value == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(ones.rhs.value == doctest::Approx(1.0).epsilon(1e-13));
  const auto strict = check_reverse_holder(
      0.5, [](double x) { return 1 + x; }, [](double x) { return 2 - x * x * x; }, unit, mode(CheckMode::inequality));
  CHECK(strict.pass);
  CHECK(strict.ratio > 1.0);
  CHECK_THROWS_AS(check_reverse_holder(1.5, one, one, unit, {}), std::invalid_argument);
}

TEST_CASE("dual mixed volume inequality for a ball against a random star") {
  Rng rng = make_stream(11, 0);
  const StarFunction ball{2, [](std::span<const double>) { return 1.0; }, kInf, {}};
  const auto l = random_star(2, rng);
  const auto r = check_dual_minkowski(ball, l, 2.0, mode(CheckMode::inequality));
  CHECK(r.pass);
  CHECK(check_dual_minkowski(l, l, 2.0, mode(CheckMode::equality, 1e-8)).pass);
}

TEST_CASE("min-first inequality with a point mass matches 1D quadrature") {
  SampleCloud y;
  y.shape = {1, 1};
  y.data.assign(16, 1.0);
  const auto x = GaussianSpec::standard(1, 2.0, 1.0);
  CheckOptions o = mode(CheckMode::inequality);
  o.budget.samples = 40000;
  const auto r = check_min_first_random(1, 2.0, 1.0, kInterval, x, y, o);
  // The data gauge is |x|, so the left side is E|X|^2 = 1 and the sphere integral is 2.
  const double second = pth_moment(x, 2.0).value;
  CHECK(second == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(r.lhs.value - second) < 4 * r.lhs.std_error);
  const double rhs = std::pow(renyi_entropy_power(x, 1.0).value, 2.0) * std::pow(2.0, -2.0) * d_sharp(1, 2.0, 1.0);
  CHECK(r.rhs.value == doctest::Approx(rhs).epsilon(1e-9));
  CHECK(rhs == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.pass);
}

TEST_CASE("constant layer checks") {
  CHECK(check_c_norm(2, 2.0, 0.9, mode(CheckMode::equality, 1e-8)).pass);
  CHECK(check_c_norm(3, 3.5, 2.0, mode(CheckMode::equality, 1e-8)).pass);
  const Vec theta{0.6, 0.8};
  CHECK(check_ppb_radius(2, 2.0, theta, mode(CheckMode::equality, 1e-6)).pass);
  CHECK(check_ppb_radius(3, 4.0, Vec{0.0, 0.6, 0.8}, mode(CheckMode::equality, 1e-6)).pass);
  CHECK(check_d_limit(2, 1000.0, mode(CheckMode::equality, 0.01)).pass);
}

TEST_CASE("quadrature-only checks reproduce bit-identical reports") {
  auto run = [] {
    return dump(check_prop_ball_entropy(1.0, 0.9, GaussianSpec::standard(2, 1.0, 0.9), mode(CheckMode::equality))) +
           dump(check_carlson_levin(2, 2.0, 1.0, carlson_levin_extremizer(2.0, 1.0, 1.0, 1.0), CarlsonLevinBranch::log,
                                    mode(CheckMode::equality)));
  };
  CHECK(run() == run());
}

TEST_CASE("registry: ids, canonical names and profiles") {
  const auto ids = check_ids();
  CHECK(ids.size() == 19);
  for (const auto& id : ids) CHECK(canonical_check_id(id) == id);
  CHECK(canonical_check_id("reverse_holder") == "check_reverse_holder");
  CHECK_THROWS_AS(canonical_check_id("check_nope"), std::invalid_argument);
  CHECK_THROWS_AS(Profile::named("huge"), std::invalid_argument);
  CHECK(Profile::named("quick").instances == 5);
  setenv("AFFINE_PROFILE", "full", 1);
  CHECK(profile_from_env().name == "full");
  unsetenv("AFFINE_PROFILE");
  CHECK(profile_from_env().name == "desk");
}

TEST_CASE("registry: quick jobs are deterministic in the seed and the worker count") {
  const Profile quick = Profile::named("quick");
  auto reports = [&](std::uint64_t seed, int workers) {
    std::vector<CheckJob> jobs = make_jobs("reverse_holder", quick, seed);
    const auto more = make_jobs("dual_minkowski", quick, seed);
    jobs.insert(jobs.begin(), more.begin(), more.end());
    std::string out;
    for (const auto& r : run_jobs(jobs, workers)) out += dump(r) + "\n";
    return out;
  };
  const std::string a = reports(3, 1);
  CHECK(a == reports(3, 1));
  CHECK(a == reports(3, 2));
  CHECK(a != reports(4, 1));
  // Reports come back grouped by check_id.
  CHECK(a.find("check_dual_minkowski") < a.find("check_reverse_holder"));
  for (const auto& r : run_jobs(make_jobs("reverse_holder", quick, 3), 1)) CHECK(r.pass);
}

TEST_CASE("registry: a throwing job becomes a failing report") {
  CheckJob job;
  job.check_id = "check_c_norm";
  job.label = "broken";
  job.run = []() -> CheckReport { throw std::runtime_error("boom"); };
  const auto r = run_jobs({job}, 1);
  REQUIRE(r.size() == 1);
  CHECK_FALSE(r[0].pass);
  CHECK(r[0].note == "error: boom");
  CHECK(r[0].check_id == "check_c_norm");
}
