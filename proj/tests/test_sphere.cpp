#include "affine/bodies.hpp"
#include "affine/quadrature.hpp"
#include "affine/scalar_kernels.hpp"
#include "affine/sphere.hpp"
#include "doctest.h"

using namespace affine;

namespace {

// Closed form of the integral of |u.e1|^p over S^{d-1}.
double abs_moment(int d, double p) {
  return 2.0 * std::pow(kPi, 0.5 * (d - 1)) * std::tgamma(0.5 * (p + 1)) / std::tgamma(0.5 * (d + p));
}

}  // namespace

TEST_CASE("monte carlo sphere integrals") {
  const auto one = sphere_integrate_mc(2, [](std::span<const double>) { return 1.0; }, 10000, 1);
  CHECK(std::abs(one.value - 2 * kPi) < 1e-12);
  CHECK(one.std_error == 0.0);

  const auto sq = sphere_integrate_mc(3, [](std::span<const double> u) { return u[0] * u[0]; }, 200000, 2);
  CHECK(std::abs(sq.value - 4 * kPi / 3) < 3 * sq.std_error);
  CHECK(sq.std_error > 0.0);

  const double th[2] = {std::cos(0.7), std::sin(0.7)};
  const auto proj = sphere_integrate_mc(
      2,
      [&](std::span<const double> u) {
        const double t = u[0] * th[0] + u[1] * th[1];
        return t * t;
      },
      200000, 3);
  CHECK(std::abs(proj.value - kPi) < 3 * proj.std_error);

  const auto s0 = sphere_integrate_mc(1, [](std::span<const double> u) { return u[0] > 0 ? 3.0 : 1.0; }, 40000, 4);
  CHECK(std::abs(s0.value - 4.0) < 4 * s0.std_error + 1e-12);
}

TEST_CASE("monte carlo reproducibility is independent of the worker count") {
  auto f = [](std::span<const double> u) { return std::exp(u[0]) * (1 + u[1] * u[2]); };
  set_worker_count(1);
  const auto a = sphere_integrate_mc(4, f, 50000, 77);
  set_worker_count(3);
  const auto b = sphere_integrate_mc(4, f, 50000, 77);
  set_worker_count(8);
  const auto c = sphere_integrate_mc(4, f, 50000, 77);
  set_worker_count(0);
  CHECK(a.value == b.value);
  CHECK(a.value == c.value);
  CHECK(a.std_error == b.std_error);
  CHECK(a.std_error == c.std_error);
  const auto d = sphere_integrate_mc(4, f, 50000, 78);
  CHECK(a.value != d.value);
}

TEST_CASE("monte carlo coverage over seeded repetitions") {
  const int d = 5;
  const double exact = sphere_area(d) / d;
  int inside = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto e = sphere_integrate_mc(d, [](std::span<const double> u) { return u[0] * u[0]; }, 4000, 1000 + rep);
    if (std::abs(e.value - exact) <= 4 * e.std_error) ++inside;
  }
  CHECK(inside >= 99);
}

TEST_CASE("non-finite integrand values are counted") {
  const auto few = sphere_integrate_mc(
      2, [](std::span<const double> u) { return u[0] > 0.9999999 ? kInf : 1.0; }, 100000, 5);
  CHECK(few.samples == 100000);
  CHECK(few.valid());
  const auto many = sphere_integrate_mc(
      2, [](std::span<const double> u) { return u[0] > 0.9 ? std::nan("") : 1.0; }, 100000, 5);
  CHECK(many.nonfinite > 100);
  CHECK_FALSE(many.valid());
}

TEST_CASE("accumulator merge matches a single pass") {
  MomentAccumulator all(2), left(2), right(2);
  for (int i = 0; i < 1000; ++i) {
    const double x[2] = {std::sin(i * 0.37), std::cos(i * 0.11) + 2.0};
    all.add(x);
    (i < 413 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(left.count() == all.count());
  CHECK(left.mean(0) == doctest::Approx(all.mean(0)).epsilon(1e-13));
  CHECK(left.covariance(0, 1) == doctest::Approx(all.covariance(0, 1)).epsilon(1e-12));
  CHECK(left.covariance(1, 1) == doctest::Approx(all.covariance(1, 1)).epsilon(1e-12));
}

TEST_CASE("deterministic sphere quadrature") {
  const auto s0 = sphere_integrate_exact(1, [](std::span<const double> u) { return u[0] * u[0]; });
  CHECK(s0.value == 2.0);
  const auto c2 = sphere_integrate_exact(2, [](std::span<const double> u) { return u[0] * u[0]; });
  CHECK(std::abs(c2.value - kPi) < 1e-10);
  CHECK(c2.converged);
  const auto s2 = sphere_integrate_exact(3, [](std::span<const double>) { return 1.0; });
  CHECK(std::abs(s2.value - 4 * kPi) < 1e-10);
  for (int d : {2, 3})
    for (double p : {1.0, 2.0, 3.0, 4.5}) {
      const Vec z = d == 2 ? Vec{std::cos(0.4), std::sin(0.4)} : Vec{0.48, 0.6, 0.64};
      const auto r = sphere_integrate_exact(
          d,
          [&](std::span<const double> u) { return std::pow(std::abs(dot(u, z)), p); }, 1e-10, {z});
      CAPTURE(d);
      CAPTURE(p);
      CHECK(std::abs(r.value - abs_moment(d, p)) < 1e-9);
    }
}

TEST_CASE("quadrature with several kinks") {
  // The l1 norm on S^2: each |u_i| integrates to 2 pi.
  const auto r = sphere_integrate_exact(
      3, [](std::span<const double> u) { return std::abs(u[0]) + std::abs(u[1]) + std::abs(u[2]); }, 1e-10,
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(std::abs(r.value - 6 * kPi) < 1e-9);
  CHECK(r.converged);
  CHECK_THROWS_AS(sphere_integrate_exact(4, [](std::span<const double>) { return 1.0; }), std::invalid_argument);
}

TEST_CASE("radial integrals") {
  const auto e = radial_integral(2, [](double r) { return std::exp(-r); });
  CHECK(std::abs(e.value - 1.0) < 1e-10);
  for (int n : {1, 2, 3, 5}) {
    const auto g = radial_integral(n, [](double r) { return profile(2, 1, r); });
    CHECK(g.value == doctest::Approx(c_norm(n, 2, 1) / (n * omega(n))).epsilon(1e-8));
  }
  const auto chi = radial_integral(5, [](double r) { return r <= 1.0 ? 1.0 : 0.0; }, 1e-10, 1.0);
  CHECK(std::abs(chi.value - 0.2) < 1e-12);
  const auto heavy = radial_integral(1, [](double r) { return 1.0 / std::pow(1 + r, 3); });
  CHECK(std::abs(heavy.value - 0.5) < 1e-8);
  const auto small_q = radial_integral(0.5, [](double r) { return std::exp(-r); });
  CHECK(std::abs(small_q.value - std::sqrt(kPi)) < 1e-9);
  CHECK_THROWS_AS(radial_integral(1, [](double r) { return 1.0 / (1.0 + r); }), std::runtime_error);
}

TEST_CASE("star volumes") {
  Budget b;
  for (int d : {2, 3}) {
    StarFunction one{d, [](std::span<const double>) { return 1.0; }, static_cast<double>(d), {}};
    CHECK(std::abs(star_volume(one, Method::exact, b).value - omega(d)) < 1e-10);
  }
  b.samples = 200000;
  StarFunction one5{5, [](std::span<const double>) { return 1.0; }, 5.0, {}};
  CHECK(std::abs(star_volume(one5, Method::mc, b).value - omega(5)) < 1e-12);

  const auto ell = BodySpec::ellipsoid(Matrix{{2.0, 0.0}, {0.0, 3.0}});
  StarFunction re{2, [&](std::span<const double> u) { return ell.radial(u); }, 2.0, {}};
  CHECK(std::abs(star_volume(re, Method::exact, b).value - 6 * kPi) < 1e-8);

  const double t = 1.7;
  StarFunction rs{2, [&](std::span<const double> u) { return t * ell.radial(u); }, 2.0, {}};
  const double ratio = star_volume(rs, Method::exact, b).value / star_volume(re, Method::exact, b).value;
  CHECK(ratio == doctest::Approx(t * t).epsilon(1e-12));
  const double ratio_mc = star_volume(rs, Method::mc, b).value / star_volume(re, Method::mc, b).value;
  CHECK(ratio_mc == doctest::Approx(t * t).epsilon(1e-12));
}

TEST_CASE("star volume of polytopes matches the facet formula") {
  Budget b;
  for (const auto& k : {BodySpec::cube(2), BodySpec::cube(3, 0.8),
                        BodySpec::polytope_vertices({{1.0, 0.2}, {-0.4, 1.1}, {-0.9, -0.8}, {0.6, -1.0}}),
                        BodySpec::polytope_vertices({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-0.5, -0.4, -0.3}})}) {
    StarFunction rho{k.dim(), [&](std::span<const double> u) { return k.radial(u); }, static_cast<double>(k.dim()),
                     k.polar().support_kinks()};
    const auto v = star_volume(rho, Method::exact, b);
    double facet = 0.0;
    for (const auto& f : k.surface_measure().atoms) facet += f.offset * f.area;
    facet /= k.dim();
    CAPTURE(k.describe());
    CHECK(std::abs(v.value - facet) < 1e-8);
  }
}

TEST_CASE("subunit sphere norms") {
  Budget b;
  const double c = 2.3;
  const auto cn = lq_sphere_norm([&](std::span<const double>) { return c; }, 0.5, 2, Method::exact, b);
  CHECK(cn.value == doctest::Approx(c * 4 * kPi * kPi).epsilon(1e-10));

  const double r = 1.4;
  const int n = 2;
  const double p = 2;
  const auto bn = lq_sphere_norm([&](std::span<const double>) { return std::pow(r, n + p); }, n / (n + p), n,
                                 Method::exact, b);
  CHECK(bn.value == doctest::Approx(std::pow(2 * kPi * r * r, 2)).epsilon(1e-10));

  const auto zero = lq_sphere_norm([](std::span<const double>) { return 0.0; }, 0.5, 3, Method::exact, b);
  CHECK(zero.value == 0.0);

  b.samples = 30000;
  b.seed = 99;
  auto f = [](std::span<const double> u) { return 1.0 + u[0] * u[0] + 0.5 * u[1]; };
  const auto q1 = lq_sphere_norm(f, 1.0, 4, Method::mc, b);
  const auto plain = sphere_integrate_mc(4, f, b.samples, b.seed);
  CHECK(q1.value == plain.value);
  CHECK(q1.std_error == plain.std_error);
}
