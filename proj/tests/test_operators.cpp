#include <random>

#include "affine/operators.hpp"
#include "affine/scalar_kernels.hpp"
#include "doctest.h"

using namespace affine;

namespace {

const BodySpec kSymInterval = BodySpec::interval(1.0, 1.0);

Vec unit_angle(double t) { return {std::cos(t), std::sin(t)}; }

// Polygon with k vertices on the boundary of A B, an outer route to the
// ellipsoid's polar projection body through its facets.
BodySpec ellipse_polygon(const Matrix& a, int k) {
  std::vector<Vec> pts;
  for (int i = 0; i < k; ++i) pts.push_back(a * std::span<const double>(unit_angle(2 * kPi * i / k)));
  return BodySpec::polytope_vertices(pts);
}

// Smooth positive radial function exp(sum a_k cos(k t) + b_k sin(k t)).
StarFunction random_star2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::array<double, 8> c{};
  for (auto& x : c) x = u(rng);
  return StarFunction{2,
                      [c](std::span<const double> v) {
                        const double t = std::atan2(v[1], v[0]);
                        double s = 0.0;
                        for (int k = 1; k <= 4; ++k) s += c[2 * k - 2] * std::cos(k * t) + c[2 * k - 1] * std::sin(k * t);
                        return std::exp(s);
                      },
                      kInf,
                      {}};
}

}  // namespace

TEST_CASE("polar projection body gauge examples") {
  const PolarProjectionBody pb(BodySpec::ball(2), kSymInterval, 2.0);
  for (double t : {0.0, 0.4, 2.0}) CHECK(pb.gauge(unit_angle(t)) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-10));
  const Vec th{0.3, -1.1};
  const Vec th3{0.9, -3.3};
  CHECK(pb.gauge(th3) == doctest::Approx(3 * pb.gauge(th)).epsilon(1e-12));
  CHECK(pb.gauge(Vec{0.0, 0.0}) == 0.0);
}

TEST_CASE("polar projection ball radius on a grid") {
  for (int n : {2, 3})
    for (double p : {1.0, 2.0, 4.0}) {
      const PolarProjectionBody pb(BodySpec::ball(n), kSymInterval, p);
      const double radius = std::pow(2 * omega(n + p - 2) / omega(p - 1), 1.0 / p);
      Vec th(static_cast<std::size_t>(n), 0.0);
      th[0] = 0.6;
      th[n - 1] += 0.8;
      CAPTURE(n);
      CAPTURE(p);
      CHECK(std::abs(pb.gauge(th) / (radius * norm2(th)) - 1.0) < 1e-6);
    }
}

TEST_CASE("covariance of the polar projection body under linear maps") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const Matrix a{{2.0, 0.0}, {0.0, 0.5}};
  const Matrix a_inv = a.inverse();
  for (const auto& q : {kSymInterval, BodySpec::interval(0.5, 2.0)})
    for (double p : {1.0, 2.0, 3.0}) {
      const PolarProjectionBody ball(BodySpec::ball(2), q, p);
      const PolarProjectionBody ell(BodySpec::ellipsoid(a), q, p);
      const PolarProjectionBody poly(ellipse_polygon(a, 4000), q, p);
      for (int i = 0; i < 5; ++i) {
        const Vec th{g(rng), g(rng)};
        const double via_ball = std::pow(std::abs(a.determinant()), 1.0 / p) * ball.gauge(a_inv * std::span<const double>(th));
        CHECK(ell.gauge(th) == doctest::Approx(via_ball).epsilon(1e-9));
        CHECK(poly.gauge(th) == doctest::Approx(via_ball).epsilon(1e-5));
      }
    }
  // Polytopes: the image's facets against the covariance identity.
  const Matrix b{{1.2, 0.4}, {-0.3, 0.9}};
  const BodySpec sq = BodySpec::cube(2);
  const BodySpec q2 = BodySpec::cube(2, 0.7);
  const PolarProjectionBody base(sq, q2, 2.5);
  const PolarProjectionBody img(BodySpec::linear_image(b, sq), q2, 2.5);
  const MatrixShape sh{2, 2};
  for (int i = 0; i < 20; ++i) {
    Vec th(4);
    for (auto& x : th) x = g(rng);
    Vec moved(4);
    sh.left_multiply(b.inverse(), th, moved);
    CHECK(img.gauge(th) == doctest::Approx(std::pow(std::abs(b.determinant()), 1 / 2.5) * base.gauge(moved)).epsilon(1e-12));
  }
}

TEST_CASE("ball source reduces to the sphere integral") {
  // For K = rB the weights h_K^{1-p} dsigma_K contribute r^{n-p}.
  const double r = 1.7;
  const PolarProjectionBody unit(BodySpec::ball(2), BodySpec::cube(2), 3.0);
  const PolarProjectionBody big(BodySpec::ball(2, r), BodySpec::cube(2), 3.0);
  const Vec th{0.2, -0.4, 1.0, 0.3};
  CHECK(big.gauge(th) == doctest::Approx(std::pow(r, (2 - 3.0) / 3.0) * unit.gauge(th)).epsilon(1e-12));
  // A fine polygon inscribed in the circle converges to the ball.
  const PolarProjectionBody poly(ellipse_polygon(Matrix::identity(2), 4000), BodySpec::cube(2), 3.0);
  CHECK(poly.gauge(th) == doctest::Approx(unit.gauge(th)).epsilon(1e-5));
}

TEST_CASE("polar projection body rejects a facet through the origin") {
  const auto tri = BodySpec::polytope_vertices({{-1, -1}, {2, -1}, {-1, 2}});
  CHECK_NOTHROW(PolarProjectionBody(tri, kSymInterval, 2.0));
  const auto bad = BodySpec::polytope_facets(2, {{{1, 0}, 1.0, 0.0}, {{-1, 0}, 1.0, 1.0}, {{0, 1}, 1.0, 1.0},
                                                 {{0, -1}, 1.0, 1.0}});
  CHECK_THROWS_AS(PolarProjectionBody(bad, kSymInterval, 2.0), std::invalid_argument);
}

TEST_CASE("exact and Monte Carlo gauges agree for the ball") {
  Budget b;
  b.samples = 200000;
  b.seed = 3;
  for (int n : {2, 3}) {
    const PolarProjectionBody ex(BodySpec::ball(n), BodySpec::cube(2), 2.0, Method::exact);
    const PolarProjectionBody mc(BodySpec::ball(n), BodySpec::cube(2), 2.0, Method::mc, b);
    Vec th(static_cast<std::size_t>(2 * n));
    for (std::size_t i = 0; i < th.size(); ++i) th[i] = std::sin(1.0 + i);
    const auto e = ex.gauge_estimate(th);
    const auto m = mc.gauge_estimate(th);
    CHECK(std::abs(e.value - m.value) < 4 * m.std_error);
    CHECK(m.std_error > 0.0);
  }
}

TEST_CASE("Frobenius lower bound holds") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (double p : {1.0, 2.0, 3.5})
    for (const auto& q : {kSymInterval, BodySpec::interval(0.2, 1.0)}) {
      const PolarProjectionBody pb(BodySpec::ball(2), q, p);
      const double c = pb.frobenius_lower_bound();
      CHECK(c > 0.0);
      for (int i = 0; i < 50; ++i) {
        const Vec th{g(rng), g(rng)};
        CHECK(pb.gauge(th) >= c * norm2(th) * (1 - 1e-12));
      }
    }
  const PolarProjectionBody sq(BodySpec::ball(2), BodySpec::cube(2), 2.0);
  const double c = sq.frobenius_lower_bound();
  for (int i = 0; i < 50; ++i) {
    Vec th(4);
    for (auto& x : th) x = g(rng);
    CHECK(sq.gauge(th) >= c * norm2(th) * (1 - 1e-12));
  }
}

TEST_CASE("volume of the polar projection ball") {
  for (int n : {2, 3})
    for (double p : {1.0, 2.0, 3.0}) {
      const double expect = omega(n) * std::pow(omega(p - 1) / (2 * omega(n + p - 2)), n / p);
      const auto v = ppb_ball_volume(n, kSymInterval, p);
      CAPTURE(n);
      CAPTURE(p);
      CHECK(std::abs(v.value / expect - 1.0) < 1e-7);
    }
  CHECK(ppb_ball_volume(2, kSymInterval, 2.0).value == doctest::Approx(1.0).epsilon(1e-9));
  // Doubling Q halves every radius.
  const auto v1 = ppb_ball_volume(2, BodySpec::interval(0.5, 1.0), 2.0);
  const auto v2 = ppb_ball_volume(2, BodySpec::interval(1.0, 2.0), 2.0);
  CHECK(v2.value == doctest::Approx(v1.value / 4).epsilon(1e-9));
  Budget b;
  b.samples = 20000;
  const auto w1 = ppb_ball_volume(2, BodySpec::cube(2), 2.0, b);
  const auto w2 = ppb_ball_volume(2, BodySpec::cube(2, 2.0), 2.0, b);
  CHECK(w2.value == doctest::Approx(w1.value / 16).epsilon(1e-12));
  CHECK(w1.std_error > 0.0);
}

TEST_CASE("Petty-type volume bound at desk scale (m = 1)") {
  for (double p : {1.0, 2.0, 3.0}) {
    const double ball = ppb_ball_volume(2, kSymInterval, p).value * std::pow(omega(2), 2 / p - 1);
    const auto sq = BodySpec::cube(2);
    const PolarProjectionBody ps(sq, kSymInterval, p);
    const double square = ppb_volume(ps, Method::exact, {}).value * std::pow(sq.volume(), 2 / p - 1);
    CHECK(square < ball);
    const auto e = BodySpec::ellipsoid(Matrix{{1.5, 0.4}, {0.0, 0.7}});
    const PolarProjectionBody pe(e, kSymInterval, p);
    const double ell = ppb_volume(pe, Method::exact, {}).value * std::pow(e.volume(), 2 / p - 1);
    CHECK(ell == doctest::Approx(ball).epsilon(1e-8));
  }
}

TEST_CASE("centroid support examples") {
  Budget b;
  const StarFunction ball{2, [](std::span<const double>) { return 1.0; }, kInf, {}};
  const MatrixShape sh{2, 1};
  CHECK(centroid_support(ball, sh, kSymInterval, 2.0, unit_angle(0.3), Method::exact, b).value ==
        doctest::Approx(0.5).epsilon(1e-10));
  const Vec v{0.3, 0.5};
  const Vec v2{0.6, 1.0};
  const auto l = PolarProjectionBody(BodySpec::ball(2), kSymInterval, 3.0).star();
  CHECK(centroid_support(l, sh, kSymInterval, 3.0, v2, Method::exact, b).value ==
        doctest::Approx(2 * centroid_support(l, sh, kSymInterval, 3.0, v, Method::exact, b).value).epsilon(1e-12));
}

TEST_CASE("centroid body of the polar projection ball") {
  Budget b;
  const int n = 2;
  const double p = 2.0;
  {
    const auto l = PolarProjectionBody(BodySpec::ball(n), kSymInterval, p).star();
    const double expect = std::pow(1.0 / (omega(n) * (n + p)), 1 / p);
    for (double t : {0.0, 1.0})
      CHECK(centroid_support(l, {n, 1}, kSymInterval, p, unit_angle(t), Method::exact, b).value ==
            doctest::Approx(expect).epsilon(1e-8));
  }
  {
    b.samples = 100000;
    const int m = 2;
    const auto q = BodySpec::cube(2);
    const auto l = PolarProjectionBody(BodySpec::ball(n), q, p).star();
    const double expect = std::pow(m / (omega(n) * (n * m + p)), 1 / p);
    const auto h = centroid_support(l, {n, m}, q, p, unit_angle(0.7), Method::mc, b);
    CHECK(std::abs(h.value / expect - 1.0) < 0.01);
    CHECK(std::abs(h.value - expect) < 4 * h.std_error);
  }
}

TEST_CASE("centroid support is midpoint convex") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  Budget b;
  const auto l = random_star2(rng);
  for (const auto& q : {kSymInterval, BodySpec::interval(0.3, 1.0)})
    for (int i = 0; i < 20; ++i) {
      const Vec v1{g(rng), g(rng)}, v2{g(rng), g(rng)};
      const Vec mid{(v1[0] + v2[0]) / 2, (v1[1] + v2[1]) / 2};
      auto h = [&](const Vec& v) { return centroid_support(l, {2, 1}, q, 2.0, v, Method::exact, b).value; };
      CHECK(h(mid) <= (h(v1) + h(v2)) / 2 + 1e-10);
    }
}

TEST_CASE("centroid support of a sample cloud") {
  std::mt19937_64 rng(2);
  SampleCloud c;
  c.shape = {2, 1};
  c.data = {1, 0, -1, 0, 0, 2, 0, -2};
  const auto h = centroid_support(c, kSymInterval, 2.0, Vec{1.0, 1.0});
  CHECK(h.value == doctest::Approx(std::sqrt((1 + 1 + 4 + 4) / 4.0)).epsilon(1e-14));
}

TEST_CASE("Ball body radial function") {
  for (int d : {1, 2, 3})
    for (double q : {1.0, 2.5, 4.0}) {
      const double w = omega(d);
      const auto chi = [w](std::span<const double> x) { return norm2(x) <= 1.0 ? 1.0 / w : 0.0; };
      Vec th(static_cast<std::size_t>(d), 0.0);
      th[0] = 1.0;
      CHECK(ball_body_radial(chi, q, th, 1e-12, 1.0).value == doctest::Approx(std::pow(1 / (q * w), 1 / q)).epsilon(1e-10));
    }
  const auto gauss = [](std::span<const double> x) { return std::exp(-dot(x, x) / 2); };
  CHECK(ball_body_radial(gauss, 4.0, unit_angle(0.2)).value ==
        doctest::Approx(ball_body_radial(gauss, 4.0, unit_angle(2.9)).value).epsilon(1e-10));
  // Density of A^{-t} Z: the radial function is proportional to |A^t u|^{-1}.
  const Matrix a{{2.0, 0.0}, {0.0, 1.0}};
  const auto g = [&](std::span<const double> y) {
    const Vec ay = a.transpose() * y;
    return std::abs(a.determinant()) * std::exp(-dot(ay, ay) / 2) / (2 * kPi);
  };
  const Matrix at = a.transpose();
  double c0 = 0;
  for (double t : {0.0, 0.5, 1.3, 2.2}) {
    const Vec u = unit_angle(t);
    const double c = ball_body_radial(g, 4.0, u).value * norm2(at * std::span<const double>(u));
    if (c0 == 0) c0 = c;
    CHECK(c == doctest::Approx(c0).epsilon(1e-9));
  }
}

TEST_CASE("dual mixed volumes") {
  std::mt19937_64 rng(5);
  Budget b;
  const double p = 2.0;
  for (int i = 0; i < 10; ++i) {
    const auto k = random_star2(rng);
    const auto l = random_star2(rng);
    const double vk = star_volume(k, Method::exact, b).value;
    const double vl = star_volume(l, Method::exact, b).value;
    CHECK(dual_mixed_volume(k, k, p, Method::exact, b).value == doctest::Approx(vk).epsilon(1e-10));
    StarFunction tk{2, [&](std::span<const double> u) { return 1.5 * k(u); }, kInf, {}};
    CHECK(dual_mixed_volume(k, tk, p, Method::exact, b).value == doctest::Approx(std::pow(1.5, -p) * vk).epsilon(1e-10));
    const double v = dual_mixed_volume(k, l, p, Method::exact, b).value;
    CHECK(std::pow(v, 2) >= std::pow(vk, 2 + p) * std::pow(vl, -p) * (1 - 1e-12));
  }
}

TEST_CASE("Santalo-type bound for centroid bodies, n = 2, m = 1") {
  std::mt19937_64 rng(12);
  Budget b;
  const double p = 2.0;
  const int n = 2;
  auto product = [&](const StarFunction& l) {
    const double vol_l = star_volume(l, Method::exact, b).value;
    StarFunction polar{n,
                       [&](std::span<const double> u) {
                         return 1.0 / centroid_support(l, {n, 1}, kSymInterval, p, u, Method::exact, b).value;
                       },
                       kInf,
                       {}};
    return vol_l * star_volume(polar, Method::exact, b).value;
  };
  const auto pb = PolarProjectionBody(BodySpec::ball(n), kSymInterval, p).star();
  const double vol_pb = ppb_ball_volume(n, kSymInterval, p).value;
  const double h_gamma = std::pow(1.0 / (omega(n) * (n + p)), 1 / p);
  const double bound = omega(n) * omega(n) * vol_pb / (omega(n) * std::pow(h_gamma, n));
  for (int i = 0; i < 5; ++i) CHECK(product(random_star2(rng)) <= bound * (1 + 1e-9));
  const auto ell = PolarProjectionBody(BodySpec::ellipsoid(Matrix{{1.4, 0.3}, {0.0, 0.6}}), kSymInterval, p).star();
  CHECK(product(ell) == doctest::Approx(bound).epsilon(0.02));
  CHECK(product(pb) == doctest::Approx(bound).epsilon(1e-7));
}

TEST_CASE("p = infinity gauge: exact and sampled routes") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (const auto& q : {kSymInterval, BodySpec::interval(0.3, 1.2)}) {
    const Vec u{g(rng), g(rng)};
    CHECK(ppb_infinity_gauge(q, {2, 1}, u) == doctest::Approx(q.circumradius() * norm2(u)).epsilon(1e-14));
  }
  for (const auto& q : {BodySpec::cube(2), BodySpec::ball(2), BodySpec::lq_ball(2, 1.0),
                        BodySpec::polytope_vertices({{1, 0}, {0, 1}, {-0.5, -0.5}})}) {
    for (int i = 0; i < 5; ++i) {
      Vec u(6);
      for (auto& x : u) x = g(rng);
      const MatrixShape sh{3, 2};
      const double exact = ppb_infinity_gauge(q, sh, u);
      const double sampled = ppb_infinity_gauge_sampled(q, sh, u, 20000, 7 + i);
      CAPTURE(q.describe());
      CHECK(sampled <= exact * (1 + 1e-12));
      CHECK(sampled == doctest::Approx(exact).epsilon(1e-6));
    }
  }
  // Large p gauges approach the p = inf gauge after removing the area factor.
  const PolarProjectionBody pb(BodySpec::ball(2), BodySpec::cube(2), 200.0);
  const Vec u{0.3, -0.8, 0.5, 0.1};
  const double ratio = pb.gauge(u) / ppb_infinity_gauge(BodySpec::cube(2), {2, 2}, u);
  CHECK(std::abs(ratio - 1.0) < 0.05);
}
