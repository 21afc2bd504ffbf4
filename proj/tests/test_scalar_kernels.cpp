#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "affine/scalar_kernels.hpp"
#include "doctest.h"

using namespace affine;

namespace {

// Reference radial mass n*omega_n*int s^{n-1} profile(s) ds computed with
// double-exponential quadrature, independent of the library integrators.
double radial_mass(int n, double p, double lambda) {
  auto f = [&](double s) { return std::pow(s, n - 1) * profile(p, lambda, s); };
  const double w = n * std::pow(boost::math::constants::pi<double>(), 0.5 * n) / boost::math::tgamma(1.0 + 0.5 * n);
  if (lambda > 1.0) {
    const double cut = std::pow(p / (lambda - 1.0), 1.0 / p);
    boost::math::quadrature::tanh_sinh<double> ts;
    return w * ts.integrate(f, 0.0, cut);
  }
  boost::math::quadrature::exp_sinh<double> es;
  return w * es.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace

TEST_CASE("omega at small dimensions") {
  CHECK(omega(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(omega(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(omega(2) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(omega(3) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  for (double d : {0.5, 1.7, 3.25, 9.0}) {
    const double ref = std::pow(kPi, d / 2) / boost::math::tgamma(1.0 + d / 2);
    CHECK(omega(d) == doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK_THROWS_AS(omega(-1.0), std::invalid_argument);
}

TEST_CASE("profile values") {
  for (double s : {0.0, 0.3, 1.0, 2.5}) CHECK(profile(2, 1, s) == doctest::Approx(std::exp(-s * s / 2)).epsilon(1e-15));
  for (double p : {1.0, 2.0, 3.5})
    for (double l : {0.5, 1.0, 2.0, kLambdaInfinity}) CHECK(profile(p, l, 0.0) == 1.0);
  CHECK(profile(1, 3, 1) == 0.0);
  CHECK(profile(2, 2, 0.5) == doctest::Approx(1.0 - 0.125).epsilon(1e-15));
  CHECK(profile(2, 0.5, 1.0) == doctest::Approx(std::pow(1.25, -2.0)).epsilon(1e-15));
}

TEST_CASE("profile is nonincreasing") {
  for (double p : {1.0, 2.0, 3.5})
    for (double l : {0.3, 0.9, 1.0, 1.5, 4.0}) {
      double prev = profile(p, l, 0.0);
      for (int i = 1; i <= 400; ++i) {
        const double v = profile(p, l, 0.01 * i);
        CHECK(v <= prev);
        prev = v;
      }
    }
}

TEST_CASE("profile is continuous in lambda at one") {
  for (double p : {1.0, 2.0, 3.5})
    for (double s : {0.2, 1.0, 2.0, 3.0}) {
      const double mid = profile(p, 1.0, s);
      CHECK(std::abs(profile(p, 1.0 + 1e-6, s) - mid) < 1e-4);
      CHECK(std::abs(profile(p, 1.0 - 1e-6, s) - mid) < 1e-4);
    }
}

TEST_CASE("profile support end") {
  CHECK(profile_support(2, 3) == doctest::Approx(1.0));
  CHECK(std::isinf(profile_support(2, 1)));
  CHECK(profile(2, 3, 1.0 + 1e-12) == 0.0);
  CHECK(profile(2, 3, 1.0 - 1e-3) > 0.0);
}

TEST_CASE("c_norm closed forms") {
  CHECK(c_norm(1, 2, 1) == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-14));
  for (int n : {1, 2, 5})
    for (double p : {1.0, 2.0, 3.5}) {
      const double ref = omega(n) * std::pow(p, n / p) * boost::math::tgamma(1 + n / p);
      CHECK(c_norm(n, p, 1) == doctest::Approx(ref).epsilon(1e-13));
    }
  CHECK(c_norm(2, 2, 2) == doctest::Approx(kPi).epsilon(1e-14));
}

TEST_CASE("c_norm matches radial quadrature") {
  for (int n : {1, 2, 3})
    for (double p : {1.0, 2.0, 3.5})
      for (double l : {0.9, 1.0, 2.0, 3.0, 0.97}) {
        if (!(l > lambda_threshold(n, p))) continue;
        CAPTURE(n);
        CAPTURE(p);
        CAPTURE(l);
        CHECK(c_norm(n, p, l) == doctest::Approx(radial_mass(n, p, l)).epsilon(1e-10));
      }
}

TEST_CASE("c_norm rejects lambda at or below the threshold") {
  CHECK_THROWS_AS(c_norm(2, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(c_norm(2, 2, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(c_norm(2, 2, kLambdaInfinity), std::invalid_argument);
  CHECK_NOTHROW(c_norm(2, 2, 0.5000001));
}

TEST_CASE("d_sharp branches") {
  for (int n : {1, 2, 3})
    for (double p : {1.0, 2.0, 3.5})
      CHECK(d_sharp(n, p, 1) == doctest::Approx(n / (p * std::exp(1.0)) * d_base(n, p)).epsilon(1e-14));
  for (int n : {1, 2, 3, 7}) CHECK(d_base(n, n) == doctest::Approx(n).epsilon(1e-14));
  // Reference values from 30-digit evaluations of the three-branch formula.
  CHECK(d_sharp(2, 2, 0.9) == doctest::Approx(0.69287883222923711787).epsilon(1e-12));
  CHECK(d_sharp(3, 3.5, 2) == doctest::Approx(1.4679005377670460613).epsilon(1e-12));
  CHECK(d_sharp(1, 1, 0.6) == doctest::Approx(0.19245008972987523076).epsilon(1e-12));
  CHECK(d_sharp(2, 2, 1) == doctest::Approx(0.73575888234288464319).epsilon(1e-14));
  CHECK(d_sharp(4, 2, 1.5) == doctest::Approx(1.1757550765359254871).epsilon(1e-12));
}

TEST_CASE("d_sharp is continuous across lambda = 1") {
  for (int n : {1, 2, 3})
    for (double p : {1.0, 2.0, 3.5}) {
      const double mid = d_sharp(n, p, 1.0);
      CHECK(d_sharp(n, p, 1.0 + 1e-6) == doctest::Approx(mid).epsilon(1e-5));
      CHECK(d_sharp(n, p, 1.0 - 1e-6) == doctest::Approx(mid).epsilon(1e-5));
    }
}

TEST_CASE("d_sharp at lambda = inf is the large-lambda limit") {
  CHECK(d_sharp(2, 3, kLambdaInfinity) == doctest::Approx(1.131370849898476039).epsilon(1e-13));
  CHECK(d_sharp(2, 3, 1e9) == doctest::Approx(d_sharp(2, 3, kLambdaInfinity)).epsilon(1e-8));
  CHECK_THROWS_AS(d_sharp(2, 2, 0.5), std::invalid_argument);
}

TEST_CASE("large p limits") {
  // The base constant converges: D_{n,p}^{n/p} -> n.
  for (int n : {1, 2, 3}) CHECK(std::abs(std::pow(d_base(n, 1000), n / 1000.0) / n - 1.0) < 0.01);
  // With lambda = 1e6 the finite-lambda factor (n/(n+p))^{n/p} is still visible
  // at p = 1000: the value is 1.97528752..., about 1.2% below n = 2.
  CHECK(std::pow(d_sharp(2, 1000, 1e6), 2.0 / 1000) == doctest::Approx(1.97528752028565769958).epsilon(1e-9));
  CHECK(std::isinf(d_sharp(2, 1e5, kLambdaInfinity)));
  CHECK(std::abs(std::exp(log_d_sharp(2, 1e5, kLambdaInfinity) * 2.0 / 1e5) / 2.0 - 1.0) < 1e-3);
  CHECK(std::exp(log_d_sharp(3, 3.5, 2)) == doctest::Approx(d_sharp(3, 3.5, 2)).epsilon(1e-15));
}

TEST_CASE("beta function") {
  CHECK(beta_fn(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(beta_fn(0.5, 0.5) == doctest::Approx(kPi).epsilon(1e-14));
  const double x = 2.5, y = 3.7;
  boost::math::quadrature::tanh_sinh<double> ts;
  const double unit = ts.integrate([&](double t) { return std::pow(t, x - 1) * std::pow(1 - t, y - 1); }, 0.0, 1.0);
  boost::math::quadrature::exp_sinh<double> es;
  const double half = es.integrate([&](double t) { return std::pow(t, x - 1) / std::pow(1 + t, x + y); }, 0.0,
                                   std::numeric_limits<double>::infinity());
  CHECK(std::abs(beta_fn(x, y) - unit) < 1e-10);
  CHECK(std::abs(beta_fn(x, y) - half) < 1e-10);
  for (double a : {0.3, 1.0, 4.2})
    for (double b : {0.7, 2.0, 9.5}) CHECK(beta_fn(a, b) == beta_fn(b, a));
  CHECK_THROWS_AS(beta_fn(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(beta_fn(1, -2), std::invalid_argument);
}

TEST_CASE("parameter block") {
  Params ok{2, 2, 2.0, 1.0};
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.matrix_entropy_admissible());
  Params edge{2, 2, 2.0, 4.0 / 6.0};
  CHECK_FALSE(edge.matrix_entropy_admissible());
  Params bad_p{2, 1, 0.5, 1.0};
  CHECK_THROWS_AS(bad_p.validate(), std::invalid_argument);
  Params bad_n{0, 1, 2.0, 1.0};
  CHECK_THROWS_AS(bad_n.validate(), std::invalid_argument);
  Params inf_l{2, 1, 2.0, kLambdaInfinity};
  CHECK_NOTHROW(inf_l.validate());
  CHECK(inf_l.matrix_entropy_admissible());
}
