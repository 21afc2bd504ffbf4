#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "affine/estimate.hpp"
#include "affine/random.hpp"

namespace affine {

/// Function of a unit direction.
using SphereFn = std::function<double(std::span<const double>)>;
/// Several functions of one direction, written into out.
using SphereMultiFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Surface area of S^{d-1}, d * omega_d.
double sphere_area(int d);

/// Radial function of a star-shaped set in R^dim. `order` is the exponent s
/// for which rho is known to lie in L^s of the sphere.
struct StarFunction {
  int dim = 1;
  SphereFn rho;
  double order = 0.0;
  /// Normals of hyperplanes across which rho is not smooth (for quadrature).
  std::vector<Vec> kinks;

  double operator()(std::span<const double> u) const { return rho(u); }
};

enum class Method { exact, mc };

Method parse_method(const std::string& s);
std::string to_string(Method m);

/// Integration budget: Monte Carlo sample count and seed, quadrature tolerance.
struct Budget {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double tol = 1e-10;
};

/// Integral of f over S^{d-1} via uniform directions: area * sample mean.
/// For d = 1 the sphere is {-1, 1} with counting measure.
MCEstimate sphere_integrate_mc(int d, const SphereFn& f, std::size_t samples, std::uint64_t seed);

/// k integrals sharing the same directions; the accumulator holds the
/// per-sample values times the area so covariances are available.
MomentAccumulator sphere_integrate_mc_multi(int d, int k, const SphereMultiFn& f, std::size_t samples,
                                            std::uint64_t seed);

/// Deterministic quadrature on S^{d-1}, d in {1, 2, 3}. kinks lists normals z
/// of great spheres {z.u = 0} across which f fails to be smooth; the angular
/// ranges are split there.
QuadratureResult sphere_integrate_exact(int d, const SphereFn& f, double tol = 1e-10,
                                        const std::vector<Vec>& kinks = {});

/// Exact for d <= 3, Monte Carlo otherwise (or when requested).
Estimate sphere_integrate(int d, const SphereFn& f, Method method, const Budget& budget,
                          const std::vector<Vec>& kinks = {});

/// Periodic trapezoid rule on S^1 with `nodes` equispaced angles. The error
/// bound is the difference to the rule on every other node. Suited to
/// integrands with dense kinks, such as averages over a sample cloud.
QuadratureResult circle_trapezoid(const SphereFn& f, int nodes = 4096);

/// sphere_integrate for integrands with too many kinks to split on: the
/// trapezoid rule on S^1 when d = 2 and exact is requested, otherwise as
/// sphere_integrate.
Estimate sphere_integrate_dense_kinks(int d, const SphereFn& f, Method method, const Budget& budget);

/// Default: exact quadrature for d <= 3, Monte Carlo above.
Method default_method(int d);

/// vol = (1/d) * integral of rho^d.
Estimate star_volume(const StarFunction& rho, Method method, const Budget& budget);

/// (integral of f^q)^{1/q} for nonnegative f; q may lie in (0, 1].
Estimate lq_sphere_norm(const SphereFn& f, double q, int d, Method method, const Budget& budget,
                        const std::vector<Vec>& kinks = {});

}  // namespace affine
