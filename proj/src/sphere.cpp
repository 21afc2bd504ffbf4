#include "affine/sphere.hpp"

#include <algorithm>
#include <stdexcept>

#include "affine/quadrature.hpp"
#include "affine/scalar_kernels.hpp"

namespace affine {

double sphere_area(int d) { return d == 1 ? 2.0 : d * omega(d); }

Method parse_method(const std::string& s) {
  if (s == "exact" || s == "quadrature") return Method::exact;
  if (s == "mc") return Method::mc;
  throw std::invalid_argument("unknown integration method: " + s);
}

std::string to_string(Method m) { return m == Method::exact ? "exact" : "mc"; }

Method default_method(int d) { return d <= 3 ? Method::exact : Method::mc; }

MomentAccumulator sphere_integrate_mc_multi(int d, int k, const SphereMultiFn& f, std::size_t samples,
                                            std::uint64_t seed) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("sphere_integrate_mc: unsupported dimension");
  const double area = sphere_area(d);
  return run_chunked(samples, seed, k, [&, d, k](Rng& rng, std::span<double> out) {
    double u[kMaxDim];
    std::span<double> dir(u, static_cast<std::size_t>(d));
    if (d == 1) {
      u[0] = (rng() >> 63) ? 1.0 : -1.0;
    } else {
      uniform_direction(rng, dir);
    }
    f(dir, out);
    for (int i = 0; i < k; ++i) out[i] *= area;
  });
}

MCEstimate sphere_integrate_mc(int d, const SphereFn& f, std::size_t samples, std::uint64_t seed) {
  const auto acc = sphere_integrate_mc_multi(
      d, 1, [&](std::span<const double> u, std::span<double> out) { out[0] = f(u); }, samples, seed);
  return to_estimate(acc, 0, seed);
}

namespace {

constexpr double kTwoPi = 2.0 * kPi;

void add_circle_breaks(double z0, double z1, std::vector<double>& breaks) {
  if (z0 == 0.0 && z1 == 0.0) return;
  // Zeros of z0 cos t + z1 sin t.
  double t = std::atan2(z1, z0) + 0.5 * kPi;
  for (int s = 0; s < 2; ++s) {
    double a = std::fmod(t + s * kPi, kTwoPi);
    if (a < 0) a += kTwoPi;
    breaks.push_back(a);
  }
}

std::vector<double> finish_breaks(std::vector<double> breaks, double lo, double hi) {
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> out;
  for (double b : breaks) {
    if (b < lo || b > hi) continue;
    if (out.empty() || b - out.back() > 1e-13) out.push_back(b);
  }
  if (out.back() < hi) out.back() = hi;
  return out;
}

QuadratureResult circle(const SphereFn& f, double tol, const std::vector<Vec>& kinks) {
  std::vector<double> breaks;
  for (const auto& z : kinks) add_circle_breaks(z[0], z[1], breaks);
  const auto pieces = finish_breaks(std::move(breaks), 0.0, kTwoPi);
  return integrate_pieces(
      [&](double t) {
        const double u[2] = {std::cos(t), std::sin(t)};
        return f(std::span<const double>(u, 2));
      },
      pieces, tol);
}

// Orthonormal frame (a, b, c) with a along the given pole.
void frame(const Vec& pole, double a[3], double b[3], double c[3]) {
  const double len = norm2(pole);
  for (int i = 0; i < 3; ++i) a[i] = pole[i] / len;
  const int j = std::abs(a[0]) < 0.9 ? 0 : 1;
  double e[3] = {0, 0, 0};
  e[j] = 1.0;
  const double d = a[0] * e[0] + a[1] * e[1] + a[2] * e[2];
  for (int i = 0; i < 3; ++i) b[i] = e[i] - d * a[i];
  const double bl = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  for (int i = 0; i < 3; ++i) b[i] /= bl;
  c[0] = a[1] * b[2] - a[2] * b[1];
  c[1] = a[2] * b[0] - a[0] * b[2];
  c[2] = a[0] * b[1] - a[1] * b[0];
}

QuadratureResult sphere3(const SphereFn& f, double tol, const std::vector<Vec>& kinks) {
  double a[3], b[3], c[3];
  frame(kinks.empty() ? Vec{0.0, 0.0, 1.0} : kinks.front(), a, b, c);

  struct Local {
    double za, zb, zc;
  };
  std::vector<Local> local;
  std::vector<double> phi_breaks{0.5 * kPi};
  for (std::size_t k = kinks.empty() ? 0 : 1; k < kinks.size(); ++k) {
    const auto& z = kinks[k];
    const Local l{z[0] * a[0] + z[1] * a[1] + z[2] * a[2], z[0] * b[0] + z[1] * b[1] + z[2] * b[2],
                  z[0] * c[0] + z[1] * c[1] + z[2] * c[2]};
    const double s = std::hypot(l.zb, l.zc);
    if (s < 1e-14 * std::abs(l.za)) continue;  // parallel to the pole
    local.push_back(l);
    // Latitudes where the circle {phi fixed} is tangent to {z.u = 0}.
    const double t = std::atan2(std::abs(l.za), s);
    phi_breaks.push_back(t);
    phi_breaks.push_back(kPi - t);
  }
  // Crossings of two kink circles move the inner breakpoints non-smoothly.
  for (std::size_t i = 0; i < kinks.size(); ++i)
    for (std::size_t j = i + 1; j < kinks.size(); ++j) {
      const Vec w = {kinks[i][1] * kinks[j][2] - kinks[i][2] * kinks[j][1],
                     kinks[i][2] * kinks[j][0] - kinks[i][0] * kinks[j][2],
                     kinks[i][0] * kinks[j][1] - kinks[i][1] * kinks[j][0]};
      const double len = norm2(w);
      if (len < 1e-14) continue;
      const double c0 = std::clamp((w[0] * a[0] + w[1] * a[1] + w[2] * a[2]) / len, -1.0, 1.0);
      phi_breaks.push_back(std::acos(c0));
      phi_breaks.push_back(kPi - std::acos(c0));
    }
  const auto phi_pieces = finish_breaks(std::move(phi_breaks), 0.0, kPi);
  const double inner_tol = tol * 0.1;

  bool inner_ok = true;
  double inner_err = 0.0;
  auto ring = [&](double phi) {
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    std::vector<double> breaks;
    for (const auto& l : local) {
      // cp*za + sp*(cos(psi) zb + sin(psi) zc) = 0.
      const double r = sp * std::hypot(l.zb, l.zc);
      const double cterm = cp * l.za;
      if (r <= std::abs(cterm)) continue;
      const double base = std::atan2(l.zc, l.zb);
      const double off = std::acos(-cterm / r);
      for (double t : {base + off, base - off}) {
        double x = std::fmod(t, kTwoPi);
        if (x < 0) x += kTwoPi;
        breaks.push_back(x);
      }
    }
    const auto pieces = finish_breaks(std::move(breaks), 0.0, kTwoPi);
    const auto r = integrate_pieces(
        [&](double psi) {
          const double c1 = std::cos(psi), s1 = std::sin(psi);
          double u[3];
          for (int i = 0; i < 3; ++i) u[i] = cp * a[i] + sp * (c1 * b[i] + s1 * c[i]);
          return f(std::span<const double>(u, 3));
        },
        pieces, inner_tol);
    inner_ok = inner_ok && r.converged;
    inner_err = std::max(inner_err, r.abs_error_bound);
    return r.value * sp;
  };
  auto outer = integrate_pieces(ring, phi_pieces, tol);
  outer.converged = outer.converged && inner_ok;
  outer.abs_error_bound += inner_err * kPi;
  return outer;
}

}  // namespace

QuadratureResult sphere_integrate_exact(int d, const SphereFn& f, double tol, const std::vector<Vec>& kinks) {
  switch (d) {
    case 1: {
      const double m1 = -1.0, p1 = 1.0;
      QuadratureResult r;
      r.value = f(std::span<const double>(&m1, 1)) + f(std::span<const double>(&p1, 1));
      return r;
    }
    case 2:
      return circle(f, tol, kinks);
    case 3:
      return sphere3(f, tol, kinks);
    default:
      throw std::invalid_argument("sphere_integrate_exact: only d in {1, 2, 3}");
  }
}

Estimate sphere_integrate(int d, const SphereFn& f, Method method, const Budget& budget,
                          const std::vector<Vec>& kinks) {
  if (method == Method::exact) return Estimate::from(sphere_integrate_exact(d, f, budget.tol, kinks));
  return Estimate::from(sphere_integrate_mc(d, f, budget.samples, budget.seed));
}

QuadratureResult circle_trapezoid(const SphereFn& f, int nodes) {
  if (nodes < 4 || nodes % 2 != 0) throw std::invalid_argument("circle_trapezoid: nodes must be even and >= 4");
  double even = 0.0, odd = 0.0;
  double u[2];
  for (int i = 0; i < nodes; ++i) {
    const double t = 2 * kPi * i / nodes;
    u[0] = std::cos(t);
    u[1] = std::sin(t);
    (i % 2 == 0 ? even : odd) += f(std::span<const double>(u, 2));
  }
  const double h = 2 * kPi / nodes;
  QuadratureResult r;
  r.value = h * (even + odd);
  r.abs_error_bound = std::abs(r.value - 2 * h * even);
  r.converged = std::isfinite(r.value);
  return r;
}

Estimate sphere_integrate_dense_kinks(int d, const SphereFn& f, Method method, const Budget& budget) {
  if (d == 2 && method == Method::exact) return Estimate::from(circle_trapezoid(f));
  return sphere_integrate(d, f, method, budget);
}

Estimate star_volume(const StarFunction& rho, Method method, const Budget& budget) {
  const int d = rho.dim;
  const auto integral = sphere_integrate(
      d, [&](std::span<const double> u) { return std::pow(rho(u), d); }, method, budget, rho.kinks);
  return integral * (1.0 / d);
}

Estimate lq_sphere_norm(const SphereFn& f, double q, int d, Method method, const Budget& budget,
                        const std::vector<Vec>& kinks) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_sphere_norm: q must be positive");
  const auto integral = sphere_integrate(
      d,
      [&](std::span<const double> u) {
        const double v = f(u);
        if (v < 0.0) throw std::domain_error("lq_sphere_norm: integrand must be nonnegative");
        return q == 1.0 ? v : std::pow(v, q);
      },
      method, budget, kinks);
  if (q == 1.0) return integral;
  return pow(integral, 1.0 / q);
}

}  // namespace affine
