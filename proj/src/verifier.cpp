#include "affine/verifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "affine/operators.hpp"
#include "affine/scalar_kernels.hpp"

namespace affine {

std::string to_string(CheckMode mode) {
  switch (mode) {
    case CheckMode::inequality: return "inequality";
    case CheckMode::equality: return "equality";
    case CheckMode::sensitivity: return "sensitivity";
  }
  return "inequality";
}

CheckMode parse_check_mode(const std::string& s) {
  if (s == "inequality") return CheckMode::inequality;
  if (s == "equality" || s == "equality-tightness") return CheckMode::equality;
  if (s == "sensitivity") return CheckMode::sensitivity;
  throw std::invalid_argument("unknown check mode: " + s);
}

void settle(CheckReport& r, bool ratio_stderr_given) {
  const double l = r.lhs.value;
  const double h = r.rhs.value;
  r.ratio = l / h;
  if (!ratio_stderr_given) {
    const double rl = l != 0.0 ? r.lhs.std_error / std::abs(l) : 0.0;
    const double rr = h != 0.0 ? r.rhs.std_error / std::abs(h) : 0.0;
    r.ratio_stderr = std::abs(r.ratio) * std::sqrt(rl * rl + rr * rr);
  }
  r.mc_samples = std::max({r.mc_samples, r.lhs.samples, r.rhs.samples});
  if (!r.lhs.valid || !r.rhs.valid || std::isnan(r.ratio)) {
    r.pass = false;
    if (r.note.empty()) r.note = "invalid estimate";
    return;
  }
  const double sigma3 = 3.0 * r.ratio_stderr;
  switch (r.mode) {
    case CheckMode::inequality: {
      const double el = l != 0.0 ? r.lhs.error_bound / std::abs(l) : 0.0;
      const double eh = h != 0.0 ? r.rhs.error_bound / std::abs(h) : 0.0;
      r.tol = kTolFloor;
      r.pass = r.ratio >= 1.0 - sigma3 - std::abs(r.ratio) * (el + eh) - kTolFloor;
      break;
    }
    case CheckMode::equality:
      r.pass = std::abs(r.ratio - 1.0) <= std::max(sigma3, r.tol);
      break;
    case CheckMode::sensitivity:
      r.tol = kTolFloor;
      r.pass = std::abs(r.ratio - 1.0) > sigma3 + kTolFloor;
      break;
  }
}

namespace {

CheckReport start(const std::string& id, const CheckOptions& opts, int n, int m, double p, double lambda) {
  CheckReport r;
  r.check_id = id;
  r.label = opts.label;
  r.mode = opts.mode;
  r.n = n;
  r.m = m;
  r.p = p;
  r.lambda = lambda;
  r.seed = opts.budget.seed;
  r.params["budget"] = {{"samples", opts.budget.samples}, {"seed", opts.budget.seed}, {"tol", opts.budget.tol}};
  if (opts.method) r.params["method"] = to_string(*opts.method);
  return r;
}

void use_tolerance(CheckReport& r, const CheckOptions& opts, double path_default) {
  if (r.mode == CheckMode::equality) r.tol = opts.tol_eq >= 0.0 ? opts.tol_eq : path_default;
}

Method outer_method(const CheckOptions& opts, int d) { return opts.method ? *opts.method : default_method(d); }

Budget with_seed(const Budget& b, std::uint64_t stream) {
  Budget out = b;
  out.seed = derive_seed(b.seed, stream);
  return out;
}

double path_tolerance(Method m) { return m == Method::exact ? kTolEqQuadrature : kTolEqMC; }

std::string q_kind(const BodySpec& q) { return to_string(q.kind()); }

nlohmann::json matrix_json(const Matrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : a.to_rows()) rows.push_back(r);
  return rows;
}

bool probe_even(const SphereFn& f, int d, std::uint64_t seed) {
  Rng rng = make_stream(seed, 77);
  Vec u(static_cast<std::size_t>(d)), v(static_cast<std::size_t>(d));
  for (int i = 0; i < 32; ++i) {
    uniform_direction(rng, u);
    for (int j = 0; j < d; ++j) v[j] = -u[j];
    const double a = f(u);
    const double b = f(v);
    if (std::abs(a - b) > 1e-9 * std::max(std::abs(a), std::abs(b))) return false;
  }
  return true;
}

// U z for U in column-stacked form.
Vec apply_flat(std::span<const double> u, int n, std::span<const double> z) {
  Vec out(static_cast<std::size_t>(n), 0.0);
  for (std::size_t j = 0; j < z.size(); ++j)
    for (int i = 0; i < n; ++i) out[i] += u[j * n + i] * z[j];
  return out;
}

// int_{S^{nm-1}} f(U) int_{S^{n-1}} h_Q(U^t v)^p g(v) dv dU.
Estimate double_sphere_integral(int n, int m, double p, const BodySpec& q, const SphereFn& f, const SphereFn& g,
                                Method outer, const Budget& budget) {
  if (n > 3) throw std::invalid_argument("double sphere integral: the inner sphere must have n <= 3");
  const MatrixShape shape{n, m};
  const auto q_kinks = q.support_kinks();
  const double inner_tol = outer == Method::exact ? budget.tol : std::max(budget.tol, 1e-8);
  auto inner = [&](std::span<const double> u) {
    std::vector<Vec> kinks;
    for (const auto& z : q_kinks) kinks.push_back(apply_flat(u, n, z));
    auto h = [&](std::span<const double> v) {
      double w[kMaxDim];
      shape.transpose_apply(u, v, std::span<double>(w, static_cast<std::size_t>(m)));
      return pow_nonneg(q.support(std::span<const double>(w, static_cast<std::size_t>(m))), p) * g(v);
    };
    return sphere_integrate_exact(n, h, inner_tol, kinks).value;
  };
  return sphere_integrate(
      n * m, [&](std::span<const double> u) { return f(u) * inner(u); }, outer, budget);
}

double chebyshev(int k, double x) {
  double t0 = 1.0, t1 = x;
  if (k == 0) return t0;
  for (int i = 1; i < k; ++i) {
    const double t2 = 2 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

}  // namespace

// Carlson-Levin ---------------------------------------------------------------

CarlsonLevinBranch branch_for(double lambda) {
  if (lambda < 1.0) return CarlsonLevinBranch::below_one;
  if (lambda > 1.0) return CarlsonLevinBranch::above_one;
  return CarlsonLevinBranch::log;
}

RadialProfile carlson_levin_extremizer(double p, double lambda, double a, double b) {
  RadialProfile f;
  std::ostringstream os;
  switch (branch_for(lambda)) {
    case CarlsonLevinBranch::below_one:
      f.phi = [=](double r) { return a * std::pow(1.0 + std::pow(b * r, p), -1.0 / (1.0 - lambda)); };
      os << a << "(1+|" << b << "x|^" << p << ")^(-1/(1-" << lambda << "))";
      break;
    case CarlsonLevinBranch::above_one:
      f.phi = [=](double r) { return a * std::pow(std::max(0.0, 1.0 - std::pow(b * r, p)), 1.0 / (lambda - 1.0)); };
      f.cutoff = 1.0 / b;
      os << a << "(1-|" << b << "x|^" << p << ")_+^(1/(" << lambda << "-1))";
      break;
    case CarlsonLevinBranch::log:
      f.phi = [=](double r) { return a * std::exp(-std::pow(b * r, p)); };
      os << a << "exp(-|" << b << "x|^" << p << ")";
      break;
  }
  f.name = os.str();
  return f;
}

CheckReport check_carlson_levin(int n, double p, double lambda, const RadialProfile& f, CarlsonLevinBranch branch,
                                const CheckOptions& opts) {
  if (branch != branch_for(lambda)) throw std::invalid_argument("check_carlson_levin: branch does not match lambda");
  if (!(lambda > lambda_threshold(n, p))) throw std::invalid_argument("check_carlson_levin: lambda must exceed n/(n+p)");
  auto r = start("check_carlson_levin", opts, n, 1, p, lambda);
  r.params["f"] = f.name;
  use_tolerance(r, opts, kTolEqQuadrature);
  const double tol = 1e-10;
  const double area = sphere_area(n);
  auto radial = [&](double order, const Fn1& g) { return Estimate::from(radial_integral(order, g, tol, f.cutoff)) * area; };
  Estimate i0, ip, il;
  try {
    i0 = radial(n, f.phi);
    ip = radial(n + p, f.phi);
    if (branch == CarlsonLevinBranch::log)
      il = radial(n, [&](double s) {
        const double v = f.phi(s);
        return v > 0.0 ? v * std::log(v) : 0.0;
      });
    else
      il = radial(n, [&](double s) { return pow_nonneg(f.phi(s), lambda); });
  } catch (const std::runtime_error& e) {
    r.note = std::string("divergent integral: ") + e.what();
    r.lhs.valid = r.rhs.valid = false;
    settle(r);
    return r;
  }
  const double dn = std::pow(d_sharp(n, p, lambda), n / p) / area;
  switch (branch) {
    case CarlsonLevinBranch::below_one: {
      const double e = n * (1.0 - lambda) / (p * lambda);
      r.lhs = pow(i0, 1.0 - e) * pow(ip, e);
      r.rhs = pow(il, 1.0 / lambda) * std::pow(dn, (1.0 - lambda) / lambda);
      break;
    }
    case CarlsonLevinBranch::above_one: {
      const double den = n * (lambda - 1.0) + p * lambda;
      r.lhs = pow(il, p / den) * pow(ip, n * (lambda - 1.0) / den);
      r.rhs = i0 * std::pow(dn, p * (lambda - 1.0) / den);
      break;
    }
    case CarlsonLevinBranch::log: {
      r.lhs = ip;
      const double ent = il.value / i0.value;
      Estimate e = Estimate::exact(std::exp(-(p / n) * ent));
      e.error_bound = e.value * (p / n) *
                      (std::abs(il.error_bound / i0.value) + std::abs(ent) * std::abs(i0.error_bound / i0.value));
      r.rhs = e * pow(i0, (n + p) / n) * (d_sharp(n, p, 1.0) / std::pow(area, p / n));
      break;
    }
  }
  settle(r);
  return r;
}

// Ball bodies -------------------------------------------------------------------

Estimate ball_body_term(const GaussianSpec& g, double p, Method method, const Budget& budget) {
  if (g.m() != 1) throw std::invalid_argument("ball_body_term: vector law required");
  const int n = g.n();
  const double q = n + p;
  const double support = g.radial_law().support();
  const Matrix a_inv_t = g.a().inverse().transpose();
  std::vector<Vec> kinks;
  for (const auto& z : g.gauge().kinks) kinks.push_back(a_inv_t * std::span<const double>(z));
  const PointFn density = [&](std::span<const double> x) { return g.density(x); };
  const double tol = method == Method::exact ? std::max(budget.tol * 1e-2, 1e-12) : 1e-10;
  bool converged = true;
  const auto s = sphere_integrate(
      n,
      [&](std::span<const double> theta) {
        const double c = g.contour(theta);
        const double cutoff = std::isfinite(support) ? support / c : kInf;
        const auto rad = ball_body_radial(density, q, theta, tol, cutoff);
        if (!rad.converged) converged = false;
        return std::pow(rad.value, n);
      },
      method, budget, kinks);
  Estimate out = pow(s, q / n);
  out.valid = out.valid && converged;
  return out;
}

namespace {

nlohmann::json spec_json(const GaussianSpec& g) {
  return {{"law", g.describe()}, {"A", matrix_json(g.a())}};
}

}  // namespace

CheckReport check_prop_ball_entropy(double p, double lambda, const GaussianSpec& g, const CheckOptions& opts) {
  const int n = g.n();
  if (!(lambda > lambda_threshold(n, p))) throw std::invalid_argument("check_prop_ball_entropy: lambda must exceed n/(n+p)");
  auto r = start("check_prop_ball_entropy", opts, n, 1, p, lambda);
  r.params["g"] = spec_json(g);
  const Method method = outer_method(opts, n);
  use_tolerance(r, opts, path_tolerance(method));
  r.lhs = ball_body_term(g, p, method, opts.budget);
  r.rhs = pow(renyi_entropy_power(g, lambda), p) * d_sharp(n, p, lambda);
  settle(r);
  return r;
}

CheckReport check_jensen_ball(double p, const GaussianSpec& g, const CheckOptions& opts) {
  const int n = g.n();
  auto r = start("check_jensen_ball", opts, n, 1, p, g.lambda());
  r.params["g"] = spec_json(g);
  const Method method = outer_method(opts, n);
  use_tolerance(r, opts, path_tolerance(method));
  r.lhs = pth_moment(g, p, {}, method, with_seed(opts.budget, 1)) * std::pow(n * omega(n), p / n);
  r.rhs = ball_body_term(g, p, method, with_seed(opts.budget, 2));
  settle(r);
  return r;
}

CheckReport check_moment_entropy_vec(double p, double lambda, const GaussianSpec& y, const CheckOptions& opts) {
  const int n = y.n();
  if (!(lambda > lambda_threshold(n, p))) throw std::invalid_argument("check_moment_entropy_vec: lambda must exceed n/(n+p)");
  auto r = start("check_moment_entropy_vec", opts, n, 1, p, lambda);
  r.params["Y"] = spec_json(y);
  const Method method = outer_method(opts, n);
  use_tolerance(r, opts, path_tolerance(method));
  const auto z = GaussianSpec::standard(n, p, lambda);
  r.lhs = pth_moment(y, p, {}, method, opts.budget) / pth_moment(z, p);
  r.rhs = pow(renyi_entropy_power(y, lambda) / renyi_entropy_power(z, lambda), p);
  settle(r);
  return r;
}

// Theorem on the sphere ---------------------------------------------------------

SpherePair theorem_sphere_extremizers(int n, const BodySpec& q, double p, const Matrix& a_for_f,
                                      const Matrix& a_for_g) {
  const int m = q.dim();
  const MatrixShape shape{n, m};
  auto body = std::make_shared<const PolarProjectionBody>(BodySpec::ball(n), q, p);
  const Matrix f_inv = a_for_f.inverse();
  const Matrix g_t = a_for_g.transpose();
  SpherePair out;
  out.f = [=](std::span<const double> u) {
    double buf[kMaxDim];
    std::span<double> au(buf, static_cast<std::size_t>(n * m));
    shape.left_multiply(f_inv, u, au);
    return std::pow(body->gauge(au), -(n * m + p));
  };
  out.g = [=](std::span<const double> v) { return std::pow(norm2(g_t * v), -(n + p)); };
  return out;
}

CheckReport check_theorem_sphere(int n, int m, double p, const BodySpec& q, const SphereFn& f, const SphereFn& g,
                                 const CheckOptions& opts) {
  if (q.dim() != m) throw std::invalid_argument("check_theorem_sphere: Q must lie in R^m");
  auto r = start("check_theorem_sphere", opts, n, m, p, 1.0);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  const int d = n * m;
  SphereFn fs = f;
  if (!q.symmetric()) {
    fs = [f, d](std::span<const double> u) {
      double buf[kMaxDim];
      for (int i = 0; i < d; ++i) buf[i] = -u[i];
      return 0.5 * (f(u) + f(std::span<const double>(buf, static_cast<std::size_t>(d))));
    };
    r.note = "f symmetrized (Q not symmetric)";
  }
  const Method outer = outer_method(opts, d);
  use_tolerance(r, opts, path_tolerance(outer));
  r.lhs = double_sphere_integral(n, m, p, q, fs, g, outer, with_seed(opts.budget, 1));
  const Estimate nf = lq_sphere_norm(fs, static_cast<double>(d) / (d + p), d, outer, with_seed(opts.budget, 2));
  const Estimate ng = lq_sphere_norm(g, static_cast<double>(n) / (n + p), n, Method::exact, opts.budget);
  const Estimate vol = ppb_ball_volume(n, q, p);
  r.rhs = nf * ng * pow(vol * static_cast<double>(d), -p / d) * std::pow(n * omega(n), -(n + p) / n);
  settle(r);
  return r;
}

// Lemma on star bodies ----------------------------------------------------------

StarPair lzbs_extremizers(int n, const BodySpec& q, double p, const Matrix& a_k, const Matrix& a_l) {
  StarPair out;
  out.l = PolarProjectionBody(BodySpec::ellipsoid(a_l), q, p).star();
  const Matrix at = a_k.transpose();
  out.k = StarFunction{n, [at](std::span<const double> v) { return 1.0 / norm2(at * v); }, kInf, {}};
  return out;
}

CheckReport check_lemma_LZBS(int n, int m, double p, const BodySpec& q, const StarFunction& k,
                             const StarFunction& l, const CheckOptions& opts) {
  if (q.dim() != m || k.dim != n || l.dim != n * m) throw std::invalid_argument("check_lemma_LZBS: dimension mismatch");
  const int d = n * m;
  if (!q.symmetric() && !probe_even(l.rho, d, opts.budget.seed))
    throw std::invalid_argument("check_lemma_LZBS: Q or L must be symmetric");
  auto r = start("check_lemma_LZBS", opts, n, m, p, 1.0);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  const Method outer = outer_method(opts, d);
  use_tolerance(r, opts, path_tolerance(outer));
  const SphereFn f = [&](std::span<const double> u) { return std::pow(l(u), d + p); };
  const SphereFn g = [&](std::span<const double> v) { return std::pow(k(v), n + p); };
  r.lhs = double_sphere_integral(n, m, p, q, f, g, outer, with_seed(opts.budget, 1)) * (1.0 / ((n + p) * (d + p)));
  const Estimate vol_k = star_volume(k, Method::exact, opts.budget);
  const Estimate vol_l = star_volume(l, outer, with_seed(opts.budget, 2));
  const Estimate vol_pb = ppb_ball_volume(n, q, p);
  const Estimate k_ratio = vol_k * (1.0 / omega(n));
  const Estimate inner = vol_l / vol_pb * pow(k_ratio, m);
  r.rhs = vol_l * k_ratio * pow(inner, p / d) * (static_cast<double>(d) / ((n + p) * (d + p)));
  settle(r);
  return r;
}

// Main theorem ------------------------------------------------------------------

CheckReport check_theorem_main(int n, int m, double p, double lambda, const BodySpec& q, const GaussianSpec& x,
                               const GaussianSpec& y, const CheckOptions& opts) {
  const int d = n * m;
  if (q.dim() != m || x.n() != n || x.m() != m || y.n() != n || y.m() != 1)
    throw std::invalid_argument("check_theorem_main: shapes do not match");
  if (!(lambda > lambda_threshold(d, p)))
    throw std::invalid_argument("check_theorem_main: lambda must exceed nm/(nm+p) strictly");
  if (!q.symmetric()) {
    const SphereFn cx = [&](std::span<const double> u) { return x.contour(u); };
    if (!probe_even(cx, d, opts.budget.seed)) throw std::invalid_argument("check_theorem_main: X must be even or Q symmetric");
  }
  auto r = start("check_theorem_main", opts, n, m, p, lambda);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  r.params["X"] = spec_json(x);
  r.params["Y"] = spec_json(y);
  use_tolerance(r, opts, kTolEqMC);
  const auto cx = sample(x, opts.budget.samples, derive_seed(opts.budget.seed, 1));
  const auto cy = sample(y, opts.budget.samples, derive_seed(opts.budget.seed, 2));
  r.lhs = Estimate::from(expectation_hQ(cx, cy, q, p));
  const bool shared = x.q() && x.q()->key() == q.key() && x.p() == p;
  Estimate vol = shared ? x.gauge().unit_volume : ppb_ball_volume(n, q, p);
  Estimate nx = renyi_entropy_power(x, lambda);
  if (shared) {
    // The gauge volume enters N(X)^p and the constant with opposite powers.
    vol.std_error = 0.0;
    nx.std_error = 0.0;
    r.note = "gauge volume cancels";
  }
  const Estimate ny = renyi_entropy_power(y, lambda);
  const double constant = d_sharp(n, p, lambda) * d_sharp(d, p, lambda) * std::pow(n * omega(n), -(n + p) / n);
  r.rhs = pow(vol * static_cast<double>(d), -p / d) * pow(nx * ny, p) * constant;
  settle(r);
  return r;
}

CheckReport check_theorem_main_constant(int n, double p, double lambda, const CheckOptions& opts) {
  auto r = start("check_theorem_main_constant", opts, n, 1, p, lambda);
  r.q_kind = "interval";
  use_tolerance(r, opts, kTolEqQuadrature);
  const double dd = d_sharp(n, p, lambda);
  const double w = n * omega(n);
  const Estimate vol = ppb_ball_volume(n, BodySpec::interval(1.0, 1.0), p, Method::exact, opts.budget);
  r.lhs = pow(vol * static_cast<double>(n), -p / n) * (dd * dd * std::pow(w, -(n + p) / n));
  const double closed = 2 * omega(n - 2 + p) / (std::pow(w, p / n) * omega(p - 1));
  r.rhs = Estimate::exact(std::pow(w, -(n + p) / n) * closed * dd * dd);
  settle(r);
  return r;
}

// Affine moments ------------------------------------------------------------------

CheckReport check_affine_moment(int m, double p, double lambda, const BodySpec& q, const GaussianSpec& y,
                                const CheckOptions& opts) {
  const int n = y.n();
  const int d = n * m;
  if (q.dim() != m || y.m() != 1) throw std::invalid_argument("check_affine_moment: shapes do not match");
  if (!q.symmetric() || !q.origin_interior())
    throw std::invalid_argument("check_affine_moment: Q must be symmetric with the origin inside");
  if (!(lambda > lambda_threshold(d, p))) throw std::invalid_argument("check_affine_moment: lambda must exceed nm/(nm+p)");
  auto r = start("check_affine_moment", opts, n, m, p, lambda);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  r.params["Y"] = spec_json(y);
  use_tolerance(r, opts, kTolEqNestedMC);
  const auto cloud = sample(y, opts.budget.samples, derive_seed(opts.budget.seed, 1));
  const Estimate mq = affine_moment_MQp(cloud, q, p, m, outer_method(opts, d), with_seed(opts.budget, 2));
  r.lhs = mq / pow(renyi_entropy_power(y, lambda), p);
  r.lhs.samples = opts.budget.samples;
  r.rhs = Estimate::exact(d_sharp(n, p, lambda));
  settle(r);
  return r;
}

// Reverse Hoelder -----------------------------------------------------------------

Grid Grid::gauss_legendre(double a, double b, int panels) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  Grid g;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double c = a + (k + 0.5) * h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      g.x.push_back(c - 0.5 * h * x[i]);
      g.w.push_back(0.5 * h * w[i]);
      if (x[i] != 0.0) {
        g.x.push_back(c + 0.5 * h * x[i]);
        g.w.push_back(0.5 * h * w[i]);
      }
    }
  }
  return g;
}

CheckReport check_reverse_holder(double q, const Vec& f, const Vec& g, const Grid& grid, const CheckOptions& opts) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("check_reverse_holder: q must lie in (0, 1)");
  if (f.size() != grid.w.size() || g.size() != grid.w.size())
    throw std::invalid_argument("check_reverse_holder: f, g and the grid differ in length");
  const double rr = q / (q - 1.0);
  double fg = 0.0, fq = 0.0, gr = 0.0;
  for (std::size_t i = 0; i < grid.w.size(); ++i) {
    if (f[i] < 0.0) throw std::domain_error("check_reverse_holder: f must be nonnegative");
    if (!(g[i] > 0.0)) throw std::domain_error("check_reverse_holder: g must be positive");
    fg += grid.w[i] * f[i] * g[i];
    fq += grid.w[i] * std::pow(f[i], q);
    gr += grid.w[i] * std::pow(g[i], rr);
  }
  auto r = start("check_reverse_holder", opts, 1, 1, q, 1.0);
  r.params["q"] = q;
  r.params["r"] = rr;
  r.params["grid_points"] = grid.w.size();
  use_tolerance(r, opts, kTolEqQuadrature);
  r.lhs = Estimate::exact(fg);
  r.rhs = Estimate::exact(std::pow(fq, 1.0 / q) * std::pow(gr, 1.0 / rr));
  settle(r);
  return r;
}

CheckReport check_reverse_holder(double q, const Fn1& f, const Fn1& g, const Grid& grid, const CheckOptions& opts) {
  Vec fv, gv;
  for (double x : grid.x) {
    fv.push_back(f(x));
    gv.push_back(g(x));
  }
  return check_reverse_holder(q, fv, gv, grid, opts);
}

// Dual Minkowski for random vectors -------------------------------------------------

ContourGauge data_contour(const SampleCloud& y, const BodySpec& q, double p, int m, Method method,
                          const Budget& budget) {
  if (y.shape.m != 1 || q.dim() != m) throw std::invalid_argument("data_contour: shapes do not match");
  const int n = y.dim();
  const int d = n * m;
  const MatrixShape shape{n, m};
  auto cloud = std::make_shared<const SampleCloud>(y);
  ContourGauge g;
  g.dim = d;
  g.eval = [cloud, q, p, shape](std::span<const double> x) { return data_gauge(*cloud, q, p, shape, x); };
  g.unit_volume = sphere_integrate_dense_kinks(
                      d, [&](std::span<const double> u) { return std::pow(g.eval(u), -d); }, method, budget) *
                  (1.0 / d);
  // Smallest gauge value on the sphere, from a grid (d = 2) or random directions.
  double lo = kInf;
  Vec u(static_cast<std::size_t>(d));
  if (d == 1) {
    u[0] = 1.0;
    lo = g.eval(u);
    u[0] = -1.0;
    lo = std::min(lo, g.eval(u));
  } else if (d == 2) {
    for (int i = 0; i < 2048; ++i) {
      u[0] = std::cos(2 * kPi * i / 2048);
      u[1] = std::sin(2 * kPi * i / 2048);
      lo = std::min(lo, g.eval(u));
    }
  } else {
    Rng rng = make_stream(budget.seed, 91);
    for (int i = 0; i < 4096; ++i) {
      uniform_direction(rng, u);
      lo = std::min(lo, g.eval(u));
    }
  }
  const double safety = d <= 2 ? 0.97 : 0.85;
  g.outer_radius = 1.0 / (safety * lo);
  g.euclidean = false;
  std::ostringstream os;
  os << "data_gauge(Y=" << y.provenance << ", |Y|=" << y.size() << ", Q=" << q.describe() << ", p=" << p << ")";
  g.name = os.str();
  return g;
}

CheckReport check_min_first_random(int m, double p, double lambda, const BodySpec& q, const GaussianSpec& x,
                                   const SampleCloud& y, const CheckOptions& opts) {
  const int n = y.dim();
  const int d = n * m;
  if (y.shape.m != 1 || x.n() != n || x.m() != m || q.dim() != m)
    throw std::invalid_argument("check_min_first_random: shapes do not match");
  if (!(lambda > lambda_threshold(d, p))) throw std::invalid_argument("check_min_first_random: lambda must exceed nm/(nm+p)");
  auto r = start("check_min_first_random", opts, n, m, p, lambda);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  r.params["X"] = spec_json(x);
  r.params["Y"] = {{"provenance", y.provenance}, {"size", y.size()}, {"seed", y.seed}};
  const Method outer = outer_method(opts, d);
  use_tolerance(r, opts, outer == Method::exact ? kTolEqMC : kTolEqNestedMC);
  const MatrixShape shape{n, m};
  const auto cx = sample(x, opts.budget.samples, derive_seed(opts.budget.seed, 1));
  MomentAccumulator acc(1);
  for (std::size_t i = 0; i < cx.size(); ++i) {
    const double v[1] = {std::pow(data_gauge(y, q, p, shape, cx.point(i)), p)};
    acc.add(v);
  }
  r.lhs = Estimate::from(to_estimate(acc, 0, cx.seed));
  Estimate integral = sphere_integrate_dense_kinks(
      d, [&](std::span<const double> u) { return std::pow(data_gauge(y, q, p, shape, u), -d); }, outer,
      with_seed(opts.budget, 2));
  Estimate nx = renyi_entropy_power(x, lambda);
  // X contoured by the same gauge: its volume cancels against the integral.
  if (x.gauge().unit_volume.value == (integral * (1.0 / d)).value && x.gauge().unit_volume.std_error > 0.0) {
    integral.std_error = 0.0;
    nx.std_error = 0.0;
    r.note = "gauge volume cancels";
  }
  r.rhs = pow(nx, p) * pow(integral, -p / d) * d_sharp(d, p, lambda);
  settle(r);
  return r;
}

// Corollary at p = lambda = inf ------------------------------------------------------

CheckReport check_corollary_infty(int n, int m, const BodySpec& q, const StarFunction& l, const StarFunction& k,
                                  const CheckOptions& opts) {
  const int d = n * m;
  if (q.dim() != m || l.dim != d || k.dim != n) throw std::invalid_argument("check_corollary_infty: dimension mismatch");
  if (!q.symmetric() && !probe_even(l.rho, d, opts.budget.seed))
    throw std::invalid_argument("check_corollary_infty: Q or L must be symmetric");
  auto r = start("check_corollary_infty", opts, n, m, kInf, kInf);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  use_tolerance(r, opts, kTolEqNestedMC);
  const MatrixShape shape{n, m};
  auto value = [&](std::span<const double> u, std::span<const double> v) {
    double a[kMaxDim], w[kMaxDim];
    const double rl = l(u);
    const double rk = k(v);
    for (int i = 0; i < d; ++i) a[i] = rl * u[i];
    shape.transpose_apply(std::span<const double>(a, static_cast<std::size_t>(d)), v,
                          std::span<double>(w, static_cast<std::size_t>(m)));
    return rk * q.support(std::span<const double>(w, static_cast<std::size_t>(m)));
  };
  Rng rng = make_stream(opts.budget.seed, 1);
  Vec u(static_cast<std::size_t>(d)), v(static_cast<std::size_t>(n));
  Vec bu = u, bv = v;
  double best = -kInf;
  for (std::size_t i = 0; i < opts.budget.samples; ++i) {
    uniform_direction(rng, u);
    uniform_direction(rng, v);
    const double val = value(u, v);
    if (val > best) {
      best = val;
      bu = u;
      bv = v;
    }
  }
  const double sampled = best;
  // Local search from the best sample with a shrinking step.
  std::normal_distribution<double> gauss;
  double step = 0.1;
  int stale = 0;
  int iterations = 0;
  while (step > 1e-9 && iterations < 20000) {
    ++iterations;
    for (int i = 0; i < d; ++i) u[i] = bu[i] + step * gauss(rng);
    for (int i = 0; i < n; ++i) v[i] = bv[i] + step * gauss(rng);
    const double su = norm2(u), sv = norm2(v);
    for (auto& x : u) x /= su;
    for (auto& x : v) x /= sv;
    const double val = value(u, v);
    if (val > best) {
      best = val;
      bu = u;
      bv = v;
      stale = 0;
    } else if (++stale > 30) {
      step *= 0.5;
      stale = 0;
    }
  }
  r.params["max_sampled"] = sampled;
  r.params["max_refined"] = best;
  r.params["refine_iterations"] = iterations;
  const StarFunction pinf{d,
                          [&](std::span<const double> x) { return 1.0 / ppb_infinity_gauge(q, shape, x); },
                          kInf,
                          {}};
  const Estimate vol_inf = star_volume(pinf, default_method(d), with_seed(opts.budget, 2));
  r.lhs = vol_inf * (std::pow(omega(n), m) * std::pow(best, d));
  r.lhs.method = merge_methods(vol_inf.method, "sampled-max");
  r.rhs = star_volume(l, default_method(d), with_seed(opts.budget, 3)) *
          pow(star_volume(k, default_method(n), with_seed(opts.budget, 4)), m);
  r.mc_samples = opts.budget.samples;
  settle(r);
  return r;
}

// Volumes ------------------------------------------------------------------------------

CheckReport check_dual_minkowski(const StarFunction& k, const StarFunction& l, double p, const CheckOptions& opts) {
  if (k.dim != l.dim) throw std::invalid_argument("check_dual_minkowski: dimension mismatch");
  const int d = k.dim;
  auto r = start("check_dual_minkowski", opts, d, 1, p, 1.0);
  const Method method = outer_method(opts, d);
  use_tolerance(r, opts, path_tolerance(method));
  r.lhs = pow(dual_mixed_volume(k, l, p, method, with_seed(opts.budget, 1)), d);
  r.rhs = pow(star_volume(k, method, with_seed(opts.budget, 2)), d + p) *
          pow(star_volume(l, method, with_seed(opts.budget, 3)), -p);
  settle(r);
  return r;
}

CheckReport check_theorem_D(int n, double p, const BodySpec& q, const BodySpec& k, const CheckOptions& opts) {
  const int m = q.dim();
  const int d = n * m;
  if (k.dim() != n) throw std::invalid_argument("check_theorem_D: K must lie in R^n");
  auto r = start("check_theorem_D", opts, n, m, p, 1.0);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  r.params["K"] = k.describe();
  const Method method = outer_method(opts, d);
  use_tolerance(r, opts, path_tolerance(method));
  const double e = static_cast<double>(d) / p - m;
  const PolarProjectionBody pb(BodySpec::ball(n), q, p);
  const PolarProjectionBody pk(k, q, p);
  r.lhs = ppb_volume(pb, method, with_seed(opts.budget, 1)) * std::pow(omega(n), e);
  r.rhs = ppb_volume(pk, method, with_seed(opts.budget, 2)) * std::pow(k.volume(), e);
  settle(r);
  return r;
}

CheckReport check_santalo(int n, double p, const BodySpec& q, const StarFunction& l, const CheckOptions& opts) {
  const int m = q.dim();
  const int d = n * m;
  if (l.dim != d) throw std::invalid_argument("check_santalo: L must lie in M_{n,m}");
  auto r = start("check_santalo", opts, n, m, p, 1.0);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  const MatrixShape shape{n, m};
  const bool nested_mc = d > 3;
  use_tolerance(r, opts, nested_mc ? kTolEqNestedMC : kTolEqQuadrature);
  Budget inner = with_seed(opts.budget, 10);
  inner.samples = std::max<std::size_t>(1000, opts.budget.samples / 100);
  const Method inner_method = default_method(d);

  const Estimate vol_l = star_volume(l, inner_method, with_seed(opts.budget, 1));
  Estimate vol_polar;
  if (!nested_mc) {
    const StarFunction polar{n,
                             [&](std::span<const double> u) {
                               return 1.0 / centroid_support(l, shape, q, p, u, inner_method, inner).value;
                             },
                             kInf,
                             {}};
    vol_polar = star_volume(polar, Method::exact, opts.budget);
  } else {
    // Outer directions times inner MC; the spread of the per-direction
    // values carries both noise sources.
    const std::size_t outer = std::max<std::size_t>(100, opts.budget.samples / 10000);
    const MomentAccumulator acc = run_chunked(outer, derive_seed(opts.budget.seed, 4), 1, [&](Rng& rng, std::span<double> out) {
      Vec u(static_cast<std::size_t>(n));
      uniform_direction(rng, u);
      Budget b = inner;
      b.seed = rng();
      out[0] = std::pow(centroid_support(l, shape, q, p, u, Method::mc, b).value, -n);
    });
    vol_polar = Estimate::from(to_estimate(acc, 0, opts.budget.seed, sphere_area(n) / n));
    vol_polar.samples = outer * inner.samples;
  }
  const auto pb = PolarProjectionBody(BodySpec::ball(n), q, p).star();
  Vec e1(static_cast<std::size_t>(n), 0.0);
  e1[0] = 1.0;
  Budget gb = with_seed(opts.budget, 5);
  gb.samples = std::max<std::size_t>(inner.samples, 100000);
  const Estimate h_gamma = centroid_support(pb, shape, q, p, e1, inner_method, gb);
  const Estimate vol_gamma = pow(h_gamma, n) * omega(n);
  const Estimate vol_pb = ppb_ball_volume(n, q, p);
  r.lhs = pow(vol_pb, 1.0 / m) / vol_gamma * (omega(n) * omega(n));
  r.rhs = pow(vol_l, 1.0 / m) * vol_polar;
  settle(r);
  return r;
}

CheckReport check_elipp_cal(int n, double p, const BodySpec& q, const Vec& v, const CheckOptions& opts) {
  const int m = q.dim();
  const int d = n * m;
  if (static_cast<int>(v.size()) != n) throw std::invalid_argument("check_elipp_cal: v must lie in R^n");
  auto r = start("check_elipp_cal", opts, n, m, p, 1.0);
  r.q_kind = q_kind(q);
  r.params["Q"] = q.describe();
  r.params["v"] = v;
  const Method method = outer_method(opts, d);
  use_tolerance(r, opts, path_tolerance(method));
  const auto l = PolarProjectionBody(BodySpec::ball(n), q, p).star();
  r.lhs = centroid_support(l, {n, m}, q, p, v, method, opts.budget);
  r.rhs = Estimate::exact(std::pow(m / (omega(n) * (d + p)), 1.0 / p) * norm2(v));
  settle(r);
  return r;
}

// Constants ------------------------------------------------------------------------------

CheckReport check_c_norm(int n, double p, double lambda, const CheckOptions& opts) {
  auto r = start("check_c_norm", opts, n, 1, p, lambda);
  use_tolerance(r, opts, kTolEqQuadrature);
  r.lhs = Estimate::exact(c_norm(n, p, lambda));
  r.rhs = Estimate::from(radial_integral(n, [&](double s) { return profile(p, lambda, s); }, 1e-12,
                                         profile_support(p, lambda))) *
          sphere_area(n);
  settle(r);
  return r;
}

CheckReport check_ppb_radius(int n, double p, const Vec& theta, const CheckOptions& opts) {
  auto r = start("check_ppb_radius", opts, n, 1, p, 1.0);
  r.q_kind = "interval";
  r.params["theta"] = theta;
  use_tolerance(r, opts, kTolEqQuadrature);
  const PolarProjectionBody body(BodySpec::ball(n), BodySpec::interval(1.0, 1.0), p, Method::exact);
  r.lhs = body.gauge_estimate(theta);
  r.rhs = Estimate::exact(std::pow(2 * omega(n + p - 2) / omega(p - 1), 1.0 / p) * norm2(theta));
  settle(r);
  return r;
}

CheckReport check_d_limit(int n, double p, const CheckOptions& opts) {
  auto r = start("check_d_limit", opts, n, 1, p, 1.0);
  use_tolerance(r, opts, 0.01);
  r.lhs = Estimate::exact(std::pow(d_base(n, p), n / p));
  r.rhs = Estimate::exact(n);
  settle(r);
  return r;
}

CheckReport check_uniform_entropy(const ContourGauge& gauge, std::size_t count, const CheckOptions& opts) {
  const int d = gauge.dim;
  auto r = start("check_uniform_entropy", opts, d, 1, 1.0, kLambdaInfinity);
  r.params["gauge"] = gauge.name;
  use_tolerance(r, opts, kTolEqQuadrature);
  const auto spec = GaussianSpec::uniform(gauge, {d, 1});
  const auto cloud = sample(spec, count, opts.budget.seed);
  const PointFn f = [&](std::span<const double> x) { return spec.density(x); };
  r.lhs = Estimate::from(renyi_entropy_power(cloud, f, kLambdaInfinity));
  r.rhs = pow(gauge.unit_volume, 1.0 / d);
  r.mc_samples = count;
  settle(r);
  return r;
}

// Random inputs ------------------------------------------------------------------------

SphereFn random_sphere_function(int d, Rng& rng) {
  std::uniform_real_distribution<double> coef(-0.3, 0.3);
  std::array<double, 4> a{};
  std::vector<Vec> w(4, Vec(static_cast<std::size_t>(d)));
  for (int k = 0; k < 4; ++k) {
    a[k] = coef(rng);
    uniform_direction(rng, w[k]);
  }
  return [a, w](std::span<const double> u) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += a[k] * chebyshev(k + 1, std::clamp(dot(w[k], u), -1.0, 1.0));
    return std::exp(s);
  };
}

StarFunction random_star(int d, Rng& rng) { return StarFunction{d, random_sphere_function(d, rng), kInf, {}}; }

RadialProfile random_radial_density(int n, double p, double lambda, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Term {
    bool algebraic;
    double w, s, e;
  };
  std::vector<Term> terms;
  const double k_min = std::max((n + p) / 2.0, n / (2.0 * std::min(1.0, lambda)));
  std::ostringstream os;
  for (int i = 0; i < 2; ++i) {
    Term t{};
    t.algebraic = unit(rng) < 0.4;
    t.w = 0.2 + 0.8 * unit(rng);
    t.s = std::exp(unit(rng) - 0.5);
    t.e = t.algebraic ? k_min + 0.5 + 2.5 * unit(rng) : 0.5 + 2.5 * unit(rng);
    os << (i ? " + " : "") << t.w << (t.algebraic ? "(1+(r/" : "exp(-(r/") << t.s
       << (t.algebraic ? ")^2)^-" : ")^") << t.e << (t.algebraic ? "" : ")");
    terms.push_back(t);
  }
  RadialProfile f;
  f.phi = [terms](double r) {
    double v = 0.0;
    for (const auto& t : terms) {
      const double x = r / t.s;
      v += t.algebraic ? t.w * std::pow(1.0 + x * x, -t.e) : t.w * std::exp(-std::pow(x, t.e));
    }
    return v;
  };
  f.name = os.str();
  return f;
}

Matrix random_matrix(int n, Rng& rng, double s) {
  std::normal_distribution<double> gauss;
  auto rotation = [&]() {
    std::vector<Vec> cols;
    while (static_cast<int>(cols.size()) < n) {
      Vec c(static_cast<std::size_t>(n));
      for (auto& x : c) x = gauss(rng);
      for (const auto& b : cols) {
        const double t = dot(b, c);
        for (int i = 0; i < n; ++i) c[i] -= t * b[i];
      }
      const double len = norm2(c);
      if (len < 1e-8) continue;
      for (auto& x : c) x /= len;
      cols.push_back(c);
    }
    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = cols[j][i];
    return q;
  };
  Vec diag(static_cast<std::size_t>(n));
  for (auto& x : diag) x = std::exp(s * gauss(rng));
  return rotation() * Matrix::diagonal(diag) * rotation();
}

GaussianSpec random_vector_spec(int n, double p, double lambda, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Matrix a = random_matrix(n, rng);
  const int kind = static_cast<int>(unit(rng) * 4);
  const ContourGauge cube = ContourGauge::of_body(BodySpec::cube(n));
  if (kind == 1) return GaussianSpec::uniform(ContourGauge::euclidean_norm(n), {n, 1}).linear_image(a);
  if (kind == 2) return GaussianSpec::uniform(cube, {n, 1}).linear_image(a);
  for (;;) {
    const double pp = 1.0 + 2.0 * unit(rng);
    const double u = unit(rng);
    const double lam = u < 0.3 ? 0.8 + 0.2 * unit(rng) : (u < 0.6 ? 1.0 : 1.2 + 1.8 * unit(rng));
    if (!(lam > lambda_threshold(n, pp))) continue;
    if (lam < 1.0) {
      if (!(p < pp / (1.0 - lam) - n)) continue;
      if (!is_lambda_infinite(lambda) && !(lambda * pp / (1.0 - lam) > n)) continue;
    }
    const ContourGauge g = kind == 3 ? cube : ContourGauge::euclidean_norm(n);
    return GaussianSpec(g, {n, 1}, pp, lam).linear_image(a);
  }
}

}  // namespace affine
