#include "affine/operators.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "affine/quadrature.hpp"
#include "affine/scalar_kernels.hpp"

namespace affine {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Theta z as a vector of R^n, for Theta in column-stacked form.
Vec combine_columns(MatrixShape shape, std::span<const double> theta, std::span<const double> z) {
  Vec out(static_cast<std::size_t>(shape.n), 0.0);
  for (int j = 0; j < shape.m; ++j)
    for (int i = 0; i < shape.n; ++i) out[i] += theta[static_cast<std::size_t>(j) * shape.n + i] * z[j];
  return out;
}

// vec(v z^t): the normal of {U : z . (U^t v) = 0}.
Vec outer_flat(std::span<const double> v, std::span<const double> z) {
  Vec out(v.size() * z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    for (std::size_t i = 0; i < v.size(); ++i) out[j * v.size() + i] = v[i] * z[j];
  return out;
}

double abs_moment_constant(int n, double p) { return 2.0 * omega(n + p - 2.0) / omega(p - 1.0); }

}  // namespace

PolarProjectionBody::PolarProjectionBody(BodySpec k, BodySpec q, double p, Method inner, Budget budget)
    : k_(std::move(k)), q_(std::move(q)), p_(p), inner_(inner), budget_(budget) {
  if (!(p_ >= 1.0)) throw std::invalid_argument("PolarProjectionBody: p must be >= 1");
  if (!k_.origin_interior()) throw std::invalid_argument("PolarProjectionBody: K must contain the origin in its interior");
  if (m() > kMaxDim || flat_dim() > kMaxDim) throw std::invalid_argument("PolarProjectionBody: dimensions too large");
  measure_ = k_.surface_measure();
  if (measure_.type == SurfaceMeasure::Type::atomic && p_ > 1.0)
    for (const auto& f : measure_.atoms)
      if (f.offset <= 0.0) throw std::invalid_argument("PolarProjectionBody: h_K vanishes at a facet normal");
  q_kinks_ = q_.support_kinks();
}

PolarProjectionBody::PolarProjectionBody(BodySpec k, BodySpec q, double p)
    : PolarProjectionBody(k, std::move(q), p, default_method(k.dim())) {}

Estimate PolarProjectionBody::gauge_estimate(std::span<const double> theta) const {
  if (static_cast<int>(theta.size()) != flat_dim()) throw std::invalid_argument("ppb_gauge: Theta has the wrong size");
  const MatrixShape sh = shape();
  const int nn = n();
  const int mm = m();

  auto sphere_part = [&](std::span<const double> th) {
    std::vector<Vec> kinks;
    if (inner_ == Method::exact)
      for (const auto& z : q_kinks_) {
        Vec w = combine_columns(sh, th, z);
        if (norm2(w) > 0.0) kinks.push_back(std::move(w));
      }
    const double pp = p_;
    const BodySpec& q = q_;
    return sphere_integrate(
        nn,
        [&, pp](std::span<const double> xi) {
          double w[kMaxDim];
          std::span<double> ws(w, static_cast<std::size_t>(mm));
          sh.transpose_apply(th, xi, ws);
          return pow_nonneg(q.support(ws), pp);
        },
        inner_, budget_, kinks);
  };

  Estimate integral;
  switch (measure_.type) {
    case SurfaceMeasure::Type::uniform: {
      integral = sphere_part(theta) * std::pow(measure_.radius, nn - p_);
      break;
    }
    case SurfaceMeasure::Type::ellipsoid: {
      const Matrix a_inv = measure_.a.inverse();
      Vec moved(theta.size());
      sh.left_multiply(a_inv, theta, moved);
      integral = sphere_part(moved) * std::abs(measure_.a.determinant());
      break;
    }
    case SurfaceMeasure::Type::atomic: {
      double s = 0.0;
      double w[kMaxDim];
      std::span<double> ws(w, static_cast<std::size_t>(mm));
      for (const auto& f : measure_.atoms) {
        sh.transpose_apply(theta, f.normal, ws);
        const double h = q_.support(ws);
        if (h > 0.0) s += f.area * std::pow(h, p_) * std::pow(f.offset, 1.0 - p_);
      }
      integral = Estimate::exact(s);
      break;
    }
  }
  if (integral.value <= 0.0) {
    Estimate zero = integral;
    zero.value = 0.0;
    return zero;
  }
  return pow(integral, 1.0 / p_);
}

double PolarProjectionBody::frobenius_lower_bound() const {
  const int nn = n();
  const double r = q_.sym_inradius();
  double bound = abs_moment_constant(nn, p_) * std::pow(1.0 / m(), 0.5 * p_);
  if (p_ >= 2.0) bound = std::max(bound, nn * omega(nn) * std::pow(1.0 / nn, 0.5 * p_));
  const double ball_c = r * std::pow(bound, 1.0 / p_);
  switch (measure_.type) {
    case SurfaceMeasure::Type::uniform:
      return ball_c * std::pow(measure_.radius, (nn - p_) / p_);
    case SurfaceMeasure::Type::ellipsoid:
      return std::pow(std::abs(measure_.a.determinant()), 1.0 / p_) * ball_c / measure_.a.max_singular_value();
    case SurfaceMeasure::Type::atomic:
      break;
  }
  throw std::invalid_argument("frobenius_lower_bound: only for ball and ellipsoid sources");
}

std::vector<Vec> PolarProjectionBody::kinks() const {
  std::vector<Vec> out;
  if (measure_.type != SurfaceMeasure::Type::atomic) return out;
  for (const auto& f : measure_.atoms)
    for (const auto& z : q_kinks_) out.push_back(outer_flat(f.normal, z));
  return out;
}

StarFunction PolarProjectionBody::star() const {
  auto self = std::make_shared<const PolarProjectionBody>(*this);
  return StarFunction{flat_dim(), [self](std::span<const double> u) { return self->radial(u); }, kInf, kinks()};
}

std::string PolarProjectionBody::describe() const {
  std::ostringstream os;
  os << "ppb(K=" << k_.describe() << ", Q=" << q_.describe() << ", p=" << p_ << ", inner=" << to_string(inner_)
     << ")";
  return os.str();
}

Estimate ppb_volume(const PolarProjectionBody& body, Method outer, const Budget& budget) {
  return star_volume(body.star(), outer, budget);
}

Estimate ppb_ball_volume(int n, const BodySpec& q, double p, Method outer, const Budget& budget) {
  static std::mutex mu;
  static std::map<std::string, Estimate> cache;
  std::ostringstream key;
  key.precision(17);
  key << n << '|' << q.key() << '|' << p << '|' << to_string(outer) << '|' << budget.samples << '|'
      << budget.seed << '|' << budget.tol;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key.str()); it != cache.end()) return it->second;
  }
  const PolarProjectionBody body(BodySpec::ball(n), q, p);
  const Estimate v = ppb_volume(body, outer, budget);
  std::lock_guard lock(mu);
  cache.emplace(key.str(), v);
  return v;
}

Estimate ppb_ball_volume(int n, const BodySpec& q, double p, const Budget& budget) {
  return ppb_ball_volume(n, q, p, default_method(n * q.dim()), budget);
}

namespace {

// max_{x in Q} |U x| for U given as an n x m matrix.
double max_image_norm(const BodySpec& q, const Matrix& u) {
  auto image_norm = [&](std::span<const double> x) { return norm2(u * x); };
  return std::visit(
      Overloaded{
          [&](const body::Ball& b) { return b.radius * u.max_singular_value(); },
          [&](const body::Ellipsoid& e) { return (u * e.a).max_singular_value(); },
          [&](const body::Interval& i) { return std::max(i.lower, i.upper) * u.max_singular_value(); },
          [&](const body::Vertices& v) {
            double best = 0.0;
            for (const auto& x : v.points) best = std::max(best, image_norm(x));
            return best;
          },
          [&](const body::Facets&) -> double {
            throw std::invalid_argument("ppb_infinity_gauge: facet polytopes need vertices");
          },
          [&](const body::LqBall& l) -> double {
            const int m = q.dim();
            if (l.q == 2.0) return u.max_singular_value();
            if (l.q == 1.0) {
              double best = 0.0;
              for (int j = 0; j < m; ++j) {
                Vec e(static_cast<std::size_t>(m), 0.0);
                e[j] = 1.0;
                best = std::max(best, image_norm(e));
              }
              return best;
            }
            if (std::isinf(l.q)) {
              double best = 0.0;
              for (int mask = 0; mask < (1 << m); ++mask) {
                Vec e(static_cast<std::size_t>(m));
                for (int j = 0; j < m; ++j) e[j] = (mask >> j & 1) ? 1.0 : -1.0;
                best = std::max(best, image_norm(e));
              }
              return best;
            }
            throw std::invalid_argument("ppb_infinity_gauge: lq balls only for q in {1, 2, inf}");
          },
          [&](const body::Image& im) { return max_image_norm(*im.base, u * im.a); },
      },
      q.data());
}

}  // namespace

double ppb_infinity_gauge(const BodySpec& q, MatrixShape shape, std::span<const double> u) {
  if (q.dim() != shape.m) throw std::invalid_argument("ppb_infinity_gauge: Q has the wrong dimension");
  return max_image_norm(q, shape.unvec(u));
}

double ppb_infinity_gauge_sampled(const BodySpec& q, MatrixShape shape, std::span<const double> u,
                                  std::size_t samples, std::uint64_t seed) {
  const int n = shape.n;
  double w[kMaxDim];
  std::span<double> ws(w, static_cast<std::size_t>(shape.m));
  auto value = [&](std::span<const double> xi) {
    shape.transpose_apply(u, xi, ws);
    return q.support(ws);
  };
  if (n == 1) return std::max(value(Vec{1.0}), value(Vec{-1.0}));
  Rng rng = make_stream(seed, 0);
  Vec xi(static_cast<std::size_t>(n)), best(static_cast<std::size_t>(n)), trial(static_cast<std::size_t>(n));
  double best_v = -kInf;
  for (std::size_t s = 0; s < samples; ++s) {
    uniform_direction(rng, xi);
    const double v = value(xi);
    if (v > best_v) {
      best_v = v;
      best = xi;
    }
  }
  // Random local search with a shrinking step.
  std::normal_distribution<double> normal;
  double step = 0.1;
  for (int it = 0; it < 2000 && step > 1e-12; ++it) {
    for (int i = 0; i < n; ++i) trial[i] = best[i] + step * normal(rng);
    const double len = norm2(trial);
    for (auto& x : trial) x /= len;
    const double v = value(trial);
    if (v > best_v) {
      best_v = v;
      best = trial;
    } else if (it % 20 == 19) {
      step *= 0.5;
    }
  }
  return best_v;
}

Estimate centroid_support(const StarFunction& l, MatrixShape shape, const BodySpec& q, double p,
                          std::span<const double> v, Method method, const Budget& budget) {
  const int d = shape.flat_dim();
  if (l.dim != d) throw std::invalid_argument("centroid_support: L has the wrong dimension");
  if (static_cast<int>(v.size()) != shape.n) throw std::invalid_argument("centroid_support: v has the wrong size");
  auto h_part = [&](std::span<const double> u) {
    double w[kMaxDim];
    std::span<double> ws(w, static_cast<std::size_t>(shape.m));
    shape.transpose_apply(u, v, ws);
    return pow_nonneg(q.support(ws), p);
  };
  if (method == Method::exact) {
    std::vector<Vec> kinks = l.kinks;
    for (const auto& z : q.support_kinks()) kinks.push_back(outer_flat(v, z));
    const auto num = sphere_integrate_exact(
        d, [&](std::span<const double> u) { return std::pow(l(u), d + p) * h_part(u); }, budget.tol, kinks);
    const auto den =
        sphere_integrate_exact(d, [&](std::span<const double> u) { return std::pow(l(u), d); }, budget.tol, l.kinks);
    if (!(den.value > 0.0)) throw std::invalid_argument("centroid_support: L has zero volume");
    Estimate r = Estimate::from(num) / Estimate::from(den);
    r = r * (static_cast<double>(d) / (d + p));
    return pow(r, 1.0 / p);
  }
  const auto acc = sphere_integrate_mc_multi(
      d, 2,
      [&](std::span<const double> u, std::span<double> out) {
        const double r = l(u);
        out[0] = std::pow(r, d + p) * h_part(u) / (d + p);
        out[1] = std::pow(r, d) / d;
      },
      budget.samples, budget.seed);
  if (!(acc.mean(1) > 0.0)) throw std::invalid_argument("centroid_support: L has zero volume");
  return pow(Estimate::from(ratio_of_means(acc, 0, 1, budget.seed)), 1.0 / p);
}

MCEstimate centroid_support(const SampleCloud& l, const BodySpec& q, double p, std::span<const double> v) {
  if (l.size() < 2) throw std::invalid_argument("centroid_support: the cloud needs at least two points");
  MomentAccumulator acc(1);
  double w[kMaxDim];
  std::span<double> ws(w, static_cast<std::size_t>(l.shape.m));
  for (std::size_t i = 0; i < l.size(); ++i) {
    l.shape.transpose_apply(l.point(i), v, ws);
    const double x = pow_nonneg(q.support(ws), p);
    acc.add(std::span<const double>(&x, 1));
  }
  const Estimate e = pow(Estimate::from(to_estimate(acc, 0, l.seed)), 1.0 / p);
  MCEstimate out;
  out.value = e.value;
  out.std_error = e.std_error;
  out.samples = l.size();
  out.seed = l.seed;
  return out;
}

QuadratureResult ball_body_radial(const std::function<double(std::span<const double>)>& f, double q,
                                  std::span<const double> theta, double tol, double cutoff) {
  if (!(q > 0.0)) throw std::invalid_argument("ball_body_radial: q must be positive");
  Vec x(theta.size());
  auto r = radial_integral(
      q,
      [&](double t) {
        for (std::size_t i = 0; i < theta.size(); ++i) x[i] = t * theta[i];
        return f(x);
      },
      tol, cutoff);
  const double rho = pow_nonneg(r.value, 1.0 / q);
  r.abs_error_bound = r.value > 0.0 ? rho * r.abs_error_bound / (q * r.value) : 0.0;
  r.value = rho;
  return r;
}

Estimate dual_mixed_volume(const StarFunction& k, const StarFunction& l, double p, Method method,
                           const Budget& budget) {
  if (k.dim != l.dim) throw std::invalid_argument("dual_mixed_volume: dimension mismatch");
  const int d = k.dim;
  std::vector<Vec> kinks = k.kinks;
  kinks.insert(kinks.end(), l.kinks.begin(), l.kinks.end());
  const auto integral = sphere_integrate(
      d, [&](std::span<const double> u) { return std::pow(k(u), d + p) * std::pow(l(u), -p); }, method, budget,
      kinks);
  return integral * (1.0 / d);
}

double data_gauge(const SampleCloud& y, const BodySpec& q, double p, MatrixShape shape, std::span<const double> u) {
  if (y.shape.m != 1 || y.dim() != shape.n || q.dim() != shape.m)
    throw std::invalid_argument("data_gauge: shape mismatch");
  double w[kMaxDim];
  std::span<double> ws(w, static_cast<std::size_t>(shape.m));
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    shape.transpose_apply(u, y.point(i), ws);
    s += pow_nonneg(q.support(ws), p);
  }
  return std::pow(s / static_cast<double>(y.size()), 1.0 / p);
}

Estimate data_gauge_sphere_integral(const SampleCloud& y, const BodySpec& q, double p, int m, Method outer,
                                    const Budget& budget, int batches) {
  const MatrixShape shape{y.dim(), m};
  const int d = shape.flat_dim();
  if (y.shape.m != 1) throw std::invalid_argument("data_gauge_sphere_integral: Y must be a vector cloud");
  if (batches < 2 || y.size() < static_cast<std::size_t>(2 * batches))
    throw std::invalid_argument("data_gauge_sphere_integral: too few samples for the batches");
  if (d > kMaxDim) throw std::invalid_argument("data_gauge_sphere_integral: dimension too large");

  auto integrand = [&](const SampleCloud& c) {
    return [&, c_ptr = &c](std::span<const double> u) {
      const double g = data_gauge(*c_ptr, q, p, shape, u);
      if (!(g > 0.0)) throw std::domain_error("data_gauge_sphere_integral: E[h_Q(U^t Y)^p] vanishes (degenerate Y)");
      return std::pow(g, -d);
    };
  };

  std::vector<SampleCloud> parts;
  const std::size_t per = y.size() / static_cast<std::size_t>(batches);
  for (int b = 0; b < batches; ++b) parts.push_back(y.slice(b * per, (b + 1) * per));

  Vec batch_values(static_cast<std::size_t>(batches));
  Estimate total;
  if (outer == Method::exact) {
    total = sphere_integrate_dense_kinks(d, integrand(y), outer, budget);
    for (int b = 0; b < batches; ++b)
      batch_values[b] = sphere_integrate_dense_kinks(d, integrand(parts[b]), outer, budget).value;
    total.method = "quadrature+batch-means";
  } else {
    const std::size_t per_dir = std::max<std::size_t>(1, budget.samples / static_cast<std::size_t>(batches));
    const double area = sphere_area(d);
    double full_sum = 0.0;
    for (int b = 0; b < batches; ++b) {
      Rng rng = make_stream(budget.seed, static_cast<std::uint64_t>(b));
      Vec u(static_cast<std::size_t>(d));
      auto f_full = integrand(y);
      auto f_part = integrand(parts[b]);
      double s_part = 0.0;
      for (std::size_t k = 0; k < per_dir; ++k) {
        uniform_direction(rng, u);
        full_sum += f_full(u);
        s_part += f_part(u);
      }
      batch_values[b] = area * s_part / static_cast<double>(per_dir);
    }
    total.value = area * full_sum / static_cast<double>(per_dir * static_cast<std::size_t>(batches));
    total.method = "mc+batch-means";
    total.samples = per_dir * static_cast<std::size_t>(batches);
  }
  double mean = 0.0;
  for (double x : batch_values) mean += x;
  mean /= batches;
  double var = 0.0;
  for (double x : batch_values) var += (x - mean) * (x - mean);
  var /= (batches - 1);
  total.std_error = std::sqrt(var / batches);
  return total;
}

Estimate affine_moment_MQp(const SampleCloud& y, const BodySpec& q, double p, int m, Method outer,
                           const Budget& budget, int batches) {
  const int n = y.dim();
  const int d = n * m;
  const Estimate integral = data_gauge_sphere_integral(y, q, p, m, outer, budget, batches);
  const Estimate vol_ball = ppb_ball_volume(n, q, p);
  const Estimate ratio = (integral * (1.0 / d)) / vol_ball;
  return pow(ratio, -p / d) * std::pow(n * omega(n), (n + p) / n);
}

}  // namespace affine
