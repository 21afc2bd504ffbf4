#include "affine/gaussians.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <map>
#include <mutex>
#include <sstream>

#include "affine/operators.hpp"
#include "affine/quadrature.hpp"
#include "affine/random.hpp"
#include "affine/scalar_kernels.hpp"

namespace affine {

namespace {

constexpr std::size_t kKnots = (1u << 14) + 1;
constexpr double kMinAcceptance = 1e-4;

double neg_log_profile(double p, double lambda, double s) {
  const double sp = std::pow(s, p) / p;
  if (lambda == 1.0) return sp;
  return std::log1p((1.0 - lambda) * sp) / (1.0 - lambda);
}

// Gauge value at which the profile equals y in (0, 1].
double profile_inverse(double p, double lambda, double y) {
  if (lambda == 1.0) return std::pow(-p * std::log(y), 1.0 / p);
  const double sp = p * (std::pow(y, lambda - 1.0) - 1.0) / (1.0 - lambda);
  return std::pow(std::max(sp, 0.0), 1.0 / p);
}

bool is_identity(const Matrix& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (a(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

std::shared_ptr<const RadialLaw> cached_law(int d, double p, double lambda) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, std::shared_ptr<const RadialLaw>> cache;
  const auto key = std::make_tuple(d, p, lambda);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto law = std::make_shared<const RadialLaw>(d, p, lambda);
  std::lock_guard lock(mu);
  return cache.emplace(key, law).first->second;
}

}  // namespace

ContourGauge ContourGauge::euclidean_norm(int d) {
  ContourGauge g;
  g.dim = d;
  g.eval = [](std::span<const double> x) { return norm2(x); };
  g.unit_volume = Estimate::exact(omega(d));
  g.outer_radius = 1.0;
  g.euclidean = true;
  g.name = "euclidean";
  return g;
}

ContourGauge ContourGauge::of_body(const BodySpec& k) {
  if (!k.origin_interior()) throw std::invalid_argument("ContourGauge::of_body: the origin must be interior");
  auto body = std::make_shared<const BodySpec>(k);
  ContourGauge g;
  g.dim = k.dim();
  g.eval = [body](std::span<const double> x) { return body->gauge(x); };
  g.unit_volume = Estimate::exact(k.volume());
  g.outer_radius = k.circumradius() * (1.0 + 1e-12);
  g.euclidean = false;
  g.kinks = k.polar().support_kinks();
  g.name = k.describe();
  return g;
}

ContourGauge ContourGauge::polar_projection(int n, const BodySpec& q, double p, const Budget& volume_budget) {
  auto body = std::make_shared<const PolarProjectionBody>(BodySpec::ball(n), q, p);
  ContourGauge g;
  g.dim = body->flat_dim();
  g.eval = [body](std::span<const double> x) { return body->gauge(x); };
  g.unit_volume = ppb_ball_volume(n, q, p, volume_budget);
  g.outer_radius = 1.0 / body->frobenius_lower_bound();
  g.euclidean = false;
  g.kinks = body->kinks();
  g.name = body->describe();
  return g;
}

// ---------------------------------------------------------------------------

RadialLaw::RadialLaw(int d, double p, double lambda) : d_(d), p_(p), lambda_(lambda) {
  if (d < 1) throw std::invalid_argument("RadialLaw: dimension must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("RadialLaw: p must be >= 1");
  if (is_lambda_infinite(lambda)) {
    mass_ = 1.0 / d;
    support_ = 1.0;
    return;
  }
  if (!(lambda > lambda_threshold(d, p)))
    throw std::invalid_argument("RadialLaw: lambda must exceed d/(d+p)");

  mass_ = c_norm(d, p, lambda) / (d * omega(d));
  support_ = profile_support(p, lambda);

  const double s_lo = std::pow(1e-14 * d * mass_, 1.0 / d);
  double s_hi = support_;
  if (!std::isfinite(s_hi)) {
    const double threshold = lambda < 1.0 ? 1e-12 : 1e-18;
    s_hi = 1.0;
    while (weight(s_hi) * s_hi > threshold * mass_ || s_hi < 2.0) s_hi *= 1.25;
  }
  knots_.resize(kKnots);
  log_knots_.resize(kKnots);
  cum_.resize(kKnots);
  const double l0 = std::log(s_lo);
  const double l1 = std::log(s_hi);
  for (std::size_t i = 0; i < kKnots; ++i) {
    log_knots_[i] = l0 + (l1 - l0) * static_cast<double>(i) / (kKnots - 1);
    knots_[i] = std::exp(log_knots_[i]);
  }
  knots_.back() = s_hi;

  auto w = [this](double s) { return weight(s); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  head_ = GK::integrate(w, 0.0, s_lo, 8, 1e-13);
  double running = head_;
  cum_[0] = running;
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  for (std::size_t i = 1; i < kKnots; ++i) {
    const bool edge = i + 1 == kKnots && std::isfinite(support_);
    running += edge ? GK::integrate(w, knots_[i - 1], knots_[i], 8, 1e-13) : Gauss::integrate(w, knots_[i - 1], knots_[i]);
    cum_[i] = running;
  }
  // Independent route to the mass: one adaptive radial integral.
  const double direct = radial_integral(
                            static_cast<double>(d), [&](double s) { return profile(p, lambda, s); }, 1e-12,
                            support_)
                            .value;
  if (std::abs(direct / mass_ - 1.0) > 1e-6)
    throw std::logic_error("RadialLaw: normalization check failed (closed form vs quadrature)");

  if (lambda < 1.0) {
    kappa_ = p / (1.0 - lambda) - d;
    tail_ = std::max(0.0, 1.0 - running / mass_);
  } else if (std::abs(running / mass_ - 1.0) > 1e-10) {
    throw std::logic_error("RadialLaw: grid does not carry the full mass");
  }
  for (auto& c : cum_) c /= mass_;
}

double RadialLaw::weight(double s) const { return std::pow(s, d_ - 1) * profile(p_, lambda_, s); }

double RadialLaw::density(double s) const {
  if (s < 0.0) return 0.0;
  if (is_lambda_infinite(lambda_)) return s <= 1.0 ? d_ * std::pow(s, d_ - 1) : 0.0;
  return weight(s) / mass_;
}

double RadialLaw::local_mass(double a, double b) const {
  if (!(b > a)) return 0.0;
  auto w = [this](double s) { return weight(s); };
  return boost::math::quadrature::gauss<double, 10>::integrate(w, a, b) / mass_;
}

double RadialLaw::cdf(double s) const {
  if (s <= 0.0) return 0.0;
  if (is_lambda_infinite(lambda_)) return s >= 1.0 ? 1.0 : std::pow(s, d_);
  if (s >= support_) return 1.0;
  if (s < knots_.front()) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    return GK::integrate([this](double t) { return weight(t); }, 0.0, s, 8, 1e-13) / mass_;
  }
  if (s >= knots_.back()) return 1.0 - tail_ * std::pow(s / knots_.back(), -kappa_);
  const double pos = (std::log(s) - log_knots_.front()) / (log_knots_.back() - log_knots_.front()) * (kKnots - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), kKnots - 2);
  return std::min(1.0, cum_[i] + local_mass(knots_[i], s));
}

double RadialLaw::invert(double target, double a, double b, double guess) const {
  // Solves local_mass(a, s) = target for s in [a, b]: Newton with bisection fallback.
  double lo = a;
  double hi = b;
  double s = std::clamp(guess, a, b);
  for (int it = 0; it < 60; ++it) {
    const double f = local_mass(a, s) - target;
    if (f > 0.0)
      hi = s;
    else
      lo = s;
    const double slope = weight(s) / mass_;
    double next = slope > 0.0 ? s - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * std::max(s, 1e-300) || hi - lo <= 1e-15 * hi) return next;
    s = next;
  }
  return s;
}

double RadialLaw::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("RadialLaw::quantile: u must lie in [0, 1]");
  if (is_lambda_infinite(lambda_)) return std::pow(u, 1.0 / d_);
  if (u == 0.0) return 0.0;
  if (u == 1.0) return support_;
  if (u <= cum_.front()) {
    const double s0 = knots_.front();
    return invert(u, 0.0, s0, s0 * std::pow(u / cum_.front(), 1.0 / d_));
  }
  if (u >= cum_.back()) {
    if (!(tail_ > 0.0)) return knots_.back();
    return knots_.back() * std::pow((1.0 - u) / tail_, -1.0 / kappa_);
  }
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  const auto i = static_cast<std::size_t>(it - cum_.begin()) - 1;
  const double gap = cum_[i + 1] - cum_[i];
  const double frac = gap > 0.0 ? (u - cum_[i]) / gap : 0.5;
  const double guess = std::exp(log_knots_[i] + frac * (log_knots_[i + 1] - log_knots_[i]));
  return invert(u - cum_[i], knots_[i], knots_[i + 1], guess);
}

// ---------------------------------------------------------------------------

GaussianSpec::GaussianSpec(ContourGauge gauge, MatrixShape shape, double p, double lambda, LawKind kind)
    : gauge_(std::move(gauge)),
      shape_(shape),
      p_(p),
      lambda_(kind == LawKind::uniform ? kLambdaInfinity : lambda),
      kind_(kind),
      a_(Matrix::identity(shape.n)),
      a_inv_(Matrix::identity(shape.n)) {
  if (gauge_.dim != shape_.flat_dim()) throw std::invalid_argument("GaussianSpec: gauge dimension does not match the shape");
  if (!(p_ >= 1.0)) throw std::invalid_argument("GaussianSpec: p must be >= 1");
  const int d = dim();
  if (kind_ == LawKind::generalized_gaussian) {
    if (is_lambda_infinite(lambda_)) throw std::invalid_argument("GaussianSpec: lambda = inf has no density; use the uniform law");
    if (!(lambda_ > lambda_threshold(d, p_)))
      throw std::invalid_argument("GaussianSpec: lambda must exceed d/(d+p)");
  }
  law_ = cached_law(d, p_, lambda_);
  if (kind_ == LawKind::generalized_gaussian) {
    // Layer cake: int f = (omega_d / c_norm) int_0^1 s(y)^d dy, with s the profile inverse.
    const double pp = p_;
    const double lam = lambda_;
    boost::math::quadrature::tanh_sinh<double> ts;
    const double layers = ts.integrate([&](double y) { return std::pow(profile_inverse(pp, lam, y), d); }, 0.0, 1.0);
    const double total = layers * omega(d) / c_norm(d, p_, lambda_);
    const double tol = std::max(1e-6, 3.0 * gauge_.unit_volume.relative_std_error());
    if (!(std::abs(total - 1.0) <= tol))
      throw std::logic_error("GaussianSpec: density does not integrate to 1 (layer-cake check)");
  }
}

GaussianSpec GaussianSpec::standard(int n, double p, double lambda) {
  return GaussianSpec(ContourGauge::euclidean_norm(n), {n, 1}, p, lambda);
}

GaussianSpec GaussianSpec::matrix(int n, const BodySpec& q, double p, double lambda, const Budget& volume_budget) {
  GaussianSpec s(ContourGauge::polar_projection(n, q, p, volume_budget), {n, q.dim()}, p, lambda);
  s.q_ = q;
  return s;
}

GaussianSpec GaussianSpec::uniform(ContourGauge gauge, MatrixShape shape) {
  return GaussianSpec(std::move(gauge), shape, 1.0, kLambdaInfinity, LawKind::uniform);
}

GaussianSpec GaussianSpec::linear_image(const Matrix& b) const {
  if (b.rows() != n() || b.cols() != n()) throw std::invalid_argument("GaussianSpec::linear_image: B must be n x n");
  const double det = b.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw std::invalid_argument("GaussianSpec::linear_image: B is singular");
  GaussianSpec out = *this;
  out.a_ = b * a_;
  out.a_inv_ = out.a_.inverse();
  out.log_abs_det_ = std::log(std::abs(out.a_.determinant()));
  return out;
}

double GaussianSpec::contour(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim()) throw std::invalid_argument("GaussianSpec: point has the wrong size");
  double buf[kMaxDim];
  std::span<double> y(buf, x.size());
  shape_.left_multiply(a_inv_, x, y);
  return gauge_.eval(y);
}

double GaussianSpec::log_normalizer() const {
  const int d = dim();
  const double base = std::log(gauge_.unit_volume.value) + m() * log_abs_det_;
  if (kind_ == LawKind::uniform) return base;
  return base + std::log(c_norm(d, p_, lambda_)) - std::log(omega(d));
}

Estimate GaussianSpec::normalizer() const {
  return gauge_.unit_volume * std::exp(log_normalizer() - std::log(gauge_.unit_volume.value));
}

double GaussianSpec::density(std::span<const double> x) const {
  const double g = contour(x);
  if (kind_ == LawKind::uniform) return g <= 1.0 ? std::exp(-log_normalizer()) : 0.0;
  return profile(p_, lambda_, g) * std::exp(-log_normalizer());
}

double GaussianSpec::log_density(std::span<const double> x) const {
  const double g = contour(x);
  if (kind_ == LawKind::uniform) return g <= 1.0 ? -log_normalizer() : -kInf;
  if (g >= law_->support()) return -kInf;
  return -neg_log_profile(p_, lambda_, g) - log_normalizer();
}

std::string GaussianSpec::describe() const {
  std::ostringstream os;
  os << (kind_ == LawKind::uniform ? "uniform" : "gen_gaussian") << "(n=" << n() << ", m=" << m();
  if (kind_ == LawKind::generalized_gaussian) os << ", p=" << p_ << ", lambda=" << lambda_;
  os << ", gauge=" << gauge_.name;
  if (!is_identity(a_)) os << ", |det A|=" << std::exp(log_abs_det_);
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

SampleCloud sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed) {
  const int d = spec.dim();
  const auto dd = static_cast<std::size_t>(d);
  const ContourGauge& g = spec.gauge();
  const RadialLaw& law = spec.radial_law();
  const Matrix& a = spec.a();
  const MatrixShape shape = spec.shape();
  const bool identity = is_identity(a);

  SampleCloud cloud;
  cloud.shape = shape;
  cloud.seed = seed;
  cloud.provenance = spec.describe();
  cloud.data.assign(count * dd, 0.0);

  std::atomic<std::size_t> trials{0};
  std::atomic<std::size_t> accepted{0};
  for_each_chunk(count, seed, [&](Rng& rng, std::size_t begin, std::size_t end) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u[kMaxDim];
    double x[kMaxDim];
    std::span<double> dir(u, dd);
    std::size_t local_trials = 0;
    for (std::size_t i = begin; i < end; ++i) {
      double gu = 1.0;
      if (g.euclidean) {
        if (d == 1)
          u[0] = (rng() >> 63) ? 1.0 : -1.0;
        else
          uniform_direction(rng, dir);
      } else {
        // A uniform point of the bounding ball lies in {G <= 1} with
        // probability (1 / (G(u) R))^d given its direction u.
        for (;;) {
          ++local_trials;
          uniform_direction(rng, dir);
          gu = g.eval(dir);
          const double reach = gu * g.outer_radius;
          if (reach < 1.0 - 1e-12)
            throw std::logic_error("sample: gauge body leaves its bounding ball (" + g.name + ")");
          if (unif(rng) <= std::pow(reach, -d)) break;
          if (local_trials > 100000 && static_cast<double>(i - begin + 1) / local_trials < kMinAcceptance)
            throw std::runtime_error("sample: rejection acceptance below 1e-4 for " + g.name +
                                     "; the gauge body is badly conditioned");
        }
      }
      const double s = law.quantile(unif(rng));
      for (std::size_t k = 0; k < dd; ++k) x[k] = s * u[k] / gu;
      auto out = cloud.point(i);
      if (identity)
        std::copy(x, x + dd, out.begin());
      else
        shape.left_multiply(a, std::span<const double>(x, dd), out);
    }
    trials += local_trials;
    accepted += end - begin;
  });
  if (!g.euclidean && trials > 0 && static_cast<double>(accepted) / static_cast<double>(trials) < kMinAcceptance)
    throw std::runtime_error("sample: rejection acceptance below 1e-4 for " + g.name);
  return cloud;
}

Estimate renyi_entropy_power(const GaussianSpec& spec, double lambda, double tol) {
  const int d = spec.dim();
  // Everything scales like (vol_G |det A|^m)^{1/d}.
  const Estimate scale = pow(spec.gauge().unit_volume, 1.0 / d) * std::exp(spec.m() * std::log(std::abs(spec.a().determinant())) / d);
  if (spec.kind() == LawKind::uniform) return scale;
  if (!(lambda > 0.0)) throw std::invalid_argument("renyi_entropy_power: lambda must be positive");
  const double p = spec.p();
  const double lam = spec.lambda();
  // log c_norm - log omega_d is the normalizer of the law at unit gauge volume.
  const double log_z = std::log(c_norm(d, p, lam)) - std::log(omega(d));
  const double support = profile_support(p, lam);
  double log_n = 0.0;
  bool converged = true;
  if (is_lambda_infinite(lambda)) {
    log_n = log_z / d;
  } else if (lambda == 1.0) {
    const auto r = radial_integral(
        d,
        [&](double s) {
          const double f = profile(p, lam, s);
          return f > 0.0 ? f * neg_log_profile(p, lam, s) : 0.0;
        },
        tol, support);
    converged = r.converged;
    const double mean_neg_log = r.value / spec.radial_law().mass();
    log_n = (log_z + mean_neg_log) / d;
  } else {
    if (lam < 1.0 && !(lambda * p / (1.0 - lam) > d))
      throw std::domain_error("renyi_entropy_power: the integral of f^lambda diverges");
    const auto r = radial_integral(d, [&](double s) { return std::pow(profile(p, lam, s), lambda); }, tol, support);
    converged = r.converged;
    const double log_int = -lambda * log_z + std::log(d * r.value);
    log_n = log_int / (d * (1.0 - lambda));
  }
  Estimate out = scale * std::exp(log_n);
  out.valid = out.valid && converged;
  return out;
}

MCEstimate renyi_entropy_power(const SampleCloud& cloud, const PointFn& f, double lambda) {
  const std::size_t n = cloud.size();
  if (n == 0) throw std::invalid_argument("renyi_entropy_power: empty cloud");
  const int d = cloud.dim();
  MCEstimate out;
  out.samples = n;
  out.seed = cloud.seed;
  if (is_lambda_infinite(lambda)) {
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, f(cloud.point(i)));
    out.value = std::pow(sup, -1.0 / d);
    return out;
  }
  MomentAccumulator acc(1);
  for (std::size_t i = 0; i < n; ++i) {
    const double fx = f(cloud.point(i));
    if (!(fx > 0.0)) throw std::domain_error("renyi_entropy_power: density oracle vanishes at a sample");
    const double v = lambda == 1.0 ? -std::log(fx) : std::pow(fx, lambda - 1.0);
    const double vv[1] = {v};
    acc.add(vv);
  }
  const double mean = acc.mean(0);
  const double se = acc.std_error(0);
  if (lambda == 1.0) {
    out.value = std::exp(mean / d);
    out.std_error = out.value * se / d;
  } else {
    const double e = 1.0 / (d * (1.0 - lambda));
    out.value = std::pow(mean, e);
    out.std_error = out.value * std::abs(e) * se / mean;
  }
  return out;
}

Estimate pth_moment(const GaussianSpec& spec, double p, const PointFn& h, Method method, const Budget& budget) {
  if (!(p > 0.0)) throw std::invalid_argument("pth_moment: p must be positive");
  const int d = spec.dim();
  const RadialLaw& law = spec.radial_law();
  // E S^p.
  double es;
  if (spec.kind() == LawKind::uniform) {
    es = d / (d + p);
  } else {
    const double lam = spec.lambda();
    if (lam < 1.0 && !(p < spec.p() / (1.0 - lam) - d)) throw std::domain_error("pth_moment: moment is infinite");
    const double sp = spec.p();
    es = radial_integral(d + p, [&](double s) { return profile(sp, lam, s); }, 1e-12, law.support()).value / law.mass();
  }
  const Matrix& a = spec.a();
  const MatrixShape shape = spec.shape();
  const ContourGauge& g = spec.gauge();
  auto hp = [&](std::span<const double> u) {
    double buf[kMaxDim];
    std::span<double> au(buf, u.size());
    shape.left_multiply(a, u, au);
    return std::pow(h ? h(au) : norm2(au), p);
  };
  if (g.euclidean && !h && is_identity(a)) return Estimate::exact(es);
  // Cone-measure average of h(A theta)^p over {G = 1}.
  const Estimate dir = sphere_integrate(
      d, [&](std::span<const double> u) { return hp(u) * std::pow(g.eval(u), -d - p); }, method, budget, g.kinks);
  return dir / (g.unit_volume * static_cast<double>(d)) * es;
}

MCEstimate pth_moment(const SampleCloud& cloud, double p, const PointFn& h) {
  MomentAccumulator acc(1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto x = cloud.point(i);
    const double v[1] = {std::pow(h ? h(x) : norm2(x), p)};
    acc.add(v);
  }
  return to_estimate(acc, 0, cloud.seed);
}

MCEstimate expectation_hQ(const SampleCloud& x, const SampleCloud& y, const BodySpec& q, double p) {
  if (x.size() != y.size()) throw std::invalid_argument("expectation_hQ: clouds must have equal length");
  if (x.seed == y.seed) throw std::invalid_argument("expectation_hQ: clouds share a seed and are not independent");
  if (y.shape.m != 1 || x.shape.n != y.shape.n || x.shape.m != q.dim())
    throw std::invalid_argument("expectation_hQ: shapes do not match (X n x m, Y in R^n, Q in R^m)");
  MomentAccumulator acc(1);
  double w[kMaxDim];
  std::span<double> ws(w, static_cast<std::size_t>(q.dim()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x.shape.transpose_apply(x.point(i), y.point(i), ws);
    const double v[1] = {pow_nonneg(q.support(ws), p)};
    acc.add(v);
  }
  auto e = to_estimate(acc, 0, x.seed);
  return e;
}

}  // namespace affine
