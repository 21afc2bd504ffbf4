#include "affine/scalar_kernels.hpp"

#include <sstream>

namespace affine {

namespace {

void require_lambda(double d, double p, double lambda, const char* who) {
  if (!(lambda > d / (d + p)))
    throw std::invalid_argument(std::string(who) + ": lambda must exceed d/(d+p)");
}

}  // namespace

void Params::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("Params: dimensions must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("Params: p must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("Params: lambda must be positive");
}

bool Params::matrix_entropy_admissible() const { return lambda > lambda_threshold(n * m, p); }

std::string Params::describe() const {
  std::ostringstream os;
  os << "n=" << n << " m=" << m << " p=" << p << " lambda=" << lambda;
  return os.str();
}

double omega(double d) {
  if (!(d >= 0.0)) throw std::invalid_argument("omega: dimension must be nonnegative");
  return std::exp(0.5 * d * std::log(kPi) - std::lgamma(1.0 + 0.5 * d));
}

double profile(double p, double lambda, double s) {
  if (s == 0.0) return 1.0;
  if (is_lambda_infinite(lambda)) return 0.0;
  const double sp = std::pow(s, p) / p;
  if (lambda == 1.0) return std::exp(-sp);
  const double base = 1.0 + (1.0 - lambda) * sp;
  if (base <= 0.0) return 0.0;
  return std::pow(base, -1.0 / (1.0 - lambda));
}

double profile_support(double p, double lambda) {
  if (is_lambda_infinite(lambda)) return 0.0;
  if (lambda <= 1.0) return kInf;
  return std::pow(p / (lambda - 1.0), 1.0 / p);
}

double c_norm(int n, double p, double lambda) {
  if (n < 1 || !(p > 0.0)) throw std::invalid_argument("c_norm: need n >= 1, p > 0");
  require_lambda(n, p, lambda, "c_norm");
  const double np = n / p;
  const double base = std::log(omega(n)) + np * std::log(p) + std::lgamma(1.0 + np);
  if (is_lambda_infinite(lambda)) throw std::invalid_argument("c_norm: degenerate at lambda = inf");
  if (lambda < 1.0) {
    const double k = 1.0 / (1.0 - lambda);
    return std::exp(base + std::lgamma(k - np) - np * std::log(1.0 - lambda) - std::lgamma(k));
  }
  if (lambda == 1.0) return std::exp(base);
  const double k = lambda / (lambda - 1.0);
  return std::exp(base + std::lgamma(k) - np * std::log(lambda - 1.0) - std::lgamma(k + np));
}

namespace {

double log_d_base(double n, double p) { return -(p / n) * (std::lgamma(1.0 + n / p) - std::log(n)); }

}  // namespace

double d_base(double n, double p) { return std::exp(log_d_base(n, p)); }

double log_d_sharp(double n, double p, double lambda) {
  if (!(n >= 1.0) || !(p > 0.0)) throw std::invalid_argument("d_sharp: need n >= 1, p > 0");
  require_lambda(n, p, lambda, "d_sharp");
  const double ldnp = log_d_base(n, p);
  const double np = n / p;
  if (is_lambda_infinite(lambda)) {
    // lambda -> inf in the lambda > 1 branch.
    return std::log(n / (n + p)) + std::lgamma(1.0 + np) * (p / n) + ldnp;
  }
  if (lambda == 1.0) return std::log(n / (p * std::exp(1.0))) + ldnp;
  if (lambda < 1.0) {
    const double denom = (n + p) * lambda - n;
    const double k = 1.0 / (1.0 - lambda);
    const double inner =
        k * std::log(p * lambda / denom) + std::lgamma(k - np) - std::lgamma(k);
    return std::log(n * (1.0 - lambda) / denom) - inner * p / n + ldnp;
  }
  const double denom = p * lambda + n * (lambda - 1.0);
  const double k = lambda / (lambda - 1.0);
  const double inner = std::log(p * lambda / denom) / (1.0 - lambda) + std::lgamma(k) - std::lgamma(k + np);
  return std::log(n * (lambda - 1.0) / denom) - inner * p / n + ldnp;
}

double d_sharp(double n, double p, double lambda) { return std::exp(log_d_sharp(n, p, lambda)); }

double beta_fn(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("beta_fn: arguments must be positive");
  return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

}  // namespace affine
