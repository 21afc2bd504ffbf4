#include "affine/estimate.hpp"

namespace affine {

std::string merge_methods(const std::string& a, const std::string& b) {
  if (a == b) return a;
  if (a == "exact") return b;
  if (b == "exact") return a;
  return a + "+" + b;
}

namespace {

double rel_bound(const Estimate& e) { return e.value != 0.0 ? std::abs(e.error_bound / e.value) : 0.0; }

Estimate combine_relative(const Estimate& a, const Estimate& b, double value) {
  Estimate out;
  out.value = value;
  const double ra = a.relative_std_error();
  const double rb = b.relative_std_error();
  out.std_error = std::abs(value) * std::sqrt(ra * ra + rb * rb);
  out.error_bound = std::abs(value) * (rel_bound(a) + rel_bound(b));
  out.samples = std::max(a.samples, b.samples);
  out.valid = a.valid && b.valid;
  out.method = merge_methods(a.method, b.method);
  return out;
}

}  // namespace

Estimate operator*(const Estimate& a, const Estimate& b) { return combine_relative(a, b, a.value * b.value); }

Estimate operator/(const Estimate& a, const Estimate& b) { return combine_relative(a, b, a.value / b.value); }

Estimate operator*(const Estimate& a, double s) {
  Estimate out = a;
  out.value *= s;
  out.std_error *= std::abs(s);
  out.error_bound *= std::abs(s);
  return out;
}

Estimate pow(const Estimate& a, double exponent) {
  Estimate out = a;
  out.value = pow_nonneg(a.value, exponent);
  out.std_error = std::abs(exponent) * a.relative_std_error() * std::abs(out.value);
  out.error_bound = std::abs(exponent) * rel_bound(a) * std::abs(out.value);
  return out;
}

}  // namespace affine
