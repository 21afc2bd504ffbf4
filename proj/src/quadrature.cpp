#include "affine/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <stdexcept>
#include <utility>
#include <vector>

namespace affine {

namespace {

constexpr unsigned kMaxDepth = 18;

QuadratureResult gk(const Fn1& f, double a, double b, double tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, kMaxDepth, tol, &err, &l1);
  QuadratureResult r;
  r.value = v;
  r.abs_error_bound = err;
  r.converged = std::isfinite(v) && err <= std::max(tol * std::max(std::abs(v), l1), 1e-300);
  return r;
}

void accumulate(QuadratureResult& total, const QuadratureResult& piece) {
  total.value += piece.value;
  total.abs_error_bound += piece.abs_error_bound;
  total.converged = total.converged && piece.converged;
}

}  // namespace

QuadratureResult integrate(const Fn1& f, double a, double b, double tol) {
  if (a == b) return {};
  return gk(f, a, b, tol);
}

QuadratureResult integrate_pieces(const Fn1& f, std::span<const double> breaks, double tol) {
  // A coarse pass fixes the scale; each piece then gets its share of an
  // absolute target, so tiny pieces cannot stall on roundoff.
  std::vector<std::pair<double, double>> pieces;
  std::vector<double> l1s;
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    double err = 0.0;
    double l1 = 0.0;
    boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, breaks[i], breaks[i + 1], 0, 0.0, &err, &l1);
    pieces.emplace_back(breaks[i], breaks[i + 1]);
    l1s.push_back(l1);
    scale += l1;
  }
  QuadratureResult total;
  if (pieces.empty()) return total;
  const double target = tol * scale / static_cast<double>(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double rel = l1s[i] > target ? target / l1s[i] : 1.0;
    QuadratureResult piece = gk(f, pieces[i].first, pieces[i].second, std::max(rel, tol));
    piece.converged = std::isfinite(piece.value) && (piece.converged || piece.abs_error_bound <= target);
    accumulate(total, piece);
  }
  total.converged = total.converged || (std::isfinite(total.value) && total.abs_error_bound <= tol * std::max(scale, 1e-300));
  return total;
}

QuadratureResult radial_integral(double q, const Fn1& g, double tol, double cutoff) {
  if (!(q > 0.0)) throw std::invalid_argument("radial_integral: q must be positive");

  // For q < 1 the weight is singular at 0; r = t^{1/q} absorbs it exactly.
  auto segment = [&](double a, double b) {
    if (q < 1.0) {
      const double inv_q = 1.0 / q;
      auto h = [&](double t) { return g(std::pow(t, inv_q)) * inv_q; };
      return gk(h, std::pow(a, q), std::pow(b, q), tol);
    }
    if (a == 0.0) {
      // r = b t^4 smooths power-type cusps of g at the origin.
      auto h = [&](double t) {
        const double t2 = t * t;
        const double r = b * t2 * t2;
        return r > 0.0 ? 4.0 * b * g(r) * std::pow(r, q - 1.0) * t2 * t : 0.0;
      };
      return gk(h, 0.0, 1.0, tol);
    }
    auto h = [&](double r) { return r > 0.0 ? g(r) * std::pow(r, q - 1.0) : 0.0; };
    return gk(h, a, b, tol);
  };

  if (std::isfinite(cutoff)) {
    if (!(cutoff > 0.0)) return {};
    // r = c - (c/2) t^4 on the outer half does the same for the support edge.
    const double w = 0.5 * cutoff;
    auto h = [&](double t) {
      const double t2 = t * t;
      const double r = cutoff - w * t2 * t2;
      return 4.0 * w * g(r) * std::pow(r, q - 1.0) * t2 * t;
    };
    QuadratureResult total = segment(0.0, w);
    accumulate(total, gk(h, 0.0, 1.0, tol));
    if (!total.converged && std::isfinite(total.value))
      total.converged = total.abs_error_bound <= tol * std::abs(total.value);
    return total;
  }

  QuadratureResult total = segment(0.0, 1.0);
  double prev = std::abs(total.value);
  int slow = 0;
  double lo = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double hi = 2.0 * lo;
    QuadratureResult piece = segment(lo, hi);
    const double scale = std::abs(total.value + piece.value);
    piece.converged = piece.converged || (std::isfinite(piece.value) && piece.abs_error_bound <= tol * scale);
    accumulate(total, piece);
    const double c = std::abs(piece.value);
    if (c == 0.0 && k > 4) return total;
    if (prev > 0.0 && c < prev) {
      const double rho = c / prev;
      const double tail = c * rho / (1.0 - rho);
      if (tail <= 0.1 * tol * scale && c <= tol * scale) {
        total.abs_error_bound += tail;
        total.converged = total.converged || total.abs_error_bound <= tol * scale;
        return total;
      }
      slow = rho > 0.999 ? slow + 1 : 0;
    } else if (k > 30) {
      ++slow;
    }
    if (slow >= 8) throw std::runtime_error("radial_integral: integral diverges");
    prev = c;
    lo = hi;
  }
  throw std::runtime_error("radial_integral: tail did not converge");
}

}  // namespace affine
