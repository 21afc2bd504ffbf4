#pragma once

#include <functional>
#include <span>

#include "affine/estimate.hpp"

namespace affine {

using Fn1 = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on [a, b] with relative tolerance tol. Breakpoints
/// where f is not smooth can be supplied through integrate_pieces.
QuadratureResult integrate(const Fn1& f, double a, double b, double tol = 1e-10);

/// Integrate over consecutive pieces [b_0, b_1], [b_1, b_2], ...; breaks must
/// be sorted. Degenerate pieces are skipped.
QuadratureResult integrate_pieces(const Fn1& f, std::span<const double> breaks, double tol = 1e-10);

/// Integral over [0, inf) of g(r) r^{q-1}. A finite cutoff means g vanishes
/// beyond it. Otherwise the half-line is covered by doubling segments and the
/// remainder is estimated from their geometric decay; std::runtime_error is
/// thrown when the segment contributions stop decaying.
QuadratureResult radial_integral(double q, const Fn1& g, double tol = 1e-10, double cutoff = kInf);

}  // namespace affine
