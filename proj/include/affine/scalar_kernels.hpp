#pragma once

#include <string>

#include "affine/numeric.hpp"

namespace affine {

/// Renyi order lambda = +inf is represented by this value; every kernel
/// substitutes the analytic limit for it.
inline constexpr double kLambdaInfinity = kInf;

inline bool is_lambda_infinite(double lambda) { return std::isinf(lambda) && lambda > 0; }

/// Shared parameter block: vector dimension n, codomain dimension m,
/// moment order p and Renyi order lambda.
struct Params {
  int n = 1;
  int m = 1;
  double p = 2.0;
  double lambda = 1.0;

  /// Throws std::invalid_argument unless n, m >= 1 and p >= 1, lambda > 0.
  void validate() const;
  /// lambda > nm/(nm+p): the strict condition under which entropy powers of
  /// matrix-space densities with finite p-th moment are finite.
  bool matrix_entropy_admissible() const;
  std::string describe() const;
};

/// Smallest admissible Renyi order d/(d+p) (exclusive).
inline double lambda_threshold(int d, double p) { return static_cast<double>(d) / (d + p); }

/// Volume of the unit Euclidean ball, pi^{d/2} / Gamma(1 + d/2); d may be fractional.
double omega(double d);

/// Generalized Gaussian profile on R_+:
///   (1 + (1-lambda) s^p / p)_+^{-1/(1-lambda)}  for lambda != 1,
///   exp(-s^p / p)                              for lambda == 1.
/// At lambda = inf the limit is the indicator of {0}.
double profile(double p, double lambda, double s);

/// End of the support of profile(p, lambda, .), (p/(lambda-1))^{1/p} for
/// lambda > 1 and +inf otherwise.
double profile_support(double p, double lambda);

/// Integral of profile(p, lambda, |x|) over R^n (closed form, three branches).
/// The standard generalized Gaussian density is profile(|x|) / c_norm.
double c_norm(int n, double p, double lambda);

/// D_{n,p} = ((1/n) Gamma(1 + n/p))^{-p/n}.
double d_base(double n, double p);

/// Sharp moment-entropy constant D_{n,p,lambda}; lambda may be kLambdaInfinity.
double d_sharp(double n, double p, double lambda);
// log of d_sharp; finite where d_sharp itself overflows (large p).
double log_d_sharp(double n, double p, double lambda);

/// Beta function Gamma(x)Gamma(y)/Gamma(x+y), evaluated through lgamma.
double beta_fn(double x, double y);

}  // namespace affine
