#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "affine/bodies.hpp"
#include "affine/cloud.hpp"
#include "affine/sphere.hpp"

namespace affine {

/// The (L^p, Q) polar projection body of K, a convex body in M_{n,m}
/// (matrices in column-stacked form). Its gauge is
///   ||Theta|| = ( int h_Q(Theta^t xi)^p h_K(xi)^{1-p} dsigma_K(xi) )^{1/p}.
class PolarProjectionBody {
 public:
  /// The xi-integral for smooth K uses `inner` (exact quadrature for n <= 3
  /// by default, Monte Carlo with a fixed seed otherwise).
  PolarProjectionBody(BodySpec k, BodySpec q, double p, Method inner, Budget budget = {});
  PolarProjectionBody(BodySpec k, BodySpec q, double p);

  int n() const { return k_.dim(); }
  int m() const { return q_.dim(); }
  MatrixShape shape() const { return {n(), m()}; }
  int flat_dim() const { return n() * m(); }
  double p() const { return p_; }
  const BodySpec& source() const { return k_; }
  const BodySpec& q() const { return q_; }
  Method inner_method() const { return inner_; }

  double gauge(std::span<const double> theta) const { return gauge_estimate(theta).value; }
  Estimate gauge_estimate(std::span<const double> theta) const;
  double radial(std::span<const double> u) const { return 1.0 / gauge(u); }

  /// c > 0 with gauge(Theta) >= c |Theta|_F; smooth sources (ball, ellipsoid) only.
  double frobenius_lower_bound() const;
  /// Normals across which the gauge is not smooth (polytope sources).
  std::vector<Vec> kinks() const;
  /// Radial function 1/gauge as a star set in R^{nm}.
  StarFunction star() const;

  std::string describe() const;

 private:
  BodySpec k_;
  BodySpec q_;
  double p_;
  Method inner_;
  Budget budget_;
  SurfaceMeasure measure_;
  std::vector<Vec> q_kinks_;
};

/// vol of the polar projection body, (1/nm) int_{S^{nm-1}} gauge^{-nm}.
Estimate ppb_volume(const PolarProjectionBody& body, Method outer, const Budget& budget);

/// vol(Pi-polar_{Q,p} B) for the unit ball of R^n; memoized on all inputs.
Estimate ppb_ball_volume(int n, const BodySpec& q, double p, Method outer, const Budget& budget);
/// Same with the default methods for the dimensions involved.
Estimate ppb_ball_volume(int n, const BodySpec& q, double p, const Budget& budget = {});

/// Gauge of Pi-polar_{Q,inf} B: max over unit xi of h_Q(U^t xi), computed as
/// max_{x in Q} |U x| over the extreme points of Q.
double ppb_infinity_gauge(const BodySpec& q, MatrixShape shape, std::span<const double> u);
/// The same maximum over `samples` random xi followed by a local refinement;
/// a lower bound for the exact value.
double ppb_infinity_gauge_sampled(const BodySpec& q, MatrixShape shape, std::span<const double> u,
                                  std::size_t samples, std::uint64_t seed);

/// h_{Gamma_{Q,p} L}(v) = ((1/vol L) int_L h_Q(A^t v)^p dA)^{1/p} for a star set L
/// in M_{n,m} given by its radial function on S^{nm-1}.
Estimate centroid_support(const StarFunction& l, MatrixShape shape, const BodySpec& q, double p,
                          std::span<const double> v, Method method, const Budget& budget);
/// Empirical version over a sample cloud of L (uniform points).
MCEstimate centroid_support(const SampleCloud& l, const BodySpec& q, double p, std::span<const double> v);

/// Radial function of the Ball body K_f(q): (int_0^inf f(r theta) r^{q-1} dr)^{1/q}.
/// f vanishes beyond `cutoff` along every ray when it is finite.
QuadratureResult ball_body_radial(const std::function<double(std::span<const double>)>& f, double q,
                                  std::span<const double> theta, double tol = 1e-10, double cutoff = kInf);

/// (1/d) int rho_K^{d+p} rho_L^{-p}.
Estimate dual_mixed_volume(const StarFunction& k, const StarFunction& l, double p, Method method,
                           const Budget& budget);

/// int_{S^{nm-1}} E_Y[h_Q(U^t Y)^p]^{-nm/p} dU over the empirical law of the
/// cloud. The error combines cloud and direction noise by batch means.
Estimate data_gauge_sphere_integral(const SampleCloud& y, const BodySpec& q, double p, int m, Method outer,
                                    const Budget& budget, int batches = 16);

/// E_Y[h_Q(U^t Y)^p]^{1/p} under the empirical law of the cloud.
double data_gauge(const SampleCloud& y, const BodySpec& q, double p, MatrixShape shape, std::span<const double> u);

/// The affine (L^p, Q) moment
///   (n w_n)^{(n+p)/n} ( (w_nm / vol Pi-polar B) int E[h_Q(U^t Y)^p]^{-nm/p} dU / (nm w_nm) )^{-p/nm}.
Estimate affine_moment_MQp(const SampleCloud& y, const BodySpec& q, double p, int m, Method outer,
                           const Budget& budget, int batches = 16);

}  // namespace affine
