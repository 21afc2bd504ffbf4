#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affine/bodies.hpp"
#include "affine/cloud.hpp"
#include "affine/estimate.hpp"
#include "affine/sphere.hpp"

namespace affine {

using PointFn = std::function<double(std::span<const double>)>;

/// A gauge G on R^d (d = n*m, column-stacked for matrices) whose level sets
/// carry a contoured law.
struct ContourGauge {
  int dim = 1;
  PointFn eval;
  /// vol {G <= 1}.
  Estimate unit_volume;
  /// {G <= 1} lies in the Euclidean ball of this radius.
  double outer_radius = 1.0;
  bool euclidean = true;
  std::vector<Vec> kinks;
  std::string name;

  static ContourGauge euclidean_norm(int d);
  /// Gauge of a convex body with the origin in its interior.
  static ContourGauge of_body(const BodySpec& k);
  /// Gauge of the polar projection body of the unit ball of R^n for Q and p.
  static ContourGauge polar_projection(int n, const BodySpec& q, double p, const Budget& volume_budget = {});
};

/// Law of the gauge value S, with density proportional to s^{d-1} p_{p,lambda}(s)
/// (or to s^{d-1} on [0, 1] for the uniform law, lambda = inf).
class RadialLaw {
 public:
  RadialLaw(int d, double p, double lambda);

  int dim() const { return d_; }
  double p() const { return p_; }
  double lambda() const { return lambda_; }
  /// int_0^inf s^{d-1} p(s) ds.
  double mass() const { return mass_; }
  double support() const { return support_; }
  double density(double s) const;
  double cdf(double s) const;
  double quantile(double u) const;

 private:
  double weight(double s) const;
  double local_mass(double a, double b) const;
  double invert(double target, double a, double b, double guess) const;

  int d_;
  double p_;
  double lambda_;
  double mass_ = 1.0;
  double support_ = kInf;
  double head_ = 0.0;     // grid starts at knots_.front()
  double tail_ = 0.0;     // 1 - F(knots_.back()) for heavy tails
  double kappa_ = 0.0;    // Pareto index of the heavy tail
  std::vector<double> knots_;
  std::vector<double> log_knots_;
  std::vector<double> cum_;  // normalized CDF at the knots
};

enum class LawKind { generalized_gaussian, uniform };

/// Law of A X where X has density proportional to p_{p,lambda}(G(x)) (or is
/// uniform on {G <= 1}). A is n x n and acts on the columns of matrix samples.
class GaussianSpec {
 public:
  GaussianSpec(ContourGauge gauge, MatrixShape shape, double p, double lambda, LawKind kind = LawKind::generalized_gaussian);

  /// Standard generalized Gaussian on R^n.
  static GaussianSpec standard(int n, double p, double lambda);
  /// Matrix generalized Gaussian on M_{n,m} contoured by the polar projection ball gauge.
  static GaussianSpec matrix(int n, const BodySpec& q, double p, double lambda, const Budget& volume_budget = {});
  /// Uniform law on the unit ball of the gauge.
  static GaussianSpec uniform(ContourGauge gauge, MatrixShape shape);

  /// Law of B (this), the linear image under B (n x n).
  GaussianSpec linear_image(const Matrix& b) const;

  MatrixShape shape() const { return shape_; }
  int n() const { return shape_.n; }
  int m() const { return shape_.m; }
  int dim() const { return shape_.flat_dim(); }
  double p() const { return p_; }
  double lambda() const { return lambda_; }
  LawKind kind() const { return kind_; }
  const Matrix& a() const { return a_; }
  const ContourGauge& gauge() const { return gauge_; }
  const std::optional<BodySpec>& q() const { return q_; }
  const RadialLaw& radial_law() const { return *law_; }

  /// G(A^{-1} x).
  double contour(std::span<const double> x) const;
  double density(std::span<const double> x) const;
  double log_density(std::span<const double> x) const;
  /// log of the normalizer Z |det A|^m, density = profile(contour) / normalizer.
  double log_normalizer() const;
  /// The normalizer with the uncertainty of the gauge volume.
  Estimate normalizer() const;

  std::string describe() const;

 private:
  ContourGauge gauge_;
  MatrixShape shape_;
  double p_;
  double lambda_;
  LawKind kind_;
  Matrix a_;
  Matrix a_inv_;
  double log_abs_det_ = 0.0;
  std::optional<BodySpec> q_;
  std::shared_ptr<const RadialLaw> law_;
};

/// Exact sampler: S from the radial law, a cone-measure direction by
/// rejection from the bounding ball, then A (S theta).
SampleCloud sample(const GaussianSpec& spec, std::size_t count, std::uint64_t seed);

/// N_lambda of the spec by one-dimensional radial quadrature.
Estimate renyi_entropy_power(const GaussianSpec& spec, double lambda, double tol = 1e-11);
/// N_lambda from a cloud drawn from the law with density `f`.
MCEstimate renyi_entropy_power(const SampleCloud& cloud, const PointFn& f, double lambda);

/// E h(X)^p; an empty h means the Euclidean norm. h must be 1-homogeneous.
Estimate pth_moment(const GaussianSpec& spec, double p, const PointFn& h = {}, Method method = Method::exact,
                    const Budget& budget = {});
MCEstimate pth_moment(const SampleCloud& cloud, double p, const PointFn& h = {});

/// Empirical E h_Q(X^t Y)^p over index-paired samples of independent clouds.
MCEstimate expectation_hQ(const SampleCloud& x, const SampleCloud& y, const BodySpec& q, double p);

}  // namespace affine
