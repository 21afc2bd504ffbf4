#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "affine/bodies.hpp"
#include "affine/gaussians.hpp"
#include "affine/quadrature.hpp"
#include "json.hpp"

namespace affine {

enum class CheckMode { inequality, equality, sensitivity };

std::string to_string(CheckMode mode);
CheckMode parse_check_mode(const std::string& s);

inline constexpr double kTolFloor = 1e-9;
inline constexpr double kTolEqQuadrature = 1e-6;
inline constexpr double kTolEqMC = 0.03;
inline constexpr double kTolEqNestedMC = 0.05;

/// Outcome of one check. lhs is the side the inequality puts on top, so the
/// inequality reads ratio = lhs / rhs >= 1.
struct CheckReport {
  std::string check_id;
  std::string label;
  CheckMode mode = CheckMode::inequality;
  int n = 1;
  int m = 1;
  double p = 0.0;
  double lambda = 1.0;
  std::string q_kind = "none";
  Estimate lhs;
  Estimate rhs;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
  /// tol_eq in equality mode, the floor otherwise.
  double tol = kTolFloor;
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t mc_samples = 0;
  nlohmann::json params = nlohmann::json::object();
  std::string note;
};

/// Fills ratio, ratio_stderr (unless already set) and pass from lhs, rhs and
/// the mode:
///   inequality:  ratio >= 1 - 3 sigma - quadrature error - floor
///   equality:    |ratio - 1| <= max(3 sigma, tol)
///   sensitivity: |ratio - 1| >  3 sigma + floor
void settle(CheckReport& report, bool ratio_stderr_given = false);

struct CheckOptions {
  CheckMode mode = CheckMode::inequality;
  Budget budget;
  /// Equality tolerance; negative selects the default for the path taken.
  double tol_eq = -1.0;
  /// Outer sphere method; unset picks exact quadrature up to dimension 3.
  std::optional<Method> method;
  std::string label;
};

/// A radial function phi(|x|) with support in [0, cutoff].
struct RadialProfile {
  Fn1 phi;
  double cutoff = kInf;
  std::string name;
};

enum class CarlsonLevinBranch { below_one, above_one, log };
CarlsonLevinBranch branch_for(double lambda);

/// The extremizer of the branch selected by lambda: a (1 + |bx|^p)^{-1/(1-lambda)},
/// a (1 - |bx|^p)_+^{1/(lambda-1)} or a exp(-|bx|^p).
RadialProfile carlson_levin_extremizer(double p, double lambda, double a, double b);

CheckReport check_carlson_levin(int n, double p, double lambda, const RadialProfile& f, CarlsonLevinBranch branch,
                                const CheckOptions& opts);

/// (n vol K_g(n+p))^{(n+p)/n}, the ball body term, by nested radial and sphere quadrature.
Estimate ball_body_term(const GaussianSpec& g, double p, Method method, const Budget& budget);

CheckReport check_prop_ball_entropy(double p, double lambda, const GaussianSpec& g, const CheckOptions& opts);
CheckReport check_jensen_ball(double p, const GaussianSpec& g, const CheckOptions& opts);
CheckReport check_moment_entropy_vec(double p, double lambda, const GaussianSpec& y, const CheckOptions& opts);

/// f on S^{nm-1} (column-stacked), g on S^{n-1}. An asymmetric Q makes the
/// check average f over U and -U.
CheckReport check_theorem_sphere(int n, int m, double p, const BodySpec& q, const SphereFn& f, const SphereFn& g,
                                 const CheckOptions& opts);

struct SpherePair {
  SphereFn f;
  SphereFn g;
};
/// g(u) = |A^t u|^{-(n+p)}, f(U) = ||A^{-1} U||^{-(nm+p)} in the gauge of the polar projection ball.
SpherePair theorem_sphere_extremizers(int n, const BodySpec& q, double p, const Matrix& a_for_f,
                                      const Matrix& a_for_g);

/// K a star body of R^n, L a star set of M_{n,m}.
CheckReport check_lemma_LZBS(int n, int m, double p, const BodySpec& q, const StarFunction& k,
                             const StarFunction& l, const CheckOptions& opts);

struct StarPair {
  StarFunction k;
  StarFunction l;
};
/// L = polar projection body of A_L B and K = (A_K B)°, a dilate of the polar
/// centroid body of L when A_K = A_L.
StarPair lzbs_extremizers(int n, const BodySpec& q, double p, const Matrix& a_k, const Matrix& a_l);

CheckReport check_theorem_main(int n, int m, double p, double lambda, const BodySpec& q, const GaussianSpec& x,
                               const GaussianSpec& y, const CheckOptions& opts);
/// The m = 1 constant of the main theorem against the closed form through the
/// polar projection ball radius.
CheckReport check_theorem_main_constant(int n, double p, double lambda, const CheckOptions& opts);

CheckReport check_affine_moment(int m, double p, double lambda, const BodySpec& q, const GaussianSpec& y,
                                const CheckOptions& opts);

/// Quadrature grid on an interval: composite Gauss-Legendre.
struct Grid {
  Vec x;
  Vec w;
  static Grid gauss_legendre(double a, double b, int panels = 32);
};

CheckReport check_reverse_holder(double q, const Vec& f, const Vec& g, const Grid& grid, const CheckOptions& opts);
CheckReport check_reverse_holder(double q, const Fn1& f, const Fn1& g, const Grid& grid, const CheckOptions& opts);

/// Gauge E_Y[h_Q(A^t Y)^p]^{1/p} of the cloud as a contour for samplers.
ContourGauge data_contour(const SampleCloud& y, const BodySpec& q, double p, int m, Method method,
                          const Budget& budget);

CheckReport check_min_first_random(int m, double p, double lambda, const BodySpec& q, const GaussianSpec& x,
                                   const SampleCloud& y, const CheckOptions& opts);

CheckReport check_corollary_infty(int n, int m, const BodySpec& q, const StarFunction& l, const StarFunction& k,
                                  const CheckOptions& opts);

CheckReport check_dual_minkowski(const StarFunction& k, const StarFunction& l, double p, const CheckOptions& opts);

/// vol(Pi-polar K) vol(K)^{nm/p - m} for the ball against K.
CheckReport check_theorem_D(int n, double p, const BodySpec& q, const BodySpec& k, const CheckOptions& opts);

/// w_n^2 vol(Pi-polar B)^{1/m} / vol(Gamma Pi-polar B) against vol(L)^{1/m} vol(Gamma° L).
CheckReport check_santalo(int n, double p, const BodySpec& q, const StarFunction& l, const CheckOptions& opts);

/// Centroid support of the polar projection ball against (m/(w_n(nm+p)))^{1/p} |v|.
CheckReport check_elipp_cal(int n, double p, const BodySpec& q, const Vec& v, const CheckOptions& opts);

CheckReport check_c_norm(int n, double p, double lambda, const CheckOptions& opts);
CheckReport check_ppb_radius(int n, double p, const Vec& theta, const CheckOptions& opts);
CheckReport check_d_limit(int n, double p, const CheckOptions& opts);
CheckReport check_uniform_entropy(const ContourGauge& gauge, std::size_t count, const CheckOptions& opts);

// Random inputs --------------------------------------------------------------

/// exp(sum_{k<=4} a_k T_k(w_k . u)) with |a_k| <= 0.3 and unit w_k.
SphereFn random_sphere_function(int d, Rng& rng);
StarFunction random_star(int d, Rng& rng);
/// Mixture of stretched exponentials and algebraic tails with finite moments
/// of order n + p and finite integral of phi^lambda.
RadialProfile random_radial_density(int n, double p, double lambda, Rng& rng);
/// exp(N(0, s^2)) singular values between Haar rotations.
Matrix random_matrix(int n, Rng& rng, double s = 0.4);
/// A linear image of a generalized Gaussian or of a uniform law, with a
/// finite moment of order p.
GaussianSpec random_vector_spec(int n, double p, double lambda, Rng& rng);

// Registry -------------------------------------------------------------------

struct Profile {
  std::string name = "desk";
  /// Multiplies every Monte Carlo budget.
  double scale = 1.0;
  /// Random instances per property suite.
  int instances = 100;
  /// Overrides the base MC sample count when set.
  std::optional<std::size_t> mc_samples;
  /// Overrides equality tolerances when set.
  std::optional<double> tol_eq;

  static Profile named(const std::string& name);
};

/// Profile named by AFFINE_PROFILE, or desk.
Profile profile_from_env();

struct CheckJob {
  std::string check_id;
  std::string label;
  /// Acceptance criterion this job belongs to, 0 for supplementary checks.
  int criterion = 0;
  std::function<CheckReport()> run;
};

std::vector<std::string> check_ids();
/// Accepts ids with or without the check_ prefix; throws std::invalid_argument
/// for unknown ids.
std::string canonical_check_id(const std::string& id);
/// Jobs for one check id, or for every check with "all".
std::vector<CheckJob> make_jobs(const std::string& id, const Profile& profile, std::uint64_t seed);

/// Runs the jobs on `workers` threads. Reports come back ordered by check_id,
/// then by job order. Exceptions turn into failing reports.
std::vector<CheckReport> run_jobs(const std::vector<CheckJob>& jobs, int workers);

}  // namespace affine
