#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "affine/numeric.hpp"

namespace affine {

/// Facet of a polytope: outward unit normal, (d-1)-volume, and support value
/// offset = h_K(normal).
struct Facet {
  Vec normal;
  double area = 0.0;
  double offset = 0.0;
};

class BodySpec;

namespace body {

struct Ball {
  double radius = 1.0;
};
/// E = A B, the image of the unit ball.
struct Ellipsoid {
  Matrix a;
  Matrix a_inv;
  double det = 1.0;
};
/// [-lower, upper] in R^1.
struct Interval {
  double lower = 1.0;
  double upper = 1.0;
};
/// Convex hull of the vertices; facets are filled in for dim <= 3.
struct Vertices {
  std::vector<Vec> points;
  std::vector<Facet> facets;
};
struct Facets {
  std::vector<Facet> facets;
};
/// Unit ball of the l_q norm, q in [1, inf].
struct LqBall {
  double q = 2.0;
};
struct Image {
  Matrix a;
  Matrix a_inv;
  double det = 1.0;
  std::shared_ptr<const BodySpec> base;
};

}  // namespace body

enum class BodyKind { ball, ellipsoid, interval, polytope_vertices, polytope_facets, lq_ball, linear_image };

std::string to_string(BodyKind k);

/// Surface area measure sigma_K on S^{d-1}.
struct SurfaceMeasure {
  enum class Type { uniform, atomic, ellipsoid };
  Type type = Type::uniform;
  /// uniform: sigma = radius^{d-1} times the Hausdorff measure.
  double radius = 1.0;
  /// atomic: one atom of mass `area` at each facet normal.
  std::vector<Facet> atoms;
  /// ellipsoid: boundary of A B, integrated by the parametrization x = A theta.
  Matrix a;

  double total_mass(int dim) const;
};

/// Immutable convex body containing the origin, with exact support, gauge,
/// and radial oracles.
class BodySpec {
 public:
  using Data = std::variant<body::Ball, body::Ellipsoid, body::Interval, body::Vertices, body::Facets,
                            body::LqBall, body::Image>;

  static BodySpec ball(int dim, double radius = 1.0);
  static BodySpec ellipsoid(const Matrix& a);
  static BodySpec interval(double lower, double upper);
  static BodySpec polytope_vertices(std::vector<Vec> points);
  static BodySpec polytope_facets(int dim, std::vector<Facet> facets);
  static BodySpec lq_ball(int dim, double q);
  /// [-half, half]^dim as a vertex polytope.
  static BodySpec cube(int dim, double half = 1.0);
  static BodySpec linear_image(const Matrix& a, const BodySpec& k);

  int dim() const { return dim_; }
  BodyKind kind() const;
  const Data& data() const { return data_; }

  double support(std::span<const double> u) const;
  /// inf{t > 0 : x in tK}; +inf along directions leaving K through the origin.
  double gauge(std::span<const double> x) const;
  double radial(std::span<const double> u) const;

  BodySpec polar() const;
  SurfaceMeasure surface_measure() const;
  double volume() const;
  bool symmetric() const;
  bool origin_interior() const;

  /// Normals z of hyperplanes {z.w = 0} along which support() is not smooth.
  std::vector<Vec> support_kinks() const;
  /// A lower bound on min_{|u|=1} (h(u) + h(-u)) / 2, the inradius of (K - K)/2.
  double sym_inradius() const;
  /// max_{x in K} |x|.
  double circumradius() const;

  std::string describe() const;
  /// Exact serialization of the defining data, usable as a cache key.
  std::string key() const;

 private:
  BodySpec(int dim, Data data) : dim_(dim), data_(std::move(data)) {}
  int dim_ = 1;
  Data data_;
};

/// Facets of conv(points) for dim in {2, 3}; 2D uses a monotone chain, 3D
/// enumerates supporting planes. Throws if the hull is lower dimensional.
std::vector<Facet> hull_facets(const std::vector<Vec>& points);

/// Volume of conv(points) by fan triangulation from an interior point (dim 2, 3).
double hull_volume(const std::vector<Vec>& points);

}  // namespace affine
