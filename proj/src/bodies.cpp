#include "affine/bodies.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "affine/scalar_kernels.hpp"

namespace affine {

namespace {

constexpr double kHullEps = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double dual_exponent(double q) {
  if (q == 1.0) return kInf;
  if (std::isinf(q)) return 1.0;
  return q / (q - 1.0);
}

double lq_norm(std::span<const double> x, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }
  if (q == 1.0) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
  }
  if (q == 2.0) return norm2(x);
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v) / m, q);
  return m * std::pow(s, 1.0 / q);
}

double polytope_gauge(const std::vector<Facet>& facets, std::span<const double> x) {
  double g = 0.0;
  const double scale = norm2(x);
  for (const auto& f : facets) {
    const double t = dot(f.normal, x);
    if (f.offset > kHullEps) {
      g = std::max(g, t / f.offset);
    } else if (t > 1e-14 * scale) {
      return kInf;
    }
  }
  return g;
}

Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Counter-clockwise hull of planar points (Andrew's monotone chain).
std::vector<Vec> hull2(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec& a, const Vec& b) {
                          return std::abs(a[0] - b[0]) < 1e-14 && std::abs(a[1] - b[1]) < 1e-14;
                        }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= kHullEps) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= kHullEps) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double polygon_area(const std::vector<Vec>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    s += a[0] * b[1] - a[1] * b[0];
  }
  return 0.5 * std::abs(s);
}

struct Plane {
  Vec normal;
  double offset;
};

// Supporting planes of a 3D point set, deduplicated.
std::vector<Plane> supporting_planes(const std::vector<Vec>& pts) {
  std::vector<Plane> planes;
  const std::size_t n = pts.size();
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, norm2(p));
  const double eps = kHullEps * std::max(1.0, scale);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Vec nrm = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
        const double len = norm2(nrm);
        if (len < eps * std::max(1.0, scale)) continue;
        for (auto& v : nrm) v /= len;
        double off = dot(nrm, pts[i]);
        bool below = true, above = true;
        for (const auto& p : pts) {
          const double s = dot(nrm, p) - off;
          below = below && s <= eps;
          above = above && s >= -eps;
        }
        if (!below && !above) continue;
        if (!below) {
          for (auto& v : nrm) v = -v;
          off = -off;
        }
        bool dup = false;
        for (const auto& q : planes)
          if (std::abs(q.offset - off) < 1e-9 * std::max(1.0, scale) && std::abs(dot(q.normal, nrm) - 1.0) < 1e-12)
            dup = true;
        if (!dup) planes.push_back({nrm, off});
      }
  return planes;
}

// Points of a supporting plane as an ordered polygon in plane coordinates,
// together with the 3D points in the same order.
std::vector<Vec> face_polygon(const Plane& pl, const std::vector<Vec>& pts, std::vector<Vec>* ordered3d) {
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, norm2(p));
  const double eps = 1e-9 * std::max(1.0, scale);
  const Vec& nr = pl.normal;
  Vec e1 = std::abs(nr[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
  const double d = dot(e1, nr);
  for (int i = 0; i < 3; ++i) e1[i] -= d * nr[i];
  const double l = norm2(e1);
  for (auto& v : e1) v /= l;
  const Vec e2 = cross(nr, e1);
  std::vector<Vec> proj;
  for (const auto& p : pts)
    if (std::abs(dot(nr, p) - pl.offset) <= eps) proj.push_back({dot(e1, p), dot(e2, p)});
  auto poly = hull2(proj);
  if (ordered3d) {
    ordered3d->clear();
    for (const auto& q : poly) {
      Vec x(3);
      for (int i = 0; i < 3; ++i) x[i] = q[0] * e1[i] + q[1] * e2[i] + pl.offset * nr[i];
      ordered3d->push_back(x);
    }
  }
  return poly;
}

void require_dim(const Vec& p, int dim) {
  if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("BodySpec: inconsistent point dimension");
}

}  // namespace

std::string to_string(BodyKind k) {
  switch (k) {
    case BodyKind::ball:
      return "ball";
    case BodyKind::ellipsoid:
      return "ellipsoid";
    case BodyKind::interval:
      return "interval";
    case BodyKind::polytope_vertices:
      return "polytope_vertices";
    case BodyKind::polytope_facets:
      return "polytope_facets";
    case BodyKind::lq_ball:
      return "lq_ball";
    case BodyKind::linear_image:
      return "linear_image";
  }
  return "unknown";
}

std::vector<Facet> hull_facets(const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("hull_facets: no points");
  const int dim = static_cast<int>(points.front().size());
  std::vector<Facet> out;
  if (dim == 2) {
    const auto h = hull2(points);
    if (h.size() < 3) throw std::invalid_argument("hull_facets: degenerate planar hull");
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto& a = h[i];
      const auto& b = h[(i + 1) % h.size()];
      const double dx = b[0] - a[0], dy = b[1] - a[1];
      const double len = std::hypot(dx, dy);
      Facet f;
      f.normal = {dy / len, -dx / len};
      f.area = len;
      f.offset = dot(f.normal, a);
      out.push_back(std::move(f));
    }
    return out;
  }
  if (dim == 3) {
    for (const auto& pl : supporting_planes(points)) {
      const auto poly = face_polygon(pl, points, nullptr);
      if (poly.size() < 3) continue;
      out.push_back({pl.normal, polygon_area(poly), pl.offset});
    }
    if (out.size() < 4) throw std::invalid_argument("hull_facets: degenerate 3D hull");
    return out;
  }
  throw std::invalid_argument("hull_facets: only dimensions 2 and 3");
}

double hull_volume(const std::vector<Vec>& points) {
  const int dim = static_cast<int>(points.front().size());
  if (dim == 2) return polygon_area(hull2(points));
  if (dim != 3) throw std::invalid_argument("hull_volume: only dimensions 2 and 3");
  Vec c(3, 0.0);
  for (const auto& p : points)
    for (int i = 0; i < 3; ++i) c[i] += p[i] / static_cast<double>(points.size());
  double vol = 0.0;
  std::vector<Vec> ring;
  for (const auto& pl : supporting_planes(points)) {
    face_polygon(pl, points, &ring);
    for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
      const Vec a = sub(ring[0], c), b = sub(ring[i], c), d = sub(ring[i + 1], c);
      vol += std::abs(dot(a, cross(b, d))) / 6.0;
    }
  }
  return vol;
}

double SurfaceMeasure::total_mass(int dim) const {
  switch (type) {
    case Type::uniform:
      return (dim == 1 ? 2.0 : dim * omega(dim)) * std::pow(radius, dim - 1);
    case Type::atomic: {
      double s = 0.0;
      for (const auto& f : atoms) s += f.area;
      return s;
    }
    case Type::ellipsoid:
      throw std::invalid_argument("SurfaceMeasure: total mass of an ellipsoid needs quadrature");
  }
  return 0.0;
}

BodySpec BodySpec::ball(int dim, double radius) {
  if (dim < 1) throw std::invalid_argument("ball: dimension must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
  return BodySpec(dim, body::Ball{radius});
}

BodySpec BodySpec::ellipsoid(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("ellipsoid: matrix must be square");
  const double det = a.determinant();
  if (!(std::abs(det) > 0.0)) throw std::invalid_argument("ellipsoid: matrix is singular");
  return BodySpec(a.rows(), body::Ellipsoid{a, a.inverse(), det});
}

BodySpec BodySpec::interval(double lower, double upper) {
  if (!(lower >= 0.0) || !(upper >= 0.0) || !(lower + upper > 0.0))
    throw std::invalid_argument("interval: need lower, upper >= 0 with positive length");
  return BodySpec(1, body::Interval{lower, upper});
}

BodySpec BodySpec::polytope_vertices(std::vector<Vec> points) {
  if (points.empty()) throw std::invalid_argument("polytope_vertices: no vertices");
  const int dim = static_cast<int>(points.front().size());
  for (const auto& p : points) require_dim(p, dim);
  if (dim == 1) {
    double lo = 0.0, hi = 0.0;
    for (const auto& p : points) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    bool has_lo = false, has_hi = false;
    for (const auto& p : points) {
      has_lo = has_lo || p[0] <= 0.0;
      has_hi = has_hi || p[0] >= 0.0;
    }
    if (!has_lo || !has_hi) throw std::invalid_argument("polytope_vertices: origin outside the hull");
    std::vector<Facet> facets{{{-1.0}, 1.0, -lo}, {{1.0}, 1.0, hi}};
    return BodySpec(1, body::Vertices{std::move(points), std::move(facets)});
  }
  std::vector<Facet> facets;
  if (dim <= 3) {
    facets = hull_facets(points);
    for (const auto& f : facets)
      if (f.offset < -1e-9) throw std::invalid_argument("polytope_vertices: origin outside the hull");
  }
  return BodySpec(dim, body::Vertices{std::move(points), std::move(facets)});
}

BodySpec BodySpec::polytope_facets(int dim, std::vector<Facet> facets) {
  if (facets.empty()) throw std::invalid_argument("polytope_facets: no facets");
  for (const auto& f : facets) {
    require_dim(f.normal, dim);
    if (std::abs(norm2(f.normal) - 1.0) > 1e-9) throw std::invalid_argument("polytope_facets: normals must be unit");
    if (!(f.area > 0.0)) throw std::invalid_argument("polytope_facets: areas must be positive");
    if (f.offset < -1e-12) throw std::invalid_argument("polytope_facets: origin outside the body");
  }
  return BodySpec(dim, body::Facets{std::move(facets)});
}

BodySpec BodySpec::lq_ball(int dim, double q) {
  if (dim < 1) throw std::invalid_argument("lq_ball: dimension must be positive");
  if (!(q >= 1.0)) throw std::invalid_argument("lq_ball: q must be >= 1");
  return BodySpec(dim, body::LqBall{q});
}

BodySpec BodySpec::cube(int dim, double half) {
  std::vector<Vec> pts;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec p(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) p[i] = (mask >> i & 1) ? half : -half;
    pts.push_back(std::move(p));
  }
  return polytope_vertices(std::move(pts));
}

BodySpec BodySpec::linear_image(const Matrix& a, const BodySpec& k) {
  if (!a.square() || a.rows() != k.dim()) throw std::invalid_argument("linear_image: dimension mismatch");
  const double det = a.determinant();
  if (!(std::abs(det) > 0.0)) throw std::invalid_argument("linear_image: matrix is singular");
  return BodySpec(k.dim(), body::Image{a, a.inverse(), det, std::make_shared<const BodySpec>(k)});
}

BodyKind BodySpec::kind() const { return static_cast<BodyKind>(data_.index()); }

double BodySpec::support(std::span<const double> u) const {
  return std::visit(
      Overloaded{
          [&](const body::Ball& b) { return b.radius * norm2(u); },
          [&](const body::Ellipsoid& e) {
            double w[kMaxDim];
            e.a.apply_transpose(u, std::span<double>(w, u.size()));
            return norm2(std::span<const double>(w, u.size()));
          },
          [&](const body::Interval& i) { return u[0] >= 0.0 ? i.upper * u[0] : -i.lower * u[0]; },
          [&](const body::Vertices& v) {
            double h = -kInf;
            for (const auto& p : v.points) h = std::max(h, dot(p, u));
            return h;
          },
          [&](const body::Facets&) -> double {
            throw std::invalid_argument("support: not available for polytope_facets (use polar().gauge)");
          },
          [&](const body::LqBall& l) { return lq_norm(u, dual_exponent(l.q)); },
          [&](const body::Image& im) {
            double w[kMaxDim];
            im.a.apply_transpose(u, std::span<double>(w, u.size()));
            return im.base->support(std::span<const double>(w, u.size()));
          },
      },
      data_);
}

double BodySpec::gauge(std::span<const double> x) const {
  return std::visit(
      Overloaded{
          [&](const body::Ball& b) { return norm2(x) / b.radius; },
          [&](const body::Ellipsoid& e) {
            double w[kMaxDim];
            e.a_inv.apply(x, std::span<double>(w, x.size()));
            return norm2(std::span<const double>(w, x.size()));
          },
          [&](const body::Interval& i) {
            if (x[0] == 0.0) return 0.0;
            if (x[0] > 0.0) return i.upper > 0.0 ? x[0] / i.upper : kInf;
            return i.lower > 0.0 ? -x[0] / i.lower : kInf;
          },
          [&](const body::Vertices& v) -> double {
            if (v.facets.empty()) throw std::invalid_argument("gauge: vertex polytopes only in dimension <= 3");
            return polytope_gauge(v.facets, x);
          },
          [&](const body::Facets& f) { return polytope_gauge(f.facets, x); },
          [&](const body::LqBall& l) { return lq_norm(x, l.q); },
          [&](const body::Image& im) {
            double w[kMaxDim];
            im.a_inv.apply(x, std::span<double>(w, x.size()));
            return im.base->gauge(std::span<const double>(w, x.size()));
          },
      },
      data_);
}

double BodySpec::radial(std::span<const double> u) const {
  const double g = gauge(u);
  return g > 0.0 ? 1.0 / g : kInf;
}

bool BodySpec::origin_interior() const {
  return std::visit(Overloaded{
                        [](const body::Ball&) { return true; },
                        [](const body::Ellipsoid&) { return true; },
                        [](const body::Interval& i) { return i.lower > 0.0 && i.upper > 0.0; },
                        [](const body::Vertices& v) {
                          for (const auto& f : v.facets)
                            if (!(f.offset > kHullEps)) return false;
                          return !v.facets.empty();
                        },
                        [](const body::Facets& f) {
                          for (const auto& x : f.facets)
                            if (!(x.offset > kHullEps)) return false;
                          return true;
                        },
                        [](const body::LqBall&) { return true; },
                        [](const body::Image& im) { return im.base->origin_interior(); },
                    },
                    data_);
}

BodySpec BodySpec::polar() const {
  if (!origin_interior()) throw std::invalid_argument("polar: the origin must be an interior point");
  const int d = dim_;
  return std::visit(Overloaded{
                        [&](const body::Ball& b) { return ball(d, 1.0 / b.radius); },
                        [&](const body::Ellipsoid& e) { return ellipsoid(e.a_inv.transpose()); },
                        [&](const body::Interval& i) { return interval(1.0 / i.lower, 1.0 / i.upper); },
                        [&](const body::Vertices& v) {
                          std::vector<Vec> pts;
                          for (const auto& f : v.facets) {
                            Vec p = f.normal;
                            for (auto& x : p) x /= f.offset;
                            pts.push_back(std::move(p));
                          }
                          return polytope_vertices(std::move(pts));
                        },
                        [&](const body::Facets& fs) {
                          std::vector<Vec> pts;
                          for (const auto& f : fs.facets) {
                            Vec p = f.normal;
                            for (auto& x : p) x /= f.offset;
                            pts.push_back(std::move(p));
                          }
                          return polytope_vertices(std::move(pts));
                        },
                        [&](const body::LqBall& l) { return lq_ball(d, dual_exponent(l.q)); },
                        [&](const body::Image& im) { return linear_image(im.a_inv.transpose(), im.base->polar()); },
                    },
                    data_);
}

namespace {

std::vector<Facet> transform_facets(const std::vector<Facet>& facets, const Matrix& a_inv, double det) {
  const Matrix a_inv_t = a_inv.transpose();
  std::vector<Facet> out;
  for (const auto& f : facets) {
    Vec w = a_inv_t * std::span<const double>(f.normal);
    const double len = norm2(w);
    for (auto& x : w) x /= len;
    out.push_back({std::move(w), std::abs(det) * len * f.area, f.offset / len});
  }
  return out;
}

std::vector<Facet> lq_facets(int d, double q) {
  std::vector<Facet> out;
  if (std::isinf(q)) {
    for (int i = 0; i < d; ++i)
      for (double s : {1.0, -1.0}) {
        Vec n(static_cast<std::size_t>(d), 0.0);
        n[i] = s;
        out.push_back({n, std::pow(2.0, d - 1), 1.0});
      }
    return out;
  }
  // Cross-polytope: facets are simplices of (d-1)-volume sqrt(d)/(d-1)!.
  const double area = std::sqrt(static_cast<double>(d)) / std::tgamma(static_cast<double>(d));
  for (int mask = 0; mask < (1 << d); ++mask) {
    Vec n(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) n[i] = ((mask >> i & 1) ? 1.0 : -1.0) / std::sqrt(static_cast<double>(d));
    out.push_back({n, area, 1.0 / std::sqrt(static_cast<double>(d))});
  }
  return out;
}

}  // namespace

SurfaceMeasure BodySpec::surface_measure() const {
  SurfaceMeasure m;
  std::visit(Overloaded{
                 [&](const body::Ball& b) {
                   m.type = SurfaceMeasure::Type::uniform;
                   m.radius = b.radius;
                 },
                 [&](const body::Ellipsoid& e) {
                   m.type = SurfaceMeasure::Type::ellipsoid;
                   m.a = e.a;
                 },
                 [&](const body::Interval& i) {
                   m.type = SurfaceMeasure::Type::atomic;
                   m.atoms = {{{-1.0}, 1.0, i.lower}, {{1.0}, 1.0, i.upper}};
                 },
                 [&](const body::Vertices& v) {
                   if (v.facets.empty())
                     throw std::invalid_argument("surface_measure: vertex polytopes only in dimension <= 3");
                   m.type = SurfaceMeasure::Type::atomic;
                   m.atoms = v.facets;
                 },
                 [&](const body::Facets& f) {
                   m.type = SurfaceMeasure::Type::atomic;
                   m.atoms = f.facets;
                 },
                 [&](const body::LqBall& l) {
                   if (l.q == 2.0) {
                     m.type = SurfaceMeasure::Type::uniform;
                   } else if (l.q == 1.0 || std::isinf(l.q)) {
                     m.type = SurfaceMeasure::Type::atomic;
                     m.atoms = lq_facets(dim_, l.q);
                   } else {
                     throw std::invalid_argument("surface_measure: not implemented for lq_ball with q = " +
                                                 std::to_string(l.q));
                   }
                 },
                 [&](const body::Image& im) {
                   const SurfaceMeasure base = im.base->surface_measure();
                   switch (base.type) {
                     case SurfaceMeasure::Type::uniform:
                       m.type = SurfaceMeasure::Type::ellipsoid;
                       m.a = im.a * base.radius;
                       break;
                     case SurfaceMeasure::Type::ellipsoid:
                       m.type = SurfaceMeasure::Type::ellipsoid;
                       m.a = im.a * base.a;
                       break;
                     case SurfaceMeasure::Type::atomic:
                       m.type = SurfaceMeasure::Type::atomic;
                       m.atoms = transform_facets(base.atoms, im.a_inv, im.det);
                       break;
                   }
                 },
             },
             data_);
  if (m.type == SurfaceMeasure::Type::ellipsoid && dim_ == 1) {
    // A segment [-|a|, |a|]: two unit atoms.
    const double r = std::abs(m.a(0, 0));
    m.type = SurfaceMeasure::Type::atomic;
    m.atoms = {{{-1.0}, 1.0, r}, {{1.0}, 1.0, r}};
  }
  if (m.type == SurfaceMeasure::Type::uniform && dim_ == 1) {
    m.type = SurfaceMeasure::Type::atomic;
    m.atoms = {{{-1.0}, 1.0, m.radius}, {{1.0}, 1.0, m.radius}};
  }
  return m;
}

double BodySpec::volume() const {
  const int d = dim_;
  return std::visit(Overloaded{
                        [&](const body::Ball& b) { return omega(d) * std::pow(b.radius, d); },
                        [&](const body::Ellipsoid& e) { return omega(d) * std::abs(e.det); },
                        [&](const body::Interval& i) { return i.lower + i.upper; },
                        [&](const body::Vertices& v) -> double {
                          if (d == 1) return v.facets[0].offset + v.facets[1].offset;
                          return hull_volume(v.points);
                        },
                        [&](const body::Facets& f) {
                          double s = 0.0;
                          for (const auto& x : f.facets) s += x.offset * x.area;
                          return s / d;
                        },
                        [&](const body::LqBall& l) {
                          if (std::isinf(l.q)) return std::pow(2.0, d);
                          return std::pow(2.0 * std::tgamma(1.0 + 1.0 / l.q), d) / std::tgamma(1.0 + d / l.q);
                        },
                        [&](const body::Image& im) { return std::abs(im.det) * im.base->volume(); },
                    },
                    data_);
}

bool BodySpec::symmetric() const {
  auto has_point = [](const std::vector<Vec>& pts, const Vec& q) {
    for (const auto& p : pts) {
      double e = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) e = std::max(e, std::abs(p[i] - q[i]));
      if (e < 1e-12) return true;
    }
    return false;
  };
  return std::visit(Overloaded{
                        [](const body::Ball&) { return true; },
                        [](const body::Ellipsoid&) { return true; },
                        [](const body::Interval& i) { return i.lower == i.upper; },
                        [&](const body::Vertices& v) {
                          if (!v.facets.empty()) {
                            for (const auto& f : v.facets) {
                              bool found = false;
                              for (const auto& g : v.facets) {
                                double e = std::abs(f.offset - g.offset);
                                for (std::size_t i = 0; i < f.normal.size(); ++i)
                                  e = std::max(e, std::abs(f.normal[i] + g.normal[i]));
                                found = found || e < 1e-10;
                              }
                              if (!found) return false;
                            }
                            return true;
                          }
                          for (const auto& p : v.points) {
                            Vec q = p;
                            for (auto& x : q) x = -x;
                            if (!has_point(v.points, q)) return false;
                          }
                          return true;
                        },
                        [](const body::Facets& fs) {
                          for (const auto& f : fs.facets) {
                            bool found = false;
                            for (const auto& g : fs.facets) {
                              double e = std::abs(f.offset - g.offset);
                              for (std::size_t i = 0; i < f.normal.size(); ++i)
                                e = std::max(e, std::abs(f.normal[i] + g.normal[i]));
                              found = found || e < 1e-10;
                            }
                            if (!found) return false;
                          }
                          return true;
                        },
                        [](const body::LqBall&) { return true; },
                        [](const body::Image& im) { return im.base->symmetric(); },
                    },
                    data_);
}

std::vector<Vec> BodySpec::support_kinks() const {
  const int d = dim_;
  auto unit = [d](int i) {
    Vec e(static_cast<std::size_t>(d), 0.0);
    e[i] = 1.0;
    return e;
  };
  auto add_unique = [](std::vector<Vec>& out, Vec z) {
    const double len = norm2(z);
    if (len < 1e-14) return;
    for (auto& x : z) x /= len;
    for (const auto& y : out)
      if (std::abs(std::abs(dot(y, z)) - 1.0) < 1e-12) return;
    out.push_back(std::move(z));
  };
  std::vector<Vec> out;
  std::visit(Overloaded{
                 [&](const body::Ball&) {
                   if (d == 1) out.push_back({1.0});
                 },
                 [&](const body::Ellipsoid&) {
                   if (d == 1) out.push_back({1.0});
                 },
                 [&](const body::Interval&) { out.push_back({1.0}); },
                 [&](const body::Vertices& v) {
                   if (d == 1) {
                     out.push_back({1.0});
                     return;
                   }
                   for (std::size_t i = 0; i < v.points.size(); ++i)
                     for (std::size_t j = i + 1; j < v.points.size(); ++j) add_unique(out, sub(v.points[i], v.points[j]));
                 },
                 [&](const body::Facets&) {},
                 [&](const body::LqBall& l) {
                   if (l.q == 2.0 && d > 1) return;
                   if (l.q == 1.0 && d > 1) {
                     for (int i = 0; i < d; ++i)
                       for (int j = i + 1; j < d; ++j) {
                         Vec a = unit(i), b = unit(i);
                         a[j] = 1.0;
                         b[j] = -1.0;
                         add_unique(out, a);
                         add_unique(out, b);
                       }
                     return;
                   }
                   for (int i = 0; i < d; ++i) out.push_back(unit(i));
                 },
                 [&](const body::Image& im) {
                   for (const auto& z : im.base->support_kinks()) add_unique(out, im.a * std::span<const double>(z));
                 },
             },
             data_);
  return out;
}

double BodySpec::sym_inradius() const {
  const int d = dim_;
  return std::visit(Overloaded{
                        [](const body::Ball& b) { return b.radius; },
                        [](const body::Ellipsoid& e) { return e.a.min_singular_value(); },
                        [](const body::Interval& i) { return 0.5 * (i.lower + i.upper); },
                        [&](const body::Vertices& v) {
                          if (d == 1) return 0.5 * (v.facets[0].offset + v.facets[1].offset);
                          if (d == 2) {
                            double w = kInf;
                            for (const auto& f : v.facets) {
                              Vec m = f.normal;
                              for (auto& x : m) x = -x;
                              w = std::min(w, 0.5 * (f.offset + support(m)));
                            }
                            return w;
                          }
                          if (!origin_interior())
                            throw std::invalid_argument("sym_inradius: origin must be interior for dim >= 3");
                          double w = kInf;
                          for (const auto& f : v.facets) w = std::min(w, f.offset);
                          return w;
                        },
                        [&](const body::Facets& fs) {
                          double w = kInf;
                          for (const auto& f : fs.facets) w = std::min(w, f.offset);
                          return w;
                        },
                        [&](const body::LqBall& l) {
                          const double qs = dual_exponent(l.q);
                          if (qs >= 2.0) return std::isinf(qs) ? 1.0 / std::sqrt(d) : std::pow(d, 1.0 / qs - 0.5);
                          return 1.0;
                        },
                        [](const body::Image& im) { return im.a.min_singular_value() * im.base->sym_inradius(); },
                    },
                    data_);
}

double BodySpec::circumradius() const {
  const int d = dim_;
  return std::visit(Overloaded{
                        [](const body::Ball& b) { return b.radius; },
                        [](const body::Ellipsoid& e) { return e.a.max_singular_value(); },
                        [](const body::Interval& i) { return std::max(i.lower, i.upper); },
                        [](const body::Vertices& v) {
                          double r = 0.0;
                          for (const auto& p : v.points) r = std::max(r, norm2(p));
                          return r;
                        },
                        [&](const body::Facets&) {
                          // Vertices of K are n/b over the facets (n, b) of its polar.
                          const auto dual = polar();
                          const auto& vf = std::get<body::Vertices>(dual.data()).facets;
                          if (vf.empty()) throw std::invalid_argument("circumradius: facet polytopes only in dim <= 3");
                          double r = 0.0;
                          for (const auto& f : vf) r = std::max(r, 1.0 / f.offset);
                          return r;
                        },
                        [&](const body::LqBall& l) { return l.q <= 2.0 ? 1.0 : std::pow(d, 0.5 - 1.0 / l.q); },
                        [](const body::Image& im) { return im.a.max_singular_value() * im.base->circumradius(); },
                    },
                    data_);
}

std::string BodySpec::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << "(dim=" << dim_;
  std::visit(Overloaded{
                 [&](const body::Ball& b) { os << ", r=" << b.radius; },
                 [&](const body::Ellipsoid& e) { os << ", det=" << e.det; },
                 [&](const body::Interval& i) { os << ", [-" << i.lower << ", " << i.upper << "]"; },
                 [&](const body::Vertices& v) { os << ", vertices=" << v.points.size(); },
                 [&](const body::Facets& f) { os << ", facets=" << f.facets.size(); },
                 [&](const body::LqBall& l) { os << ", q=" << l.q; },
                 [&](const body::Image& im) { os << ", det=" << im.det << ", of " << im.base->describe(); },
             },
             data_);
  os << ")";
  return os.str();
}

namespace {

void put_matrix(std::ostream& os, const Matrix& a) {
  os << a.rows() << 'x' << a.cols();
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) os << ',' << a(i, j);
}

void put_facets(std::ostream& os, const std::vector<Facet>& fs) {
  for (const auto& f : fs) {
    os << ";";
    for (double x : f.normal) os << x << ',';
    os << f.area << ',' << f.offset;
  }
}

}  // namespace

std::string BodySpec::key() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(kind()) << ':' << dim_ << ':';
  std::visit(Overloaded{
                 [&](const body::Ball& b) { os << b.radius; },
                 [&](const body::Ellipsoid& e) { put_matrix(os, e.a); },
                 [&](const body::Interval& i) { os << i.lower << ',' << i.upper; },
                 [&](const body::Vertices& v) {
                   for (const auto& pt : v.points) {
                     os << ';';
                     for (double x : pt) os << x << ',';
                   }
                 },
                 [&](const body::Facets& f) { put_facets(os, f.facets); },
                 [&](const body::LqBall& l) { os << l.q; },
                 [&](const body::Image& im) {
                   put_matrix(os, im.a);
                   os << '(' << im.base->key() << ')';
                 },
             },
             data_);
  return os.str();
}

}  // namespace affine
