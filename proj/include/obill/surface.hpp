#pragma once
// Quadratically convex compact surfaces of M_k, given as Euclidean
// ellipsoids in the projective chart (see chart.hpp). The chart preserves
// strict and quadratic convexity, so every ellipsoid is a valid table
// boundary; intrinsic quantities (normals, shape operator) are computed in
// the model after pushing forward.

#include <Eigen/Geometry>

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "obill/chart.hpp"

namespace obill {

class ChartEllipsoid {
 public:
  /// Rejects non-positive axes, improper rotations and, for k = -1,
  /// ellipsoids whose closure leaves the ball shrunk by 1e-6.
  static ChartEllipsoid make(Kappa k, const Vec3& center, const Vec3& semi_axes, const Mat3& rotation) {
    if ((semi_axes.array() <= 0.0).any()) throw DomainError("semi-axes must be positive");
    if ((rotation * rotation.transpose() - Mat3::Identity()).lpNorm<Eigen::Infinity>() > 1e-9 ||
        std::abs(rotation.determinant() - 1.0) > 1e-9)
      throw DomainError("rotation must be special orthogonal");
    ChartEllipsoid e(k, center, semi_axes, rotation);
    if (k == Kappa::Hyperbolic && e.max_chart_radius() >= 1.0 - 1e-6)
      throw DomainError("ellipsoid must lie inside the Klein ball");
    return e;
  }

  static ChartEllipsoid sphere(Kappa k, const Vec3& center, double radius) {
    return make(k, center, Vec3::Constant(radius), Mat3::Identity());
  }

  Kappa kappa() const { return kappa_; }
  const Vec3& center() const { return center_; }
  const Vec3& semi_axes() const { return axes_; }
  const Mat3& rotation() const { return rot_; }

  /// Q with (x - c)^T Q (x - c) = 1 on the surface.
  Mat3 Q() const { return rot_ * axes_.cwiseInverse().cwiseAbs2().asDiagonal() * rot_.transpose(); }
  Mat3 Q_inverse() const { return rot_ * axes_.cwiseAbs2().asDiagonal() * rot_.transpose(); }

  /// Chart point for the unit-sphere parameter xi.
  Vec3 chart_point(const Vec3& xi) const { return center_ + rot_ * axes_.cwiseProduct(xi); }
  /// Inverse of chart_point (the result has unit norm for surface points).
  Vec3 sphere_param(const Vec3& x) const { return sphere_direction(x - center_); }
  /// Linear part of sphere_param, for chart vectors.
  Vec3 sphere_direction(const Vec3& y) const { return axes_.cwiseInverse().cwiseProduct(rot_.transpose() * y); }

  /// Outward Euclidean gradient of the defining quadric.
  Vec3 chart_gradient(const Vec3& x) const { return Q() * (x - center_); }

  double level(const Vec3& x) const { return (x - center_).dot(Q() * (x - center_)); }

  /// Largest |x| over the ellipsoid.
  double max_chart_radius() const {
    // Maximize |c + A xi| over the unit sphere by power-iteration style
    // fixed point xi <- normalize(A^T (c + A xi)) from many starts.
    const Mat3 A = rot_ * axes_.asDiagonal();
    double best = 0.0;
    for (int s = 0; s < 26; ++s) {
      Vec3 xi(((s % 3) - 1.0), (((s / 3) % 3) - 1.0), ((s / 9) - 1.0));
      if (xi.norm() == 0.0) xi = Vec3(0.3, -0.2, 0.9);
      xi.normalize();
      for (int it = 0; it < 500; ++it) {
        const Vec3 g = A.transpose() * (center_ + A * xi);
        if (g.norm() == 0.0) break;
        const Vec3 nxt = g.normalized();
        if ((nxt - xi).norm() < 1e-15) break;
        xi = nxt;
      }
      best = std::max(best, (center_ + A * xi).norm());
    }
    return best;
  }

 private:
  ChartEllipsoid(Kappa k, const Vec3& c, const Vec3& a, const Mat3& r) : kappa_(k), center_(c), axes_(a), rot_(r) {}
  Kappa kappa_;
  Vec3 center_;
  Vec3 axes_;
  Mat3 rot_;
};

inline Mat3 rotation_from_axis_angle(const Vec3& axis, double angle) {
  if (axis.norm() == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Reads a surface from flat key-value text:
///   kappa = -1
///   center = 0 0 0
///   semi_axes = 0.2 0.3 0.25
///   rotation = 0 0 1 0.5      # axis (3 numbers) then angle in radians
/// Blank lines and '#' comments are ignored.
inline ChartEllipsoid parse_surface_config(std::istream& in) {
  std::map<std::string, std::vector<double>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("surface config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream vs(line.substr(eq + 1));
    std::vector<double> vals;
    double x;
    while (vs >> x) vals.push_back(x);
    if (!vs.eof()) throw DomainError("surface config line " + std::to_string(lineno) + ": bad number");
    kv[key] = vals;
  }
  const auto get = [&](const std::string& key, std::size_t n, std::vector<double> fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      if (fallback.empty()) throw DomainError("surface config: missing key '" + key + "'");
      return fallback;
    }
    if (it->second.size() != n) throw DomainError("surface config: key '" + key + "' needs " + std::to_string(n) + " values");
    return it->second;
  };
  for (const auto& [key, _] : kv)
    if (key != "kappa" && key != "center" && key != "semi_axes" && key != "rotation")
      throw DomainError("surface config: unknown key '" + key + "'");
  const double kd = get("kappa", 1, {})[0];
  if (kd != std::round(kd)) throw DomainError("surface config: kappa must be an integer");
  const Kappa k = kappa_from_int(static_cast<int>(kd));
  const auto c = get("center", 3, {0.0, 0.0, 0.0});
  const auto a = get("semi_axes", 3, {});
  const auto r = get("rotation", 4, {0.0, 0.0, 1.0, 0.0});
  return ChartEllipsoid::make(k, Vec3(c[0], c[1], c[2]), Vec3(a[0], a[1], a[2]),
                              rotation_from_axis_angle(Vec3(r[0], r[1], r[2]), r[3]));
}

inline ChartEllipsoid load_surface_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open surface config '" + path + "'");
  return parse_surface_config(in);
}

/// Orthonormal frame at a surface point: u, v = i u = n x u tangent to S and
/// n the inward unit normal.
struct SurfaceFrame {
  Tangent u;
  Tangent v;
  Tangent n;
  const Point& p() const { return u.base(); }
};

/// Inward unit normal of S at the model point p (p must lie on S).
inline Tangent inward_normal(const ChartEllipsoid& E, const Point& p, double tol = 1e-8) {
  const Kappa k = E.kappa();
  const Vec3 x = model_to_chart(p);
  if (std::abs(E.level(x) - 1.0) > tol) throw DomainError("point is not on the surface");
  const Vec3 g = E.chart_gradient(x);
  Vec4 n(-to_int(k) * g.dot(x), g[0], g[1], g[2]);
  n = detail::tangential(k, p.coords(), n);
  n /= detail::norm_k(k, n);
  if (ambient_inner(k, n, chart_pushforward(k, x, -g)) < 0.0) n = -n;
  return Tangent::make(p, n);
}

/// Frame at p with u the normalized projection of dir onto T_pS.
inline SurfaceFrame frame_at(const ChartEllipsoid& E, const Point& p, const Vec4& dir) {
  const Kappa k = E.kappa();
  const Tangent n = inward_normal(E, p);
  Vec4 u = detail::tangential(k, p.coords(), dir);
  u -= ambient_inner(k, u, n.vec()) * n.vec();
  const double un = detail::norm_k(k, u);
  if (un < 1e-12) throw DomainError("direction is normal to the surface");
  u /= un;
  const Vec4 v = detail::cross(k, p.coords(), n.vec(), u);
  return SurfaceFrame{Tangent::make(p, u), Tangent::make(p, v), n};
}

/// Surface point with unit-sphere parameter (theta, phi) and frame angle psi.
inline SurfaceFrame surface_point(const ChartEllipsoid& E, double theta, double phi, double psi = 0.0) {
  const Kappa k = E.kappa();
  const Vec3 xi(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
  const Vec3 x = E.chart_point(xi);
  const Point p = chart_to_model(k, x);
  // Reference tangent: the pushforward of the chart axis least aligned with
  // the gradient, projected onto T_pS.
  const Vec3 g = E.chart_gradient(x).normalized();
  Eigen::Index axis;
  g.cwiseAbs().minCoeff(&axis);
  const SurfaceFrame ref = frame_at(E, p, chart_pushforward(k, x, Vec3::Unit(axis)));
  const Vec4 u = std::cos(psi) * ref.u.vec() + std::sin(psi) * ref.v.vec();
  return frame_at(E, p, u);
}

/// A point on the surface curve through p with initial model velocity e
/// (e tangent to S), at curve parameter s.
inline Point surface_curve_point(const ChartEllipsoid& E, const Point& p, const Vec4& e, double s) {
  const Vec3 x = model_to_chart(p);
  const Vec3 y = chart_pullback(p.coords(), e);
  const Vec3 xi0 = E.sphere_param(x);
  const Vec3 eta = E.sphere_direction(y);
  return chart_to_model(E.kappa(), E.chart_point((xi0 + s * eta).normalized()));
}


/// Matrix of the shape operator A_p = -nabla n in the frame {u, v}.
struct ShapeMatrix {
  double b11 = 0.0, b12 = 0.0, b21 = 0.0, b22 = 0.0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << b11, b12, b21, b22;
    return m;
  }
  double det() const { return b11 * b22 - b12 * b21; }
  double trace() const { return b11 + b22; }
  double asymmetry() const { return std::abs(b12 - b21); }
  ShapeMatrix symmetrized() const {
    const double m = 0.5 * (b12 + b21);
    return ShapeMatrix{b11, m, m, b22};
  }
  /// Eigenvalues of the symmetric part, ascending.
  Eigen::Vector2d eigenvalues() const {
    Eigen::Matrix2d s = matrix();
    s = 0.5 * (s + s.transpose()).eval();
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(s).eigenvalues();
  }
};

/// Shape operator by central differences of the inward normal along surface
/// curves with velocities u and v, Richardson-extrapolated from h and h/2.
/// Throws DomainError when the result is not positive definite.
inline ShapeMatrix shape_operator(const ChartEllipsoid& E, const SurfaceFrame& F, double h = 1e-5) {
  const Kappa k = E.kappa();
  const Point& p = F.p();
  const auto normal_at = [&](const Vec4& e, double s) {
    return inward_normal(E, surface_curve_point(E, p, e, s), 1e-6).vec();
  };
  const auto dn = [&](const Vec4& e) {
    const Vec4 d1 = (normal_at(e, h) - normal_at(e, -h)) / (2.0 * h);
    const Vec4 d2 = (normal_at(e, h / 2) - normal_at(e, -h / 2)) / h;
    return Vec4((4.0 * d2 - d1) / 3.0);
  };
  const Vec4 du = dn(F.u.vec());
  const Vec4 dv = dn(F.v.vec());
  ShapeMatrix b;
  // Column j of [A] holds the coordinates of A(e_j).
  b.b11 = -ambient_inner(k, du, F.u.vec());
  b.b21 = -ambient_inner(k, du, F.v.vec());
  b.b12 = -ambient_inner(k, dv, F.u.vec());
  b.b22 = -ambient_inner(k, dv, F.v.vec());
  if (!(b.b11 > 0.0) || !(b.det() > 0.0)) throw DomainError("surface is not quadratically convex at this point");
  return b;
}

/// Closed form for a chart sphere centred at the chart origin (any centre
/// when k = 0): a geodesic sphere whose principal curvatures are
/// 1/rho, coth(rho) or cot(rho); in chart radius R all three equal 1/R.
inline ShapeMatrix shape_operator_round(const ChartEllipsoid& E) {
  const Vec3& a = E.semi_axes();
  if (a.maxCoeff() - a.minCoeff() > 1e-14 || (E.kappa() != Kappa::Flat && E.center().norm() > 1e-14))
    throw DomainError("shape_operator_round needs a geodesic sphere");
  const double R = a[0];
  double kappa_n = 1.0 / R;
  switch (E.kappa()) {
    case Kappa::Hyperbolic: kappa_n = 1.0 / std::tanh(std::atanh(R)); break;
    case Kappa::Spherical: kappa_n = 1.0 / std::tan(std::atan(R)); break;
    case Kappa::Flat: break;
  }
  return ShapeMatrix{kappa_n, 0.0, 0.0, kappa_n};
}

struct ConvexityReport {
  int samples = 0;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double max_asymmetry = 0.0;
  bool quadratically_convex = false;
};

/// Samples the shape operator on an n x 2n grid of the parameter sphere
/// (theta at cell centres, so odd n hits the equator).
inline ConvexityReport convexity_audit(const ChartEllipsoid& E, int n_samples) {
  if (n_samples < 1) throw DomainError("convexity_audit needs at least one sample row");
  ConvexityReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  r.max_eigenvalue = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / n_samples;
    for (int j = 0; j < 2 * n_samples; ++j) {
      const double phi = std::numbers::pi * j / n_samples;
      const SurfaceFrame F = surface_point(E, theta, phi);
      ShapeMatrix b;
      try {
        b = shape_operator(E, F);
      } catch (const DomainError&) {
        r.min_eigenvalue = std::min(r.min_eigenvalue, 0.0);
        ++r.samples;
        continue;
      }
      const Eigen::Vector2d ev = b.eigenvalues();
      r.min_eigenvalue = std::min(r.min_eigenvalue, ev[0]);
      r.max_eigenvalue = std::max(r.max_eigenvalue, ev[1]);
      r.max_asymmetry = std::max(r.max_asymmetry, b.asymmetry());
      ++r.samples;
    }
  }
  r.quadratically_convex = r.min_eigenvalue > 0.0;
  return r;
}

enum class GeodesicClass { Exterior, Cuts, Tangent, GaussSet };

inline std::string to_string(GeodesicClass c) {
  switch (c) {
    case GeodesicClass::Exterior: return "exterior";
    case GeodesicClass::Cuts: return "cuts";
    case GeodesicClass::Tangent: return "tangent";
    case GeodesicClass::GaussSet: return "gauss";
  }
  return "?";
}

/// Tangency point of one totally geodesic surface through a geodesic.
struct ChartTangency {
  Vec3 chart_point;
  Vec3 plane_normal;  // Euclidean unit normal of the chart plane
  Point p;
};

namespace detail {

/// Normalized discriminant of |x + lambda w - c|_Q = 1 in lambda: positive
/// when the chart line cuts the ellipsoid, negative when it misses it.
inline double line_discriminant(const ChartEllipsoid& E, const ChartLine& L) {
  const Mat3 Q = E.Q();
  const Vec3 d = L.point - E.center();
  const Vec3& w = L.direction;
  const double A = w.dot(Q * w);
  const double B = w.dot(Q * d);
  const double C = d.dot(Q * d) - 1.0;
  return (B * B - A * C) / A;
}

inline ChartTangency tangency_for_normal(const ChartEllipsoid& E, const Vec3& m, double side) {
  const Vec3 qm = E.Q_inverse() * m;
  const Vec3 x = E.center() + side * qm / std::sqrt(m.dot(qm));
  return ChartTangency{x, m, chart_to_model(E.kappa(), x)};
}

}  // namespace detail

/// The two points where totally geodesic surfaces containing l touch S.
/// Works in the chart: planes through the chart line form a pencil, and the
/// tangency condition (m . d)^2 = m^T Q^-1 m is a quadratic form in the
/// pencil angle whose two null directions give the two planes.
inline std::array<ChartTangency, 2> chart_tangencies(const ChartEllipsoid& E, const OrientedGeodesic& l,
                                                     double tol = kDefaultTol) {
  if (l.kappa() != E.kappa()) throw DomainError("geodesic and surface live in different space forms");
  const ChartLine L = chart_line(l);
  if (L.at_infinity) {
    // Equatorial great circle: the pencil degenerates to parallel planes.
    const Vec3& m = L.equator_normal;
    return {detail::tangency_for_normal(E, m, 1.0), detail::tangency_for_normal(E, m, -1.0)};
  }
  const double disc = detail::line_discriminant(E, L);
  if (std::abs(disc) < tol) throw BoundaryError("geodesic is tangent to the surface");
  if (disc > 0.0) throw DomainError("geodesic cuts the surface");
  const Vec3& w = L.direction;
  const Vec3 d = L.point - E.center();
  Vec3 m1 = w.unitOrthogonal();
  Vec3 m2 = w.cross(m1);
  Eigen::Matrix<double, 3, 2> P;
  P << m1, m2;
  const Eigen::Matrix2d M = P.transpose() * (d * d.transpose() - E.Q_inverse()) * P;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
  const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
  if (!(lo < 0.0 && hi > 0.0)) throw BoundaryError("tangency pencil is degenerate");
  const auto make = [&](double sign) {
    const Eigen::Vector2d c = std::sqrt(hi) * es.eigenvectors().col(0) + sign * std::sqrt(-lo) * es.eigenvectors().col(1);
    const Vec3 m = (P * c).normalized();
    return detail::tangency_for_normal(E, m, m.dot(d) >= 0.0 ? 1.0 : -1.0);
  };
  return {make(1.0), make(-1.0)};
}

/// Exterior / Cuts / Tangent from the line-parameter quadratic in the chart;
/// for k = +1 exterior circles are further tested for membership in the
/// Gauss image: c lies in some T_pS iff a tangency point is at distance
/// pi/2 from c, i.e. orthogonal to the plane of c.
inline GeodesicClass classify_geodesic(const ChartEllipsoid& E, const OrientedGeodesic& l, double tol = kDefaultTol) {
  if (l.kappa() != E.kappa()) throw DomainError("geodesic and surface live in different space forms");
  const ChartLine L = chart_line(l);
  if (!L.at_infinity) {
    const double disc = detail::line_discriminant(E, L);
    if (std::abs(disc) < tol) return GeodesicClass::Tangent;
    if (disc > 0.0) return GeodesicClass::Cuts;
  }
  if (E.kappa() == Kappa::Spherical) {
    for (const auto& t : chart_tangencies(E, l, tol)) {
      const Vec4& p = t.p.coords();
      if (std::hypot(p.dot(l.point()), p.dot(l.direction())) < tol) return GeodesicClass::GaussSet;
    }
  }
  return GeodesicClass::Exterior;
}

}  // namespace obill
