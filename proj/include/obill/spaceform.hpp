#pragma once
// Geometry of the three dimensional space forms M_k (k = -1, 0, +1).
//
// All three are handled through one ambient model in R^4 with the bilinear
// form <a,b>_k = k a0 b0 + a1 b1 + a2 b2 + a3 b3:
//   k = +1  unit sphere S^3,
//   k = -1  upper sheet of the hyperboloid <x,x> = -1 (Minkowski signature),
//   k =  0  the affine slice x0 = 1, i.e. R^3 with tangent vectors x0 = 0.
// With this convention the geodesic through p with unit velocity v is
// c_k(t) p + s_k(t) v in every case, and normal vectors along a geodesic are
// parallel exactly when their ambient coordinates are constant.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "obill/errors.hpp"

namespace obill {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kDefaultTol = 1e-9;
/// Constructors snap inputs this close to the constraint back onto it.
inline constexpr double kSnapTol = 1e-6;

enum class Kappa : int { Hyperbolic = -1, Flat = 0, Spherical = 1 };

constexpr int to_int(Kappa k) { return static_cast<int>(k); }

inline Kappa kappa_from_int(int k) {
  if (k < -1 || k > 1) throw DomainError("curvature must be -1, 0 or +1, got " + std::to_string(k));
  return static_cast<Kappa>(k);
}

inline std::string to_string(Kappa k) {
  switch (k) {
    case Kappa::Hyperbolic: return "-1";
    case Kappa::Flat: return "0";
    case Kappa::Spherical: return "1";
  }
  return "?";
}

/// The generalized cosine c_k.
inline double ck(Kappa k, double r) {
  switch (k) {
    case Kappa::Spherical: return std::cos(r);
    case Kappa::Hyperbolic: return std::cosh(r);
    case Kappa::Flat: break;
  }
  return 1.0;
}

/// The generalized sine s_k.
inline double sk(Kappa k, double r) {
  switch (k) {
    case Kappa::Spherical: return std::sin(r);
    case Kappa::Hyperbolic: return std::sinh(r);
    case Kappa::Flat: break;
  }
  return r;
}

/// c_k and s_k bundled for one curvature. Satisfies s' = c, c' = -k s.
struct CkSk {
  Kappa kappa;
  double c(double r) const { return ck(kappa, r); }
  double s(double r) const { return sk(kappa, r); }
};

/// <a,b>_k on R^4. For k = -1 this is the Minkowski form (-,+,+,+).
inline double ambient_inner(Kappa k, const Vec4& a, const Vec4& b) {
  return to_int(k) * a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

namespace detail {

inline double norm_k(Kappa k, const Vec4& a) {
  return std::sqrt(std::max(0.0, ambient_inner(k, a, a)));
}

/// Component of a vector tangent to M_k at p.
inline Vec4 tangential(Kappa k, const Vec4& p, const Vec4& a) {
  if (k == Kappa::Flat) {
    Vec4 r = a;
    r[0] = 0.0;
    return r;
  }
  // <p,p> = k and 1/k = k.
  return a - to_int(k) * ambient_inner(k, a, p) * p;
}

/// c with c . w = det[a, b, d, w] for all w.
inline Vec4 wedge3(const Vec4& a, const Vec4& b, const Vec4& d) {
  Vec4 c;
  Mat4 m;
  m.col(0) = a;
  m.col(1) = b;
  m.col(2) = d;
  for (int i = 0; i < 4; ++i) {
    m.col(3) = Vec4::Unit(i);
    c[i] = m.determinant();
  }
  return c;
}

/// Cross product of tangent vectors x, y at p (raw ambient coordinates).
inline Vec4 cross(Kappa k, const Vec4& p, const Vec4& x, const Vec4& y) {
  if (k == Kappa::Flat) {
    const Vec3 z = x.tail<3>().cross(y.tail<3>());
    return Vec4(0.0, z[0], z[1], z[2]);
  }
  Vec4 c = wedge3(p, x, y);
  c[0] *= to_int(k);  // raise the index with diag(k,1,1,1)^-1
  return c;
}

/// Oriented volume det[p, x, y, z] of a tangent frame at p.
inline double volume(Kappa k, const Vec4& p, const Vec4& x, const Vec4& y, const Vec4& z) {
  return ambient_inner(k, cross(k, p, x, y), z);
}

inline Vec4 geodesic_point(Kappa k, const Vec4& p, const Vec4& v, double t) {
  return ck(k, t) * p + sk(k, t) * v;
}

inline Vec4 geodesic_velocity(Kappa k, const Vec4& p, const Vec4& v, double t) {
  return -to_int(k) * sk(k, t) * p + ck(k, t) * v;
}

inline double distance(Kappa k, const Vec4& p, const Vec4& q) {
  const Vec4 d = p - q;
  const double chord = std::sqrt(std::max(0.0, ambient_inner(k, d, d)));
  switch (k) {
    case Kappa::Spherical: return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
    case Kappa::Hyperbolic: return 2.0 * std::asinh(0.5 * chord);
    case Kappa::Flat: break;
  }
  return chord;
}

/// Unit initial velocity of the minimizing geodesic from q to p (p != q).
inline Vec4 direction_towards(Kappa k, const Vec4& q, const Vec4& p) {
  Vec4 w = (k == Kappa::Flat) ? Vec4(p - q) : tangential(k, q, p);
  w[0] = (k == Kappa::Flat) ? 0.0 : w[0];
  const double n = norm_k(k, w);
  if (n == 0.0) throw DomainError("direction between coincident or antipodal points is undefined");
  return w / n;
}

}  // namespace detail

/// A point of M_k, stored in ambient coordinates (see file comment).
class Point {
 public:
  /// Validates and snaps onto the model; rejects inputs off by more than kSnapTol.
  static Point make(Kappa k, const Vec4& x) {
    Vec4 y = x;
    switch (k) {
      case Kappa::Flat:
        if (std::abs(y[0] - 1.0) > kSnapTol) throw DomainError("flat point must have x0 = 1");
        y[0] = 1.0;
        break;
      case Kappa::Spherical: {
        const double n = y.norm();
        if (std::abs(n - 1.0) > kSnapTol) throw DomainError("point is not on the unit sphere");
        y /= n;
        break;
      }
      case Kappa::Hyperbolic: {
        const double q = ambient_inner(k, y, y);
        if (std::abs(q + 1.0) > kSnapTol || y[0] <= 0.0)
          throw DomainError("point is not on the upper hyperboloid");
        y[0] = std::sqrt(1.0 + y.tail<3>().squaredNorm());
        break;
      }
    }
    return Point(k, y);
  }

  static Point flat(const Vec3& x) { return Point(Kappa::Flat, Vec4(1.0, x[0], x[1], x[2])); }

  /// e0 for k = +-1, the origin for k = 0.
  static Point origin(Kappa k) { return Point(k, Vec4::Unit(0)); }

  Kappa kappa() const { return kappa_; }
  const Vec4& coords() const { return x_; }
  /// Spatial part (x1, x2, x3); for k = 0 these are the Euclidean coordinates.
  Vec3 spatial() const { return x_.tail<3>(); }

  bool same_as(const Point& o, double tol = kDefaultTol) const {
    return kappa_ == o.kappa_ && (x_ - o.x_).lpNorm<Eigen::Infinity>() <= tol;
  }

 private:
  Point(Kappa k, const Vec4& x) : kappa_(k), x_(x) {}
  Kappa kappa_;
  Vec4 x_;
};

/// A tangent vector to M_k at a point.
class Tangent {
 public:
  /// Projects away a normal component up to kSnapTol (relative); rejects beyond.
  static Tangent make(const Point& base, const Vec4& v) {
    const Kappa k = base.kappa();
    const Vec4 t = detail::tangential(k, base.coords(), v);
    const double scale = std::max(1.0, v.norm());
    if ((t - v).norm() > kSnapTol * scale) throw DomainError("vector is not tangent at its base point");
    return Tangent(base, t);
  }

  static Tangent flat(const Vec3& base, const Vec3& v) {
    return Tangent(Point::flat(base), Vec4(0.0, v[0], v[1], v[2]));
  }

  /// Tangent at the model origin with spatial components v.
  static Tangent at_origin(Kappa k, const Vec3& v) {
    return Tangent(Point::origin(k), Vec4(0.0, v[0], v[1], v[2]));
  }

  const Point& base() const { return base_; }
  const Vec4& vec() const { return v_; }
  Kappa kappa() const { return base_.kappa(); }

  double norm() const { return detail::norm_k(kappa(), v_); }

  Tangent scaled(double a) const { return Tangent(base_, a * v_); }

  Tangent normalized() const {
    const double n = norm();
    if (n == 0.0) throw DomainError("cannot normalize the zero vector");
    return Tangent(base_, v_ / n);
  }

 private:
  Tangent(const Point& b, const Vec4& v) : base_(b), v_(v) {}
  Point base_;
  Vec4 v_;
};

namespace detail {

inline void require_same_base(const Point& p, const Tangent& x, const char* what) {
  if (!p.same_as(x.base())) throw DomainError(std::string(what) + ": tangent vector based at a different point");
}

inline void require_unit(const Tangent& v, double tol = kDefaultTol) {
  if (std::abs(v.norm() - 1.0) > tol) throw DomainError("expected a unit tangent vector");
}

}  // namespace detail

inline double metric_inner(const Point& p, const Tangent& x, const Tangent& y) {
  detail::require_same_base(p, x, "metric_inner");
  detail::require_same_base(p, y, "metric_inner");
  return ambient_inner(p.kappa(), x.vec(), y.vec());
}

/// Point and velocity of the unit speed geodesic with initial velocity v at time t.
inline std::pair<Point, Tangent> geodesic(const Tangent& v, double t) {
  detail::require_unit(v);
  const Kappa k = v.kappa();
  const Point q = Point::make(k, detail::geodesic_point(k, v.base().coords(), v.vec(), t));
  return {q, Tangent::make(q, detail::geodesic_velocity(k, v.base().coords(), v.vec(), t))};
}

/// Parallel transport of x along the geodesic with unit initial velocity w, from 0 to t.
inline Tangent parallel_transport(const Tangent& x, const Tangent& w, double t) {
  detail::require_same_base(w.base(), x, "parallel_transport");
  detail::require_unit(w);
  const Kappa k = w.kappa();
  const double a = ambient_inner(k, x.vec(), w.vec());
  const Vec4 normal = x.vec() - a * w.vec();
  const auto [q, vel] = geodesic(w, t);
  return Tangent::make(q, a * vel.vec() + normal);
}

inline Tangent cross_product(const Point& p, const Tangent& x, const Tangent& y) {
  detail::require_same_base(p, x, "cross_product");
  detail::require_same_base(p, y, "cross_product");
  return Tangent::make(p, detail::cross(p.kappa(), p.coords(), x.vec(), y.vec()));
}

/// R(x,y)z = k (<z,x> y - <z,y> x).
inline Tangent curvature_apply(const Point& p, const Tangent& x, const Tangent& y, const Tangent& z) {
  detail::require_same_base(p, x, "curvature_apply");
  detail::require_same_base(p, y, "curvature_apply");
  detail::require_same_base(p, z, "curvature_apply");
  const Kappa k = p.kappa();
  const Vec4 r = to_int(k) * (ambient_inner(k, z.vec(), x.vec()) * y.vec() -
                              ambient_inner(k, z.vec(), y.vec()) * x.vec());
  return Tangent::make(p, r);
}

struct JacobiState {
  Tangent J;
  Tangent Jp;
};

/// Jacobi field along the geodesic with unit initial velocity w, with
/// J(0) = u + a w and J'(0) = v + b w (u, v normal to w), evaluated at r.
inline JacobiState jacobi_evolve(const Tangent& w, double a, double b, const Tangent& u, const Tangent& v,
                                 double r, double tol = kDefaultTol) {
  detail::require_unit(w);
  detail::require_same_base(w.base(), u, "jacobi_evolve");
  detail::require_same_base(w.base(), v, "jacobi_evolve");
  const Kappa k = w.kappa();
  const double scale = std::max({1.0, u.norm(), v.norm()});
  if (std::abs(ambient_inner(k, u.vec(), w.vec())) > tol * scale ||
      std::abs(ambient_inner(k, v.vec(), w.vec())) > tol * scale)
    throw DomainError("jacobi_evolve: initial data must be normal to the geodesic");
  const auto [q, vel] = geodesic(w, r);
  const double c = ck(k, r), s = sk(k, r);
  const Vec4 J = c * u.vec() + s * v.vec() + (a + r * b) * vel.vec();
  const Vec4 Jp = -to_int(k) * s * u.vec() + c * v.vec() + b * vel.vec();
  return {Tangent::make(q, J), Tangent::make(q, Jp)};
}

inline double distance(const Point& p, const Point& q) {
  if (p.kappa() != q.kappa()) throw DomainError("distance between points of different space forms");
  return detail::distance(p.kappa(), p.coords(), q.coords());
}

/// Unit tangent at q pointing along the minimizing geodesic to p.
inline Tangent direction_towards(const Point& q, const Point& p) {
  return Tangent::make(q, detail::direction_towards(q.kappa(), q.coords(), p.coords()));
}

}  // namespace obill
