#pragma once
// The manifold G_k of oriented geodesics of M_k.
//
// Tangent vectors of G_k at [gamma] are normal Jacobi fields along gamma.
// A GeodesicTangent stores such a field by its initial data (J, J') at an
// explicit anchor on a representative; since Jacobi fields have closed-form
// evolution, every bilinear form below is evaluated exactly at the anchor.

#include <array>
#include <functional>

#include "obill/spaceform.hpp"

namespace obill {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// An oriented, unparametrized complete geodesic with a canonical representative:
///   k = 0   base point is the point of the line closest to the origin,
///   k = -1  base point minimizes x0 (closest to e0),
///   k = +1  base point maximizes x0 (any point if the circle lies in x0 = 0).
class OrientedGeodesic {
 public:
  Kappa kappa() const { return rep_.kappa(); }
  const Tangent& rep() const { return rep_; }
  const Vec4& point() const { return rep_.base().coords(); }
  const Vec4& direction() const { return rep_.vec(); }

  Vec4 point_at(double t) const { return detail::geodesic_point(kappa(), point(), direction(), t); }
  Vec4 velocity_at(double t) const { return detail::geodesic_velocity(kappa(), point(), direction(), t); }

  /// Unit velocity at parameter t, as a tangent vector.
  Tangent tangent_at(double t) const {
    const Point q = Point::make(kappa(), point_at(t));
    return Tangent::make(q, velocity_at(t));
  }

  /// Parameter of the point of this geodesic nearest to x (the exact
  /// parameter when x lies on it).
  double foot_parameter(const Vec4& x) const {
    const Kappa k = kappa();
    const double a = ambient_inner(k, x, point());
    const double b = ambient_inner(k, x, direction());
    switch (k) {
      case Kappa::Flat: return ambient_inner(k, x - point(), direction());
      case Kappa::Spherical:
        if (std::hypot(a, b) < 1e-14) throw DomainError("point is at distance pi/2 from every point of the circle");
        return std::atan2(b, a);
      case Kappa::Hyperbolic: return std::atanh(b / -a);
    }
    return 0.0;
  }

  /// Normalized oriented bivector p ^ v (i<j ordering: 01 02 03 12 13 23).
  Vec6 bivector() const {
    const Vec4& p = point();
    const Vec4& v = direction();
    Vec6 b;
    int idx = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) b[idx++] = p[i] * v[j] - p[j] * v[i];
    return b / b.norm();
  }

  OrientedGeodesic reversed() const;

  friend OrientedGeodesic canonicalize(const Tangent& raw);

 private:
  explicit OrientedGeodesic(const Tangent& rep) : rep_(rep) {}
  Tangent rep_;
};

inline OrientedGeodesic canonicalize(const Tangent& raw) {
  detail::require_unit(raw, kSnapTol);
  const Tangent v = raw.normalized();
  const Kappa k = v.kappa();
  const Vec4& p = v.base().coords();
  const Vec4& d = v.vec();
  double t = 0.0;
  switch (k) {
    case Kappa::Flat: t = -ambient_inner(k, p, d); break;
    case Kappa::Hyperbolic: t = std::atanh(-d[0] / p[0]); break;
    case Kappa::Spherical:
      if (std::hypot(p[0], d[0]) > 1e-14) t = std::atan2(d[0], p[0]);
      break;
  }
  if (t == 0.0) return OrientedGeodesic(v);
  const Point q = Point::make(k, detail::geodesic_point(k, p, d, t));
  return OrientedGeodesic(Tangent::make(q, detail::geodesic_velocity(k, p, d, t)));
}

inline OrientedGeodesic OrientedGeodesic::reversed() const { return canonicalize(rep_.scaled(-1.0)); }

/// Same oriented trajectory: canonical representatives agree (k = 0, -1) or
/// normalized bivectors agree (k = +1), within tol.
inline bool geodesics_equal(const OrientedGeodesic& a, const OrientedGeodesic& b, double tol = kDefaultTol) {
  if (a.kappa() != b.kappa()) return false;
  if (a.kappa() == Kappa::Spherical) return (a.bivector() - b.bivector()).lpNorm<Eigen::Infinity>() <= tol;
  return (a.point() - b.point()).lpNorm<Eigen::Infinity>() <= tol &&
         (a.direction() - b.direction()).lpNorm<Eigen::Infinity>() <= tol;
}

/// Largest coordinate discrepancy between two oriented geodesics, in the
/// same representation geodesics_equal compares.
inline double geodesic_discrepancy(const OrientedGeodesic& a, const OrientedGeodesic& b) {
  if (a.kappa() == Kappa::Spherical) return (a.bivector() - b.bivector()).lpNorm<Eigen::Infinity>();
  return std::max((a.point() - b.point()).lpNorm<Eigen::Infinity>(),
                  (a.direction() - b.direction()).lpNorm<Eigen::Infinity>());
}

/// Tangent vector to G_k: a normal Jacobi field given by (J(r0), J'(r0)) at
/// the anchor frame (gamma(r0), gamma'(r0)).
class GeodesicTangent {
 public:
  /// Data must already be normal to the geodesic and tangent to M_k.
  static GeodesicTangent make(const Tangent& frame, const Vec4& J0, const Vec4& J0p, double tol = 1e-10) {
    detail::require_unit(frame);
    const Kappa k = frame.kappa();
    const Vec4& p = frame.base().coords();
    const Vec4& g = frame.vec();
    const double scale = std::max({1.0, J0.norm(), J0p.norm()});
    const auto off = [&](const Vec4& x) {
      return std::max(std::abs(ambient_inner(k, x, g)),
                      k == Kappa::Flat ? std::abs(x[0]) : std::abs(ambient_inner(k, x, p)));
    };
    if (off(J0) > tol * scale || off(J0p) > tol * scale)
      throw DomainError("Jacobi data must be tangent to M and normal to the geodesic");
    return GeodesicTangent(frame, J0, J0p);
  }

  /// Normal part J^N of arbitrary Jacobi data (J, J') at the frame.
  static GeodesicTangent from_jacobi(const Tangent& frame, const Vec4& J, const Vec4& Jp) {
    const Kappa k = frame.kappa();
    const Vec4& p = frame.base().coords();
    const Vec4& g = frame.vec();
    const auto normal = [&](const Vec4& x) {
      const Vec4 t = detail::tangential(k, p, x);
      return Vec4(t - ambient_inner(k, t, g) * g);
    };
    return GeodesicTangent(frame, normal(J), normal(Jp));
  }

  static GeodesicTangent zero(const Tangent& frame) { return GeodesicTangent(frame, Vec4::Zero(), Vec4::Zero()); }

  Kappa kappa() const { return frame_.kappa(); }
  const Tangent& frame() const { return frame_; }
  const Vec4& J0() const { return J0_; }
  const Vec4& J0p() const { return J0p_; }
  const Vec4& velocity() const { return frame_.vec(); }
  const Vec4& anchor_point() const { return frame_.base().coords(); }

  OrientedGeodesic at() const { return canonicalize(frame_); }
  /// Parameter r0 of the anchor along the canonical representative of at().
  double basepoint_param() const { return at().foot_parameter(anchor_point()); }

  GeodesicTangent operator+(const GeodesicTangent& o) const;
  GeodesicTangent operator-(const GeodesicTangent& o) const { return *this + o * -1.0; }
  GeodesicTangent operator*(double a) const { return GeodesicTangent(frame_, a * J0_, a * J0p_); }

 private:
  GeodesicTangent(const Tangent& f, const Vec4& a, const Vec4& b) : frame_(f), J0_(a), J0p_(b) {}
  Tangent frame_;
  Vec4 J0_;
  Vec4 J0p_;

  friend GeodesicTangent shift_anchor(const GeodesicTangent& X, double dr);
};

/// The same tangent vector expressed at the anchor moved by dr along the geodesic.
inline GeodesicTangent shift_anchor(const GeodesicTangent& X, double dr) {
  if (dr == 0.0) return X;
  const Kappa k = X.kappa();
  const Vec4& p = X.anchor_point();
  const Vec4& g = X.velocity();
  const double c = ck(k, dr), s = sk(k, dr);
  const Point q = Point::make(k, detail::geodesic_point(k, p, g, dr));
  const Tangent frame = Tangent::make(q, detail::geodesic_velocity(k, p, g, dr));
  // Normal parallel fields are constant in the ambient model.
  return GeodesicTangent(frame, c * X.J0_ + s * X.J0p_, -to_int(k) * s * X.J0_ + c * X.J0p_);
}

/// Re-express X at parameter r1 of its canonical representative.
inline GeodesicTangent reanchor(const GeodesicTangent& X, double r1) {
  return shift_anchor(X, r1 - X.basepoint_param());
}

namespace detail {

inline void require_same_geodesic(const GeodesicTangent& X, const GeodesicTangent& Y) {
  if (X.kappa() != Y.kappa() || !geodesics_equal(X.at(), Y.at(), 1e-8))
    throw DomainError("tangent vectors live over different geodesics");
}

/// Y re-expressed at X's anchor.
inline GeodesicTangent aligned(const GeodesicTangent& X, const GeodesicTangent& Y) {
  require_same_geodesic(X, Y);
  if ((X.anchor_point() - Y.anchor_point()).lpNorm<Eigen::Infinity>() == 0.0) return Y;
  const double dr = X.at().foot_parameter(X.anchor_point()) - X.at().foot_parameter(Y.anchor_point());
  return shift_anchor(Y, dr);
}

}  // namespace detail

inline GeodesicTangent GeodesicTangent::operator+(const GeodesicTangent& o) const {
  const GeodesicTangent b = detail::aligned(*this, o);
  return GeodesicTangent(frame_, J0_ + b.J0_, J0p_ + b.J0p_);
}

/// J -> gamma' x J.
inline GeodesicTangent complex_structure(const GeodesicTangent& X) {
  const Kappa k = X.kappa();
  const Vec4& p = X.anchor_point();
  const Vec4& g = X.velocity();
  return GeodesicTangent::make(X.frame(), detail::cross(k, p, g, X.J0()), detail::cross(k, p, g, X.J0p()));
}

/// Killing-form metric g_K(I,J) = <I,J> + k <I',J'>; undefined for k = 0.
inline double metric_gK(const GeodesicTangent& X, const GeodesicTangent& Y) {
  const Kappa k = X.kappa();
  if (k == Kappa::Flat) throw UnsupportedError("the Killing form metric degenerates for k = 0");
  const GeodesicTangent Z = detail::aligned(X, Y);
  return ambient_inner(k, X.J0(), Z.J0()) + to_int(k) * ambient_inner(k, X.J0p(), Z.J0p());
}

/// Cross-product metric, 2 g_x(I,J) = <I x J' + J x I', gamma'>.
inline double metric_gcross(const GeodesicTangent& X, const GeodesicTangent& Y) {
  const Kappa k = X.kappa();
  const GeodesicTangent Z = detail::aligned(X, Y);
  const Vec4& p = X.anchor_point();
  const Vec4 w = detail::cross(k, p, X.J0(), Z.J0p()) + detail::cross(k, p, Z.J0(), X.J0p());
  return 0.5 * ambient_inner(k, w, X.velocity());
}

/// Fundamental form of (g_K, J): <I x J + k I' x J', gamma'>.
inline double omega_K(const GeodesicTangent& X, const GeodesicTangent& Y) {
  const Kappa k = X.kappa();
  if (k == Kappa::Flat) throw UnsupportedError("the Killing form metric degenerates for k = 0");
  const GeodesicTangent Z = detail::aligned(X, Y);
  const Vec4& p = X.anchor_point();
  const Vec4 w = detail::cross(k, p, X.J0(), Z.J0()) + to_int(k) * detail::cross(k, p, X.J0p(), Z.J0p());
  return ambient_inner(k, w, X.velocity());
}

/// Fundamental form of (g_x, J): (<I',J> - <I,J'>) / 2.
inline double omega_cross(const GeodesicTangent& X, const GeodesicTangent& Y) {
  const Kappa k = X.kappa();
  const GeodesicTangent Z = detail::aligned(X, Y);
  return 0.5 * (ambient_inner(k, X.J0p(), Z.J0()) - ambient_inner(k, X.J0(), Z.J0p()));
}

using BilinearForm = std::function<double(const GeodesicTangent&, const GeodesicTangent&)>;

/// The Jacobi basis E1..E4 along gamma_{u_t}, where u_t is u transported for
/// time t along gamma_{iu}, with initial data
///   E1 = (0, n_t), E2 = (n_t, 0), E3 = (0, v_t), E4 = (v_t, 0).
struct CanonicalBasisBt {
  Tangent u;
  double t;
  Tangent frame;  // (gamma_{iu}(t), u_t): anchor of all four fields
  Vec4 n_t;
  Vec4 v_t;
  std::array<GeodesicTangent, 4> E;
};

/// u: unit tangent to the surface at p; n: inward unit normal at p.
inline CanonicalBasisBt basis_Bt(const Tangent& u, const Tangent& n, double t) {
  const Kappa k = u.kappa();
  if (k == Kappa::Spherical && std::abs(t) >= std::numbers::pi / 2)
    throw DomainError("basis_Bt: |t| must be below pi/2 on the sphere");
  detail::require_same_base(u.base(), n, "basis_Bt");
  const Vec4& p = u.base().coords();
  const Vec4 v = detail::cross(k, p, n.vec(), u.vec());
  const Point q = Point::make(k, detail::geodesic_point(k, p, v, t));
  const Vec4 v_t = detail::geodesic_velocity(k, p, v, t);
  const Vec4& n_t = n.vec();
  const Tangent frame = Tangent::make(q, u.vec());
  const Vec4 z = Vec4::Zero();
  return CanonicalBasisBt{u,
                          t,
                          frame,
                          n_t,
                          v_t,
                          {GeodesicTangent::make(frame, z, n_t), GeodesicTangent::make(frame, n_t, z),
                           GeodesicTangent::make(frame, z, v_t), GeodesicTangent::make(frame, v_t, z)}};
}

/// Coordinates of X in the basis B (X must live over the same geodesic).
inline Eigen::Vector4d coords_in_Bt(const GeodesicTangent& X, const CanonicalBasisBt& B, double tol = 1e-10) {
  const GeodesicTangent Y = detail::aligned(B.E[0], X);
  const Kappa k = X.kappa();
  const auto functionals = [&](const GeodesicTangent& Z) {
    return Eigen::Vector4d(ambient_inner(k, Z.J0p(), B.n_t), ambient_inner(k, Z.J0(), B.n_t),
                           ambient_inner(k, Z.J0p(), B.v_t), ambient_inner(k, Z.J0(), B.v_t));
  };
  Mat4 M;
  for (int j = 0; j < 4; ++j) M.col(j) = functionals(B.E[j]);
  const Eigen::FullPivLU<Mat4> lu(M);
  if (lu.rank() < 4) throw InternalError("coords_in_Bt: singular basis");
  const Eigen::Vector4d c = lu.solve(functionals(Y));
  Vec4 J = Vec4::Zero(), Jp = Vec4::Zero();
  for (int j = 0; j < 4; ++j) {
    J += c[j] * B.E[j].J0();
    Jp += c[j] * B.E[j].J0p();
  }
  const double err = std::max((J - Y.J0()).norm(), (Jp - Y.J0p()).norm());
  if (err > tol * std::max(1.0, c.norm())) throw InternalError("coords_in_Bt: reconstruction failed");
  return c;
}

/// Matrix with entries form(E_i, E_j).
inline Mat4 gram_matrix(const BilinearForm& form, const std::array<GeodesicTangent, 4>& E) {
  Mat4 G;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) G(i, j) = form(E[i], E[j]);
  return G;
}

/// Symplectic leaf of the Poisson structure on G_0: all lines with one direction.
struct PoissonLeaf {
  Vec3 direction;
};

inline PoissonLeaf leaf_of(const OrientedGeodesic& l) {
  if (l.kappa() != Kappa::Flat) throw UnsupportedError("Poisson leaves are defined for k = 0 only");
  return PoissonLeaf{l.direction().tail<3>()};
}

}  // namespace obill
