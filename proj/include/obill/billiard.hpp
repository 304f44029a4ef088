#pragma once
// The outer billiard map on G_k: tangency data, the transport step, the
// table chart F(u, t) and the differentials dF, dB.

#include <functional>
#include <optional>
#include <vector>

#include "obill/surface.hpp"

namespace obill {

/// One of the two totally geodesic surfaces through l tangent to S.
struct TangencyPlane {
  Point p;            // tangency point on S
  Point q;            // foot of p on l
  double t = 0.0;     // parameter of q on the canonical representative of l
  double d = 0.0;     // distance from q to p
  Vec4 W;             // unit direction q -> p (normal to l, constant along l)
  Vec3 chart_normal;  // Euclidean normal of the plane in the chart
};

struct TangencyPair {
  TangencyPlane plus;
  TangencyPlane minus;
};

struct Foot {
  Point q;
  double t = 0.0;
  double d = 0.0;
};

/// Nearest point of l to p and its distance.
inline Foot foot_and_distance(const OrientedGeodesic& l, const Point& p, double tol = kDefaultTol) {
  if (l.kappa() != p.kappa()) throw DomainError("point and geodesic live in different space forms");
  const double t = l.foot_parameter(p.coords());
  const Point q = Point::make(l.kappa(), l.point_at(t));
  const double d = distance(q, p);
  if (d <= tol) throw DomainError("point lies on the geodesic");
  if (l.kappa() == Kappa::Spherical && d >= std::numbers::pi / 2 - tol)
    throw DomainError("point is at distance pi/2 from the great circle");
  return Foot{q, t, d};
}

/// Transport of l along the geodesic ray from q through p for length 2d.
inline OrientedGeodesic transport_step(const OrientedGeodesic& l, const Point& q, const Point& p, double d,
                                       double tol = 1e-8) {
  const Kappa k = l.kappa();
  if (!(d > 0.0)) throw DomainError("transport_step needs d > 0");
  if (std::abs(distance(q, p) - d) > tol) throw DomainError("d is not the distance from q to p");
  const double tq = l.foot_parameter(q.coords());
  if ((l.point_at(tq) - q.coords()).lpNorm<Eigen::Infinity>() > tol) throw DomainError("q is not on the geodesic");
  const Vec4 dir = l.velocity_at(tq);
  const Vec4 W = detail::direction_towards(k, q.coords(), p.coords());
  if (std::abs(ambient_inner(k, W, dir)) > tol) throw DomainError("q -> p is not orthogonal to the geodesic");
  // dir is normal to the ray, so its parallel transport is constant.
  const Point q2 = Point::make(k, detail::geodesic_point(k, q.coords(), W, 2.0 * d));
  return canonicalize(Tangent::make(q2, dir));
}

namespace detail {

inline double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

inline TangencyPlane plane_data(const OrientedGeodesic& l, const ChartTangency& c) {
  const Foot f = foot_and_distance(l, c.p);
  const Vec4 W = direction_towards(l.kappa(), f.q.coords(), c.p.coords());
  return TangencyPlane{c.p, f.q, f.t, f.d, W, c.plane_normal};
}

inline void require_table(const ChartEllipsoid& S, const OrientedGeodesic& l, double tol) {
  switch (classify_geodesic(S, l, tol)) {
    case GeodesicClass::Exterior: return;
    case GeodesicClass::Tangent: throw BoundaryError("geodesic is tangent to the surface");
    case GeodesicClass::Cuts: throw DomainError("geodesic cuts the surface");
    case GeodesicClass::GaussSet: throw DomainError("great circle lies in a tangent sphere of the surface");
  }
}

}  // namespace detail

/// Both tangency planes through an exterior l, labelled so that
/// {W+, W-, l'} is a positive frame (W parallel along l).
inline TangencyPair tangent_planes_through(const ChartEllipsoid& S, const OrientedGeodesic& l,
                                           double tol = kDefaultTol) {
  detail::require_table(S, l, tol);
  const auto ts = chart_tangencies(S, l, tol);
  TangencyPlane a = detail::plane_data(l, ts[0]);
  TangencyPlane b = detail::plane_data(l, ts[1]);
  const double vol = detail::volume(l.kappa(), l.point(), a.W, b.W, l.direction());
  if (std::abs(vol) < tol) throw BoundaryError("tangency planes coincide");
  if (vol < 0.0) std::swap(a, b);
  return TangencyPair{a, b};
}

struct BilliardStep {
  OrientedGeodesic input;
  OrientedGeodesic output;
  Point p_plus, p_minus;
  Point q_plus, q_minus;
  double d_plus = 0.0;
  double d_minus = 0.0;
  /// Parameter from q- to q+ along the orientation of input.
  double signed_gap = 0.0;
};

namespace detail {

inline BilliardStep make_step(const OrientedGeodesic& l, const TangencyPair& tp, bool forward) {
  const TangencyPlane& use = forward ? tp.plus : tp.minus;
  const OrientedGeodesic out = transport_step(l, use.q, use.p, use.d);
  double gap = tp.plus.t - tp.minus.t;
  if (l.kappa() == Kappa::Spherical) gap = wrap_angle(gap);
  return BilliardStep{l, out, tp.plus.p, tp.minus.p, tp.plus.q, tp.minus.q, tp.plus.d, tp.minus.d, gap};
}

}  // namespace detail

/// B(l): transport of l along q+ -> p+ for twice the foot distance.
inline BilliardStep billiard(const ChartEllipsoid& S, const OrientedGeodesic& l, double tol = kDefaultTol) {
  return detail::make_step(l, tangent_planes_through(S, l, tol), true);
}

/// B^-1(l): the same construction on the minus branch.
inline BilliardStep billiard_inverse(const ChartEllipsoid& S, const OrientedGeodesic& l, double tol = kDefaultTol) {
  return detail::make_step(l, tangent_planes_through(S, l, tol), false);
}

/// Upper bound T on |t| for the table chart.
inline double table_chart_limit(Kappa k) {
  return k == Kappa::Spherical ? std::numbers::pi / 2 : std::numeric_limits<double>::infinity();
}

/// F(u, t) = [gamma_{u_t}], u_t the transport of u along gamma_{iu}.
inline OrientedGeodesic table_chart_F(const SurfaceFrame& F, double t) {
  const Kappa k = F.u.kappa();
  if (std::abs(t) >= table_chart_limit(k)) throw DomainError("|t| must be below pi/2 on the sphere");
  const Vec4& p = F.p().coords();
  const Point q = Point::make(k, detail::geodesic_point(k, p, F.v.vec(), t));
  return canonicalize(Tangent::make(q, F.u.vec()));
}

struct TableChartPoint {
  SurfaceFrame frame;
  double t = 0.0;
};

enum class ChartBranch { Minus, Plus };

/// Inverse of the table chart. The Minus branch (t < 0) is realized at the
/// tangency point p+, the Plus branch (t > 0) at p-.
inline TableChartPoint table_chart_F_inverse(const ChartEllipsoid& S, const OrientedGeodesic& l,
                                             ChartBranch branch = ChartBranch::Minus, double tol = kDefaultTol) {
  const TangencyPair tp = tangent_planes_through(S, l, tol);
  const TangencyPlane& pl = branch == ChartBranch::Minus ? tp.plus : tp.minus;
  // Directions normal to the plane's geodesic q -> p are constant along it.
  const SurfaceFrame fr = frame_at(S, pl.p, l.velocity_at(pl.t));
  return TableChartPoint{fr, branch == ChartBranch::Minus ? -pl.d : pl.d};
}

inline CanonicalBasisBt basis_Bt(const SurfaceFrame& F, double t) { return basis_Bt(F.u, F.n, t); }

/// dF at (u, t) from the basis of T(T^1 S) at u to B_t.
inline Mat4 dF_matrix(Kappa k, const ShapeMatrix& b, double t) {
  const double c = ck(k, t), s = sk(k, t);
  Mat4 C;
  C << b.b11, b.b12, 0, 0,
       b.b21 * s, b.b22 * s, 0, 0,
       to_int(k) * s, 0, c, 0,
       0, 1, 0, 1;
  return C;
}

/// dB from B_{-t} to B_t at l = F(u, -t).
inline Mat4 dB_matrix_analytic(Kappa k, const ShapeMatrix& b, double t) {
  if (t == 0.0) throw DomainError("dB is undefined at t = 0");
  const double s = sk(k, t);
  const double kk = to_int(k);
  const double det = b.det();
  Eigen::Matrix2d R = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  Eigen::Matrix2d D;
  D << s * kk * b.b22, kk * b.b12,
       -b.b21, -b.b11 / s;
  D *= 2.0 / det;
  Mat4 H = Mat4::Zero();
  H.topLeftCorner<2, 2>() = R;
  H.bottomRightCorner<2, 2>() = R;
  H.bottomLeftCorner<2, 2>() = D;
  return H;
}

/// Nearby geodesic exp(sX) realized by moving the anchor point and velocity.
inline OrientedGeodesic perturb_geodesic(const GeodesicTangent& X, double s) {
  const Kappa k = X.kappa();
  Vec4 P = X.anchor_point() + s * X.J0();
  if (k != Kappa::Flat) P /= std::sqrt(std::abs(ambient_inner(k, P, P)));
  Vec4 V = detail::tangential(k, P, X.velocity() + s * X.J0p());
  V /= detail::norm_k(k, V);
  return canonicalize(Tangent::make(Point::make(k, P), V));
}

/// Tangent vector at the anchor frame of the derivative at s = 0 of a curve
/// of geodesics, by central differences (optionally Richardson-extrapolated).
inline GeodesicTangent variation_tangent(const Tangent& anchor, const std::function<OrientedGeodesic(double)>& curve,
                                         double h, bool richardson = false) {
  const Kappa k = anchor.kappa();
  const Vec4& a = anchor.base().coords();
  const auto sample = [&](double s) {
    const OrientedGeodesic l = curve(s);
    const double r = l.foot_parameter(a);
    return std::pair<Vec4, Vec4>(l.point_at(r), l.velocity_at(r));
  };
  const auto diff = [&](double hh) {
    const auto [p1, v1] = sample(hh);
    const auto [p0, v0] = sample(-hh);
    return std::pair<Vec4, Vec4>((p1 - p0) / (2 * hh), (v1 - v0) / (2 * hh));
  };
  auto [J, Jp] = diff(h);
  if (richardson) {
    const auto [J2, Jp2] = diff(h / 2);
    J = (4 * J2 - J) / 3;
    Jp = (4 * Jp2 - Jp) / 3;
  }
  return GeodesicTangent::from_jacobi(anchor, J, detail::tangential(k, a, Jp));
}

/// Finite-difference dF at (u, t): the four curves through u in T^1 S are
/// moving p along u, moving p along v (u kept tangent and normalized),
/// rotating u toward v, and moving t.
inline Mat4 dF_matrix_numeric(const ChartEllipsoid& S, const SurfaceFrame& F, double t, double h = 1e-4,
                              bool richardson = false) {
  const Kappa k = S.kappa();
  const CanonicalBasisBt B = basis_Bt(F, t);
  const auto moved = [&](const Vec4& e) {
    return [&, e](double s) {
      const Point q = surface_curve_point(S, F.p(), e, s);
      return table_chart_F(frame_at(S, q, detail::tangential(k, q.coords(), F.u.vec())), t);
    };
  };
  const std::array<std::function<OrientedGeodesic(double)>, 4> curves{
      moved(F.u.vec()), moved(F.v.vec()),
      [&](double s) {
        return table_chart_F(frame_at(S, F.p(), std::cos(s) * F.u.vec() + std::sin(s) * F.v.vec()), t);
      },
      [&](double s) { return table_chart_F(F, t + s); }};
  Mat4 C;
  for (int j = 0; j < 4; ++j) C.col(j) = coords_in_Bt(variation_tangent(B.frame, curves[j], h, richardson), B, 1e-6);
  return C;
}

/// Finite-difference dB at l from B_{-t} to B_t, where (u, -t) = F^-1(l).
inline Mat4 dB_matrix_numeric(const ChartEllipsoid& S, const OrientedGeodesic& l, double h = 1e-4,
                              bool richardson = false) {
  const TableChartPoint c = table_chart_F_inverse(S, l);
  const CanonicalBasisBt from = basis_Bt(c.frame, c.t);
  const CanonicalBasisBt to = basis_Bt(c.frame, -c.t);
  Mat4 H;
  for (int j = 0; j < 4; ++j) {
    const GeodesicTangent& E = from.E[j];
    const auto curve = [&](double s) {
      const OrientedGeodesic m = perturb_geodesic(E, s);
      try {
        return billiard(S, m).output;
      } catch (const GeometryError&) {
        throw DomainError("finite-difference step leaves the billiard table");
      }
    };
    H.col(j) = coords_in_Bt(variation_tangent(to.frame, curve, h, richardson), to, 1e-6);
  }
  return H;
}

struct OrbitRecord {
  std::vector<BilliardStep> steps;
  std::optional<int> period;
  std::optional<double> holonomy;
  std::optional<double> closure_error;  // discrepancy of l_period from l_0
  std::optional<std::string> truncated;
};

/// Up to n steps of B from l; the first return to l within period_tol is
/// recorded as the period.
inline OrbitRecord iterate_orbit(const ChartEllipsoid& S, const OrientedGeodesic& l, int n, double period_tol = 1e-7,
                                 double tol = kDefaultTol) {
  if (n < 1) throw DomainError("iterate_orbit needs n >= 1");
  OrbitRecord rec;
  OrientedGeodesic cur = l;
  double gaps = 0.0;
  for (int i = 0; i < n; ++i) {
    try {
      rec.steps.push_back(billiard(S, cur, tol));
    } catch (const GeometryError& e) {
      rec.truncated = e.what();
      break;
    }
    cur = rec.steps.back().output;
    gaps += rec.steps.back().signed_gap;
    if (!rec.period && geodesics_equal(l, cur, period_tol)) {
      rec.period = i + 1;
      rec.holonomy = gaps;
      rec.closure_error = geodesic_discrepancy(l, cur);
    }
  }
  return rec;
}

}  // namespace obill
