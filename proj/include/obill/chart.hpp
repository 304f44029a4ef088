#pragma once
// Projective charts of M_k onto R^3: identity (k = 0), Klein/Beltrami ball
// (k = -1) and gnomonic/Beltrami chart of the hemisphere x0 > 0 (k = +1).
// All three send x to (1, x) / sqrt(1 + k |x|^2), so geodesics become
// straight lines and totally geodesic surfaces become planes.

#include <optional>

#include "obill/geodesics.hpp"

namespace obill {

inline Point chart_to_model(Kappa k, const Vec3& x) {
  const double s = 1.0 + to_int(k) * x.squaredNorm();
  if (s <= 0.0) throw DomainError("chart point outside the Klein ball");
  return Point::make(k, Vec4(1.0, x[0], x[1], x[2]) / std::sqrt(s));
}

inline Vec3 model_to_chart(const Point& p) {
  const Vec4& X = p.coords();
  if (X[0] <= 0.0) throw DomainError("point outside the chart (x0 <= 0)");
  return X.tail<3>() / X[0];
}

/// Differential of chart_to_model at x applied to the chart vector y.
inline Vec4 chart_pushforward(Kappa k, const Vec3& x, const Vec3& y) {
  const double s = 1.0 + to_int(k) * x.squaredNorm();
  const double rs = 1.0 / std::sqrt(s);
  const double corr = to_int(k) * x.dot(y) * rs / s;
  Vec4 r(0.0, y[0], y[1], y[2]);
  r *= rs;
  r -= corr * Vec4(1.0, x[0], x[1], x[2]);
  return r;
}

/// Differential of model_to_chart at X applied to the ambient tangent Y.
inline Vec3 chart_pullback(const Vec4& X, const Vec4& Y) {
  return Y.tail<3>() / X[0] - X.tail<3>() * (Y[0] / (X[0] * X[0]));
}

/// Image of an oriented geodesic in the chart. For a great circle in the
/// equator x0 = 0 there is no image line; the circle is then described by
/// the unit normal of its plane inside e0^perp.
struct ChartLine {
  bool at_infinity = false;
  Vec3 point = Vec3::Zero();
  Vec3 direction = Vec3::Zero();
  Vec3 equator_normal = Vec3::Zero();
};

inline ChartLine chart_line(const OrientedGeodesic& l, double equator_tol = 1e-12) {
  const Vec4& p = l.point();
  const Vec4& v = l.direction();
  ChartLine c;
  if (p[0] <= equator_tol) {
    // Canonical representatives maximize x0, so this is the equator case.
    c.at_infinity = true;
    c.equator_normal = p.tail<3>().cross(v.tail<3>()).normalized();
    return c;
  }
  c.point = p.tail<3>() / p[0];
  c.direction = (p[0] * v.tail<3>() - v[0] * p.tail<3>()).normalized();
  return c;
}

/// The oriented geodesic whose chart image is x + R d (d nonzero).
inline OrientedGeodesic geodesic_from_chart(Kappa k, const Vec3& x, const Vec3& d) {
  const Point p = chart_to_model(k, x);
  const Vec4 w = chart_pushforward(k, x, d);
  return canonicalize(Tangent::make(p, w).normalized());
}

}  // namespace obill
