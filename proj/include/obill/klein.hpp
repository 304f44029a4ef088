#pragma once
// Klein ball and gnomonic charts, and the explicit hyperbolic constructions
// used to exhibit non-parallel images and nonzero holonomy.

#include <complex>
#include <vector>

#include "obill/billiard.hpp"

namespace obill {

inline Point klein_to_model(const Vec3& x) {
  if (x.squaredNorm() >= 1.0) throw DomainError("point outside the open Klein ball");
  return chart_to_model(Kappa::Hyperbolic, x);
}

inline Vec3 model_to_klein(const Point& p) {
  if (p.kappa() != Kappa::Hyperbolic) throw DomainError("model_to_klein needs a hyperbolic point");
  return model_to_chart(p);
}

inline Point gnomonic_to_sphere(const Vec3& x) { return chart_to_model(Kappa::Spherical, x); }

inline Vec3 sphere_to_gnomonic(const Point& p) {
  if (p.kappa() != Kappa::Spherical) throw DomainError("sphere_to_gnomonic needs a spherical point");
  return model_to_chart(p);
}

/// Oriented chord point + R direction of the Klein ball.
class KleinLine {
 public:
  static KleinLine make(const Vec3& point, const Vec3& direction) {
    if (direction.norm() == 0.0) throw DomainError("KleinLine needs a nonzero direction");
    const Vec3 u = direction.normalized();
    // |x + s u|^2 = 1
    const double b = point.dot(u);
    const double disc = b * b - (point.squaredNorm() - 1.0);
    if (disc <= 0.0) throw DomainError("line misses the open Klein ball");
    const double r = std::sqrt(disc);
    return KleinLine(point + (-b - r) * u, point + (-b + r) * u, u);
  }

  static KleinLine from_geodesic(const OrientedGeodesic& l) {
    if (l.kappa() != Kappa::Hyperbolic) throw DomainError("KleinLine needs a hyperbolic geodesic");
    const ChartLine c = chart_line(l);
    return make(c.point, c.direction);
  }

  /// Ideal end points, backward (minus) and forward (plus).
  const Vec3& end_minus() const { return minus_; }
  const Vec3& end_plus() const { return plus_; }
  const Vec3& direction() const { return dir_; }
  Vec3 midpoint() const { return 0.5 * (minus_ + plus_); }

  OrientedGeodesic geodesic() const { return geodesic_from_chart(Kappa::Hyperbolic, midpoint(), dir_); }

 private:
  KleinLine(const Vec3& m, const Vec3& p, const Vec3& u) : minus_(m), plus_(p), dir_(u) {}
  Vec3 minus_, plus_, dir_;
};

namespace detail {

/// Intersection of segments [a0,a1] and [b0,b1] if they cross (coplanar
/// within tol); parameters must lie in the open unit interval.
inline std::optional<Vec3> segment_intersection(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1,
                                                double tol) {
  Eigen::Matrix<double, 3, 2> M;
  M << a1 - a0, b0 - b1;
  const Eigen::Vector2d st = M.colPivHouseholderQr().solve(b0 - a0);
  const Vec3 pa = a0 + st[0] * (a1 - a0);
  const Vec3 pb = b0 + st[1] * (b1 - b0);
  if ((pa - pb).norm() > tol) return std::nullopt;
  if (st[0] <= 0.0 || st[0] >= 1.0 || st[1] <= 0.0 || st[1] >= 1.0) return std::nullopt;
  return 0.5 * (pa + pb);
}

}  // namespace detail

/// Midpoint of the common perpendicular of two coplanar ultraparallel
/// chords: the crossing point of the diagonals of their endpoint
/// quadrilateral.
inline Vec3 hyperbolic_midpoint(const KleinLine& a, const KleinLine& b, double tol = 1e-9) {
  const Vec3 n = (a.end_plus() - a.end_minus()).cross(b.end_minus() - a.end_minus());
  if (std::abs(n.normalized().dot(b.end_plus() - a.end_minus())) > tol)
    throw DomainError("lines are not coplanar");
  for (const Vec3* x : {&a.end_minus(), &a.end_plus()})
    for (const Vec3* y : {&b.end_minus(), &b.end_plus()})
      if ((*x - *y).norm() < tol) throw DomainError("lines are asymptotic");
  if (detail::segment_intersection(a.end_minus(), a.end_plus(), b.end_minus(), b.end_plus(), tol))
    throw DomainError("lines intersect");
  if (auto m = detail::segment_intersection(a.end_minus(), b.end_plus(), a.end_plus(), b.end_minus(), tol)) return *m;
  if (auto m = detail::segment_intersection(a.end_minus(), b.end_minus(), a.end_plus(), b.end_plus(), tol)) return *m;
  throw InternalError("no diagonal pairing of the end points crosses");
}

/// Intersection of the tangents to |z| = r at z_minus and z_plus.
inline std::complex<double> pole_of_chord(double r, std::complex<double> z_minus, std::complex<double> z_plus,
                                          double tol = 1e-9) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (std::abs(std::abs(z_minus) - r) > tol || std::abs(std::abs(z_plus) - r) > tol)
    throw DomainError("chord end points must lie on the circle");
  // Tangent at z: Re(w conj(z)) = r^2.
  Eigen::Matrix2d A;
  A << z_minus.real(), z_minus.imag(), z_plus.real(), z_plus.imag();
  if (std::abs(A.determinant()) < tol * r * r) throw DomainError("diameter chords have no pole");
  const Eigen::Vector2d w = A.partialPivLu().solve(Eigen::Vector2d(r * r, r * r));
  return {w[0], w[1]};
}

/// Hyperbolic distance from the Euclidean midpoint of the chord xy to the
/// point a fraction t of the way to y.
inline double chord_point_distance(const Vec3& x, const Vec3& y, double t) {
  if (!(t > 0.0 && t < 1.0)) throw DomainError("t must lie in (0, 1)");
  if ((x - y).norm() == 0.0) throw DomainError("chord end points coincide");
  return std::atanh(t);
}

/// One billiard step given by its tangency data alone.
struct VirtualStep {
  OrientedGeodesic in;
  OrientedGeodesic out;
  Vec3 tangency;  // Klein coordinates
  Point q;        // foot on `in`
  double d = 0.0;
  double orthogonality = 0.0;  // |<q->p, in'>|
};

inline VirtualStep virtual_step(const OrientedGeodesic& in, const Vec3& tangency) {
  const Point p = klein_to_model(tangency);
  const Foot f = foot_and_distance(in, p);
  const Vec4 W = detail::direction_towards(Kappa::Hyperbolic, f.q.coords(), p.coords());
  const double orth = std::abs(ambient_inner(Kappa::Hyperbolic, W, in.velocity_at(f.t)));
  return VirtualStep{in, transport_step(in, f.q, p, f.d), tangency, f.q, f.d, orth};
}

struct NotParallelConfig {
  double theta = 0.0;
  double r = 0.0;
  std::array<KleinLine, 4> lines;  // l, l1, l2, l_theta
  std::array<VirtualStep, 3> steps;
  double chain_error = 0.0;  // discrepancy of the chain output from l_theta
  double angle = 0.0;        // angle at which the output meets l
};

/// Three virtual steps l -> l1 -> l2 -> l_theta with tangency points at the
/// hyperbolic midpoints.
inline NotParallelConfig not_parallel_config(double theta, double r) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) throw DomainError("theta must lie in (0, pi/2)");
  if (!(r > std::sin(theta) && r < 1.0)) throw DomainError("r must lie in (sin theta, 1)");
  const Vec3 e3 = Vec3::UnitZ();
  const std::array<KleinLine, 4> L{KleinLine::make(Vec3::Zero(), e3), KleinLine::make(r * Vec3::UnitX(), e3),
                                   KleinLine::make(r * Vec3::UnitY(), e3),
                                   KleinLine::make(Vec3::Zero(), Vec3(0.0, std::sin(theta), std::cos(theta)))};
  OrientedGeodesic cur = L[0].geodesic();
  std::vector<VirtualStep> steps;
  for (int k = 0; k < 3; ++k) {
    steps.push_back(virtual_step(cur, hyperbolic_midpoint(L[k], L[k + 1])));
    cur = steps.back().out;
  }
  const OrientedGeodesic target = L[3].geodesic();
  // Both lines pass through e0 in the model, where the angle is read off.
  const OrientedGeodesic base = L[0].geodesic();
  const double cosang = ambient_inner(Kappa::Hyperbolic, base.velocity_at(base.foot_parameter(Vec4::Unit(0))),
                                      cur.velocity_at(cur.foot_parameter(Vec4::Unit(0))));
  const double meet = cur.point_at(cur.foot_parameter(Vec4::Unit(0)))[0] - 1.0;
  if (std::abs(meet) > 1e-8) throw InternalError("chain output misses the origin");
  return NotParallelConfig{theta, r, L, {steps[0], steps[1], steps[2]}, geodesic_discrepancy(cur, target),
                           std::acos(std::clamp(cosang, -1.0, 1.0))};
}

struct HolonomyConfig {
  double a = 0.0;
  double r_o = 0.0;
  double h_o = 0.0;
  std::array<KleinLine, 4> lines;
  std::array<Vec3, 4> q_plus;   // closed forms, Klein coordinates
  std::array<Vec3, 4> q_minus;
  double H_closed = 0.0;        // closed_form_H(a), meaningful for r_o = 1/sqrt(2)
  double H_table = 0.0;         // sum of (-1)^k d(q+, q-) over the closed-form q-points
};

/// The four-term arctanh expression for the holonomy at r_o = h_o = 1/sqrt(2).
inline double closed_form_H(double a) {
  return std::atanh(2 * a) - std::atanh(a * std::sqrt(4 * a * a + 3)) + std::atanh(a * std::sqrt(2 * a * a + 1)) -
         std::atanh(a);
}

/// Holonomy computed from the q-point table by the chord distance formula,
/// for any r_o. Each term is arctanh of |q+ - q-| over the half chord. At
/// r_o = 1/sqrt(2) the last term is arctanh(sqrt(2) a), not the arctanh(a)
/// of closed_form_H: q-(l3) sits at 2 a r_o^2 on a chord of half length r_o.
inline double holonomy_from_table(double a, double r_o) {
  return std::atanh(2 * a) - std::atanh(a * std::sqrt(4 * a * a + 3)) +
         std::atanh(a * std::sqrt(4 * r_o * r_o * (1 + a * a) - 1)) - std::atanh(2 * a * r_o);
}

/// z_-(r), z_+(r): where the line i/2 + t(1 - a i) meets |z| = r.
inline std::pair<std::complex<double>, std::complex<double>> holonomy_chord_ends(double a, double r) {
  // t^2 + (1/2 - a t)^2 = r^2
  const double A = 1.0 + a * a, B = -a, C = 0.25 - r * r;
  const double disc = std::sqrt(B * B - 4.0 * A * C);
  const auto z = [&](double t) { return std::complex<double>(t, 0.5 - a * t); };
  return {z((-B - disc) / (2.0 * A)), z((-B + disc) / (2.0 * A))};
}

/// Four-line configuration with closed-form q-points. The q+ point of l2
/// is taken as (2 a r_o^2, 1/2 - 2 a^2 r_o^2, h_o), the point of l2 on the
/// perpendicular through the pole of l2.
inline HolonomyConfig holonomy_config(double a, double r_o) {
  if (!(a > 0.0 && a < 0.5)) throw DomainError("a must lie in (0, 1/2)");
  if (!(r_o > 0.5 && r_o < 1.0)) throw DomainError("r_o must lie in (1/2, 1)");
  const double h = std::sqrt(1.0 - r_o * r_o);
  const Vec3 d0 = Vec3::UnitX(), d1 = Vec3(1.0, -a, 0.0);
  const std::array<KleinLine, 4> L{KleinLine::make(Vec3::Zero(), d0), KleinLine::make(Vec3(0.0, 0.5, 0.0), d1),
                                   KleinLine::make(Vec3(0.0, 0.5, h), d1), KleinLine::make(Vec3(0.0, 0.0, h), d0)};
  const std::complex<double> zo = std::complex<double>(a, 1.0) / (2.0 * (a * a + 1.0));
  const auto at = [](std::complex<double> z, double height) { return Vec3(z.real(), z.imag(), height); };
  const std::array<Vec3, 4> qp{Vec3(2.0 * a, 0.0, 0.0), at(zo, 0.0),
                               Vec3(2.0 * a * r_o * r_o, 0.5 - 2.0 * a * a * r_o * r_o, h), Vec3(0.0, 0.0, h)};
  const std::array<Vec3, 4> qm{Vec3::Zero(), Vec3(2.0 * a, 0.5 - 2.0 * a * a, 0.0), at(zo, h),
                               Vec3(2.0 * a * r_o * r_o, 0.0, h)};
  double H = 0.0;
  for (int k = 0; k < 4; ++k)
    H += (k % 2 == 0 ? 1.0 : -1.0) * distance(klein_to_model(qp[k]), klein_to_model(qm[k]));
  return HolonomyConfig{a, r_o, h, L, qp, qm, closed_form_H(a), H};
}

struct HolonomyOrbit {
  std::vector<VirtualStep> steps;
  std::array<double, 4> signed_gaps;   // parameter from q- to q+ along l_k
  std::array<double, 4> q_error;       // max distance of computed q+- from the closed forms
  double holonomy = 0.0;               // sum of signed gaps
  double closure_error = 0.0;          // l_4 vs l_0
  double line_error = 0.0;             // max over k of l_{k+1} vs the configured line
  double orientation_min = 0.0;        // min over k of det{W+, W-, l_k'}
};

/// Replays the period-4 orbit with tangency points at the hyperbolic
/// midpoints of consecutive lines.
inline HolonomyOrbit holonomy_orbit(const HolonomyConfig& cfg) {
  HolonomyOrbit o;
  std::array<Vec3, 4> mid;
  for (int k = 0; k < 4; ++k) mid[k] = hyperbolic_midpoint(cfg.lines[k], cfg.lines[(k + 1) % 4]);
  OrientedGeodesic cur = cfg.lines[0].geodesic();
  double min_orient = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const OrientedGeodesic lk = cur;
    o.steps.push_back(virtual_step(lk, mid[k]));
    const Foot fm = foot_and_distance(lk, klein_to_model(mid[(k + 3) % 4]));
    o.signed_gaps[k] = lk.foot_parameter(o.steps[k].q.coords()) - fm.t;
    o.q_error[k] = std::max(distance(o.steps[k].q, klein_to_model(cfg.q_plus[k])),
                            distance(fm.q, klein_to_model(cfg.q_minus[k])));
    const Vec4 Wp = detail::direction_towards(Kappa::Hyperbolic, o.steps[k].q.coords(), klein_to_model(mid[k]).coords());
    const Vec4 Wm = detail::direction_towards(Kappa::Hyperbolic, fm.q.coords(), klein_to_model(mid[(k + 3) % 4]).coords());
    min_orient = std::min(min_orient, detail::volume(Kappa::Hyperbolic, lk.point(), Wp, Wm, lk.direction()));
    o.holonomy += o.signed_gaps[k];
    cur = o.steps[k].out;
    o.line_error = std::max(o.line_error, geodesic_discrepancy(cur, cfg.lines[(k + 1) % 4].geodesic()));
  }
  o.closure_error = geodesic_discrepancy(cur, cfg.lines[0].geodesic());
  o.orientation_min = min_orient;
  return o;
}

}  // namespace obill
