#pragma once
// Seeded verification suites. Each case draws from its own generator seeded
// by (seed, suite salt, case index), so reports do not depend on run order.

#include <map>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "obill/klein.hpp"

namespace obill {

enum class Bound { AtMost, AtLeast };

struct CheckRecord {
  int case_index = 0;
  std::string check;
  double measured = 0.0;
  double tolerance = 0.0;
  Bound bound = Bound::AtMost;
  bool pass = false;
  std::map<std::string, double> inputs;
  std::string note;
};

struct VerificationReport {
  std::string suite;
  std::optional<int> kappa;
  std::uint64_t seed = 0;
  int n_cases = 0;
  std::vector<CheckRecord> records;

  void add(int case_index, std::string check, double measured, double tolerance, Bound bound = Bound::AtMost,
           std::map<std::string, double> inputs = {}, std::string note = {}) {
    const bool ok = bound == Bound::AtMost ? measured <= tolerance : measured >= tolerance;
    records.push_back(CheckRecord{case_index, std::move(check), measured, tolerance, bound, ok && std::isfinite(measured),
                                  std::move(inputs), std::move(note)});
  }
  /// A case that could not be evaluated.
  void fail(int case_index, std::string check, std::string note) {
    records.push_back(CheckRecord{case_index, std::move(check), std::numeric_limits<double>::quiet_NaN(), 0.0,
                                  Bound::AtMost, false, {}, std::move(note)});
  }

  bool passed() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
  }
  /// Largest measured value over at-most checks named `check` (all if empty).
  double max_deviation(const std::string& check = {}) const {
    double m = 0.0;
    for (const auto& r : records)
      if (r.bound == Bound::AtMost && (check.empty() || r.check == check)) m = std::max(m, r.measured);
    return m;
  }
  double min_measured(const std::string& check) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : records)
      if (r.check == check) m = std::min(m, r.measured);
    return m;
  }
  bool passed(const std::string& check) const {
    return std::all_of(records.begin(), records.end(),
                       [&](const CheckRecord& r) { return r.check != check || r.pass; });
  }
};

// ---------------------------------------------------------------- sampling

using Rng = std::mt19937_64;

inline Rng case_rng(std::uint64_t seed, std::uint64_t salt, int case_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(case_index)};
  return Rng(seq);
}

inline Vec3 random_unit3(Rng& rng) {
  std::normal_distribution<double> g;
  Vec3 x;
  do x = Vec3(g(rng), g(rng), g(rng));
  while (x.norm() < 1e-8);
  return x.normalized();
}

inline Vec3 random_in_ball(Rng& rng, double radius) {
  std::uniform_real_distribution<double> u;
  return radius * std::cbrt(u(rng)) * random_unit3(rng);
}

/// Haar-distributed rotation from a uniform unit quaternion.
inline Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Semi-axes log-uniform in [0.5, 2] (times 0.2 in the Klein ball, centred
/// within radius 0.4 there).
inline ChartEllipsoid random_ellipsoid(Kappa k, Rng& rng) {
  std::uniform_real_distribution<double> la(std::log(0.5), std::log(2.0));
  Vec3 axes(std::exp(la(rng)), std::exp(la(rng)), std::exp(la(rng)));
  Vec3 center;
  switch (k) {
    case Kappa::Hyperbolic:
      axes *= 0.2;
      center = random_in_ball(rng, 0.4);
      break;
    case Kappa::Flat: center = random_in_ball(rng, 1.0); break;
    case Kappa::Spherical: center = random_in_ball(rng, 0.5); break;
  }
  return ChartEllipsoid::make(k, center, axes, random_rotation(rng));
}

/// Margins for random table lines: both foot distances at least min_foot,
/// at most max_foot_hyperbolic for k = -1, and below pi/2 - sphere_margin
/// for k = +1.
struct LineMargins {
  double min_foot = 0.05;
  double max_foot_hyperbolic = 3.0;
  double sphere_margin = 0.1;
};

inline bool within_margins(const TangencyPair& tp, Kappa k, const LineMargins& m) {
  for (const TangencyPlane* pl : {&tp.plus, &tp.minus}) {
    if (pl->d < m.min_foot) return false;
    if (k == Kappa::Hyperbolic && pl->d > m.max_foot_hyperbolic) return false;
    if (k == Kappa::Spherical && pl->d > std::numbers::pi / 2 - m.sphere_margin) return false;
  }
  return true;
}

/// Random exterior line by rejection.
inline OrientedGeodesic random_table_line(const ChartEllipsoid& S, Rng& rng, const LineMargins& m = {}) {
  const Kappa k = S.kappa();
  const double amax = S.semi_axes().maxCoeff();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec3 x;
    if (k == Kappa::Hyperbolic)
      x = random_in_ball(rng, 0.95);
    else
      x = S.center() + random_in_ball(rng, 3.0 * amax);
    const OrientedGeodesic l = geodesic_from_chart(k, x, random_unit3(rng));
    try {
      if (classify_geodesic(S, l) != GeodesicClass::Exterior) continue;
      if (within_margins(tangent_planes_through(S, l), k, m)) return l;
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw InternalError("could not sample an exterior line");
}

/// A billiard configuration l = F(u, -t) with its shape matrix at p+.
struct TableSample {
  ChartEllipsoid S;
  OrientedGeodesic l;
  SurfaceFrame frame;
  double t = 0.0;  // positive; l = F(u, -t)
  ShapeMatrix b;

  std::map<std::string, double> inputs() const {
    return {{"t", t},
            {"b11", b.b11},
            {"b12", b.b12},
            {"b21", b.b21},
            {"b22", b.b22},
            {"a1", S.semi_axes()[0]},
            {"a2", S.semi_axes()[1]},
            {"a3", S.semi_axes()[2]}};
  }
};

inline TableSample random_table_sample(Kappa k, Rng& rng, const LineMargins& m = {}) {
  const ChartEllipsoid S = random_ellipsoid(k, rng);
  const OrientedGeodesic l = random_table_line(S, rng, m);
  const TableChartPoint c = table_chart_F_inverse(S, l);
  return TableSample{S, l, c.frame, -c.t, shape_operator(S, c.frame)};
}

// ------------------------------------------------------------------ suites

namespace detail {

inline Mat4 omega_K_matrix(const CanonicalBasisBt& B) { return gram_matrix(omega_K, B.E); }
inline Mat4 omega_cross_matrix(const CanonicalBasisBt& B) { return gram_matrix(omega_cross, B.E); }

inline double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

/// dB X by finite differences of actual billiard images of exp(sX).
inline GeodesicTangent pushforward_dB(const ChartEllipsoid& S, const GeodesicTangent& X, const Tangent& anchor,
                                      double h) {
  return variation_tangent(anchor, [&](double s) { return billiard(S, perturb_geodesic(X, s)).output; }, h, true);
}

}  // namespace detail

/// H^T [w_K] H = [w_K] for analytic and finite-difference dB, plus the
/// direct pullback w_K(dB X, dB Y) = w_K(X, Y) on random X, Y.
inline VerificationReport verify_symplectic(Kappa k, int n_cases, std::uint64_t seed, double h = 1e-4) {
  if (k == Kappa::Flat) throw UnsupportedError("the Killing form is degenerate for k = 0");
  VerificationReport rep{"symplectic", to_int(k), seed, n_cases, {}};
  for (int i = 0; i < n_cases; ++i) {
    Rng rng = case_rng(seed, 1, i);
    try {
      const TableSample c = random_table_sample(k, rng);
      const CanonicalBasisBt from = basis_Bt(c.frame, -c.t), to = basis_Bt(c.frame, c.t);
      const Mat4 W0 = detail::omega_K_matrix(from), W1 = detail::omega_K_matrix(to);
      const Mat4 H = dB_matrix_analytic(k, c.b.symmetrized(), c.t);
      const Mat4 Hn = dB_matrix_numeric(c.S, c.l, h, true);
      rep.add(i, "analytic", detail::max_abs(H.transpose() * W1 * H - W0), 1e-12, Bound::AtMost, c.inputs());
      rep.add(i, "numeric", detail::max_abs(Hn.transpose() * W1 * Hn - W0), 1e-5, Bound::AtMost, c.inputs());
      rep.add(i, "numeric_vs_analytic", detail::max_abs(Hn - H), 1e-5, Bound::AtMost, c.inputs());
      std::normal_distribution<double> g;
      GeodesicTangent X = GeodesicTangent::zero(from.frame), Y = X;
      for (int j = 0; j < 4; ++j) {
        X = X + from.E[j] * g(rng);
        Y = Y + from.E[j] * g(rng);
      }
      const GeodesicTangent dX = detail::pushforward_dB(c.S, X, to.frame, h);
      const GeodesicTangent dY = detail::pushforward_dB(c.S, Y, to.frame, h);
      const double w0 = omega_K(X, Y);
      rep.add(i, "pullback", std::abs(omega_K(dX, dY) - w0) / std::max(1.0, std::abs(w0)), 1e-5, Bound::AtMost,
              c.inputs());
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

/// R j D for the analytic dB.
inline Eigen::Matrix2d rjd_block(Kappa k, const ShapeMatrix& b, double t) {
  Eigen::Matrix2d R = Eigen::Vector2d(1.0, -1.0).asDiagonal(), j;
  j << 0.0, 0.5, -0.5, 0.0;
  return R * j * dB_matrix_analytic(k, b, t).bottomLeftCorner<2, 2>();
}

/// Non-invariance of w_x. The off-diagonal blocks of H^T [w_x] H are RjD
/// and -(RjD)^T; its diagonal blocks are -j + det(D) j and -j.
inline VerificationReport verify_omega_cross_failure(Kappa k, int n_cases, std::uint64_t seed, double h = 1e-4) {
  VerificationReport rep{"omega-cross", to_int(k), seed, n_cases, {}};
  for (int i = 0; i < n_cases; ++i) {
    Rng rng = case_rng(seed, 1, i);  // same configurations as the symplectic suite
    try {
      const TableSample c = random_table_sample(k, rng);
      const ShapeMatrix bs = c.b.symmetrized();
      const CanonicalBasisBt from = basis_Bt(c.frame, -c.t), to = basis_Bt(c.frame, c.t);
      const Mat4 W0 = detail::omega_cross_matrix(from), W1 = detail::omega_cross_matrix(to);
      const Mat4 H = dB_matrix_analytic(k, bs, c.t);
      const Mat4 dev = H.transpose() * W1 * H - W0;
      const Eigen::Matrix2d rjd = rjd_block(k, bs, c.t);
      const Eigen::Matrix2d D = H.bottomLeftCorner<2, 2>();
      Eigen::Matrix2d j;
      j << 0.0, 0.5, -0.5, 0.0;
      const auto in = c.inputs();
      rep.add(i, "lower_block_is_RjD", detail::max_abs((H.transpose() * W1 * H).bottomLeftCorner<2, 2>() - rjd), 1e-10,
              Bound::AtMost, in);
      rep.add(i, "upper_block_is_minus_RjD_T",
              detail::max_abs((H.transpose() * W1 * H).topRightCorner<2, 2>() + rjd.transpose()), 1e-10, Bound::AtMost,
              in);
      rep.add(i, "diagonal_blocks",
              std::max(detail::max_abs(dev.topLeftCorner<2, 2>() - (D.determinant() - 2.0) * j),
                       detail::max_abs(dev.bottomRightCorner<2, 2>() + 2.0 * j)),
              1e-10, Bound::AtMost, in);
      rep.add(i, "deviation", detail::max_abs(dev), 1e-3, Bound::AtLeast, in);
      rep.add(i, "RjD_norm", detail::max_abs(rjd), 1e-3, Bound::AtLeast, in);
      rep.add(i, "deviation_norm_equals_RjD_norm", std::abs(detail::max_abs(dev) - detail::max_abs(rjd)), 1e-10,
              Bound::AtMost, in, "the diagonal blocks of the deviation are -2j + det(D) j and -2j, not zero");
      const Mat4 Hn = dB_matrix_numeric(c.S, c.l, h, true);
      rep.add(i, "numeric_lower_block_is_RjD",
              detail::max_abs((Hn.transpose() * W1 * Hn).bottomLeftCorner<2, 2>() - rjd), 1e-5, Bound::AtMost, in);
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

/// Leaf-restricted planar map (k = 0): lines with direction w, coordinatized
/// by their intersection with w-perp.
struct PlanarLeafMap {
  Vec3 w, e1, e2;
  Eigen::Vector2d coords(const OrientedGeodesic& l) const {
    const Vec3 x = l.point().tail<3>();
    return {x.dot(e1), x.dot(e2)};
  }
  OrientedGeodesic line(const Eigen::Vector2d& y) const {
    return canonicalize(Tangent::flat(y[0] * e1 + y[1] * e2, w));
  }
  static PlanarLeafMap of(const OrientedGeodesic& l) {
    const Vec3 w = l.direction().tail<3>();
    const Vec3 e1 = w.unitOrthogonal();
    return PlanarLeafMap{w, e1, w.cross(e1)};
  }
};

/// Jacobian determinant of the planar outer billiard on the leaf of l.
inline double leaf_jacobian_det(const ChartEllipsoid& S, const OrientedGeodesic& l, double h = 1e-4) {
  const PlanarLeafMap P = PlanarLeafMap::of(l);
  const Eigen::Vector2d y0 = P.coords(l);
  const auto f = [&](const Eigen::Vector2d& y) { return P.coords(billiard(S, P.line(y)).output); };
  const auto jac = [&](double hh) {
    Eigen::Matrix2d J;
    for (int c = 0; c < 2; ++c) {
      const Eigen::Vector2d e = Eigen::Vector2d::Unit(c) * hh;
      J.col(c) = (f(y0 + e) - f(y0 - e)) / (2 * hh);
    }
    return J;
  };
  const Eigen::Matrix2d J = (4.0 * jac(h / 2) - jac(h)) / 3.0;
  return J.determinant();
}

inline VerificationReport verify_poisson(int n_cases, std::uint64_t seed) {
  VerificationReport rep{"poisson", 0, seed, n_cases, {}};
  for (int i = 0; i < n_cases; ++i) {
    Rng rng = case_rng(seed, 3, i);
    try {
      const ChartEllipsoid S = random_ellipsoid(Kappa::Flat, rng);
      const OrientedGeodesic l = random_table_line(S, rng);
      const OrientedGeodesic Bl = billiard(S, l).output;
      rep.add(i, "leaf_invariance", (leaf_of(Bl).direction - leaf_of(l).direction).lpNorm<Eigen::Infinity>(), 1e-12);
      rep.add(i, "leaf_jacobian_det", std::abs(leaf_jacobian_det(S, l) - 1.0), 1e-6);
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

/// Generator Z of the isometries fixing u and rotating/boosting p into v:
/// Z p = v, Z v = -k p, Z u = Z n = 0.
inline Mat4 characteristic_generator(const SurfaceFrame& F) {
  const Kappa k = F.u.kappa();
  Mat4 frame;
  frame << F.p().coords(), F.u.vec(), F.v.vec(), F.n.vec();
  Mat4 z = Mat4::Zero();
  z(2, 0) = 1.0;
  z(0, 2) = -to_int(k);
  return frame * z * frame.inverse();
}

/// Characteristic-field checks at random (S, u): N = (-n, 0) is g_K-unit and
/// g_K-orthogonal to the tangent space of the tangent-line set M (spanned by
/// finite-difference images of dF at t = 0), Gamma'(0) = J N, and
/// F(u, t) = exp(tZ)[gamma_u].
inline VerificationReport verify_characteristic(Kappa k, int n_cases, std::uint64_t seed) {
  if (k == Kappa::Flat) throw UnsupportedError("the Killing form is degenerate for k = 0");
  VerificationReport rep{"characteristic", to_int(k), seed, n_cases, {}};
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Mat4 G = Eigen::Vector4d(to_int(k), 1, 1, 1).asDiagonal();
  for (int i = 0; i < n_cases; ++i) {
    Rng rng = case_rng(seed, 4, i);
    try {
      const ChartEllipsoid S = random_ellipsoid(k, rng);
      const SurfaceFrame F = surface_point(S, std::acos(1 - 2 * U(rng)), 2 * std::numbers::pi * U(rng),
                                           2 * std::numbers::pi * U(rng));
      const Tangent& anchor = F.u;
      const GeodesicTangent N = GeodesicTangent::make(anchor, -F.n.vec(), Vec4::Zero());
      rep.add(i, "N_unit", std::abs(metric_gK(N, N) - 1.0), 1e-9);
      // Tangent vectors to M at [gamma_u]: curves through u in T^1 S at t = 0.
      const auto moved = [&](const Vec4& e) {
        return [&, e](double s) {
          const Point q = surface_curve_point(S, F.p(), e, s);
          return table_chart_F(frame_at(S, q, detail::tangential(k, q.coords(), F.u.vec())), 0.0);
        };
      };
      const std::array<std::function<OrientedGeodesic(double)>, 3> curves{
          moved(F.u.vec()), moved(F.v.vec()), [&](double s) {
            return table_chart_F(frame_at(S, F.p(), std::cos(s) * F.u.vec() + std::sin(s) * F.v.vec()), 0.0);
          }};
      // h = 1e-3 leaves ~3e-9 of O(h^4) truncation on the small k = -1 tables.
      double orth = 0.0;
      for (const auto& c : curves) {
        const GeodesicTangent X = variation_tangent(anchor, c, 2.5e-4, true);
        orth = std::max(orth, std::abs(metric_gK(N, X)) / std::sqrt(std::abs(metric_gK(X, X))));
      }
      rep.add(i, "N_orthogonal_to_TM", orth, 1e-9);
      const GeodesicTangent Gp =
          variation_tangent(anchor, [&](double s) { return table_chart_F(F, s); }, 1e-3, true);
      const GeodesicTangent JN = complex_structure(N);
      rep.add(i, "Gamma_prime_is_JN",
              std::max((Gp.J0() - JN.J0()).lpNorm<Eigen::Infinity>(), (Gp.J0p() - JN.J0p()).lpNorm<Eigen::Infinity>()),
              1e-9);
      const Mat4 Z = characteristic_generator(F);
      rep.add(i, "Z_in_isometry_algebra", detail::max_abs(Z.transpose() * G + G * Z), 1e-9);
      double orbit = 0.0, iso = 0.0;
      for (int m = 1; m <= 10; ++m) {
        const double t = 0.1 * m;
        const Mat4 E = (t * Z).exp();
        iso = std::max(iso, detail::max_abs(E.transpose() * G * E - G));
        const Point q = Point::make(k, E * F.p().coords());
        const OrientedGeodesic img = canonicalize(Tangent::make(q, E * F.u.vec()));
        orbit = std::max(orbit, geodesic_discrepancy(img, table_chart_F(F, t)));
      }
      rep.add(i, "isometry_orbit", orbit, 1e-9);
      rep.add(i, "exp_tZ_isometry", iso, 1e-9);
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

/// B^-1 B = B B^-1 = id on random table lines; for k = +1 also checks that
/// cut circles and Gauss-set circles are rejected.
inline VerificationReport verify_bijection(Kappa k, int n_cases, std::uint64_t seed) {
  VerificationReport rep{"bijection", to_int(k), seed, n_cases, {}};
  for (int i = 0; i < n_cases; ++i) {
    Rng rng = case_rng(seed, 5, i);
    try {
      const ChartEllipsoid S = random_ellipsoid(k, rng);
      const OrientedGeodesic l = random_table_line(S, rng);
      const OrientedGeodesic Bl = billiard(S, l).output;
      rep.add(i, "inverse_after_forward", geodesic_discrepancy(billiard_inverse(S, Bl).output, l), 1e-9);
      const OrientedGeodesic Bil = billiard_inverse(S, l).output;
      rep.add(i, "forward_after_inverse", geodesic_discrepancy(billiard(S, Bil).output, l), 1e-9);
      rep.add(i, "image_exterior", classify_geodesic(S, Bl) == GeodesicClass::Exterior ? 0.0 : 1.0, 0.0);
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  if (k == Kappa::Spherical) {
    // Exclusions: a circle through the centre cuts S; the circle spanned by
    // (u, v) at a surface point lies in the tangent great sphere there.
    Rng rng = case_rng(seed, 6, 0);
    const auto rejected = [](const std::function<void()>& f) {
      try {
        f();
      } catch (const DomainError&) {
        return 0.0;
      }
      return 1.0;
    };
    for (int i = 0; i < 10; ++i) {
      const ChartEllipsoid S = ChartEllipsoid::make(Kappa::Spherical, random_in_ball(rng, 0.3),
                                                    0.3 * Vec3(1.0, 0.8, 0.6), random_rotation(rng));
      const OrientedGeodesic cut = geodesic_from_chart(Kappa::Spherical, S.center(), random_unit3(rng));
      rep.add(n_cases + i, "cut_set_rejected", rejected([&] { billiard(S, cut); }), 0.0);
      const SurfaceFrame F = surface_point(S, 1.0 + 0.1 * i, 0.5 * i);
      const Point e = Point::make(Kappa::Spherical, F.u.vec());
      const OrientedGeodesic gauss = canonicalize(Tangent::make(e, F.v.vec()));
      rep.add(n_cases + i, "gauss_set_classified", classify_geodesic(S, gauss) == GeodesicClass::GaussSet ? 0.0 : 1.0,
              0.0);
      rep.add(n_cases + i, "gauss_set_rejected", rejected([&] { billiard(S, gauss); }), 0.0);
    }
  }
  return rep;
}

/// Numeric det dF against c_k(t) s_k(t) det[A_p].
inline VerificationReport verify_det_dF(Kappa k, int n_cases, std::uint64_t seed) {
  VerificationReport rep{"det-df", to_int(k), seed, n_cases, {}};
  for (int i = 0; i < n_cases; ++i) {
    Rng rng = case_rng(seed, 7, i);
    try {
      const TableSample c = random_table_sample(k, rng);
      for (const double t : {c.t, -c.t}) {
        const double expected = ck(k, t) * sk(k, t) * c.b.det();
        const double numeric = dF_matrix_numeric(c.S, c.frame, t, 1e-4, true).determinant();
        rep.add(i, t > 0 ? "det_dF_plus" : "det_dF_minus", std::abs(numeric - expected) / std::abs(expected), 1e-5,
                Bound::AtMost, c.inputs());
      }
      rep.add(i, "dF_entries", detail::max_abs(dF_matrix_numeric(c.S, c.frame, c.t, 1e-4, true) - dF_matrix(k, c.b, c.t)), 1e-5,
              Bound::AtMost, c.inputs());
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

/// Orbit-based holonomy of the period-4 configuration against the
/// four-term closed form (at r_o = 1/sqrt(2)) and against the q-point table.
inline VerificationReport run_holonomy(const std::vector<double>& a_list, double r_o) {
  VerificationReport rep{"holonomy", -1, 0, static_cast<int>(a_list.size()), {}};
  const bool special = std::abs(r_o - 1.0 / std::sqrt(2.0)) < 1e-15;
  for (int i = 0; i < static_cast<int>(a_list.size()); ++i) {
    const double a = a_list[i];
    try {
      const HolonomyConfig cfg = holonomy_config(a, r_o);
      const HolonomyOrbit o = holonomy_orbit(cfg);
      const std::map<std::string, double> in{{"a", a},
                                             {"r_o", r_o},
                                             {"holonomy", o.holonomy},
                                             {"H_table", holonomy_from_table(a, r_o)},
                                             {"H_closed", closed_form_H(a)}};
      rep.add(i, "orbit_closes", o.closure_error, 1e-10, Bound::AtMost, in);
      rep.add(i, "steps_hit_lines", o.line_error, 1e-10, Bound::AtMost, in);
      rep.add(i, "q_points_match_table", *std::max_element(o.q_error.begin(), o.q_error.end()), 1e-10, Bound::AtMost,
              in);
      rep.add(i, "orientation_rule", o.orientation_min, 0.0, Bound::AtLeast, in);
      rep.add(i, "holonomy_vs_table_formula", std::abs(o.holonomy - holonomy_from_table(a, r_o)), 1e-8, Bound::AtMost,
              in);
      rep.add(i, "holonomy_vs_table_distances", std::abs(o.holonomy - cfg.H_table), 1e-8, Bound::AtMost, in);
      rep.add(i, "holonomy_nonzero", std::abs(o.holonomy), 1e-6, Bound::AtLeast, in);
      if (special)
        rep.add(i, "holonomy_vs_closed_form_H", std::abs(o.holonomy - closed_form_H(a)), 1e-8, Bound::AtMost, in,
                "closed-form H(a) has last term arctanh(a); the q-point table gives arctanh(sqrt(2) a)");
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

inline VerificationReport run_not_parallel(const std::vector<double>& thetas, std::optional<double> r = {}) {
  VerificationReport rep{"not-parallel", -1, 0, static_cast<int>(thetas.size()), {}};
  for (int i = 0; i < static_cast<int>(thetas.size()); ++i) {
    const double th = thetas[i];
    const double rr = r.value_or(std::max(0.8, 0.5 * (1 + std::sin(th))));
    try {
      const NotParallelConfig c = not_parallel_config(th, rr);
      const std::map<std::string, double> in{{"theta", th}, {"r", rr}, {"angle", c.angle}};
      rep.add(i, "angle", std::abs(c.angle - th), 1e-8, Bound::AtMost, in);
      rep.add(i, "chain_reaches_l_theta", c.chain_error, 1e-8, Bound::AtMost, in);
      double orth = 0.0;
      for (const auto& s : c.steps) orth = std::max(orth, s.orthogonality);
      rep.add(i, "steps_orthogonal", orth, 1e-8, Bound::AtMost, in);
    } catch (const GeometryError& e) {
      rep.fail(i, "case", e.what());
    }
  }
  return rep;
}

/// Distance of the ambient vector N from span(p, v) of l, relative to |N|.
inline double span_residual(const OrientedGeodesic& l, const Vec4& N) {
  Eigen::Matrix<double, 4, 2> A;
  A << l.point(), l.direction();
  const Vec4 r = N - A * A.colPivHouseholderQr().solve(N);
  return r.norm() / N.norm();
}

/// For a geodesic sphere (k = -1, chart centre at the origin) every iterate
/// stays orthogonal to the plane through the centre orthogonal to l0.
inline double parallelism_residual(const ChartEllipsoid& S, const OrbitRecord& o) {
  const OrientedGeodesic& l0 = o.steps.front().input;
  const Vec4 c = chart_to_model(S.kappa(), S.center()).coords();
  const Vec4 N = l0.velocity_at(l0.foot_parameter(c));
  double r = 0.0;
  for (const auto& s : o.steps) r = std::max(r, span_residual(s.output, N));
  return r;
}

inline VerificationReport run_orbit(const ChartEllipsoid& S, const OrientedGeodesic& l, int n,
                                    double period_tol = 1e-7) {
  VerificationReport rep{"orbit", to_int(S.kappa()), 0, 1, {}};
  const OrbitRecord o = iterate_orbit(S, l, n, period_tol);
  const double closure = o.closure_error.value_or(std::numeric_limits<double>::quiet_NaN());
  rep.add(0, "steps_completed", static_cast<double>(o.steps.size()), n, Bound::AtLeast,
          {{"period", o.period ? *o.period : 0.0}, {"holonomy", o.holonomy.value_or(0.0)}, {"closure", closure}},
          o.truncated.value_or(""));
  double inv = 0.0;
  for (const auto& s : o.steps) inv = std::max(inv, geodesic_discrepancy(billiard_inverse(S, s.output).output, s.input));
  rep.add(0, "inverse_consistency", inv, 1e-9);
  const Vec3& a = S.semi_axes();
  if (S.kappa() == Kappa::Hyperbolic && a.maxCoeff() - a.minCoeff() < 1e-14 && S.center().norm() < 1e-14 &&
      !o.steps.empty())
    rep.add(0, "parallelism_residual", parallelism_residual(S, o), 1e-8);
  if (S.kappa() == Kappa::Flat && !o.steps.empty()) {
    double dir = 0.0;
    for (const auto& s : o.steps) dir = std::max(dir, (s.output.direction() - l.direction()).lpNorm<Eigen::Infinity>());
    rep.add(0, "direction_invariance", dir, 1e-12);
  }
  return rep;
}

/// The planar reduction at the unit sphere and a line at distance R.
struct EuclideanReduction {
  double rotation = 0.0;  // shadow-plane angle between l and B(l)
  int period = 0;
  double closure = 0.0;
  double holonomy = 0.0;
  double direction_drift = 0.0;
  double leaf_det = 0.0;
};

inline EuclideanReduction euclidean_reduction(double R = 2.0) {
  const ChartEllipsoid S = ChartEllipsoid::sphere(Kappa::Flat, Vec3::Zero(), 1.0);
  const OrientedGeodesic l = canonicalize(Tangent::flat(Vec3(R, 0, 0), Vec3::UnitY()));
  const OrbitRecord o = iterate_orbit(S, l, 6, 1e-9);
  const PlanarLeafMap P = PlanarLeafMap::of(l);
  const Eigen::Vector2d y0 = P.coords(l), y1 = P.coords(o.steps.front().output);
  EuclideanReduction e;
  e.rotation = std::acos(std::clamp(y0.dot(y1) / (y0.norm() * y1.norm()), -1.0, 1.0));
  e.period = o.period.value_or(0);
  e.closure = o.closure_error.value_or(std::numeric_limits<double>::infinity());
  e.holonomy = o.holonomy.value_or(std::numeric_limits<double>::infinity());
  for (const auto& s : o.steps)
    e.direction_drift = std::max(e.direction_drift, (s.output.direction() - l.direction()).lpNorm<Eigen::Infinity>());
  e.leaf_det = leaf_jacobian_det(S, l);
  return e;
}

}  // namespace obill
