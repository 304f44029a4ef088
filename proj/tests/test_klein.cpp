#include <gtest/gtest.h>

#include <random>

#include "obill/obill.hpp"
#include "oracles.hpp"

using namespace obill;

TEST(KleinChart, Examples) {
  EXPECT_EQ(klein_to_model(Vec3::Zero()).coords(), Vec4::Unit(0));
  const Vec4 expect = Vec4(1, 0.5, 0, 0) / std::sqrt(0.75);
  EXPECT_LT((klein_to_model(Vec3(0.5, 0, 0)).coords() - expect).norm(), 1e-15);
  EXPECT_NEAR(distance(klein_to_model(Vec3::Zero()), klein_to_model(Vec3(0.5, 0, 0))), std::atanh(0.5), 1e-15);
  EXPECT_THROW(klein_to_model(Vec3(0.6, 0.8, 0)), DomainError);
}

TEST(KleinChart, RoundTripAndHilbertDistance) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.57, 0.57);
  for (int i = 0; i < 200; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng)), y(u(rng), u(rng), u(rng));
    EXPECT_LT((model_to_klein(klein_to_model(x)) - x).norm(), 1e-12);
    EXPECT_NEAR(distance(klein_to_model(x), klein_to_model(y)), oracle::klein_hilbert_distance(x, y), 1e-10);
  }
}

TEST(GnomonicChart, Examples) {
  EXPECT_EQ(gnomonic_to_sphere(Vec3::Zero()).coords(), Vec4::Unit(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    EXPECT_LT((sphere_to_gnomonic(gnomonic_to_sphere(x)) - x).norm(), 1e-12 * std::max(1.0, x.norm()));
  }
  EXPECT_THROW(sphere_to_gnomonic(Point::make(Kappa::Spherical, -Vec4::Unit(0))), DomainError);
  EXPECT_THROW(sphere_to_gnomonic(Point::make(Kappa::Spherical, Vec4::Unit(1))), DomainError);
  // Lines through the chart origin are great circles through e0.
  const OrientedGeodesic c = geodesic_from_chart(Kappa::Spherical, Vec3::Zero(), Vec3(1, 2, 3));
  EXPECT_NEAR(c.point()[0], 1.0, 1e-15);
}

TEST(KleinLine, EndsAndGeodesic) {
  const KleinLine l = KleinLine::make(Vec3(0.3, 0, 0), Vec3(0, 0, 2));
  EXPECT_NEAR(l.end_plus()[2], std::sqrt(1 - 0.09), 1e-15);
  EXPECT_NEAR(l.end_minus()[2], -std::sqrt(1 - 0.09), 1e-15);
  const KleinLine back = KleinLine::from_geodesic(l.geodesic());
  EXPECT_LT((back.end_plus() - l.end_plus()).norm(), 1e-12);
  EXPECT_THROW(KleinLine::make(Vec3(1.2, 0, 0), Vec3::UnitZ()), DomainError);
  EXPECT_THROW(KleinLine::make(Vec3::Zero(), Vec3::Zero()), DomainError);
}

TEST(HyperbolicMidpoint, Examples) {
  const KleinLine z = KleinLine::make(Vec3::Zero(), Vec3::UnitZ());
  const KleinLine l1 = KleinLine::make(Vec3(0.8, 0, 0), Vec3::UnitZ());
  EXPECT_LT((hyperbolic_midpoint(z, l1) - Vec3(0.5, 0, 0)).norm(), 1e-12);
  // Symmetric pair: midpoint on the symmetry axis x = 0.
  const KleinLine a = KleinLine::make(Vec3(-0.6, 0, 0), Vec3::UnitZ()), b = KleinLine::make(Vec3(0.6, 0, 0), Vec3::UnitZ());
  EXPECT_NEAR(hyperbolic_midpoint(a, b)[0], 0.0, 1e-14);
  EXPECT_THROW(hyperbolic_midpoint(z, KleinLine::make(Vec3(0.5, 0.5, 0), Vec3::UnitZ() + Vec3::UnitY())), DomainError);
  EXPECT_THROW(hyperbolic_midpoint(z, KleinLine::make(Vec3::Zero(), Vec3::UnitX())), DomainError);
  EXPECT_THROW(hyperbolic_midpoint(z, KleinLine::make(Vec3(0.5, 0, 0.5), Vec3(1, 0, -1))),
               DomainError);
}

TEST(HyperbolicMidpoint, Equidistant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 50; ++i) {
    // Two chords in the plane z = c.
    const double c = u(rng);
    const KleinLine a = KleinLine::make(Vec3(u(rng), u(rng), c), Vec3(u(rng), u(rng), 0));
    const KleinLine b = KleinLine::make(Vec3(u(rng), u(rng), c), Vec3(u(rng), u(rng), 0));
    Vec3 m;
    try {
      m = hyperbolic_midpoint(a, b);
    } catch (const DomainError&) {
      continue;
    }
    const Point p = klein_to_model(m);
    const Foot fa = foot_and_distance(a.geodesic(), p), fb = foot_and_distance(b.geodesic(), p);
    EXPECT_NEAR(fa.d, fb.d, 1e-8);
    // m lies on the common perpendicular: the two feet and m are collinear in the chart.
    const Vec3 qa = model_to_klein(fa.q), qb = model_to_klein(fb.q);
    EXPECT_LT((qb - qa).normalized().cross((m - qa).normalized()).norm(), 1e-8);
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(PoleOfChord, Examples) {
  const double c = 0.6;
  const std::complex<double> w = pole_of_chord(1.0, {c, -0.8}, {c, 0.8});
  EXPECT_NEAR(w.real(), 1 / c, 1e-14);
  EXPECT_NEAR(w.imag(), 0.0, 1e-14);
  EXPECT_GT(std::abs(w), 1.0);
  const auto [zm, zp] = holonomy_chord_ends(0.25, 1.0);
  EXPECT_NEAR(pole_of_chord(1.0, zm, zp).real(), 0.5, 1e-10);
  for (double a : {0.02, 0.1, 0.3})
    for (double r : {0.6, 0.8, 1.0}) {
      const auto [m, p] = holonomy_chord_ends(a, r);
      EXPECT_NEAR(pole_of_chord(r, m, p).real(), 2 * a * r * r, 1e-10);
    }
  EXPECT_THROW(pole_of_chord(1.0, {-1, 0}, {1, 0}), DomainError);
  EXPECT_THROW(pole_of_chord(1.0, {0.5, 0}, {1, 0}), DomainError);
}

TEST(ChordPointDistance, Examples) {
  const Vec3 x(-1, 0, 0), y(1, 0, 0);
  EXPECT_NEAR(chord_point_distance(x, y, 0.5), 0.5493061443340549, 1e-15);
  EXPECT_LT(chord_point_distance(x, y, 1e-12), 1e-11);
  EXPECT_THROW(chord_point_distance(x, y, 1.0), DomainError);
  EXPECT_THROW(chord_point_distance(x, x, 0.5), DomainError);
  // Against the hyperboloid distance on random chords.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = random_unit3(rng), b = random_unit3(rng);
    const double t = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    const Vec3 c = 0.5 * (a + b);
    EXPECT_NEAR(chord_point_distance(a, b, t), distance(klein_to_model(c), klein_to_model(c + t * (b - a) / 2)), 1e-10);
  }
}

TEST(NotParallel, Examples) {
  const NotParallelConfig c = not_parallel_config(std::numbers::pi / 6, 0.8);
  EXPECT_LT((c.steps[0].tangency - Vec3(0.5, 0, 0)).norm(), 1e-12);
  EXPECT_LT(c.chain_error, 1e-8);
  EXPECT_NEAR(c.angle, std::numbers::pi / 6, 1e-8);
  for (const auto& s : c.steps) EXPECT_LT(s.orthogonality, 1e-8);
  EXPECT_THROW(not_parallel_config(1.0, 0.8), DomainError);  // sin(1) > 0.8
  EXPECT_THROW(not_parallel_config(0.0, 0.8), DomainError);
}

TEST(NotParallel, AnglesAndContinuity) {
  for (double th : {0.3, 0.6, 1.0, 1.4}) {
    const double r = std::max(0.8, 0.5 * (1 + std::sin(th)));
    const NotParallelConfig c = not_parallel_config(th, r);
    EXPECT_NEAR(c.angle, th, 1e-8);
    EXPECT_LT(c.chain_error, 1e-8);
  }
  const NotParallelConfig small = not_parallel_config(1e-6, 0.8);
  EXPECT_LT(geodesic_discrepancy(small.steps[2].out, small.lines[0].geodesic()), 1e-5);
}

TEST(Holonomy, ClosedFormValues) {
  EXPECT_EQ(closed_form_H(0.0), 0.0);
  const double h = 1e-5;
  EXPECT_NEAR((closed_form_H(h) - closed_form_H(-h)) / (2 * h), 2 - std::sqrt(3.0), 1e-8);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(closed_form_H(oracle::mp::a_values[i]), oracle::mp::closed_form_values[i], 1e-14);
  EXPECT_NEAR(closed_form_H(0.1), 0.02759, 1e-4);
}

TEST(Holonomy, ConfigMatchesTable) {
  for (double a : {0.02, 0.05, 0.1, 0.3})
    for (double r_o : {0.6, 1 / std::sqrt(2.0), 0.9}) {
      const HolonomyConfig cfg = holonomy_config(a, r_o);
      const HolonomyOrbit o = holonomy_orbit(cfg);
      EXPECT_LT(o.closure_error, 1e-10);
      EXPECT_LT(o.line_error, 1e-10);
      for (double e : o.q_error) EXPECT_LT(e, 1e-10);
      EXPECT_GT(o.orientation_min, 0.0);
      EXPECT_NEAR(o.holonomy, holonomy_from_table(a, r_o), 1e-12);
      EXPECT_NEAR(o.holonomy, cfg.H_table, 1e-12);
      EXPECT_NE(o.holonomy, 0.0);
    }
  EXPECT_THROW(holonomy_config(0.6, 0.7), DomainError);
  EXPECT_THROW(holonomy_config(0.1, 0.4), DomainError);
}

// The orbit replay agrees with the arbitrary-precision value of the table
// sum, and differs from the four-term closed form.
TEST(Holonomy, OrbitAgainstArbitraryPrecision) {
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = oracle::mp::a_values[i];
    const HolonomyOrbit o = holonomy_orbit(holonomy_config(a, 1 / std::sqrt(2.0)));
    EXPECT_NEAR(o.holonomy, oracle::mp::orbit_holonomy[i], 1e-12);
    EXPECT_GT(std::abs(o.holonomy - oracle::mp::closed_form_values[i]), 1e-3);
  }
  // Derivative at 0 of the table sum: 2 - sqrt(3) + 1 - sqrt(2).
  const double h = 1e-5;
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR((holonomy_from_table(h, r) - holonomy_from_table(-h, r)) / (2 * h), 3 - std::sqrt(3.0) - std::sqrt(2.0), 1e-8);
}
