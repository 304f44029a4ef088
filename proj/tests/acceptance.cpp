// Acceptance gate: one PASS/FAIL line per criterion, with the worst measured
// value of every sub-check underneath.
//
// Exit status is 0 when every failing sub-check is one of the two documented
// discrepancies (marked "known" below); any other failure exits 1.

#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "obill/obill.hpp"
#include "oracles.hpp"

using namespace obill;

namespace {

struct Sub {
  std::string name;
  double measured;
  double tol;
  Bound bound;
  bool pass;
  const char* known = nullptr;  // reason, when this failure is a documented discrepancy
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Sub> subs;

  void check(std::string name, double measured, double tol, Bound b = Bound::AtMost, const char* known = nullptr) {
    const bool ok = std::isfinite(measured) && (b == Bound::AtMost ? measured <= tol : measured >= tol);
    subs.push_back({std::move(name), measured, tol, b, ok, known});
  }
  // Worst value of `check` over a report, graded by the report's own records.
  void from(const VerificationReport& r, const std::string& check, const std::string& label,
            const char* known = nullptr) {
    double worst = std::numeric_limits<double>::quiet_NaN(), tol = 0.0;
    Bound b = Bound::AtMost;
    bool any = false;
    for (const auto& rec : r.records)
      if (rec.check == check) {
        b = rec.bound;
        tol = rec.tolerance;
        if (!any || (b == Bound::AtMost ? rec.measured > worst : rec.measured < worst) || std::isnan(rec.measured))
          worst = rec.measured;
        any = true;
      }
    subs.push_back({label, worst, tol, b, any && r.passed(check), known});
  }
  // Cases that threw inside a suite.
  void no_errors(const VerificationReport& r, const std::string& label) {
    int n = 0;
    for (const auto& rec : r.records) n += rec.check == "case";
    check(label + " evaluation errors", n, 0);
  }
  bool passed() const {
    return std::all_of(subs.begin(), subs.end(), [](const Sub& s) { return s.pass; });
  }
  bool only_known_failures() const {
    return std::all_of(subs.begin(), subs.end(), [](const Sub& s) { return s.pass || s.known; });
  }
};

std::uint64_t seed_from_env() {
  if (const char* s = std::getenv("OBILL_SEED")) return std::stoull(s);
  return 20240517;
}

const char* kname(Kappa k) { return k == Kappa::Spherical ? "k=+1" : k == Kappa::Flat ? "k=0" : "k=-1"; }

const char* const kOmegaCross =
    "the deviation has diagonal blocks (det D - 2) j and -2 j besides the RjD off-diagonal blocks, so its max norm "
    "is not the RjD norm";
const char* const kClosedFormH =
    "the orbit reproduces the q-point table sum; the four-term closed form H(a) differs from it in its last term";

Criterion c1(std::uint64_t seed) {
  Criterion c{1, "symplectomorphism for omega_K", {}};
  for (Kappa k : {Kappa::Spherical, Kappa::Hyperbolic}) {
    const VerificationReport r = verify_symplectic(k, 100, seed);
    c.no_errors(r, kname(k));
    c.from(r, "analytic", std::string(kname(k)) + " analytic H");
    c.from(r, "numeric", std::string(kname(k)) + " finite-difference H");
  }
  return c;
}

Criterion c2(std::uint64_t seed) {
  Criterion c{2, "omega_cross is not preserved; deviation is the RjD block", {}};
  for (Kappa k : {Kappa::Spherical, Kappa::Flat, Kappa::Hyperbolic}) {
    const VerificationReport r = verify_omega_cross_failure(k, 100, seed);
    const std::string p = kname(k);
    c.no_errors(r, p);
    c.from(r, "lower_block_is_RjD", p + " off-diagonal block = RjD");
    c.from(r, "upper_block_is_minus_RjD_T", p + " off-diagonal block = -(RjD)^T");
    c.from(r, "deviation", p + " deviation exceeds 1e-3");
    c.from(r, "deviation_norm_equals_RjD_norm", p + " |deviation|max = |RjD|max", kOmegaCross);
  }
  return c;
}

Criterion c3(std::uint64_t seed) {
  Criterion c{3, "det dF = c(t) s(t) det A_p", {}};
  for (Kappa k : {Kappa::Spherical, Kappa::Flat, Kappa::Hyperbolic}) {
    const VerificationReport r = verify_det_dF(k, 50, seed);
    c.no_errors(r, kname(k));
    c.from(r, "det_dF_plus", std::string(kname(k)) + " relative error, t>0");
    c.from(r, "det_dF_minus", std::string(kname(k)) + " relative error, t<0");
  }
  return c;
}

Criterion c4(std::uint64_t seed) {
  Criterion c{4, "B^-1 B = id; k=+1 exclusions", {}};
  for (Kappa k : {Kappa::Spherical, Kappa::Flat, Kappa::Hyperbolic}) {
    const VerificationReport r = verify_bijection(k, 1000, seed);
    const std::string p = kname(k);
    c.no_errors(r, p);
    c.from(r, "inverse_after_forward", p + " B^-1 B");
    c.from(r, "forward_after_inverse", p + " B B^-1");
    if (k == Kappa::Spherical) {
      for (const char* x : {"cut_set_rejected", "gauss_set_classified", "gauss_set_rejected"}) {
        int bad = 0, n = 0;
        for (const auto& rec : r.records)
          if (rec.check == x) ++n, bad += !rec.pass;
        c.check(p + " " + x + " (failures of " + std::to_string(n) + ")", n ? bad : 1, 0);
      }
    }
  }
  return c;
}

Criterion c5() {
  Criterion c{5, "Euclidean reduction at R = 2", {}};
  const EuclideanReduction e = euclidean_reduction(2.0);
  c.check("shadow rotation - 2pi/3", std::abs(e.rotation - 2 * std::numbers::pi / 3), 1e-9);
  c.check("period == 3", e.period == 3 ? 0.0 : 1.0, 0.0);
  c.check("closure", e.closure, 1e-9);
  c.check("|holonomy|", std::abs(e.holonomy), 1e-9);
  c.check("direction invariance", e.direction_drift, 1e-12);
  c.check("|leaf det - 1|", std::abs(e.leaf_det - 1.0), 1e-6);
  return c;
}

Criterion c6() {
  Criterion c{6, "three-step chain meets l at angle theta", {}};
  const VerificationReport r = run_not_parallel({0.3, 0.6, 1.0});
  c.no_errors(r, "");
  c.from(r, "angle", "|angle - theta|");
  c.from(r, "chain_reaches_l_theta", "chain output vs l_theta");
  return c;
}

Criterion c7() {
  Criterion c{7, "holonomy of the period-4 orbit", {}};
  const VerificationReport r = run_holonomy({0.02, 0.05, 0.1}, 1 / std::sqrt(2.0));
  c.no_errors(r, "");
  c.from(r, "orbit_closes", "orbit closes");
  c.from(r, "holonomy_vs_table_formula", "orbit vs q-point table sum");
  c.from(r, "holonomy_vs_closed_form_H", "orbit vs closed-form H(a)", kClosedFormH);
  c.check("H(0) exact zero", std::abs(closed_form_H(0.0)), 0.0);
  const double h = 1e-4;
  // Term-wise derivative at 0: 2 - sqrt3 + 1 - 1.
  const double oracle = 2 - std::sqrt(3.0) + 1.0 - 1.0;
  c.check("central-difference H'(0) - (2 - sqrt3)", std::abs((closed_form_H(h) - closed_form_H(-h)) / (2 * h) - oracle),
          1e-4);
  return c;
}

Criterion c8(std::uint64_t seed) {
  Criterion c{8, "characteristic field and isometry orbits", {}};
  for (Kappa k : {Kappa::Spherical, Kappa::Hyperbolic}) {
    const VerificationReport r = verify_characteristic(k, 50, seed);
    const std::string p = kname(k);
    c.no_errors(r, p);
    c.from(r, "N_unit", p + " g_K(N,N) = 1");
    c.from(r, "N_orthogonal_to_TM", p + " g_K(N,TM) = 0");
    c.from(r, "Gamma_prime_is_JN", p + " Gamma'(0) = J N");
    c.from(r, "isometry_orbit", p + " isometry-orbit agreement");
  }
  return c;
}

Criterion c9(std::uint64_t seed) {
  Criterion c{9, "round sphere in H^3: iterates orthogonal to a fixed plane", {}};
  const ChartEllipsoid S = ChartEllipsoid::sphere(Kappa::Hyperbolic, Vec3::Zero(), 0.3);
  double worst = 0.0;
  int short_orbits = 0;
  for (int i = 0; i < 5; ++i) {
    Rng rng = case_rng(seed, 9, i);
    const VerificationReport r = run_orbit(S, random_table_line(S, rng), 20);
    worst = std::max(worst, r.max_deviation("parallelism_residual"));
    short_orbits += !r.passed("steps_completed");
  }
  c.check("5 lines x 20 iterates, relative span residual", worst, 1e-8);
  c.check("orbits cut short", short_orbits, 0);
  return c;
}

Point random_point(Kappa k, Rng& rng) {
  return chart_to_model(k, random_in_ball(rng, k == Kappa::Hyperbolic ? 0.9 : 1.5));
}

Tangent random_tangent(const Point& p, Rng& rng) {
  std::normal_distribution<double> g;
  return Tangent::make(p, detail::tangential(p.kappa(), p.coords(), Vec4(g(rng), g(rng), g(rng), g(rng))));
}

Criterion c10(std::uint64_t seed) {
  Criterion c{10, "kernel oracles", {}};
  double jac = 0.0, iso = 0.0, chart = 0.0, klein = 0.0;
  for (Kappa k : {Kappa::Hyperbolic, Kappa::Flat, Kappa::Spherical})
    for (int i = 0; i < 20; ++i) {
      Rng rng = case_rng(seed, 10, i);
      std::normal_distribution<double> g;
      const Point p = random_point(k, rng);
      const Tangent w = random_tangent(p, rng).normalized();
      const auto normal = [&] {
        const Tangent t = random_tangent(p, rng);
        return Tangent::make(p, t.vec() - metric_inner(p, t, w) * w.vec());
      };
      const Tangent u = normal(), v = normal();
      const double a = g(rng), b = g(rng);
      const Vec4 J0 = u.vec() + a * w.vec();
      const Vec4 J0p = v.vec() + b * w.vec() - to_int(k) * a * p.coords();
      for (double r : {-2.0, 1.0, 3.0}) {
        const auto sol = oracle::integrate_jacobi(to_int(k), {p.coords(), w.vec(), J0, J0p}, r);
        const auto J = jacobi_evolve(w, a, b, u, v, r);
        jac = std::max({jac, (J.J.vec() - sol.J).norm(), (J.Jp.vec() - detail::tangential(k, sol.x, sol.Jp)).norm()});
      }
      const Tangent x = random_tangent(p, rng), y = random_tangent(p, rng);
      const Tangent xt = parallel_transport(x, w, 2.5), yt = parallel_transport(y, w, 2.5);
      iso = std::max(iso, std::abs(metric_inner(xt.base(), xt, yt) - metric_inner(p, x, y)));
      const Vec3 z = random_in_ball(rng, 0.95);
      chart = std::max(chart, (model_to_chart(chart_to_model(k, z)) - z).norm());
      if (k == Kappa::Hyperbolic) {
        const Vec3 z2 = random_in_ball(rng, 0.95);
        klein = std::max(klein, std::abs(distance(klein_to_model(z), klein_to_model(z2)) -
                                         oracle::klein_hilbert_distance(z, z2)));
        chart = std::max(chart, (model_to_klein(klein_to_model(z)) - z).norm());
      }
    }
  c.check("Jacobi evolution vs RK4", jac, 1e-6);
  c.check("parallel transport isometry", iso, 1e-10);
  c.check("chart round trips", chart, 1e-12);
  c.check("Klein cross-ratio vs hyperboloid distance", klein, 1e-10);
  return c;
}

}  // namespace

int main() {
  const std::uint64_t seed = seed_from_env();
  std::printf("acceptance seed=%llu\n", static_cast<unsigned long long>(seed));
  std::vector<Criterion> all;
  try {
    all = {c1(seed), c2(seed), c3(seed), c4(seed), c5(), c6(), c7(), c8(seed), c9(seed), c10(seed)};
  } catch (const std::exception& e) {
    std::printf("error: %s\n", e.what());
    return 1;
  }
  bool gate = true;
  int passed = 0;
  for (const auto& c : all) {
    std::printf("%s criterion %d: %s\n", c.passed() ? "PASS" : "FAIL", c.id, c.title.c_str());
    for (const auto& s : c.subs) {
      std::printf("    %-4s %-58s %10.3e %s %.0e%s\n", s.pass ? "ok" : "FAIL", s.name.c_str(), s.measured,
                  s.bound == Bound::AtMost ? "<=" : ">=", s.tol, !s.pass && s.known ? "  (known)" : "");
      if (!s.pass && s.known) std::printf("         known discrepancy: %s\n", s.known);
    }
    passed += c.passed();
    gate = gate && c.only_known_failures();
  }
  std::printf("%d/%zu criteria pass; %s\n", passed, all.size(),
              gate ? "all failures are documented discrepancies" : "UNEXPECTED FAILURES");
  return gate ? 0 : 1;
}
