// obill: command-line front end for the verification suites and orbit runs.

#include <CLI11.hpp>
#include <cstdlib>
#include <iomanip>
#include <iostream>

#include "obill/report_io.hpp"

namespace {

using namespace obill;

std::uint64_t default_seed() {
  if (const char* s = std::getenv("OBILL_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      std::cerr << "ignoring malformed OBILL_SEED='" << s << "'\n";
    }
  }
  return 20240517;
}

struct Common {
  std::vector<int> kappa;
  int cases = -1;
  std::uint64_t seed = default_seed();
  std::optional<double> tol;
  std::string surface, json, csv;
};

// Re-grade at-most checks against a user tolerance.
void regrade(VerificationReport& rep, double tol) {
  for (auto& r : rep.records)
    if (r.bound == Bound::AtMost && std::isfinite(r.measured)) {
      r.tolerance = tol;
      r.pass = r.measured <= tol;
    }
}

void print_summary(const VerificationReport& rep) {
  std::map<std::string, std::pair<double, int>> agg;  // worst measured, failures
  std::vector<std::string> order;
  for (const auto& r : rep.records) {
    auto [it, fresh] = agg.try_emplace(r.check, r.measured, 0);
    if (fresh) order.push_back(r.check);
    auto& [worst, fails] = it->second;
    if (!fresh) worst = r.bound == Bound::AtMost ? std::max(worst, r.measured) : std::min(worst, r.measured);
    fails += !r.pass;
  }
  std::cout << rep.suite;
  if (rep.kappa) std::cout << " kappa=" << *rep.kappa;
  std::cout << " seed=" << rep.seed << " cases=" << rep.n_cases << ": " << (rep.passed() ? "PASS" : "FAIL") << '\n';
  for (const auto& name : order) {
    const auto& [worst, fails] = agg[name];
    std::cout << "  " << std::left << std::setw(34) << name << std::setprecision(3) << std::scientific << worst
              << std::defaultfloat << (fails ? "  failures=" + std::to_string(fails) : "") << '\n';
  }
}

int finish(std::vector<VerificationReport>& reps, const Common& c) {
  if (c.tol)
    for (auto& r : reps) regrade(r, *c.tol);
  bool ok = true;
  for (const auto& r : reps) {
    print_summary(r);
    ok = ok && r.passed();
  }
  if (!c.json.empty()) write_json(c.json, reps);
  if (!c.csv.empty()) write_csv(c.csv, reps);
  return ok ? 0 : 1;
}

void add_common(CLI::App* app, Common& c, bool with_kappa) {
  if (with_kappa) app->add_option("--kappa", c.kappa, "curvature(s): -1, 0, 1 (default: all supported)");
  app->add_option("--cases", c.cases, "number of random cases");
  app->add_option("--seed", c.seed, "RNG seed (default from OBILL_SEED)");
  app->add_option("--tol", c.tol, "override the tolerance of all at-most checks");
  app->add_option("--json", c.json, "write a JSON report");
  app->add_option("--csv", c.csv, "write a CSV report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outer billiards on spaces of oriented geodesics"};
  app.require_subcommand(1);
  Common c;

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite;
  verify->add_option("suite", suite, "symplectic|omega-cross|poisson|characteristic|bijection|det-df")
      ->required()
      ->check(CLI::IsMember({"symplectic", "omega-cross", "poisson", "characteristic", "bijection", "det-df"}));
  add_common(verify, c, true);

  auto* orbit = app.add_subcommand("orbit", "iterate the billiard map from a chart line");
  std::vector<double> line;
  int steps = 20;
  orbit->add_option("--surface", c.surface, "surface config file")->required()->check(CLI::ExistingFile);
  orbit->add_option("--line", line, "chart point and direction: x y z dx dy dz")->required()->expected(6);
  orbit->add_option("--steps", steps, "number of iterations");
  add_common(orbit, c, false);

  auto* holonomy = app.add_subcommand("holonomy", "period-4 configuration with nonzero holonomy");
  std::vector<double> a_list{0.02, 0.05, 0.1};
  double r_o = 1.0 / std::sqrt(2.0);
  holonomy->add_option("--a", a_list, "values of a in (0, 1/2)");
  holonomy->add_option("--r-o", r_o, "r_o in (1/2, 1)");
  add_common(holonomy, c, false);

  auto* notpar = app.add_subcommand("not-parallel", "three-step chain producing an angle theta");
  std::vector<double> thetas{0.3, 0.6, 1.0};
  std::optional<double> r;
  notpar->add_option("--theta", thetas, "angles in (0, pi/2)");
  notpar->add_option("--r", r, "circle radius (default max(0.8, (1 + sin theta) / 2))");
  add_common(notpar, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    std::vector<VerificationReport> reps;
    if (verify->parsed()) {
      std::vector<int> ks = c.kappa;
      const bool needs_nonflat = suite == "symplectic" || suite == "characteristic";
      if (suite == "poisson") {
        if (!ks.empty() && ks != std::vector<int>{0}) throw UnsupportedError("poisson is a k = 0 suite");
        ks = {0};
      }
      if (ks.empty()) ks = needs_nonflat ? std::vector<int>{1, -1} : std::vector<int>{1, -1, 0};
      for (int ki : ks) {
        const Kappa k = kappa_from_int(ki);
        if (suite == "symplectic") reps.push_back(verify_symplectic(k, c.cases < 0 ? 100 : c.cases, c.seed));
        if (suite == "omega-cross") reps.push_back(verify_omega_cross_failure(k, c.cases < 0 ? 100 : c.cases, c.seed));
        if (suite == "poisson") reps.push_back(verify_poisson(c.cases < 0 ? 1000 : c.cases, c.seed));
        if (suite == "characteristic") reps.push_back(verify_characteristic(k, c.cases < 0 ? 50 : c.cases, c.seed));
        if (suite == "bijection") reps.push_back(verify_bijection(k, c.cases < 0 ? 1000 : c.cases, c.seed));
        if (suite == "det-df") reps.push_back(verify_det_dF(k, c.cases < 0 ? 50 : c.cases, c.seed));
      }
    } else if (orbit->parsed()) {
      const ChartEllipsoid S = load_surface_config(c.surface);
      const OrientedGeodesic l =
          geodesic_from_chart(S.kappa(), Vec3(line[0], line[1], line[2]), Vec3(line[3], line[4], line[5]));
      reps.push_back(run_orbit(S, l, steps, c.tol.value_or(1e-7)));
      const OrbitRecord o = iterate_orbit(S, l, steps, c.tol.value_or(1e-7));
      for (std::size_t i = 0; i < o.steps.size(); ++i) {
        const auto& s = o.steps[i];
        std::cout << "  step " << i + 1 << ": d+=" << s.d_plus << " d-=" << s.d_minus << " gap=" << s.signed_gap
                  << '\n';
      }
      if (o.period) std::cout << "  period " << *o.period << " holonomy " << o.holonomy.value_or(0.0) << '\n';
      if (o.truncated) std::cout << "  stopped: " << *o.truncated << '\n';
      // --tol sets the period tolerance here, not a check tolerance.
      c.tol.reset();
    } else if (holonomy->parsed()) {
      reps.push_back(run_holonomy(a_list, r_o));
    } else if (notpar->parsed()) {
      reps.push_back(run_not_parallel(thetas, r));
    }
    return finish(reps, c);
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
