#pragma once
// JSON and CSV serialization of verification reports.

#include <fstream>
#include <json.hpp>

#include "obill/verify.hpp"

namespace obill {

inline const char* to_string(Bound b) { return b == Bound::AtMost ? "at_most" : "at_least"; }

// NaN and infinities are not valid JSON numbers; they become null.
inline nlohmann::json json_number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const CheckRecord& r) {
  nlohmann::json in = nlohmann::json::object();
  for (const auto& [k, v] : r.inputs) in[k] = json_number(v);
  return {{"case", r.case_index}, {"check", r.check},           {"measured", json_number(r.measured)},
          {"tolerance", r.tolerance}, {"bound", to_string(r.bound)}, {"pass", r.pass},
          {"inputs", in},             {"note", r.note}};
}

inline nlohmann::json to_json(const VerificationReport& rep) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : rep.records) records.push_back(to_json(r));
  return {{"suite", rep.suite},
          {"kappa", rep.kappa ? nlohmann::json(*rep.kappa) : nlohmann::json(nullptr)},
          {"seed", rep.seed},
          {"passed", rep.passed()},
          {"max_deviation", rep.max_deviation()},
          {"n_cases", rep.n_cases},
          {"records", records}};
}

inline nlohmann::json to_json(const std::vector<VerificationReport>& reps) {
  bool ok = true;
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& r : reps) {
    suites.push_back(to_json(r));
    ok = ok && r.passed();
  }
  return {{"passed", ok}, {"suites", suites}};
}

inline void write_json(const std::string& path, const std::vector<VerificationReport>& reps) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << to_json(reps).dump(2) << '\n';
}

/// One row per record; inputs are packed as key=value pairs separated by ';'.
inline void write_csv(std::ostream& os, const std::vector<VerificationReport>& reps) {
  os << "suite,kappa,seed,case,check,measured,tolerance,bound,pass,inputs\n";
  os.precision(17);
  for (const auto& rep : reps)
    for (const auto& r : rep.records) {
      os << rep.suite << ',' << (rep.kappa ? std::to_string(*rep.kappa) : "") << ',' << rep.seed << ','
         << r.case_index << ',' << r.check << ',' << r.measured << ',' << r.tolerance << ',' << to_string(r.bound)
         << ',' << (r.pass ? 1 : 0) << ',';
      bool first = true;
      for (const auto& [k, v] : r.inputs) {
        os << (first ? "" : ";") << k << '=' << v;
        first = false;
      }
      os << '\n';
    }
}

inline void write_csv(const std::string& path, const std::vector<VerificationReport>& reps) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_csv(f, reps);
}

}  // namespace obill
