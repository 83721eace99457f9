#pragma once

// Reproduction runner: a registry of worked examples (disk rotation, torus
// rotation, Reeb flow, Moser stability on the torus), golden-value
// comparisons with provenance tags, invariant suites and JSON reports.

#include "cosym/flux.hpp"
#include "cosym/norms.hpp"

#include <map>
#include <string>

namespace cosym {

using Params = std::map<std::string, std::string>;

// plain-text key=value configuration ('#' starts a comment)
Params parse_config(const std::string& text);
Params load_config(const std::string& path);

double param_double(const Params& p, const std::string& key, double dflt);
int param_int(const Params& p, const std::string& key, int dflt);
bool param_bool(const Params& p, const std::string& key, bool dflt);

struct GoldenValue {
  std::string label;
  double computed = 0.0;
  double golden = 0.0;
  double tol = 0.0;
  std::string provenance;
  bool pass = false;
};

struct RunReport {
  std::string id;
  Params parameters;
  std::vector<GoldenValue> values;
  bool pass = false;
  double seconds = 0.0;  // not serialized (reports stay byte-reproducible)

  std::string to_json() const;
};

std::vector<std::string> example_ids();
RunReport reproduce(const std::string& id, const Params& overrides = {});

struct SuiteReport {
  std::string filter;
  std::vector<RunReport> runs;
  bool pass = false;
  double seconds = 0.0;

  std::string to_json() const;
};

// filter: "golden" (the worked examples), "invariants" (module property
// checks), or "all"
SuiteReport run_suite(const std::string& filter);

// the torus stability problems used by the moser-torus example
StabilityProblem torus_omega_problem(double epsilon);
StabilityProblem torus_eta_problem(double amplitude);

// the worked isotopy families (analytic maps)
IsotopyPtr disk_rotation_isotopy(double rho, double f);
IsotopyPtr torus_rotation_isotopy(double a, double b, double h);

}  // namespace cosym
