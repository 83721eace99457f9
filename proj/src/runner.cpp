#include "cosym/runner.hpp"

#include "cosym/catalog.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace cosym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTau = 2.0 * kPi;
using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Vec pt(std::initializer_list<double> v) {
  Vec p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

GoldenValue golden(const std::string& label, double computed, double target,
                   double tol, const std::string& provenance) {
  GoldenValue v{label, computed, target, tol, provenance, false};
  v.pass = std::abs(computed - target) <= tol;
  return v;
}

ordered_json value_json(const GoldenValue& v) {
  ordered_json j;
  j["label"] = v.label;
  j["computed"] = v.computed;
  j["golden"] = v.golden;
  j["tol"] = v.tol;
  j["provenance"] = v.provenance;
  j["pass"] = v.pass;
  return j;
}

ordered_json report_json(const RunReport& r) {
  ordered_json j;
  j["schema_version"] = 1;
  j["id"] = r.id;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  j["parameters"] = params;
  ordered_json vals = ordered_json::array();
  for (const auto& v : r.values) vals.push_back(value_json(v));
  j["values"] = vals;
  j["pass"] = r.pass;
  return j;
}

void finish(RunReport& r, double t0) {
  r.pass = true;
  for (const auto& v : r.values) r.pass = r.pass && v.pass;
  r.seconds = now_seconds() - t0;
}

// ---- examples ----

RunReport run_disk_rotation(const Params& p) {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "disk-rotation";
  rep.parameters = p;
  const double rho = param_double(p, "rho", 1.0);
  const double f = param_double(p, "f", 1.0);
  const int grid = param_int(p, "grid", 16);
  const int n_t = param_int(p, "steps", 4);

  CosymplecticStructure S = catalog::standard_d2s1();
  GridSpec g = GridSpec::uniform(S.chart, grid, grid | 1);
  IsotopyPtr phi = disk_rotation_isotopy(rho, f);

  const double target = rho / 2.0 + std::abs(f) * kPi / 2.0;
  const std::string prov =
      "closed-form rotation family: osc of the radial potential plus the "
      "half disk-volume of |f|";
  rep.values.push_back(golden(
      "length-almost-co-hamiltonian-l1inf",
      length(S, phi, LengthKind::AlmostCoHamiltonian, LengthVersion::L1Inf,
             n_t, g)
          .value,
      target, 1e-6, prov));
  rep.values.push_back(golden(
      "length-almost-co-hamiltonian-linf",
      length(S, phi, LengthKind::AlmostCoHamiltonian, LengthVersion::LInf, n_t,
             g)
          .value,
      target, 1e-6, prov));
  StructureReport sr = verify_structure(S, g);
  rep.values.push_back(golden(
      "structure-residual", std::max(sr.residual_d_eta, sr.residual_d_omega),
      0.0, 1e-8, "analytic d-closedness of the catalog structure"));
  finish(rep, t0);
  return rep;
}

RunReport run_torus_rotation(const Params& p) {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "torus-rotation";
  rep.parameters = p;
  const double a = param_double(p, "a", 1.0);
  const double b = param_double(p, "b", 2.0);
  const double h = param_double(p, "h", 1.0);
  const int grid = param_int(p, "grid", 8);
  const int n_t = param_int(p, "steps", 4);
  const bool paper = param_bool(p, "paper-normalization", true);

  CosymplecticStructure S = catalog::standard_t2s1();
  GridSpec g = GridSpec::uniform(S.chart, grid, grid | 1);
  IsotopyPtr phi = torus_rotation_isotopy(a, b, h);

  const double target =
      std::abs(a) + std::abs(b) +
      std::abs(h) * kPi * kPi * kTau * kTau;  // |a|+|b| + 4 pi^4 |h|
  const std::string prov =
      "closed-form rotation family: coefficient l1 harmonic term plus the "
      "unit-volume quadrature of |h s|";
  rep.values.push_back(
      golden("length-almost-co-hofer-like-linf",
             length(S, phi, LengthKind::AlmostCoHoferLike, LengthVersion::LInf,
                    n_t, g, SectionSpec{}, paper)
                 .value,
             target, 1e-6, prov));
  rep.values.push_back(
      golden("length-almost-co-hofer-like-l1inf",
             length(S, phi, LengthKind::AlmostCoHoferLike,
                    LengthVersion::L1Inf, n_t, g, SectionSpec{}, paper)
                 .value,
             target, 1e-6, prov));

  // flux class of the rotation part (a dtheta2 - b dtheta1 against the loops)
  HomologyBasis B = HomologyBasis::coordinate(S.chart);
  CohomologyClass c = flux(S, torus_rotation_isotopy(a, b, 0.0), B, 16);
  const std::string fprov =
      "loop integrals of the constant rotation generator against the "
      "coordinate circles";
  rep.values.push_back(
      golden("flux-theta1-loop", c.coefficients[0], -kTau * b, 1e-6, fprov));
  rep.values.push_back(
      golden("flux-theta2-loop", c.coefficients[1], kTau * a, 1e-6, fprov));
  rep.values.push_back(
      golden("flux-s-loop", c.coefficients[2], 0.0, 1e-6, fprov));
  finish(rep, t0);
  return rep;
}

RunReport run_reeb_flow(const Params& p) {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "reeb-flow";
  rep.parameters = p;
  const int grid = param_int(p, "grid", 8);
  const int n_t = param_int(p, "steps", 32);

  CosymplecticStructure S = catalog::standard_t2s1();
  GridSpec g = GridSpec::uniform(S.chart, grid, grid | 1);
  ReebSolveReport rr = reeb_field(S, g);
  rep.values.push_back(golden(
      "reeb-residual", std::max(rr.residual_eta, rr.residual_omega), 0.0,
      1e-10, "pointwise linear solve of the pairing system"));

  TimeDependentField X{
      [rr](double, const Vec& q) { return rr.xi.value(q); }, nullptr};
  IsotopyPtr phi = integrate_flow(S.chart, X, std::max(16, n_t));
  HomologyBasis B = HomologyBasis::coordinate(S.chart);
  CohomologyClass c = flux(S, phi, B, std::max(16, n_t));
  const std::string prov =
      "time-one Reeb flow represents the class of eta: 2 pi on the s circle";
  rep.values.push_back(
      golden("flux-s-loop", c.coefficients[2], kTau, 1e-8, prov));
  rep.values.push_back(
      golden("flux-theta1-loop", c.coefficients[0], 0.0, 1e-8, prov));
  rep.values.push_back(
      golden("flux-theta2-loop", c.coefficients[1], 0.0, 1e-8, prov));
  finish(rep, t0);
  return rep;
}

RunReport run_moser_torus(const Params& p) {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "moser-torus";
  rep.parameters = p;
  const double eps = param_double(p, "epsilon", 0.5);
  const double amp = param_double(p, "amplitude", 0.1);
  const int grid = param_int(p, "grid", 12);
  const int steps = param_int(p, "steps", 200);

  GridSpec g =
      GridSpec::uniform(catalog::standard_t2s1().chart, grid, grid | 1);
  MoserReport mo = moser_solve(torus_omega_problem(eps), steps, g);
  rep.values.push_back(golden("omega-variant-omega-residual",
                              mo.max_residual_omega, 0.0, 1e-4,
                              "pullback residual of the Moser sweep"));
  rep.values.push_back(golden("omega-variant-eta-residual",
                              mo.max_residual_eta, 0.0, 1e-5,
                              "eta is untouched by the omega-variant field"));
  MoserReport me = moser_solve(torus_eta_problem(amp), steps, g);
  rep.values.push_back(golden("eta-variant-eta-residual", me.max_residual_eta,
                              0.0, 1e-4,
                              "pullback residual of the Moser sweep"));
  rep.values.push_back(golden(
      "eta-variant-omega-residual", me.max_residual_omega, 0.0, 1e-5,
      "the eta-variant field is a Reeb multiple and preserves omega"));
  finish(rep, t0);
  return rep;
}

// ---- invariant checks ----

RunReport inv_structure() {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "inv-structure";
  double worst_residual = 0.0;
  bool all_pass = true;
  for (const std::string& name : catalog::structure_names()) {
    CosymplecticStructure S = catalog::by_name(name);
    GridSpec g = GridSpec::uniform(S.chart, 8, 9);
    StructureReport r = verify_structure(S, g);
    worst_residual = std::max(
        worst_residual, std::max(r.residual_d_eta, r.residual_d_omega));
    all_pass = all_pass && r.pass;
  }
  rep.values.push_back(golden("max-d-residual", worst_residual, 0.0, 1e-8,
                              "closedness of every catalog structure"));
  rep.values.push_back(golden("all-structures-pass", all_pass ? 1.0 : 0.0, 1.0,
                              0.0, "verify_structure verdicts"));
  finish(rep, t0);
  return rep;
}

RunReport inv_splitting() {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "inv-splitting-idempotence";
  ManifoldChart M = catalog::t2s1();
  GridSpec g = GridSpec::uniform(M, 12, 13);
  OneForm alpha;
  alpha.coeff = [](const Vec& q) {
    return pt({3.0, -std::sin(q[1]), 0.0});
  };
  SplitForm s1 = split_closed_form(M, alpha, g);
  SplitForm s2 = split_closed_form(M, s1.s_part, g);
  const double dev = std::max(
      (s2.s_coefficients - s1.s_coefficients).lpNorm<Eigen::Infinity>(),
      s2.osc_potential);
  rep.values.push_back(golden("resplit-deviation", dev, 0.0, 1e-10,
                              "splitting the S-part returns itself"));
  finish(rep, t0);
  return rep;
}

RunReport inv_decomposition() {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "inv-decomposition";
  CosymplecticStructure S = catalog::standard_t2s1();
  GridSpec g = GridSpec::uniform(S.chart, 6, 7);
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
    VectorField X;
    X.value = [a, b, c, d](const Vec& q) {
      return pt({a + d * std::sin(q[1]), b - d * std::cos(q[0]),
                 c + d * std::sin(q[0])});
    };
    auto [Xw, Xh] = decompose(S, X);
    for (const Vec& q : sample_grid(S.chart, g)) {
      worst = std::max(worst, std::abs(S.eta.coeff(q).dot(Xw.value(q))));
      Vec iw = S.omega.coeff(q).transpose() * Xh.value(q);
      worst = std::max(worst, iw.lpNorm<Eigen::Infinity>());
    }
  }
  rep.values.push_back(golden("max-decomposition-residual", worst, 0.0, 1e-8,
                              "eta(X_omega) = 0 and i_{X_eta} omega = 0"));
  finish(rep, t0);
  return rep;
}

RunReport inv_flux() {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "inv-flux";
  CosymplecticStructure S = catalog::standard_t2s1();
  HomologyBasis B = HomologyBasis::coordinate(S.chart);
  IsotopyPtr r1 = torus_rotation_isotopy(0.3, -0.2, 0.0);
  IsotopyPtr r2 = torus_rotation_isotopy(0.5, 0.1, 0.0);
  rep.values.push_back(golden("additivity-deviation",
                              flux_additivity_check(S, r1, r2, B, 16), 0.0,
                              1e-8, "flux is a homomorphism"));
  TimeDependentScalar H{[](double, const Vec& q) {
                          return 0.3 * std::sin(q[0]) * std::cos(q[1]);
                        },
                        nullptr};
  GridSpec g = GridSpec::uniform(S.chart, 6, 7);
  IsotopyPtr ham = co_hamiltonian_isotopy(S, H, 32, g).iso;
  rep.values.push_back(
      golden("kernel-sup",
             flux(S, ham, B, 32).coefficients.lpNorm<Eigen::Infinity>(), 0.0,
             1e-6, "co-Hamiltonian isotopies lie in the flux kernel"));
  finish(rep, t0);
  return rep;
}

RunReport inv_lengths() {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "inv-lengths";
  CosymplecticStructure S = catalog::standard_t2s1();
  GridSpec g = GridSpec::uniform(S.chart, 8, 9);
  TimeDependentScalar H{
      [](double, const Vec& q) { return 0.3 * std::sin(q[0]); }, nullptr};
  IsotopyPtr phi = co_hamiltonian_isotopy(S, H, 32, g).iso;
  const double lf =
      length(S, phi, LengthKind::CoHofer, LengthVersion::LInf, 8, g).value;
  const double lb = length(S, invert_isotopy(phi), LengthKind::CoHofer,
                           LengthVersion::LInf, 8, g)
                        .value;
  rep.values.push_back(golden("co-hofer-symmetry", lf - lb, 0.0, 1e-6,
                              "co-Hofer lengths are symmetric"));
  IsotopyPtr rep_iso = reparametrize_isotopy(
      torus_rotation_isotopy(1.0, 0.0, 0.0), [](double s) { return s * s; });
  const double l1 = length(S, rep_iso, LengthKind::CoHoferLike,
                           LengthVersion::L1Inf, 8, g)
                        .value;
  const double li =
      length(S, rep_iso, LengthKind::CoHoferLike, LengthVersion::LInf, 8, g)
          .value;
  rep.values.push_back(golden("version-order", std::max(0.0, l1 - li), 0.0,
                              1e-12, "time average never exceeds the max"));
  finish(rep, t0);
  return rep;
}

RunReport inv_comparison() {
  const double t0 = now_seconds();
  RunReport rep;
  rep.id = "inv-comparison";
  ManifoldChart M = catalog::t2s1();
  GridSpec g = GridSpec::uniform(M, 8, 9);
  OneForm a;
  a.coeff = [](const Vec& q) { return pt({0.0, std::sin(q[0]), 0.4}); };
  ProjectionCheckReport pr = sup_norm_projection_check(M, a, g);
  rep.values.push_back(
      golden("projection-excess", std::max(0.0, pr.product_sup - pr.base_sup),
             0.0, 1e-9, "|p* alpha|_0 <= |alpha|_0"));

  CosymplecticStructure S = catalog::standard_t2s1();
  std::vector<VectorField> samples;
  for (int k = 0; k < 10; ++k) {
    const double c = 0.2 + 0.1 * k;
    if (k % 2 == 0) {
      samples.push_back(constant_field(pt({c, -c, 0.5 * c})));
    } else {
      samples.push_back(invert_I(S, [&] {
        OneForm d;
        d.coeff = [c](const Vec& q) {
          return pt({c * std::cos(q[0]), 0.0, 0.0});
        };
        return d;
      }()));
    }
  }
  SectionSpec user = SectionSpec::user_basis({constant_one_form(pt({2, 0, 0})),
                                              constant_one_form(pt({0, 1, 1})),
                                              constant_one_form(pt({0, 0, 3}))});
  EquivalenceReport er = section_equivalence_test(
      S, SectionSpec::coefficient_average(), user, samples, g);
  rep.values.push_back(golden("section-ratio-spread",
                              er.max_ratio / er.min_ratio, 1.0, 9.0,
                              "section norms are equivalent"));
  finish(rep, t0);
  return rep;
}

}  // namespace

Params parse_config(const std::string& text) {
  Params out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractError("config: expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ContractError("config: empty key");
    out[key] = val;
  }
  return out;
}

Params load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

double param_double(const Params& p, const std::string& key, double dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  return std::stod(it->second);
}

int param_int(const Params& p, const std::string& key, int dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  return std::stoi(it->second);
}

bool param_bool(const Params& p, const std::string& key, bool dflt) {
  auto it = p.find(key);
  if (it == p.end()) return dflt;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ContractError("config: bad boolean '" + v + "' for " + key);
}

std::string RunReport::to_json() const { return report_json(*this).dump(2); }

std::string SuiteReport::to_json() const {
  ordered_json j;
  j["schema_version"] = 1;
  j["filter"] = filter;
  ordered_json runs_j = ordered_json::array();
  for (const auto& r : runs) runs_j.push_back(report_json(r));
  j["runs"] = runs_j;
  j["pass"] = pass;
  return j.dump(2);
}

std::vector<std::string> example_ids() {
  return {"disk-rotation", "torus-rotation", "reeb-flow", "moser-torus"};
}

RunReport reproduce(const std::string& id, const Params& overrides) {
  if (id == "disk-rotation") return run_disk_rotation(overrides);
  if (id == "torus-rotation") return run_torus_rotation(overrides);
  if (id == "reeb-flow") return run_reeb_flow(overrides);
  if (id == "moser-torus") return run_moser_torus(overrides);
  throw ContractError("reproduce: unknown example id '" + id + "'");
}

SuiteReport run_suite(const std::string& filter) {
  if (filter != "golden" && filter != "invariants" && filter != "all")
    throw ContractError("run_suite: unknown filter '" + filter + "'");
  const double t0 = now_seconds();
  SuiteReport rep;
  rep.filter = filter;
  if (filter == "golden" || filter == "all") {
    for (const std::string& id : example_ids())
      rep.runs.push_back(reproduce(id));
  }
  if (filter == "invariants" || filter == "all") {
    rep.runs.push_back(inv_structure());
    rep.runs.push_back(inv_splitting());
    rep.runs.push_back(inv_decomposition());
    rep.runs.push_back(inv_flux());
    rep.runs.push_back(inv_lengths());
    rep.runs.push_back(inv_comparison());
  }
  rep.pass = true;
  for (const auto& r : rep.runs) rep.pass = rep.pass && r.pass;
  rep.seconds = now_seconds() - t0;
  return rep;
}

StabilityProblem torus_omega_problem(double epsilon) {
  StabilityProblem P;
  P.variant = StabilityProblem::Variant::Omega;
  P.S0 = catalog::standard_t2s1();
  P.eta_t = [](double) {
    OneForm e = constant_one_form(pt({0, 0, 1}));
    e.dcoeff = [](const Vec& q) -> Mat { return Mat::Zero(q.size(), q.size()); };
    return e;
  };
  P.omega_t = [epsilon](double t) {
    TwoForm w;
    w.coeff = [epsilon, t](const Vec& q) -> Mat {
      Mat W = Mat::Zero(3, 3);
      W(0, 1) = 1.0 + t * epsilon * std::cos(q[0]);
      W(1, 0) = -W(0, 1);
      return W;
    };
    w.dcoeff = [epsilon, t](const Vec& q) -> std::vector<Mat> {
      std::vector<Mat> D(3, Mat::Zero(3, 3));
      D[0](0, 1) = -t * epsilon * std::sin(q[0]);
      D[0](1, 0) = -D[0](0, 1);
      return D;
    };
    return w;
  };
  P.alpha_t = [epsilon](double) {
    OneForm a;
    a.coeff = [epsilon](const Vec& q) {
      return pt({0.0, epsilon * std::sin(q[0]), 0.0});
    };
    a.dcoeff = [epsilon](const Vec& q) -> Mat {
      Mat D = Mat::Zero(3, 3);
      D(1, 0) = epsilon * std::cos(q[0]);
      return D;
    };
    return a;
  };
  return P;
}

StabilityProblem torus_eta_problem(double amplitude) {
  StabilityProblem P;
  P.variant = StabilityProblem::Variant::Eta;
  P.S0 = catalog::standard_t2s1();
  P.eta_t = [amplitude](double t) {
    OneForm e;
    e.coeff = [amplitude, t](const Vec& q) {
      return pt({0.0, 0.0, 1.0 + t * amplitude * std::cos(q[2])});
    };
    e.dcoeff = [amplitude, t](const Vec& q) -> Mat {
      Mat D = Mat::Zero(3, 3);
      D(2, 2) = -t * amplitude * std::sin(q[2]);
      return D;
    };
    return e;
  };
  P.omega_t = [](double) {
    TwoForm w;
    w.coeff = [](const Vec&) -> Mat {
      Mat W = Mat::Zero(3, 3);
      W(0, 1) = 1.0;
      W(1, 0) = -1.0;
      return W;
    };
    w.dcoeff = [](const Vec&) { return std::vector<Mat>(3, Mat::Zero(3, 3)); };
    return w;
  };
  P.f_t = [amplitude](double) {
    ScalarField f;
    f.value = [amplitude](const Vec& q) {
      return amplitude * std::sin(q[2]);
    };
    f.grad = [amplitude](const Vec& q) {
      return pt({0.0, 0.0, amplitude * std::cos(q[2])});
    };
    return f;
  };
  return P;
}

IsotopyPtr disk_rotation_isotopy(double rho, double f) {
  auto fwd = [rho, f](double t, const Vec& x) -> Vec {
    Vec y = x;
    y[1] += t * rho;
    y[2] *= std::exp(t * f);
    return y;
  };
  auto inv = [rho, f](double t, const Vec& y) -> Vec {
    Vec x = y;
    x[1] -= t * rho;
    x[2] *= std::exp(-t * f);
    return x;
  };
  auto dot = [rho, f](double, const Vec& y) -> Vec {
    return pt({0.0, rho, f * y[2]});
  };
  return std::make_shared<MapIsotopy>(
      catalog::d2s1(), fwd, inv, dot, nullptr,
      [f](double t, const Vec&) { return t * f; });
}

IsotopyPtr torus_rotation_isotopy(double a, double b, double h) {
  auto fwd = [a, b, h](double t, const Vec& x) -> Vec {
    Vec y = x;
    y[0] += t * a;
    y[1] += t * b;
    y[2] *= std::exp(t * h);
    return y;
  };
  auto inv = [a, b, h](double t, const Vec& y) -> Vec {
    Vec x = y;
    x[0] -= t * a;
    x[1] -= t * b;
    x[2] *= std::exp(-t * h);
    return x;
  };
  auto dot = [a, b, h](double, const Vec& y) -> Vec {
    return pt({a, b, h * y[2]});
  };
  return std::make_shared<MapIsotopy>(
      catalog::t2s1(), fwd, inv, dot, nullptr,
      [h](double t, const Vec&) { return t * h; });
}

}  // namespace cosym
