// cosym: command-line front end for the cosymplectic geometry library.
//
// Every subcommand emits a JSON report (stdout or --out) and exits 0 exactly
// when all comparisons in the report pass.

#include "cosym/runner.hpp"

#include "cosym/catalog.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

using cosym::Vec;
using ordered_json = nlohmann::ordered_json;

namespace {

struct GlobalOpts {
  std::string config;
  int grid = 32;  // periodic resolution; boxes get grid|1 nodes
  int steps = 200;
  double tol = 1e-6;
  bool paper_normalization = false;
  std::string out;
};

Vec pt(std::initializer_list<double> v) {
  Vec p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

cosym::GridSpec grid_for(const cosym::ManifoldChart& M, const GlobalOpts& o) {
  return cosym::GridSpec::uniform(M, o.grid, o.grid | 1);
}

cosym::Params merged_params(const GlobalOpts& o, const CLI::App& app) {
  cosym::Params p;
  if (!o.config.empty()) p = cosym::load_config(o.config);
  // command-line flags override the config file
  if (app.count("--grid")) p["grid"] = std::to_string(o.grid);
  if (app.count("--steps")) p["steps"] = std::to_string(o.steps);
  if (app.count("--tol")) p["tol"] = std::to_string(o.tol);
  if (o.paper_normalization) p["paper-normalization"] = "true";
  return p;
}

int emit(const std::string& json_text, const GlobalOpts& o, bool pass) {
  if (o.out.empty()) {
    std::cout << json_text << "\n";
  } else {
    std::ofstream f(o.out);
    if (!f) {
      std::cerr << "error: cannot write " << o.out << "\n";
      return 2;
    }
    f << json_text << "\n";
  }
  return pass ? 0 : 1;
}

int emit(const ordered_json& j, const GlobalOpts& o, bool pass) {
  return emit(j.dump(2), o, pass);
}

// ---- small registries addressed by string ids ----

cosym::VectorField field_by_id(const cosym::CosymplecticStructure& S,
                               const std::string& id) {
  const int d = S.chart.dim;
  if (id == "xi") return cosym::invert_I(S, S.eta);
  if (id == "theta1") {
    Vec v = Vec::Zero(d);
    v[0] = 1.0;
    return cosym::constant_field(v);
  }
  if (id == "mixed") {
    Vec v = Vec::Zero(d);
    v[0] = 1.0;
    v[d - 1] = 0.7;
    return cosym::constant_field(v);
  }
  if (id == "swirl") {
    // co-Hamiltonian field of H = 0.3 sin(x0) cos(x1)
    cosym::OneForm dH;
    dH.coeff = [d](const Vec& q) {
      Vec c = Vec::Zero(d);
      c[0] = 0.3 * std::cos(q[0]) * std::cos(q[1]);
      c[1] = -0.3 * std::sin(q[0]) * std::sin(q[1]);
      return c;
    };
    return cosym::invert_I(S, dH);
  }
  throw cosym::ContractError("unknown field id: " + id);
}

// isotopy ids come with their natural structure
struct NamedIsotopy {
  cosym::CosymplecticStructure S;
  cosym::IsotopyPtr iso;
};

NamedIsotopy isotopy_by_id(const std::string& id, const cosym::Params& p,
                           int steps) {
  using namespace cosym;
  if (id == "torus-rotation") {
    return {catalog::standard_t2s1(),
            torus_rotation_isotopy(param_double(p, "a", 1.0),
                                   param_double(p, "b", 2.0),
                                   param_double(p, "h", 0.0))};
  }
  if (id == "disk-rotation") {
    return {catalog::standard_d2s1(),
            disk_rotation_isotopy(param_double(p, "rho", 1.0),
                                  param_double(p, "f", 1.0))};
  }
  if (id == "reeb") {
    CosymplecticStructure S =
        catalog::by_name(p.count("structure") ? p.at("structure") : "t2s1");
    ReebSolveReport rr = reeb_field(S, GridSpec::uniform(S.chart, 8, 9));
    TimeDependentField X{
        [xi = rr.xi](double, const Vec& q) { return xi.value(q); }, nullptr};
    return {S, integrate_flow(S.chart, X, std::max(16, steps))};
  }
  if (id == "co-hamiltonian") {
    CosymplecticStructure S = catalog::standard_t2s1();
    TimeDependentScalar H{[](double, const Vec& q) {
                            return 0.3 * std::sin(q[0]) * std::cos(q[1]) +
                                   0.2 * std::sin(q[2]);
                          },
                          nullptr};
    GridSpec g = GridSpec::uniform(S.chart, 8, 9);
    return {S, co_hamiltonian_isotopy(S, H, std::max(16, steps), g).iso};
  }
  throw ContractError("unknown isotopy id: " + id);
}

ordered_json base_report(const std::string& command) {
  ordered_json j;
  j["schema_version"] = 1;
  j["command"] = command;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cosym: computable cosymplectic geometry"};
  app.require_subcommand(1);

  GlobalOpts o;
  app.add_option("--config", o.config, "key=value configuration file");
  app.add_option("--grid", o.grid, "periodic grid resolution (boxes: grid|1)");
  app.add_option("--steps", o.steps, "time steps for flows");
  app.add_option("--tol", o.tol, "pass/fail tolerance");
  app.add_flag("--paper-normalization", o.paper_normalization,
               "treat the chart volume as 1 in norms and lengths");
  app.add_option("--out", o.out, "write the JSON report to this path");

  std::string structure = "t2s1", field_id = "xi", isotopy_id = "torus-rotation";
  std::string kind = "co-hofer-like", version = "l1inf", variant = "omega";
  std::string example_id, filter = "all";
  std::vector<std::string> overrides;
  int n_t = 8;
  bool almost = false;
  double epsilon = 0.5, amplitude = 0.1, tmax = 1.0;

  auto* c_verify = app.add_subcommand("verify-structure",
                                      "closedness/nondegeneracy of a structure");
  c_verify->add_option("--structure", structure)->check(CLI::IsMember(
      cosym::catalog::structure_names()));

  auto* c_reeb = app.add_subcommand("reeb", "solve for the Reeb field");
  c_reeb->add_option("--structure", structure);

  auto* c_dec = app.add_subcommand("decompose", "(omega,eta)-decomposition");
  c_dec->add_option("--structure", structure);
  c_dec->add_option("--field", field_id);

  auto* c_cf = app.add_subcommand("classify-field", "field classification");
  c_cf->add_option("--structure", structure);
  c_cf->add_option("--field", field_id);

  auto* c_cm = app.add_subcommand("classify-map",
                                  "classify the time-one map of an isotopy");
  c_cm->add_option("--isotopy", isotopy_id);

  auto* c_flow = app.add_subcommand("flow", "integrate and inspect an isotopy");
  c_flow->add_option("--isotopy", isotopy_id);

  auto* c_moser = app.add_subcommand("moser", "Moser stability on the torus");
  c_moser->add_option("--variant", variant)
      ->check(CLI::IsMember({"omega", "eta"}));
  c_moser->add_option("--epsilon", epsilon);
  c_moser->add_option("--amplitude", amplitude);

  auto* c_lift = app.add_subcommand("lift", "symplectization lift");
  c_lift->add_option("--isotopy", isotopy_id);
  c_lift->add_flag("--almost", almost, "use the conformal (almost) lift");

  auto* c_orbit = app.add_subcommand("orbit", "Reeb-orbit energy profile");
  c_orbit->add_option("--structure", structure);
  c_orbit->add_option("--tmax", tmax);

  auto* c_fix = app.add_subcommand("fixed-points",
                                   "scan the time-one map for fixed points");
  c_fix->add_option("--isotopy", isotopy_id);

  auto* c_flux = app.add_subcommand("flux", "flux class of an isotopy");
  c_flux->add_option("--isotopy", isotopy_id);
  c_flux->add_option("--nt", n_t, "time quadrature intervals");

  auto* c_norm = app.add_subcommand("norm", "length of an isotopy");
  c_norm->add_option("--isotopy", isotopy_id);
  c_norm->add_option("--kind", kind)
      ->check(CLI::IsMember({"co-hofer-like", "co-hofer",
                             "almost-co-hofer-like", "almost-co-hamiltonian"}));
  c_norm->add_option("--version", version)
      ->check(CLI::IsMember({"linf", "l1inf"}));
  c_norm->add_option("--nt", n_t, "time quadrature intervals");

  auto* c_rep = app.add_subcommand("reproduce", "run a registered example");
  c_rep->add_option("id", example_id)->required();
  c_rep->add_option("overrides", overrides, "key=value parameter overrides");

  auto* c_suite = app.add_subcommand("suite", "run a report suite");
  c_suite->add_option("filter", filter)
      ->check(CLI::IsMember({"golden", "invariants", "all"}));

  // allow the global flags to appear after the subcommand name
  for (CLI::App* sc : app.get_subcommands(nullptr)) sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    using namespace cosym;
    const Params params = merged_params(o, app);

    if (c_verify->parsed()) {
      CosymplecticStructure S = catalog::by_name(structure);
      StructureReport r = verify_structure(S, grid_for(S.chart, o), o.tol);
      ordered_json j = base_report("verify-structure");
      j["structure"] = structure;
      j["residual_d_eta"] = r.residual_d_eta;
      j["residual_d_omega"] = r.residual_d_omega;
      j["min_abs_det"] = r.min_abs_det;
      j["min_abs_volume"] = r.min_abs_volume;
      j["pass"] = r.pass;
      return emit(j, o, r.pass);
    }

    if (c_reeb->parsed()) {
      CosymplecticStructure S = catalog::by_name(structure);
      ReebSolveReport r = reeb_field(S, grid_for(S.chart, o));
      const bool pass =
          r.residual_eta <= o.tol && r.residual_omega <= o.tol;
      ordered_json j = base_report("reeb");
      j["structure"] = structure;
      j["residual_eta"] = r.residual_eta;
      j["residual_omega"] = r.residual_omega;
      j["pass"] = pass;
      return emit(j, o, pass);
    }

    if (c_dec->parsed()) {
      CosymplecticStructure S = catalog::by_name(structure);
      VectorField X = field_by_id(S, field_id);
      auto [Xw, Xh] = decompose(S, X);
      double r_eta = 0.0, r_omega = 0.0;
      for (const Vec& q : sample_grid(S.chart, grid_for(S.chart, o))) {
        r_eta = std::max(r_eta, std::abs(S.eta.coeff(q).dot(Xw.value(q))));
        Vec iw = S.omega.coeff(q).transpose() * Xh.value(q);
        r_omega = std::max(r_omega, iw.lpNorm<Eigen::Infinity>());
      }
      const bool pass = r_eta <= o.tol && r_omega <= o.tol;
      ordered_json j = base_report("decompose");
      j["structure"] = structure;
      j["field"] = field_id;
      j["residual_eta_of_X_omega"] = r_eta;
      j["residual_iota_X_eta_omega"] = r_omega;
      j["pass"] = pass;
      return emit(j, o, pass);
    }

    if (c_cf->parsed()) {
      CosymplecticStructure S = catalog::by_name(structure);
      VectorField X = field_by_id(S, field_id);
      FieldClassification c = classify_field(
          S, X, grid_for(S.chart, o), coordinate_loops(S.chart), o.tol);
      ordered_json j = base_report("classify-field");
      j["structure"] = structure;
      j["field"] = field_id;
      j["cosymplectic"] = c.cosymplectic;
      j["almost_cosymplectic"] = c.almost_cosymplectic;
      j["co_hamiltonian"] = c.co_hamiltonian;
      j["almost_co_hamiltonian"] = c.almost_co_hamiltonian;
      j["residual_L_omega"] = c.residual_L_omega;
      j["residual_L_eta"] = c.residual_L_eta;
      j["pass"] = true;
      return emit(j, o, true);
    }

    if (c_cm->parsed() || c_flow->parsed()) {
      NamedIsotopy ni = isotopy_by_id(isotopy_id, params, o.steps);
      MapClassification c = classify_map(ni.S, ni.iso->time_one_map(),
                                         grid_for(ni.S.chart, o), o.tol);
      ordered_json j =
          base_report(c_cm->parsed() ? "classify-map" : "flow");
      j["isotopy"] = isotopy_id;
      j["cosymplectomorphism"] = c.cosymplectomorphism;
      j["almost_cosymplectomorphism"] = c.almost_cosymplectomorphism;
      j["residual_omega"] = c.residual_omega;
      j["residual_eta"] = c.residual_eta;
      j["f_max_abs"] = c.f_max_abs;
      const bool pass = c.cosymplectomorphism || c.almost_cosymplectomorphism;
      j["pass"] = pass;
      return emit(j, o, pass);
    }

    if (c_moser->parsed()) {
      StabilityProblem P = variant == "omega" ? torus_omega_problem(epsilon)
                                              : torus_eta_problem(amplitude);
      GridSpec g = GridSpec::uniform(P.S0.chart, std::min(o.grid, 16),
                                     std::min(o.grid, 16) | 1);
      MoserReport r = moser_solve(P, o.steps, g);
      const double tol = app.count("--tol") ? o.tol : 1e-4;
      const bool pass =
          r.max_residual_omega <= tol && r.max_residual_eta <= tol;
      ordered_json j = base_report("moser");
      j["variant"] = variant;
      j["max_residual_omega"] = r.max_residual_omega;
      j["max_residual_eta"] = r.max_residual_eta;
      j["checkpoints"] = r.checkpoints;
      j["residual_omega"] = r.residual_omega;
      j["residual_eta"] = r.residual_eta;
      j["pass"] = pass;
      return emit(j, o, pass);
    }

    if (c_lift->parsed()) {
      NamedIsotopy ni = isotopy_by_id(isotopy_id, params, o.steps);
      const int N = std::max(16, o.steps);
      LiftedIsotopy L = almost ? lift_almost(ni.S, ni.iso, N)
                               : lift_cosymplectic(ni.S, ni.iso, N);
      GridSpec pg = GridSpec::uniform(L.product_chart, 8, 9);
      const double res =
          lift_symplectic_residual(L, {0.0, 0.5, 1.0}, pg);
      const double tol = app.count("--tol") ? o.tol : 1e-6;
      const bool pass = res <= tol;
      ordered_json j = base_report("lift");
      j["isotopy"] = isotopy_id;
      j["almost"] = almost;
      j["symplectic_residual"] = res;
      j["pass"] = pass;
      return emit(j, o, pass);
    }

    if (c_orbit->parsed()) {
      CosymplecticStructure S = catalog::by_name(structure);
      ScalarField G;
      G.value = [d = S.chart.dim](const Vec& q) { return std::sin(q[d - 1]); };
      OrbitProfile r = orbit_energy_profile(
          S, G, chart_base_point(S.chart), tmax, std::max(16, o.steps));
      const bool pass = r.max_identity_residual <= std::max(o.tol, 1e-6);
      ordered_json j = base_report("orbit");
      j["structure"] = structure;
      j["tmax"] = tmax;
      j["max_identity_residual"] = r.max_identity_residual;
      j["monotone"] = r.monotone;
      j["periodic_orbit_criterion"] = r.periodic_orbit_criterion;
      j["pass"] = pass;
      return emit(j, o, pass);
    }

    if (c_fix->parsed()) {
      NamedIsotopy ni = isotopy_by_id(isotopy_id, params, o.steps);
      ScalarField f = constant_scalar(0.0, ni.S.chart.dim);
      auto cands = fixed_point_scan(ni.S.chart, ni.iso->time_one_map(), f,
                                    grid_for(ni.S.chart, o),
                                    std::max(o.tol, 1e-6));
      ordered_json j = base_report("fixed-points");
      j["isotopy"] = isotopy_id;
      j["count"] = cands.size();
      ordered_json pts = ordered_json::array();
      for (const auto& c : cands) {
        ordered_json e;
        e["x"] = std::vector<double>(c.x.data(), c.x.data() + c.x.size());
        e["displacement"] = c.displacement;
        pts.push_back(e);
      }
      j["candidates"] = pts;
      j["pass"] = true;
      return emit(j, o, true);
    }

    if (c_flux->parsed()) {
      NamedIsotopy ni = isotopy_by_id(isotopy_id, params, o.steps);
      HomologyBasis B = HomologyBasis::coordinate(ni.S.chart);
      CohomologyClass c = flux(ni.S, ni.iso, B, std::max(8, n_t));
      ordered_json j = base_report("flux");
      j["isotopy"] = isotopy_id;
      j["labels"] = c.labels;
      j["coefficients"] = std::vector<double>(
          c.coefficients.data(),
          c.coefficients.data() + c.coefficients.size());
      j["closedness_residual"] = c.closedness_residual;
      j["closedness_warning"] = c.closedness_warning;
      j["pass"] = !c.closedness_warning;
      return emit(j, o, !c.closedness_warning);
    }

    if (c_norm->parsed()) {
      NamedIsotopy ni = isotopy_by_id(isotopy_id, params, o.steps);
      LengthKind k = kind == "co-hofer-like" ? LengthKind::CoHoferLike
                     : kind == "co-hofer"    ? LengthKind::CoHofer
                     : kind == "almost-co-hofer-like"
                         ? LengthKind::AlmostCoHoferLike
                         : LengthKind::AlmostCoHamiltonian;
      LengthVersion v =
          version == "linf" ? LengthVersion::LInf : LengthVersion::L1Inf;
      LengthReport r =
          length(ni.S, ni.iso, k, v, std::max(2, n_t),
                 grid_for(ni.S.chart, o), SectionSpec{}, o.paper_normalization);
      ordered_json j = base_report("norm");
      j["isotopy"] = isotopy_id;
      j["kind"] = kind;
      j["version"] = version;
      j["paper_normalization"] = o.paper_normalization;
      j["value"] = r.value;
      j["times"] = r.times;
      j["harmonic_l1"] = r.harmonic_l1;
      j["osc_term"] = r.osc_term;
      j["reeb_term"] = r.reeb_term;
      j["volume"] = r.volume;
      j["pass"] = true;
      return emit(j, o, true);
    }

    if (c_rep->parsed()) {
      Params p = params;
      for (const std::string& kv : overrides) {
        Params one = parse_config(kv);
        for (auto& [k, v] : one) p[k] = v;
      }
      RunReport r = reproduce(example_id, p);
      return emit(r.to_json(), o, r.pass);
    }

    if (c_suite->parsed()) {
      SuiteReport r = run_suite(filter);
      return emit(r.to_json(), o, r.pass);
    }

    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const cosym::ContractError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
