#include "cosym/structure.hpp"

#include "cosym/splitting.hpp"

#include <cmath>
#include <limits>

namespace cosym {

CosymplecticStructure make_structure(ManifoldChart chart, OneForm eta,
                                     TwoForm omega) {
  if (chart.dim % 2 == 0 || chart.dim < 3)
    throw ChartError("cosymplectic structure needs odd dimension >= 3");
  CosymplecticStructure S;
  S.chart = std::move(chart);
  S.eta = std::move(eta);
  S.omega = std::move(omega);
  S.n = (S.chart.dim - 1) / 2;
  return S;
}

Mat CosymplecticStructure::pairing_matrix(const Vec& p) const {
  Vec e = eta.coeff(p);
  return Mat(omega.coeff(p) + e * e.transpose());
}

KForm CosymplecticStructure::volume_form() const {
  return wedge(as_kform(eta), wedge_power(as_kform(omega), n));
}

Mat assemble_pairing_matrix(const CosymplecticStructure& S, const Vec& p) {
  return S.pairing_matrix(p);
}

namespace {
// Solve A^T x = rhs (coefficients of I(x) are A^T x).
Vec solve_pairing(const CosymplecticStructure& S, const Vec& p,
                  const Vec& rhs) {
  Mat At = S.pairing_matrix(p).transpose();
  Eigen::FullPivLU<Mat> lu(At);
  if (!lu.isInvertible())
    throw DegeneracyError("pairing matrix singular at a grid point");
  return lu.solve(rhs);
}
}  // namespace

ReebSolveReport reeb_field(const CosymplecticStructure& S, const GridSpec& g) {
  ReebSolveReport rep;
  CosymplecticStructure Sc = S;
  rep.xi.value = [Sc](const Vec& p) {
    return solve_pairing(Sc, p, Sc.eta.coeff(p));
  };
  OneForm ixiw = interior_product(rep.xi, S.omega);
  for (const Vec& p : sample_grid(S.chart, g)) {
    rep.residual_eta = std::max(
        rep.residual_eta, std::abs(S.eta.coeff(p).dot(rep.xi.value(p)) - 1.0));
    rep.residual_omega =
        std::max(rep.residual_omega, covector_norm(S.chart, ixiw.coeff(p), p));
  }
  return rep;
}

StructureReport verify_structure(const CosymplecticStructure& S,
                                 const GridSpec& g, double tol) {
  StructureReport rep;
  rep.residual_d_eta = sup_norm(S.chart, exterior_derivative(S.eta), g);
  rep.residual_d_omega =
      sup_norm_3(S.chart, exterior_derivative_3(S.omega), g);
  KForm vol = S.volume_form();
  double min_det = std::numeric_limits<double>::infinity();
  double min_cond = min_det, min_vol = min_det;
  for (const Vec& p : sample_grid(S.chart, g)) {
    Mat A = S.pairing_matrix(p);
    Eigen::JacobiSVD<Mat> svd(A);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    min_det = std::min(min_det, std::abs(A.determinant()));
    min_cond = std::min(min_cond, smax > 0 ? smin / smax : 0.0);
    std::vector<Vec> basis;
    for (int i = 0; i < S.chart.dim; ++i) {
      Vec e = Vec::Zero(S.chart.dim);
      e[i] = 1;
      basis.push_back(e);
    }
    min_vol = std::min(min_vol, std::abs(vol.eval(p, basis)));
  }
  rep.min_abs_det = min_det;
  rep.min_condition = min_cond;
  rep.min_abs_volume = min_vol;
  rep.pass = rep.residual_d_eta < tol && rep.residual_d_omega < tol &&
             rep.min_abs_det > 1e-12 && rep.min_abs_volume > 1e-12;
  return rep;
}

OneForm apply_I(const CosymplecticStructure& S, const VectorField& X) {
  CosymplecticStructure Sc = S;
  OneForm a;
  a.coeff = [Sc, X](const Vec& p) {
    return Vec(Sc.pairing_matrix(p).transpose() * X.value(p));
  };
  return a;
}

VectorField invert_I(const CosymplecticStructure& S, const OneForm& a) {
  CosymplecticStructure Sc = S;
  VectorField X;
  X.value = [Sc, a](const Vec& p) { return solve_pairing(Sc, p, a.coeff(p)); };
  return X;
}

std::pair<VectorField, VectorField> decompose(const CosymplecticStructure& S,
                                              const VectorField& X) {
  OneForm ixw = interior_product(X, S.omega);
  VectorField X_omega = invert_I(S, ixw);
  ScalarField ex = interior_product(X, S.eta);
  CosymplecticStructure Sc = S;
  OneForm ee;
  ee.coeff = [Sc, ex](const Vec& p) {
    return Vec(ex.value(p) * Sc.eta.coeff(p));
  };
  VectorField X_eta = invert_I(S, ee);
  return {X_omega, X_eta};
}

FieldClassification classify_field(const CosymplecticStructure& S,
                                   const VectorField& X, const GridSpec& g,
                                   const std::vector<Loop>& homology_loops,
                                   double tol) {
  FieldClassification c;
  const ManifoldChart& M = S.chart;

  // L_X omega = d(i_X omega) and L_X eta = d(eta(X)) for closed eta, omega
  OneForm ixw = interior_product(X, S.omega);
  ScalarField ex = interior_product(X, S.eta);
  TwoForm Lw = exterior_derivative(ixw);
  OneForm Le = exterior_derivative(ex);
  c.residual_L_omega = sup_norm(M, Lw, g);
  c.residual_L_eta = sup_norm(M, Le, g);

  // mu = xi(eta(X)) (the paper's closed form), validated against L_X eta
  VectorField xi = reeb_field(S, g).xi;
  ScalarField mu = lie_derivative(xi, ex);
  c.mu = mu;
  OneForm mu_eta;
  CosymplecticStructure Sc = S;
  mu_eta.coeff = [Sc, mu](const Vec& p) {
    return Vec(mu.value(p) * Sc.eta.coeff(p));
  };
  c.residual_mu = sup_norm(M, add(Le, mu_eta, 1.0, -1.0), g);

  // eta(X) constancy (Prop 0pro-1 condition)
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec& p : sample_grid(M, g)) {
    double v = ex.value(p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-6 * (1 + std::abs((hi + lo) / 2)))
    c.eta_of_X_constant = (hi + lo) / 2;

  c.cosymplectic = c.residual_L_omega < tol && c.residual_L_eta < tol;
  // convention: mu below the constancy tolerance reclassifies as cosymplectic
  double mu_max = 0;
  for (const Vec& p : sample_grid(M, g))
    mu_max = std::max(mu_max, std::abs(mu.value(p)));
  c.almost_cosymplectic =
      !c.cosymplectic && c.residual_L_omega < tol && c.residual_mu < tol &&
      mu_max >= tol;

  // exactness of I(X) (co-Hamiltonian) and of i_X omega (almost)
  auto exactness = [&](const OneForm& a, double& harmonic, double& loopmax) {
    loopmax = 0;
    for (const Loop& l : homology_loops)
      loopmax = std::max(loopmax, std::abs(line_integral(M, a, l)));
    SplitForm sp = split_closed_form(M, a, g, SectionSpec{}, 1e-4);
    harmonic = sup_norm(M, sp.s_part, g);
  };
  OneForm IX = apply_I(S, X);
  TwoForm dIX = exterior_derivative(IX);
  bool IX_closed = sup_norm(M, dIX, g) < std::max(tol, 1e-5);
  if (IX_closed) {
    exactness(IX, c.harmonic_norm_IX, c.max_loop_integral_IX);
    c.co_hamiltonian =
        c.harmonic_norm_IX < tol * 10 && c.max_loop_integral_IX < tol * 10;
  }
  bool ixw_closed = c.residual_L_omega < std::max(tol, 1e-5);
  if (ixw_closed) {
    exactness(ixw, c.harmonic_norm_iXw, c.max_loop_integral_iXw);
    c.almost_co_hamiltonian =
        c.harmonic_norm_iXw < tol * 10 && c.max_loop_integral_iXw < tol * 10;
  }
  return c;
}

MapClassification classify_map(const CosymplecticStructure& S,
                               const SmoothMap& phi, const GridSpec& g,
                               double tol) {
  MapClassification c;
  const ManifoldChart& M = S.chart;
  TwoForm pw = pullback(phi, S.omega);
  c.residual_omega = sup_norm(M, add(pw, S.omega, 1.0, -1.0), g);

  // candidate conformal log f = ln(phi^* eta (xi))  (Theorem Theo-Al1)
  VectorField xi = reeb_field(S, g).xi;
  OneForm pe = pullback(phi, S.eta);
  SmoothMap phic = phi;
  CosymplecticStructure Sc = S;
  ScalarField f;
  f.value = [pe, xi](const Vec& p) {
    double v = pe.coeff(p).dot(xi.value(p));
    if (v <= 0)
      throw ContractError(
          "classify_map: non-positive conformal factor phi^*(eta)(xi)");
    return std::log(v);
  };
  c.conformal_log = f;

  double res_eta = 0, res_strict = 0, fmax = 0;
  for (const Vec& p : sample_grid(M, g)) {
    Vec pep = pe.coeff(p);
    Vec ep = S.eta.coeff(p);
    double fv = f.value(p);
    fmax = std::max(fmax, std::abs(fv));
    res_eta = std::max(res_eta,
                       covector_norm(M, Vec(pep - std::exp(fv) * ep), p));
    res_strict = std::max(res_strict, covector_norm(M, Vec(pep - ep), p));
  }
  c.residual_eta = res_eta;
  c.residual_eta_strict = res_strict;
  c.f_max_abs = fmax;
  c.almost_cosymplectomorphism = c.residual_omega < tol && c.residual_eta < tol;
  c.cosymplectomorphism = c.almost_cosymplectomorphism && fmax < tol;
  return c;
}

double pushforward_reeb_check(const CosymplecticStructure& S,
                              const SmoothMap& phi, const MapClassification& c,
                              const GridSpec& g) {
  if (!phi.inv)
    throw ContractError("pushforward_reeb_check needs an inverse evaluator");
  VectorField xi = reeb_field(S, g).xi;
  VectorField push = pushforward_field(phi, xi);
  ScalarField f = c.conformal_log;
  double worst = 0;
  for (const Vec& p : sample_grid(S.chart, g)) {
    // predicted field e^{f o phi^{-1}} xi (f == 0 in the strict case)
    Vec predicted = std::exp(f.value(phi.inv(p))) * xi.value(p);
    worst = std::max(worst,
                     vector_norm(S.chart, Vec(push.value(p) - predicted), p));
  }
  return worst;
}

}  // namespace cosym
