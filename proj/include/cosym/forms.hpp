#pragma once

// Exterior calculus on chart coefficients: scalar fields, 1-/2-forms, vector
// fields and smooth maps as evaluator bundles, with d, wedge, interior
// product, Lie derivative, pullback/pushforward, brackets, sup norms and
// quadrature. Analytic derivative evaluators are used when present; central
// finite differences (relative step 1e-5) are the universal fallback.

#include "cosym/manifold.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cosym {

struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;  // optional analytic gradient
};

struct OneForm {
  std::function<Vec(const Vec&)> coeff;
  // optional analytic derivative: dcoeff(p)(i,j) = d a_i / d x_j
  std::function<Mat(const Vec&)> dcoeff;
};

struct TwoForm {
  std::function<Mat(const Vec&)> coeff;  // antisymmetric matrix w(i,j) = w(e_i,e_j)
  // optional analytic derivative: dcoeff(p)[k](i,j) = d w_ij / d x_k
  std::function<std::vector<Mat>(const Vec&)> dcoeff;
};

struct VectorField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jac;  // optional: jac(p)(i,j) = d X_i / d x_j
};

struct SmoothMap {
  std::function<Vec(const Vec&)> fwd;
  std::function<Vec(const Vec&)> inv;  // optional
  std::function<Mat(const Vec&)> jac;  // optional analytic Jacobian of fwd
};

// Degree-k form as a pointwise antisymmetric multilinear evaluator.
struct KForm {
  int degree = 0;
  std::function<double(const Vec&, const std::vector<Vec>&)> eval;
};

// ---- finite-difference helpers (relative step h = 1e-5 * (1 + |x_i|)) ----
double fd_step(double x);
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& p);
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& p);

Vec gradient(const ScalarField& f, const Vec& p);
Mat one_form_jacobian(const OneForm& a, const Vec& p);
Mat map_jacobian(const SmoothMap& phi, const Vec& p);
Mat field_jacobian(const VectorField& X, const Vec& p);

// ---- constructors ----
OneForm constant_one_form(const Vec& coeffs);
TwoForm constant_two_form(const Mat& coeffs);
VectorField constant_field(const Vec& v);
ScalarField constant_scalar(double c, int dim);
SmoothMap identity_map();

OneForm add(const OneForm& a, const OneForm& b, double sa = 1, double sb = 1);
TwoForm add(const TwoForm& a, const TwoForm& b, double sa = 1, double sb = 1);
VectorField add(const VectorField& X, const VectorField& Y, double sx = 1,
                double sy = 1);

KForm as_kform(const OneForm& a);
KForm as_kform(const TwoForm& w);

// ---- exterior calculus ----
OneForm exterior_derivative(const ScalarField& f);
TwoForm exterior_derivative(const OneForm& a);
KForm exterior_derivative_3(const TwoForm& w);  // degree-3 result (dw residualcheck)

KForm wedge(const KForm& a, const KForm& b);
KForm wedge_power(const KForm& a, int n);  // a ^ ... ^ a

ScalarField interior_product(const VectorField& X, const OneForm& a);
OneForm interior_product(const VectorField& X, const TwoForm& w);
TwoForm interior_product_3(const VectorField& X, const KForm& c3);

// Cartan's formula L_X = i_X d + d i_X
ScalarField lie_derivative(const VectorField& X, const ScalarField& f);
OneForm lie_derivative(const VectorField& X, const OneForm& a);
TwoForm lie_derivative(const VectorField& X, const TwoForm& w);

ScalarField pullback(const SmoothMap& phi, const ScalarField& f);
OneForm pullback(const SmoothMap& phi, const OneForm& a);
TwoForm pullback(const SmoothMap& phi, const TwoForm& w);

VectorField pushforward_field(const SmoothMap& phi, const VectorField& X);

VectorField lie_bracket(const VectorField& X, const VectorField& Y);

// ---- norms and quadrature ----
// pointwise dual norm of a covector / norm of a vector under the flat metric
double covector_norm(const ManifoldChart& M, const Vec& a, const Vec& p);
double vector_norm(const ManifoldChart& M, const Vec& v, const Vec& p);

double sup_norm(const ManifoldChart& M, const OneForm& a, const GridSpec& g);
double sup_norm(const ManifoldChart& M, const VectorField& X, const GridSpec& g);
double sup_norm(const ManifoldChart& M, const ScalarField& f, const GridSpec& g);
// max over the grid of the coefficient of a top form against the chart basis
double sup_norm_top(const ManifoldChart& M, const KForm& top, const GridSpec& g);
double sup_norm(const ManifoldChart& M, const TwoForm& w, const GridSpec& g);
// max over grid triples e_i,e_j,e_k of a degree-3 form (d-omega residuals)
double sup_norm_3(const ManifoldChart& M, const KForm& c3, const GridSpec& g);

double integrate_top_form(const ManifoldChart& M, const KForm& top,
                          const GridSpec& g);
// integral of (f * top) — pairing a scalar weight against a volume form
double integrate_scalar_against_top_form(const ManifoldChart& M,
                                         const std::function<double(const Vec&)>& f,
                                         const KForm& top, const GridSpec& g);

// Closed parametrized curve on [0,1].
struct Loop {
  std::function<Vec(double)> gamma;
  std::function<Vec(double)> dgamma;  // optional analytic tangent
  std::string label;
};

// Composite trapezoid over the parametrization; throws ContractError when the
// endpoints do not close up on the chart.
double line_integral(const ManifoldChart& M, const OneForm& a, const Loop& loop,
                     int n = 256);

}  // namespace cosym
