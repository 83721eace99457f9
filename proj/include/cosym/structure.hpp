#pragma once

// Cosymplectic structures (eta, omega): the pointwise pairing I_{eta,omega},
// Reeb solves, structure verification, the (omega,eta)-decomposition and the
// classification of vector fields and maps.

#include "cosym/forms.hpp"

#include <optional>

namespace cosym {

struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CosymplecticStructure {
  ManifoldChart chart;
  OneForm eta;
  TwoForm omega;
  int n = 1;  // dim = 2n + 1

  // A = Omega + eta eta^T with rows indexing the Y slot, so the coefficient
  // covector of I(Y) = i_Y omega + eta(Y) eta is A^T * Y.
  Mat pairing_matrix(const Vec& p) const;
  KForm volume_form() const;  // eta ^ omega^n
};

CosymplecticStructure make_structure(ManifoldChart chart, OneForm eta,
                                     TwoForm omega);

Mat assemble_pairing_matrix(const CosymplecticStructure& S, const Vec& p);

struct ReebSolveReport {
  VectorField xi;
  double residual_eta = 0.0;    // max |eta(xi) - 1|
  double residual_omega = 0.0;  // max ||i_xi omega||
};

ReebSolveReport reeb_field(const CosymplecticStructure& S, const GridSpec& g);

struct StructureReport {
  double residual_d_eta = 0.0;
  double residual_d_omega = 0.0;
  double min_abs_det = 0.0;
  double min_condition = 0.0;   // min over grid of 1/cond(A)
  double min_abs_volume = 0.0;  // min |coefficient of eta^omega^n|
  bool pass = false;
};

StructureReport verify_structure(const CosymplecticStructure& S,
                                 const GridSpec& g, double tol = 1e-6);

OneForm apply_I(const CosymplecticStructure& S, const VectorField& X);
VectorField invert_I(const CosymplecticStructure& S, const OneForm& a);

// X = X_omega + X_eta with eta(X_omega) = 0 and i_{X_eta} omega = 0
std::pair<VectorField, VectorField> decompose(const CosymplecticStructure& S,
                                              const VectorField& X);

struct FieldClassification {
  bool cosymplectic = false;
  bool almost_cosymplectic = false;
  bool co_hamiltonian = false;
  bool almost_co_hamiltonian = false;
  ScalarField mu;  // conformal rate, populated in the almost case
  std::optional<double> eta_of_X_constant;  // value when eta(X) is constant
  double residual_L_omega = 0.0;            // sup ||L_X omega||
  double residual_L_eta = 0.0;              // sup ||L_X eta||
  double residual_mu = 0.0;                 // sup ||L_X eta - mu eta||
  double harmonic_norm_IX = 0.0;   // harmonic part of I(X) (exactness test)
  double max_loop_integral_IX = 0.0;
  double harmonic_norm_iXw = 0.0;  // same for i_X omega
  double max_loop_integral_iXw = 0.0;
};

FieldClassification classify_field(const CosymplecticStructure& S,
                                   const VectorField& X, const GridSpec& g,
                                   const std::vector<Loop>& homology_loops,
                                   double tol = 1e-6);

struct MapClassification {
  bool cosymplectomorphism = false;
  bool almost_cosymplectomorphism = false;
  ScalarField conformal_log;  // f with phi^* eta = e^f eta
  double residual_omega = 0.0;     // sup ||phi^* omega - omega||
  double residual_eta = 0.0;       // sup ||phi^* eta - e^f eta||
  double residual_eta_strict = 0.0;  // sup ||phi^* eta - eta||
  double f_max_abs = 0.0;
};

MapClassification classify_map(const CosymplecticStructure& S,
                               const SmoothMap& phi, const GridSpec& g,
                               double tol = 1e-6);

// Lemma "pushforward": phi_*(xi) should equal e^{f o phi^{-1}} xi (f = 0 for
// a strict cosymplectomorphism). Returns the max deviation over the grid.
double pushforward_reeb_check(const CosymplecticStructure& S,
                              const SmoothMap& phi, const MapClassification& c,
                              const GridSpec& g);

}  // namespace cosym
