#pragma once

// Flux homomorphisms: the cohomology class int_0^1 [phi_t^*(I(phi-dot_t))] dt
// computed by pushed-loop quadrature, the homomorphism/kernel checks, the
// Poincare-pairing factorization identity and Reeb-orbit integrals.

#include "cosym/isotopy.hpp"

namespace cosym {

struct HomologyBasis {
  std::vector<Loop> loops;
  static HomologyBasis coordinate(const ManifoldChart& M);
};

struct CohomologyClass {
  Vec coefficients;  // one loop integral per basis loop
  std::vector<std::string> labels;
  // sup over sample times/points of ||d I(phi-dot_t)||; a large value flags a
  // non-closed instantaneous integrand (warning, not an abort)
  double closedness_residual = 0.0;
  bool closedness_warning = false;
};

CohomologyClass flux(const CosymplecticStructure& S, const IsotopyPtr& phi,
                     const HomologyBasis& B, int n_t, int loop_samples = 128);

double flux_additivity_check(const CosymplecticStructure& S,
                             const IsotopyPtr& phi, const IsotopyPtr& psi,
                             const HomologyBasis& B, int n_t);

// Delta(Phi, beta)(x) = int_0^1 beta(phi-dot_t)(phi_t(x)) dt
ScalarField flux_delta(const IsotopyPtr& phi, const OneForm& beta, int n_t);

struct FactorizationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double deviation = 0.0;
};

FactorizationReport factorization_check(const CosymplecticStructure& S,
                                        const IsotopyPtr& phi,
                                        const OneForm& alpha, const GridSpec& g,
                                        int n_t);

struct OrbitIntegralReport {
  std::vector<double> values;           // int over O_x of alpha per seed point
  std::vector<double> eta_integrals;    // int over O_x of eta
  bool proportionality_checked = false;  // only when the flux class vanishes
  double proportionality_residual = 0.0;
};

OrbitIntegralReport reeb_orbit_integrals(const CosymplecticStructure& S,
                                         const IsotopyPtr& phi,
                                         const OneForm& alpha,
                                         const std::vector<Vec>& points,
                                         int n_t, double tol = 1e-6);

struct DecomposedFlux {
  CohomologyClass flux_omega;
  CohomologyClass flux_eta;
  double eta_scalar = 0.0;          // int_0^1 eta(phi-dot_t) o phi_t dt
  double scalar_oscillation = 0.0;  // constancy check across grid points
  int reeb_loop_index = -1;
};

DecomposedFlux decomposed_flux(const CosymplecticStructure& S,
                               const VectorField& X, const HomologyBasis& B,
                               int N);

}  // namespace cosym
