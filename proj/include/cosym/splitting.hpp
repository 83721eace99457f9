#pragma once

// Closed-1-form splitting against a chosen linear section of the projection
// Z^1(M) -> H^1(M): harmonic/constant-coefficient S-part plus an exact part
// with a mean-normalized potential. Shared by the classification (exactness
// tests) and the norm/length functionals.

#include "cosym/forms.hpp"

namespace cosym {

struct SectionSpec {
  enum class Method { CoefficientAverage, UserBasis };
  Method method = Method::CoefficientAverage;
  // UserBasis: representative closed forms whose classes span H^1; projection
  // coefficients are matched through homology-loop integrals.
  std::vector<OneForm> basis;

  static SectionSpec coefficient_average() { return SectionSpec{}; }
  static SectionSpec user_basis(std::vector<OneForm> b);
};

struct SplitForm {
  OneForm s_part;
  ScalarField exact_potential;  // U with dU = alpha - s_part, zero grid mean
  Vec s_coefficients;  // coefficient vector of s_part (chart coordinate basis
                       // for CoefficientAverage; user-basis weights otherwise)
  double closedness_residual = 0.0;  // max loop integral of alpha - s_part
  double osc_potential = 0.0;        // max - min of the potential on the grid
};

// Homology loops of the catalog charts: one coordinate circle per periodic
// coordinate, through the grid base point.
std::vector<Loop> coordinate_loops(const ManifoldChart& M);

SplitForm split_closed_form(const ManifoldChart& M, const OneForm& alpha,
                            const GridSpec& g,
                            const SectionSpec& section = SectionSpec{},
                            double tol = 1e-6);

double osc(const ManifoldChart& M, const ScalarField& f, const GridSpec& g);

// Potential of an exact form by line integration from the chart base point
// along coordinate paths; value at p (not mean-normalized).
double path_potential(const ManifoldChart& M, const OneForm& a, const Vec& p,
                      int quad_n = 128);
Vec chart_base_point(const ManifoldChart& M);

}  // namespace cosym
