#include "cosym/flux.hpp"

#include "cosym/splitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cosym {

namespace {

Vec wrap_periodic(const ManifoldChart& M, Vec p) {
  for (int i = 0; i < M.dim; ++i) {
    const auto& c = M.coords[i];
    if (c.periodic()) p[i] = std::remainder(p[i], c.period);
  }
  return p;
}

// componentwise difference a - b with periodic coordinates taken on the circle
Vec wrapped_diff(const ManifoldChart& M, const Vec& a, const Vec& b) {
  Vec d = a - b;
  for (int i = 0; i < M.dim; ++i) {
    const auto& c = M.coords[i];
    if (c.periodic()) d[i] = std::remainder(d[i], c.period);
  }
  return d;
}

// one RK4 step of all sample points under the Eulerian velocity of iso;
// k1 holds the already-evaluated velocities at time t
void rk4_step_samples(const ManifoldChart& M, const Isotopy& iso, double t,
                      double h, std::vector<Vec>& ys,
                      const std::vector<Vec>& k1) {
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const Vec& y = ys[i];
    Vec k2 = iso.dot(t + 0.5 * h, wrap_periodic(M, y + 0.5 * h * k1[i]));
    Vec k3 = iso.dot(t + 0.5 * h, wrap_periodic(M, y + 0.5 * h * k2));
    Vec k4 = iso.dot(t + h, wrap_periodic(M, y + h * k3));
    ys[i] = wrap_periodic(M, y + (h / 6.0) * (k1[i] + 2 * k2 + 2 * k3 + k4));
  }
}

// loop integral of I(phi-dot_t) over the pushed loop: tangents by 4th-order
// central differences of the (periodic-in-u) sample chain
double slice_integral(const CosymplecticStructure& S,
                      const std::vector<Vec>& ys,
                      const std::vector<Vec>& vel) {
  const auto& M = S.chart;
  const int m = static_cast<int>(ys.size());
  const double du = 1.0 / m;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vec& y = ys[i];
    Vec a = assemble_pairing_matrix(S, y).transpose() * vel[i];
    Vec d1 = wrapped_diff(M, ys[(i + 1) % m], ys[(i + m - 1) % m]);
    Vec d2 = wrapped_diff(M, ys[(i + 2) % m], ys[(i + m - 2) % m]);
    Vec tangent = (8.0 * d1 - d2) / (12.0 * du);
    acc += a.dot(tangent) * du;
  }
  return acc;
}

double closedness_of_integrand(const CosymplecticStructure& S,
                               const IsotopyPtr& phi) {
  const auto& M = S.chart;
  GridSpec g = GridSpec::uniform(M, 4, 5);
  double worst = 0.0;
  for (double t : {0.0, 0.5, 1.0}) {
    OneForm a;
    a.coeff = [&S, phi, t](const Vec& y) -> Vec {
      return assemble_pairing_matrix(S, y).transpose() * phi->dot(t, y);
    };
    worst = std::max(worst, sup_norm(M, exterior_derivative(a), g));
  }
  return worst;
}

long factorial(int n) {
  long f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// indices of the periodic coordinates, in the order coordinate_loops emits
std::vector<int> periodic_coord_indices(const ManifoldChart& M) {
  std::vector<int> idx;
  for (int i = 0; i < M.dim; ++i)
    if (M.coords[i].kind == CoordInfo::Kind::Periodic) idx.push_back(i);
  return idx;
}

// constant-coefficient harmonic representative with the given loop integrals
OneForm harmonic_representative(const ManifoldChart& M,
                                const HomologyBasis& B, const Vec& coeffs) {
  std::vector<int> idx = periodic_coord_indices(M);
  if (static_cast<int>(idx.size()) != coeffs.size() ||
      B.loops.size() != idx.size()) {
    throw ContractError(
        "harmonic representative needs the coordinate homology basis");
  }
  Vec s = Vec::Zero(M.dim);
  for (std::size_t k = 0; k < idx.size(); ++k)
    s[idx[k]] = coeffs[static_cast<int>(k)] / M.coords[idx[k]].period;
  return constant_one_form(s);
}

}  // namespace

HomologyBasis HomologyBasis::coordinate(const ManifoldChart& M) {
  return HomologyBasis{coordinate_loops(M)};
}

CohomologyClass flux(const CosymplecticStructure& S, const IsotopyPtr& phi,
                     const HomologyBasis& B, int n_t, int loop_samples) {
  if (n_t < 1 || loop_samples < 8)
    throw ContractError("flux: need n_t >= 1 and loop_samples >= 8");
  const auto& M = S.chart;
  const int m = loop_samples;
  const double dt = 1.0 / n_t;

  CohomologyClass cls;
  cls.coefficients = Vec::Zero(static_cast<int>(B.loops.size()));
  for (std::size_t l = 0; l < B.loops.size(); ++l) {
    cls.labels.push_back(B.loops[l].label);
    std::vector<Vec> ys(m);
    for (int i = 0; i < m; ++i)
      ys[i] = wrap_periodic(M, B.loops[l].gamma(static_cast<double>(i) / m));

    double coeff = 0.0;
    std::vector<Vec> vel(m);
    for (int k = 0; k <= n_t; ++k) {
      const double t = k * dt;
      for (int i = 0; i < m; ++i) vel[i] = phi->dot(t, ys[i]);
      const double w = (k == 0 || k == n_t) ? 0.5 : 1.0;
      coeff += w * dt * slice_integral(S, ys, vel);
      if (k < n_t) rk4_step_samples(M, *phi, t, dt, ys, vel);
    }
    cls.coefficients[static_cast<int>(l)] = coeff;
  }
  cls.closedness_residual = closedness_of_integrand(S, phi);
  cls.closedness_warning = cls.closedness_residual > 1e-4;
  return cls;
}

double flux_additivity_check(const CosymplecticStructure& S,
                             const IsotopyPtr& phi, const IsotopyPtr& psi,
                             const HomologyBasis& B, int n_t) {
  CohomologyClass both = flux(S, compose_isotopies(phi, psi), B, n_t);
  CohomologyClass a = flux(S, phi, B, n_t);
  CohomologyClass b = flux(S, psi, B, n_t);
  return (both.coefficients - a.coefficients - b.coefficients)
      .lpNorm<Eigen::Infinity>();
}

ScalarField flux_delta(const IsotopyPtr& phi, const OneForm& beta, int n_t) {
  ScalarField out;
  const ManifoldChart M = phi->chart();
  out.value = [phi, beta, n_t, M](const Vec& x) {
    const double dt = 1.0 / n_t;
    Vec y = wrap_periodic(M, x);
    double acc = 0.0;
    for (int k = 0; k <= n_t; ++k) {
      const double t = k * dt;
      Vec v = phi->dot(t, y);
      const double w = (k == 0 || k == n_t) ? 0.5 : 1.0;
      acc += w * dt * beta.coeff(y).dot(v);
      if (k < n_t) {
        std::vector<Vec> ys{y};
        std::vector<Vec> k1{v};
        rk4_step_samples(M, *phi, t, dt, ys, k1);
        y = ys[0];
      }
    }
    return acc;
  };
  return out;
}

FactorizationReport factorization_check(const CosymplecticStructure& S,
                                        const IsotopyPtr& phi,
                                        const OneForm& alpha, const GridSpec& g,
                                        int n_t) {
  const auto& M = S.chart;
  const int n = S.n;

  ScalarField delta_eta = flux_delta(phi, S.eta, n_t);
  ScalarField delta_alpha = flux_delta(phi, alpha, n_t);

  KForm eta_top = S.volume_form();
  KForm omega_k = as_kform(S.omega);
  KForm alpha_top = wedge(as_kform(alpha), wedge_power(omega_k, n));

  FactorizationReport rep;
  rep.lhs = integrate_scalar_against_top_form(M, delta_eta.value, alpha_top, g) -
            integrate_scalar_against_top_form(M, delta_alpha.value, eta_top, g);

  HomologyBasis B = HomologyBasis::coordinate(M);
  CohomologyClass cls = flux(S, phi, B, n_t);
  OneForm s_tilde = harmonic_representative(M, B, cls.coefficients);

  KForm pairing = as_kform(alpha);
  if (n > 1) pairing = wedge(pairing, wedge_power(omega_k, n - 1));
  pairing = wedge(pairing, wedge(as_kform(S.eta), as_kform(s_tilde)));
  rep.rhs = static_cast<double>(factorial(n)) *
            integrate_top_form(M, pairing, g);
  rep.deviation = std::abs(rep.lhs - rep.rhs);
  return rep;
}

OrbitIntegralReport reeb_orbit_integrals(const CosymplecticStructure& S,
                                         const IsotopyPtr& phi,
                                         const OneForm& alpha,
                                         const std::vector<Vec>& points,
                                         int n_t, double tol) {
  const auto& M = S.chart;
  for (const Vec& x : points) {
    const double d = point_distance(M, wrap_periodic(M, phi->flow(1.0, x)),
                                    wrap_periodic(M, x));
    if (d > 1e-6) {
      std::ostringstream os;
      os << "reeb_orbit_integrals: isotopy is not a loop (time-one "
            "displacement "
         << d << ")";
      throw ContractError(os.str());
    }
  }

  OrbitIntegralReport rep;
  ScalarField da = flux_delta(phi, alpha, n_t);
  ScalarField de = flux_delta(phi, S.eta, n_t);
  for (const Vec& x : points) {
    rep.values.push_back(da.value(x));
    rep.eta_integrals.push_back(de.value(x));
  }

  HomologyBasis B = HomologyBasis::coordinate(M);
  CohomologyClass cls = flux(S, phi, B, n_t);
  if (cls.coefficients.lpNorm<Eigen::Infinity>() < tol) {
    rep.proportionality_checked = true;
    GridSpec g = GridSpec::uniform(M, 12, 13);
    KForm eta_top = S.volume_form();
    KForm alpha_top =
        wedge(as_kform(alpha), wedge_power(as_kform(S.omega), S.n));
    const double ratio = integrate_top_form(M, alpha_top, g) /
                         integrate_top_form(M, eta_top, g);
    for (std::size_t i = 0; i < points.size(); ++i) {
      rep.proportionality_residual =
          std::max(rep.proportionality_residual,
                   std::abs(rep.values[i] - ratio * rep.eta_integrals[i]));
    }
  }
  return rep;
}

DecomposedFlux decomposed_flux(const CosymplecticStructure& S,
                               const VectorField& X, const HomologyBasis& B,
                               int N) {
  const auto& M = S.chart;
  auto [Xw, Xh] = decompose(S, X);
  TimeDependentField Fw{[Xw](double, const Vec& p) { return Xw.value(p); },
                        Xw.jac ? std::function<Mat(double, const Vec&)>(
                                     [Xw](double, const Vec& p) {
                                       return Xw.jac(p);
                                     })
                               : nullptr};
  TimeDependentField Fh{[Xh](double, const Vec& p) { return Xh.value(p); },
                        Xh.jac ? std::function<Mat(double, const Vec&)>(
                                     [Xh](double, const Vec& p) {
                                       return Xh.jac(p);
                                     })
                               : nullptr};
  IsotopyPtr phi_w = integrate_flow(M, Fw, N);
  IsotopyPtr phi_h = integrate_flow(M, Fh, N);

  DecomposedFlux out;
  out.flux_omega = flux(S, phi_w, B, N);
  out.flux_eta = flux(S, phi_h, B, N);

  // int_0^1 eta(phi-dot_t) o phi_t dt across a coarse grid: its constancy is
  // what makes the eta-flux a multiple of [eta]
  ScalarField d_eta = flux_delta(phi_h, S.eta, N);
  GridSpec g = GridSpec::uniform(M, 4, 5);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double mean = 0.0;
  const std::vector<Vec> pts = sample_grid(M, g);
  for (const Vec& p : pts) {
    const double v = d_eta.value(p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  out.eta_scalar = mean / static_cast<double>(pts.size());
  out.scalar_oscillation = hi - lo;

  double best = 0.0;
  for (std::size_t l = 0; l < B.loops.size(); ++l) {
    const double v = std::abs(line_integral(M, S.eta, B.loops[l]));
    if (v > best) {
      best = v;
      out.reeb_loop_index = static_cast<int>(l);
    }
  }
  return out;
}

}  // namespace cosym
