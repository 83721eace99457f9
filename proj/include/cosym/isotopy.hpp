#pragma once

// Time-dependent flows: fixed-step RK4 integration with generator records,
// CHE/ACHE systems, isotopy algebra (compose / invert / conjugate / reparam),
// Moser stability solvers for all four stability variants, symplectization
// lifts and the dynamical checks (orbit energy, fixed points).

#include "cosym/structure.hpp"

#include <memory>

namespace cosym {

struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TimeDependentField {
  std::function<Vec(double, const Vec&)> value;
  std::function<Mat(double, const Vec&)> jac;  // optional analytic d/dx
};

struct TimeDependentScalar {
  std::function<double(double, const Vec&)> value;
  std::function<Vec(double, const Vec&)> grad;  // optional analytic gradient
};

// Abstract isotopy {phi_t}, phi_0 = id. `dot(t, y)` is the Eulerian velocity
// phi-dot_t at the image point y; `conformal_log(t, x)` is f_t at the source
// label x when the isotopy tracks phi_t^* eta = e^{f_t} eta.
class Isotopy {
 public:
  explicit Isotopy(ManifoldChart chart) : chart_(std::move(chart)) {}
  virtual ~Isotopy() = default;

  const ManifoldChart& chart() const { return chart_; }

  virtual Vec flow(double t, const Vec& x) const = 0;
  virtual Vec inverse_flow(double t, const Vec& y) const = 0;
  virtual Vec dot(double t, const Vec& y) const;       // default: time FD
  virtual Mat flow_jacobian(double t, const Vec& x) const;  // default: space FD

  virtual bool tracks_conformal() const { return false; }
  virtual double conformal_log(double, const Vec&) const { return 0.0; }
  // mu_t at the image point y (L_{psi-dot} eta = mu_t eta); default: time FD
  // of conformal_log at the source label.
  virtual double conformal_rate(double t, const Vec& y) const;

  SmoothMap time_one_map() const;
  SmoothMap map_at(double t) const;

 protected:
  ManifoldChart chart_;
};

using IsotopyPtr = std::shared_ptr<const Isotopy>;

// ---- generator record helpers ----
// I_{eta,omega}(phi-dot_t) as a 1-form (evaluated at image points)
OneForm generator_one_form(const CosymplecticStructure& S, const IsotopyPtr& iso,
                           double t);
// C^t_{Phi,eta}(x) = eta(phi-dot_t)(phi_t(x))
double C_function(const CosymplecticStructure& S, const IsotopyPtr& iso,
                  double t, const Vec& x);
// f_t from the structure (Theorem Theo-Al1): ln(phi_t^* eta (xi)) at x
double conformal_log_from_structure(const CosymplecticStructure& S,
                                    const IsotopyPtr& iso, double t,
                                    const Vec& x);

// ---- concrete isotopies ----
class FlowIsotopy : public Isotopy {
 public:
  FlowIsotopy(ManifoldChart chart, TimeDependentField X, int N,
              TimeDependentScalar mu = {});
  Vec flow(double t, const Vec& x) const override;
  Vec inverse_flow(double t, const Vec& y) const override;
  Vec dot(double t, const Vec& y) const override;
  Mat flow_jacobian(double t, const Vec& x) const override;
  bool tracks_conformal() const override { return static_cast<bool>(mu_.value); }
  double conformal_log(double t, const Vec& x) const override;
  double conformal_rate(double t, const Vec& y) const override;

  const TimeDependentField& generator() const { return X_; }
  int steps() const { return N_; }

 private:
  TimeDependentField X_;
  TimeDependentScalar mu_;
  int N_;
};

// closed-form family t -> map
class MapIsotopy : public Isotopy {
 public:
  MapIsotopy(ManifoldChart chart,
             std::function<Vec(double, const Vec&)> fwd,
             std::function<Vec(double, const Vec&)> inv,
             std::function<Vec(double, const Vec&)> dot = nullptr,
             std::function<Mat(double, const Vec&)> jac = nullptr,
             std::function<double(double, const Vec&)> conformal = nullptr);
  Vec flow(double t, const Vec& x) const override;
  Vec inverse_flow(double t, const Vec& y) const override;
  Vec dot(double t, const Vec& y) const override;
  Mat flow_jacobian(double t, const Vec& x) const override;
  bool tracks_conformal() const override {
    return static_cast<bool>(conformal_);
  }
  double conformal_log(double t, const Vec& x) const override;

 private:
  std::function<Vec(double, const Vec&)> fwd_, inv_, dot_;
  std::function<Mat(double, const Vec&)> jac_;
  std::function<double(double, const Vec&)> conformal_;
};

IsotopyPtr integrate_flow(const ManifoldChart& chart,
                          const TimeDependentField& X, int N);
IsotopyPtr invert_isotopy(const IsotopyPtr& phi);
IsotopyPtr compose_isotopies(const IsotopyPtr& phi, const IsotopyPtr& psi);
IsotopyPtr conjugate_isotopy(const IsotopyPtr& phi, const SmoothMap& rho);
// s -> phi_{tau(s)} with tau(0) = 0, tau(1) = 1
IsotopyPtr reparametrize_isotopy(const IsotopyPtr& phi,
                                 const std::function<double(double)>& tau);

// ---- CHE / ACHE ----
struct CoHamiltonianResult {
  IsotopyPtr iso;
  TimeDependentScalar H;       // co-normalized when requested
  bool xi_H_constant = true;   // warns when xi(H_t) varies in space
  double xi_H_oscillation = 0.0;
};

CoHamiltonianResult co_hamiltonian_isotopy(const CosymplecticStructure& S,
                                           const TimeDependentScalar& H, int N,
                                           const GridSpec& g,
                                           bool co_normalize = false);

IsotopyPtr almost_co_hamiltonian_isotopy(const CosymplecticStructure& S,
                                         const TimeDependentScalar& H,
                                         const TimeDependentScalar& mu, int N,
                                         const GridSpec& g, double tol = 1e-5);

// ---- Moser stability ----
struct StabilityProblem {
  enum class Variant { Omega, Eta, Full, General };
  Variant variant = Variant::Full;
  CosymplecticStructure S0;
  std::function<OneForm(double)> eta_t;
  std::function<TwoForm(double)> omega_t;
  std::function<OneForm(double)> alpha_t;   // primitive of d/dt omega_t
  std::function<ScalarField(double)> f_t;   // primitive of d/dt eta_t
};

// linear interpolation eta_t = eta0 + t(eta1-eta0), omega_t likewise, with
// constant alpha (d alpha = omega1 - omega0) and f (df = eta1 - eta0)
StabilityProblem make_linear_stability_problem(
    const CosymplecticStructure& S0, const OneForm& eta1, const TwoForm& omega1,
    const OneForm& alpha, const ScalarField& f,
    StabilityProblem::Variant variant);

struct MoserReport {
  IsotopyPtr iso;
  TimeDependentField v;
  std::vector<double> checkpoints;       // {0, 1/4, 1/2, 3/4, 1}
  std::vector<double> residual_omega;    // max ||phi_t^* omega_t - omega_0||
  std::vector<double> residual_eta;      // max ||phi_t^* eta_t - eta_0||
  double max_residual_omega = 0.0;
  double max_residual_eta = 0.0;
  double precondition_residual = 0.0;
};

MoserReport moser_solve(const StabilityProblem& P, int N, const GridSpec& g);

// ---- symplectization lifts on M x S^1 ----
struct LiftedIsotopy {
  ManifoldChart product_chart;  // chart of M with an extra theta circle
  IsotopyPtr iso;               // the lifted isotopy
  TwoForm omega_tilde;          // p^* omega + p^* eta ^ dtheta
};

LiftedIsotopy lift_cosymplectic(const CosymplecticStructure& S,
                                const IsotopyPtr& phi, int N);
LiftedIsotopy lift_almost(const CosymplecticStructure& S, const IsotopyPtr& psi,
                          int N);

// sup over checkpoint times and the product grid of ||phi~_t^* omega~ - omega~||
double lift_symplectic_residual(const LiftedIsotopy& L,
                                const std::vector<double>& ts,
                                const GridSpec& product_grid);

// Prop Trasit-4: i(psi~-dot_t) omega~ vs d(H_t o p + theta eta(psi-dot_t) o p)
double lifted_hamiltonian_check(const CosymplecticStructure& S,
                                const LiftedIsotopy& L,
                                const TimeDependentScalar& H,
                                const IsotopyPtr& base,
                                const std::vector<double>& ts,
                                const GridSpec& product_grid);

// ---- dynamics ----
struct OrbitProfile {
  std::vector<double> times;
  std::vector<double> G_values;
  std::vector<double> eta_X_sq;        // eta(X)^2 along the orbit
  std::vector<double> integral_check;  // G(p) + int_0^t eta(X)^2 - G(phi^t(p))
  double max_identity_residual = 0.0;
  bool monotone = true;
  bool periodic_orbit_criterion = false;  // int eta(X)^2 below tolerance
};

OrbitProfile orbit_energy_profile(const CosymplecticStructure& S,
                                  const ScalarField& G, const Vec& p, double T,
                                  int N);

struct FixedPointCandidate {
  Vec x;
  double displacement = 0.0;
  double f_value = 0.0;
};

std::vector<FixedPointCandidate> fixed_point_scan(const ManifoldChart& M,
                                                  const SmoothMap& phi,
                                                  const ScalarField& f,
                                                  const GridSpec& g,
                                                  double tol = 1e-6);

}  // namespace cosym
