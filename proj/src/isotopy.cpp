#include "cosym/isotopy.hpp"

#include "cosym/splitting.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <map>
#include <numbers>
#include <sstream>

namespace cosym {

namespace {

constexpr double kTimeFdStep = 1e-4;

// Minimal representative of a - b, wrapping periodic coordinate differences
// into [-L/2, L/2) so finite differences never see a seam jump.
Vec chart_diff(const ManifoldChart& M, const Vec& a, const Vec& b) {
  Vec d = a - b;
  for (int i = 0; i < M.dim; ++i) {
    if (M.coords[i].periodic()) {
      double L = M.coords[i].period;
      d[i] -= L * std::floor(d[i] / L + 0.5);
    }
  }
  return d;
}

// Wrap periodic coordinates only; box coordinates are allowed to carry the
// integration margin and are not validated here.
Vec wrap_periodic(const ManifoldChart& M, Vec p) {
  for (int i = 0; i < M.dim; ++i) {
    if (M.coords[i].periodic()) {
      double L = M.coords[i].period;
      p[i] -= L * std::floor(p[i] / L + 0.5);
    }
  }
  return p;
}

// Trajectories on box factors may legitimately overshoot the nominal bounds
// (e.g. exponential Reeb-direction scalings); a margin of twice the box width
// is tolerated before the trajectory is declared out of chart.
void check_chart_margin(const ManifoldChart& M, const Vec& p, double t) {
  for (int i = 0; i < M.dim; ++i) {
    const CoordInfo& c = M.coords[i];
    bool bad = false;
    if (c.kind == CoordInfo::Kind::Box) {
      double L = c.hi - c.lo;
      bad = p[i] < c.lo - 2 * L || p[i] > c.hi + 2 * L;
    } else if (c.kind == CoordInfo::Kind::Radial) {
      double L = c.hi - c.lo;
      bad = p[i] <= 0.0 || p[i] > c.hi + 2 * L;
    }
    if (bad) {
      std::ostringstream os;
      os << "flow left the chart at t = " << t << ", coordinate " << c.label
         << " = " << p[i] << ", point = [" << p.transpose() << "]";
      throw ChartError(os.str());
    }
  }
}

Mat field_jac_at(const TimeDependentField& X, double t, const Vec& p) {
  if (X.jac) return X.jac(t, p);
  return fd_jacobian([&](const Vec& q) { return X.value(t, q); }, p);
}

// RK4 on the (x, f, J) system: x' = X(t,x), f' = mu(t,x), J' = DX(t,x) J.
void rk4_integrate(const ManifoldChart& chart, const TimeDependentField& X,
                   const TimeDependentScalar* mu, bool with_J, double t0,
                   double t1, int m, Vec& x, double& f, Mat& J) {
  const int d = chart.dim;
  double h = (t1 - t0) / m;
  for (int i = 0; i < m; ++i) {
    double t = t0 + i * h;
    Vec kx[4];
    double kf[4] = {0, 0, 0, 0};
    Mat kJ[4];
    const double stage_t[4] = {t, t + h / 2, t + h / 2, t + h};
    const double stage_c[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 0; s < 4; ++s) {
      Vec xs = s == 0 ? x : Vec(x + h * stage_c[s] * kx[s - 1]);
      kx[s] = X.value(stage_t[s], xs);
      if (mu && mu->value) kf[s] = mu->value(stage_t[s], xs);
      if (with_J) {
        Mat Js = s == 0 ? J : Mat(J + h * stage_c[s] * kJ[s - 1]);
        kJ[s] = field_jac_at(X, stage_t[s], xs) * Js;
      }
    }
    x += (h / 6) * (kx[0] + 2 * kx[1] + 2 * kx[2] + kx[3]);
    if (mu && mu->value) f += (h / 6) * (kf[0] + 2 * kf[1] + 2 * kf[2] + kf[3]);
    if (with_J) J += (h / 6) * (kJ[0] + 2 * kJ[1] + 2 * kJ[2] + kJ[3]);
    check_chart_margin(chart, x, t + h);
  }
  (void)d;
}

int step_count(double t, int N) {
  return std::max(1, static_cast<int>(std::ceil(std::abs(t) * N)));
}

// Closed-form inverse for the small pairing solves (d <= 4 in practice).
Mat small_inverse(const Mat& A) {
  if (A.rows() == 3) {
    Eigen::Matrix3d F = A.topLeftCorner(3, 3);
    double det = F.determinant();
    if (std::abs(det) < 1e-14)
      throw DegeneracyError("pairing matrix is numerically singular");
    return Mat(F.inverse());
  }
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible())
    throw DegeneracyError("pairing matrix is numerically singular");
  return lu.inverse();
}

Vec solve_pairing_T(const CosymplecticStructure& S, const Vec& p,
                    const Vec& rhs) {
  Mat At = assemble_pairing_matrix(S, p).transpose();
  return small_inverse(At) * rhs;
}

Vec grad_at(const TimeDependentScalar& H, double t, const Vec& p) {
  if (H.grad) return H.grad(t, p);
  return fd_gradient([&](const Vec& q) { return H.value(t, q); }, p);
}

}  // namespace

// ---------------------------------------------------------------- Isotopy

Vec Isotopy::dot(double t, const Vec& y) const {
  Vec x = inverse_flow(t, y);
  double h = kTimeFdStep;
  if (t >= h) {
    Vec d = chart_diff(chart_, flow(t + h, x), flow(t - h, x));
    return Vec(d / (2 * h));
  }
  Vec d1 = chart_diff(chart_, flow(t + h, x), flow(t, x));
  Vec d2 = chart_diff(chart_, flow(t + 2 * h, x), flow(t, x));
  return Vec((4 * d1 - d2) / (2 * h));
}

Mat Isotopy::flow_jacobian(double t, const Vec& x) const {
  const int d = chart_.dim;
  Mat J(d, d);
  for (int j = 0; j < d; ++j) {
    double h = fd_step(x[j]);
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = chart_diff(chart_, flow(t, xp), flow(t, xm)) / (2 * h);
  }
  return J;
}

double Isotopy::conformal_rate(double t, const Vec& y) const {
  Vec x = inverse_flow(t, y);
  double h = kTimeFdStep;
  if (t >= h)
    return (conformal_log(t + h, x) - conformal_log(t - h, x)) / (2 * h);
  return (4 * (conformal_log(t + h, x) - conformal_log(t, x)) -
          (conformal_log(t + 2 * h, x) - conformal_log(t, x))) /
         (2 * h);
}

SmoothMap Isotopy::map_at(double t) const {
  SmoothMap m;
  m.fwd = [this, t](const Vec& x) { return flow(t, x); };
  m.inv = [this, t](const Vec& y) { return inverse_flow(t, y); };
  m.jac = [this, t](const Vec& x) { return flow_jacobian(t, x); };
  return m;
}

SmoothMap Isotopy::time_one_map() const { return map_at(1.0); }

// ------------------------------------------------------------ FlowIsotopy

FlowIsotopy::FlowIsotopy(ManifoldChart chart, TimeDependentField X, int N,
                         TimeDependentScalar mu)
    : Isotopy(std::move(chart)), X_(std::move(X)), mu_(std::move(mu)), N_(N) {
  if (N_ < 16) throw ContractError("integrate_flow: N must be at least 16");
}

Vec FlowIsotopy::flow(double t, const Vec& x) const {
  Vec y = x;
  double f = 0;
  Mat J;
  if (t != 0.0)
    rk4_integrate(chart_, X_, nullptr, false, 0.0, t, step_count(t, N_), y, f,
                  J);
  return wrap_periodic(chart_, y);
}

Vec FlowIsotopy::inverse_flow(double t, const Vec& y) const {
  Vec x = y;
  double f = 0;
  Mat J;
  if (t != 0.0)
    rk4_integrate(chart_, X_, nullptr, false, t, 0.0, step_count(t, N_), x, f,
                  J);
  return wrap_periodic(chart_, x);
}

Vec FlowIsotopy::dot(double t, const Vec& y) const { return X_.value(t, y); }

Mat FlowIsotopy::flow_jacobian(double t, const Vec& x) const {
  Vec y = x;
  double f = 0;
  Mat J = Mat::Identity(chart_.dim, chart_.dim);
  if (t != 0.0)
    rk4_integrate(chart_, X_, nullptr, true, 0.0, t, step_count(t, N_), y, f,
                  J);
  return J;
}

double FlowIsotopy::conformal_log(double t, const Vec& x) const {
  if (!mu_.value) return 0.0;
  Vec y = x;
  double f = 0;
  Mat J;
  if (t != 0.0)
    rk4_integrate(chart_, X_, &mu_, false, 0.0, t, step_count(t, N_), y, f, J);
  return f;
}

double FlowIsotopy::conformal_rate(double t, const Vec& y) const {
  if (!mu_.value) return 0.0;
  return mu_.value(t, y);
}

// ------------------------------------------------------------- MapIsotopy

MapIsotopy::MapIsotopy(ManifoldChart chart,
                       std::function<Vec(double, const Vec&)> fwd,
                       std::function<Vec(double, const Vec&)> inv,
                       std::function<Vec(double, const Vec&)> dot,
                       std::function<Mat(double, const Vec&)> jac,
                       std::function<double(double, const Vec&)> conformal)
    : Isotopy(std::move(chart)),
      fwd_(std::move(fwd)),
      inv_(std::move(inv)),
      dot_(std::move(dot)),
      jac_(std::move(jac)),
      conformal_(std::move(conformal)) {}

Vec MapIsotopy::flow(double t, const Vec& x) const {
  return wrap_periodic(chart_, fwd_(t, x));
}

Vec MapIsotopy::inverse_flow(double t, const Vec& y) const {
  if (!inv_) throw ContractError("MapIsotopy: no inverse map provided");
  return wrap_periodic(chart_, inv_(t, y));
}

Vec MapIsotopy::dot(double t, const Vec& y) const {
  if (dot_) return dot_(t, y);
  return Isotopy::dot(t, y);
}

Mat MapIsotopy::flow_jacobian(double t, const Vec& x) const {
  if (jac_) return jac_(t, x);
  return Isotopy::flow_jacobian(t, x);
}

double MapIsotopy::conformal_log(double t, const Vec& x) const {
  return conformal_ ? conformal_(t, x) : 0.0;
}

// --------------------------------------------------------- isotopy algebra

namespace {

class InverseIsotopy : public Isotopy {
 public:
  explicit InverseIsotopy(IsotopyPtr base)
      : Isotopy(base->chart()), base_(std::move(base)) {}

  Vec flow(double t, const Vec& x) const override {
    return base_->inverse_flow(t, x);
  }
  Vec inverse_flow(double t, const Vec& y) const override {
    return base_->flow(t, y);
  }
  Vec dot(double t, const Vec& z) const override {
    // d/dt phi_t^{-1}(y) at z = phi_t^{-1}(y): -[D phi_t(z)]^{-1} phi-dot(y)
    Vec y = base_->flow(t, z);
    Mat J = base_->flow_jacobian(t, z);
    return Vec(-Eigen::FullPivLU<Mat>(J).solve(base_->dot(t, y)));
  }
  Mat flow_jacobian(double t, const Vec& x) const override {
    Mat J = base_->flow_jacobian(t, base_->inverse_flow(t, x));
    return Eigen::FullPivLU<Mat>(J).inverse();
  }
  bool tracks_conformal() const override { return base_->tracks_conformal(); }
  double conformal_log(double t, const Vec& x) const override {
    return -base_->conformal_log(t, base_->inverse_flow(t, x));
  }

 private:
  IsotopyPtr base_;
};

class ComposedIsotopy : public Isotopy {
 public:
  ComposedIsotopy(IsotopyPtr phi, IsotopyPtr psi)
      : Isotopy(phi->chart()), phi_(std::move(phi)), psi_(std::move(psi)) {}

  Vec flow(double t, const Vec& x) const override {
    return phi_->flow(t, psi_->flow(t, x));
  }
  Vec inverse_flow(double t, const Vec& y) const override {
    return psi_->inverse_flow(t, phi_->inverse_flow(t, y));
  }
  Vec dot(double t, const Vec& y) const override {
    Vec z = phi_->inverse_flow(t, y);
    return Vec(phi_->dot(t, y) + phi_->flow_jacobian(t, z) * psi_->dot(t, z));
  }
  Mat flow_jacobian(double t, const Vec& x) const override {
    Vec z = psi_->flow(t, x);
    return Mat(phi_->flow_jacobian(t, z) * psi_->flow_jacobian(t, x));
  }
  bool tracks_conformal() const override {
    return phi_->tracks_conformal() || psi_->tracks_conformal();
  }
  double conformal_log(double t, const Vec& x) const override {
    return phi_->conformal_log(t, psi_->flow(t, x)) +
           psi_->conformal_log(t, x);
  }

 private:
  IsotopyPtr phi_, psi_;
};

class ConjugatedIsotopy : public Isotopy {
 public:
  ConjugatedIsotopy(IsotopyPtr phi, SmoothMap rho)
      : Isotopy(phi->chart()), phi_(std::move(phi)), rho_(std::move(rho)) {
    if (!rho_.inv)
      throw ContractError("conjugate_isotopy: rho must provide an inverse");
  }

  Vec flow(double t, const Vec& x) const override {
    return wrap_periodic(chart_, rho_.inv(phi_->flow(t, rho_.fwd(x))));
  }
  Vec inverse_flow(double t, const Vec& y) const override {
    return wrap_periodic(chart_, rho_.inv(phi_->inverse_flow(t, rho_.fwd(y))));
  }
  Vec dot(double t, const Vec& y) const override {
    Vec ry = rho_.fwd(y);
    Mat Jr = map_jacobian(rho_, y);
    return Vec(Eigen::FullPivLU<Mat>(Jr).solve(phi_->dot(t, ry)));
  }
  Mat flow_jacobian(double t, const Vec& x) const override {
    Vec rx = rho_.fwd(x);
    Vec y = flow(t, x);
    Mat Jr_y = map_jacobian(rho_, y);
    return Mat(Eigen::FullPivLU<Mat>(Jr_y).solve(
        Mat(phi_->flow_jacobian(t, rx) * map_jacobian(rho_, x))));
  }
  // valid when rho is a strict cosymplectomorphism; for almost rho the
  // conformal record is not tracked through conjugation
  bool tracks_conformal() const override { return phi_->tracks_conformal(); }
  double conformal_log(double t, const Vec& x) const override {
    return phi_->conformal_log(t, rho_.fwd(x));
  }

 private:
  IsotopyPtr phi_;
  SmoothMap rho_;
};

class ReparamIsotopy : public Isotopy {
 public:
  ReparamIsotopy(IsotopyPtr phi, std::function<double(double)> tau)
      : Isotopy(phi->chart()), phi_(std::move(phi)), tau_(std::move(tau)) {
    if (std::abs(tau_(0.0)) > 1e-12 || std::abs(tau_(1.0) - 1.0) > 1e-12)
      throw ContractError(
          "reparametrize_isotopy: tau must satisfy tau(0)=0, tau(1)=1");
  }

  Vec flow(double s, const Vec& x) const override {
    return phi_->flow(tau_(s), x);
  }
  Vec inverse_flow(double s, const Vec& y) const override {
    return phi_->inverse_flow(tau_(s), y);
  }
  Vec dot(double s, const Vec& y) const override {
    double h = 1e-6;
    double dtau = (tau_(s + h) - tau_(s - h)) / (2 * h);
    return Vec(dtau * phi_->dot(tau_(s), y));
  }
  Mat flow_jacobian(double s, const Vec& x) const override {
    return phi_->flow_jacobian(tau_(s), x);
  }
  bool tracks_conformal() const override { return phi_->tracks_conformal(); }
  double conformal_log(double s, const Vec& x) const override {
    return phi_->conformal_log(tau_(s), x);
  }

 private:
  IsotopyPtr phi_;
  std::function<double(double)> tau_;
};

}  // namespace

IsotopyPtr integrate_flow(const ManifoldChart& chart,
                          const TimeDependentField& X, int N) {
  return std::make_shared<FlowIsotopy>(chart, X, N);
}

IsotopyPtr invert_isotopy(const IsotopyPtr& phi) {
  return std::make_shared<InverseIsotopy>(phi);
}

IsotopyPtr compose_isotopies(const IsotopyPtr& phi, const IsotopyPtr& psi) {
  return std::make_shared<ComposedIsotopy>(phi, psi);
}

IsotopyPtr conjugate_isotopy(const IsotopyPtr& phi, const SmoothMap& rho) {
  return std::make_shared<ConjugatedIsotopy>(phi, rho);
}

IsotopyPtr reparametrize_isotopy(const IsotopyPtr& phi,
                                 const std::function<double(double)>& tau) {
  return std::make_shared<ReparamIsotopy>(phi, tau);
}

// ----------------------------------------------------- generator records

OneForm generator_one_form(const CosymplecticStructure& S,
                           const IsotopyPtr& iso, double t) {
  OneForm a;
  a.coeff = [S, iso, t](const Vec& y) {
    return Vec(assemble_pairing_matrix(S, y).transpose() * iso->dot(t, y));
  };
  return a;
}

double C_function(const CosymplecticStructure& S, const IsotopyPtr& iso,
                  double t, const Vec& x) {
  Vec y = iso->flow(t, x);
  return S.eta.coeff(y).dot(iso->dot(t, y));
}

double conformal_log_from_structure(const CosymplecticStructure& S,
                                    const IsotopyPtr& iso, double t,
                                    const Vec& x) {
  Vec y = iso->flow(t, x);
  Mat J = iso->flow_jacobian(t, x);
  Vec pb = J.transpose() * S.eta.coeff(y);
  Vec xi = solve_pairing_T(S, x, S.eta.coeff(x));
  double v = pb.dot(xi);
  if (v <= 0.0)
    throw ContractError(
        "conformal_log_from_structure: pullback eta(xi) is not positive");
  return std::log(v);
}

// -------------------------------------------------------------- CHE/ACHE

CoHamiltonianResult co_hamiltonian_isotopy(const CosymplecticStructure& S,
                                           const TimeDependentScalar& H, int N,
                                           const GridSpec& g,
                                           bool co_normalize) {
  CoHamiltonianResult out;

  TimeDependentScalar Hn = H;
  if (co_normalize) {
    KForm vol = S.volume_form();
    double total = integrate_top_form(S.chart, vol, g);
    auto cache = std::make_shared<std::map<double, double>>();
    auto chart = S.chart;
    auto base = H;
    GridSpec gg = g;
    Hn.value = [=](double t, const Vec& p) {
      auto it = cache->find(t);
      if (it == cache->end()) {
        double mean = integrate_scalar_against_top_form(
                          chart, [&](const Vec& q) { return base.value(t, q); },
                          vol, gg) /
                      total;
        it = cache->emplace(t, mean).first;
      }
      return base.value(t, p) - it->second;
    };
    if (H.grad) Hn.grad = H.grad;  // constant shift leaves the gradient
  }

  // xi(H_t) spatial-constancy diagnostic
  VectorField xi = invert_I(S, S.eta);
  double osc_max = 0.0;
  for (double t : {0.0, 0.5, 1.0}) {
    double lo = 0, hi = 0;
    bool first = true;
    for (const Vec& p : sample_grid(S.chart, g)) {
      double v = grad_at(H, t, p).dot(xi.value(p));
      if (first || v < lo) lo = v;
      if (first || v > hi) hi = v;
      first = false;
    }
    osc_max = std::max(osc_max, hi - lo);
  }
  out.xi_H_oscillation = osc_max;
  out.xi_H_constant = osc_max < 1e-6;

  TimeDependentField X;
  X.value = [S, Hn](double t, const Vec& p) {
    return solve_pairing_T(S, p, grad_at(Hn, t, p));
  };
  TimeDependentScalar mu;
  if (out.xi_H_constant) {
    // the flow preserves eta: track f = 0 so lifts and records are available
    mu.value = [](double, const Vec&) { return 0.0; };
  }
  out.iso = std::make_shared<FlowIsotopy>(S.chart, X, N, mu);
  out.H = Hn;
  return out;
}

IsotopyPtr almost_co_hamiltonian_isotopy(const CosymplecticStructure& S,
                                         const TimeDependentScalar& H,
                                         const TimeDependentScalar& mu, int N,
                                         const GridSpec& g, double tol) {
  const ManifoldChart chart = S.chart;
  const int d = chart.dim;

  // the construction integrates mu along the Reeb coordinate, so the Reeb
  // field must be a constant coordinate direction e_k
  VectorField xi = invert_I(S, S.eta);
  Vec xi0 = xi.value(chart_base_point(chart));
  int k = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(xi0[i]) > std::abs(xi0[k])) k = i;
  for (const Vec& p : sample_grid(chart, GridSpec::uniform(chart, 4, 5))) {
    Vec v = xi.value(p);
    Vec ek = Vec::Zero(d);
    ek[k] = 1.0;
    if ((v - ek).norm() > 1e-8)
      throw ContractError(
          "almost_co_hamiltonian_isotopy: Reeb field is not a constant "
          "coordinate direction");
  }
  const CoordInfo& ck = chart.coords[k];
  double anchor = ck.periodic() ? 0.0 : 0.5 * (ck.lo + ck.hi);

  // eta(X) = g with dg = mu eta, anchored at the mid-range of the Reeb
  // coordinate (the additive constant is a gauge choice)
  auto g_of = [S, mu, k, anchor](double t, const Vec& p) {
    // composite Simpson along the k-th coordinate
    const int n = 32;
    double a = anchor, b = p[k];
    if (a == b) return 0.0;
    double h = (b - a) / n;
    double sum = 0.0;
    Vec q = p;
    for (int i = 0; i <= n; ++i) {
      q[k] = a + i * h;
      double val = mu.value(t, q) * S.eta.coeff(q)[k];
      double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * val;
    }
    return sum * h / 3.0;
  };

  TimeDependentField X;
  X.value = [S, H, g_of](double t, const Vec& p) {
    Vec rhs = grad_at(H, t, p) + g_of(t, p) * S.eta.coeff(p);
    return solve_pairing_T(S, p, rhs);
  };

  // residual validation of the (H, mu) pair on the grid
  double res = 0.0;
  for (double t : {0.0, 0.5, 1.0}) {
    for (const Vec& p : sample_grid(chart, g)) {
      Vec Xp = X.value(t, p);
      Vec iXw = S.omega.coeff(p).transpose() * Xp;
      res = std::max(res, (iXw - grad_at(H, t, p)).norm());
      Vec grad_etaX = fd_gradient(
          [&](const Vec& q) { return S.eta.coeff(q).dot(X.value(t, q)); }, p);
      res = std::max(
          res, (grad_etaX - mu.value(t, p) * S.eta.coeff(p)).norm());
    }
  }
  if (res > tol) {
    std::ostringstream os;
    os << "almost_co_hamiltonian_isotopy: inconsistent (H, mu) pair, solve "
          "residual "
       << res;
    throw ContractError(os.str());
  }

  return std::make_shared<FlowIsotopy>(chart, X, N, mu);
}

// ------------------------------------------------------------------ Moser

StabilityProblem make_linear_stability_problem(
    const CosymplecticStructure& S0, const OneForm& eta1, const TwoForm& omega1,
    const OneForm& alpha, const ScalarField& f,
    StabilityProblem::Variant variant) {
  StabilityProblem P;
  P.variant = variant;
  P.S0 = S0;
  OneForm eta0 = S0.eta;
  TwoForm omega0 = S0.omega;
  P.eta_t = [eta0, eta1](double t) { return add(eta0, add(eta1, eta0, 1, -1), 1, t); };
  P.omega_t = [omega0, omega1](double t) {
    return add(omega0, add(omega1, omega0, 1, -1), 1, t);
  };
  P.alpha_t = [alpha](double) { return alpha; };
  P.f_t = [f](double) { return f; };
  return P;
}

namespace {

struct MoserStage {
  TwoForm W;
  OneForm e;
  OneForm a;
  ScalarField f;
};

MoserStage moser_stage(const StabilityProblem& P, double t) {
  MoserStage s;
  s.W = P.omega_t(t);
  s.e = P.eta_t(t);
  using V = StabilityProblem::Variant;
  if (P.variant != V::Eta) s.a = P.alpha_t ? P.alpha_t(t) : OneForm{};
  if (P.variant != V::Omega) s.f = P.f_t ? P.f_t(t) : ScalarField{};
  return s;
}

// v = (A_t^T)^{-1} (-alpha - f eta); also fills Dv when want_jac
void moser_eval(const MoserStage& s, const Vec& p, bool want_jac, Vec& v,
                Mat& Dv) {
  const int d = static_cast<int>(p.size());
  Mat W = s.W.coeff(p);
  Vec e = s.e.coeff(p);
  Mat At = Mat(-W + e * e.transpose());
  Mat M = small_inverse(At);
  Vec rhs = Vec::Zero(d);
  double fv = 0;
  if (s.a.coeff) rhs += s.a.coeff(p);
  if (s.f.value) {
    fv = s.f.value(p);
    rhs += fv * e;
  }
  v = -(M * rhs);
  if (!want_jac) return;
  bool analytic = s.W.dcoeff && s.e.dcoeff && (!s.a.coeff || s.a.dcoeff) &&
                  (!s.f.value || s.f.grad);
  if (analytic) {
    std::vector<Mat> dW = s.W.dcoeff(p);
    Mat de = s.e.dcoeff(p);  // de(i,j) = d e_i / d x_j
    Mat da = s.a.coeff ? s.a.dcoeff(p) : Mat(Mat::Zero(d, d));
    Vec df = s.f.value ? s.f.grad(p) : Vec(Vec::Zero(d));
    Dv.resize(d, d);
    for (int k = 0; k < d; ++k) {
      Vec drhs = da.col(k);
      if (s.f.value) drhs += df[k] * e + fv * de.col(k);
      Mat dAt = Mat(-dW[k] + de.col(k) * e.transpose() +
                    e * de.col(k).transpose());
      Dv.col(k) = M * (-drhs - dAt * v);
    }
  } else {
    Dv = fd_jacobian(
        [&](const Vec& q) {
          Vec vq;
          Mat dummy;
          moser_eval(s, q, false, vq, dummy);
          return vq;
        },
        p);
  }
}

}  // namespace

MoserReport moser_solve(const StabilityProblem& P, int N, const GridSpec& g) {
  const ManifoldChart& chart = P.S0.chart;
  const int d = chart.dim;
  N = ((N + 3) / 4) * 4;
  using V = StabilityProblem::Variant;

  // --- precondition and primitive-consistency checks on a coarse grid ---
  GridSpec coarse = GridSpec::uniform(chart, 6, 7);
  auto coarse_pts = sample_grid(chart, coarse);
  double pre = 0.0;
  if (P.variant == V::Omega || P.variant == V::General) {
    for (double t : {0.0, 0.5, 1.0}) {
      MoserStage s = moser_stage(P, t);
      CosymplecticStructure St = P.S0;
      St.eta = s.e;
      St.omega = s.W;
      if (P.variant == V::Omega) {
        // alpha(xi_t) = 0
        for (const Vec& p : coarse_pts) {
          Vec xi = solve_pairing_T(St, p, s.e.coeff(p));
          pre = std::max(pre, std::abs(s.a.coeff(p).dot(xi)));
        }
      } else {
        // d(alpha_t(xi_t)) = 0
        for (const Vec& p : coarse_pts) {
          Vec gr = fd_gradient(
              [&](const Vec& q) {
                Vec xi = solve_pairing_T(St, q, s.e.coeff(q));
                return s.a.coeff(q).dot(xi);
              },
              p);
          pre = std::max(pre, gr.norm());
        }
      }
    }
    if (pre > 1e-6)
      throw StabilityError("moser_solve: stability hypothesis violated");
  }
  // d(alpha) = omega_1 - omega_0 and df = eta_1 - eta_0 (constant-form
  // variants); the general variant is checked as d(alpha_t) = d/dt omega_t
  {
    double prim = 0.0;
    auto check_at = [&](double t, double h) {
      MoserStage s = moser_stage(P, t);
      TwoForm Wp = P.omega_t(t + h), Wm = P.omega_t(t - h);
      OneForm ep = P.eta_t(t + h), em = P.eta_t(t - h);
      TwoForm da = s.a.coeff ? exterior_derivative(s.a) : TwoForm{};
      for (const Vec& p : coarse_pts) {
        if (s.a.coeff) {
          Mat diff = da.coeff(p) - (Wp.coeff(p) - Wm.coeff(p)) / (2 * h);
          prim = std::max(prim, diff.cwiseAbs().maxCoeff());
        }
        if (s.f.value) {
          Vec diff = gradient(s.f, p) - Vec((ep.coeff(p) - em.coeff(p)) / (2 * h));
          prim = std::max(prim, diff.cwiseAbs().maxCoeff());
        }
      }
    };
    check_at(0.25, 1e-3);
    check_at(0.75, 1e-3);
    if (prim > 1e-5)
      throw StabilityError(
          "moser_solve: alpha/f are not primitives of the structure path");
    pre = std::max(pre, prim);
  }

  MoserReport rep;
  rep.precondition_residual = pre;
  rep.checkpoints = {0.0, 0.25, 0.5, 0.75, 1.0};
  rep.residual_omega.assign(5, 0.0);
  rep.residual_eta.assign(5, 0.0);

  // the exposed generator field
  TimeDependentField v;
  v.value = [P](double t, const Vec& p) {
    MoserStage s = moser_stage(P, t);
    Vec vv;
    Mat dummy;
    moser_eval(s, p, false, vv, dummy);
    return vv;
  };
  v.jac = [P](double t, const Vec& p) {
    MoserStage s = moser_stage(P, t);
    Vec vv;
    Mat Dv;
    moser_eval(s, p, true, vv, Dv);
    return Dv;
  };
  rep.v = v;
  rep.iso = std::make_shared<FlowIsotopy>(chart, v, N);

  // --- residual sweep: advance all grid points in lockstep so stage forms
  // are constructed once per stage time ---
  auto pts = sample_grid(chart, g);
  const size_t n = pts.size();
  std::vector<Vec> xs(pts);
  std::vector<Mat> Js(n, Mat::Identity(d, d));

  MoserStage s0 = moser_stage(P, 0.0);
  auto record = [&](int ci, double t) {
    MoserStage st = moser_stage(P, t);
    double rw = 0, re = 0;
    for (size_t i = 0; i < n; ++i) {
      Mat pw = Js[i].transpose() * st.W.coeff(xs[i]) * Js[i];
      Mat dw = pw - s0.W.coeff(pts[i]);
      rw = std::max(rw, dw.cwiseAbs().maxCoeff());
      Vec pe = Js[i].transpose() * st.e.coeff(xs[i]);
      Vec de = pe - s0.e.coeff(pts[i]);
      re = std::max(re, de.cwiseAbs().maxCoeff());
    }
    rep.residual_omega[ci] = rw;
    rep.residual_eta[ci] = re;
  };

  record(0, 0.0);
  const double h = 1.0 / N;
  const int quarter = N / 4;
  std::vector<Vec> kx(n);
  std::vector<Mat> kJ(n);
  std::vector<Vec> ax(n);  // accumulators
  std::vector<Mat> aJ(n);
  std::vector<Vec> x0(n);
  std::vector<Mat> J0(n);
  for (int step = 0; step < N; ++step) {
    double t = step * h;
    const double stage_t[4] = {t, t + h / 2, t + h / 2, t + h};
    const double stage_c[4] = {0.0, 0.5, 0.5, 1.0};
    const double stage_w[4] = {1.0, 2.0, 2.0, 1.0};
    for (size_t i = 0; i < n; ++i) {
      x0[i] = xs[i];
      J0[i] = Js[i];
      ax[i] = Vec::Zero(d);
      aJ[i] = Mat::Zero(d, d);
    }
    for (int sg = 0; sg < 4; ++sg) {
      MoserStage st = moser_stage(P, stage_t[sg]);
      for (size_t i = 0; i < n; ++i) {
        Vec xi_s = sg == 0 ? x0[i] : Vec(x0[i] + h * stage_c[sg] * kx[i]);
        Mat Ji_s = sg == 0 ? J0[i] : Mat(J0[i] + h * stage_c[sg] * kJ[i]);
        Vec vv;
        Mat Dv;
        moser_eval(st, xi_s, true, vv, Dv);
        kx[i] = vv;
        kJ[i] = Dv * Ji_s;
        ax[i] += stage_w[sg] * kx[i];
        aJ[i] += stage_w[sg] * kJ[i];
      }
    }
    for (size_t i = 0; i < n; ++i) {
      xs[i] = x0[i] + (h / 6) * ax[i];
      Js[i] = J0[i] + (h / 6) * aJ[i];
    }
    if ((step + 1) % quarter == 0) record((step + 1) / quarter, (step + 1) * h);
  }
  rep.max_residual_omega =
      *std::max_element(rep.residual_omega.begin(), rep.residual_omega.end());
  rep.max_residual_eta =
      *std::max_element(rep.residual_eta.begin(), rep.residual_eta.end());
  return rep;
}

// ------------------------------------------------------------------ lifts

namespace {

ManifoldChart product_chart_of(const ManifoldChart& M) {
  auto factors = M.factors;
  factors.push_back(FactorSpec::circle(2 * std::numbers::pi, "theta"));
  return build_manifold(factors, /*cosymplectic_use=*/false);
}

TwoForm omega_tilde_of(const CosymplecticStructure& S) {
  const int d = S.chart.dim;
  TwoForm wt;
  wt.coeff = [S, d](const Vec& P) {
    Vec p = P.head(d);
    Mat W = Mat::Zero(d + 1, d + 1);
    W.topLeftCorner(d, d) = S.omega.coeff(p);
    Vec e = S.eta.coeff(p);
    W.col(d).head(d) = e;
    W.row(d).head(d) = -e.transpose();
    return W;
  };
  if (S.omega.dcoeff && S.eta.dcoeff) {
    wt.dcoeff = [S, d](const Vec& P) {
      Vec p = P.head(d);
      auto dW = S.omega.dcoeff(p);
      Mat de = S.eta.dcoeff(p);
      std::vector<Mat> out(d + 1, Mat::Zero(d + 1, d + 1));
      for (int k = 0; k < d; ++k) {
        out[k].topLeftCorner(d, d) = dW[k];
        out[k].col(d).head(d) = de.col(k);
        out[k].row(d).head(d) = -de.col(k).transpose();
      }
      return out;
    };
  }
  return wt;
}

}  // namespace

LiftedIsotopy lift_cosymplectic(const CosymplecticStructure& S,
                                const IsotopyPtr& phi, int N) {
  LiftedIsotopy L;
  L.product_chart = product_chart_of(S.chart);
  L.omega_tilde = omega_tilde_of(S);
  const int d = S.chart.dim;
  TimeDependentField Xt;
  Xt.value = [S, phi, d](double t, const Vec& P) {
    Vec y = P.head(d);
    Vec v = phi->dot(t, y);
    Vec out(d + 1);
    out.head(d) = v;
    out[d] = -S.eta.coeff(y).dot(v);  // theta-dot = -C^t
    return out;
  };
  L.iso = std::make_shared<FlowIsotopy>(L.product_chart, Xt, N);
  return L;
}

LiftedIsotopy lift_almost(const CosymplecticStructure& S, const IsotopyPtr& psi,
                          int N) {
  if (!psi->tracks_conformal())
    throw ContractError("lift_almost: isotopy has no tracked conformal record");
  LiftedIsotopy L;
  L.product_chart = product_chart_of(S.chart);
  L.omega_tilde = omega_tilde_of(S);
  const int d = S.chart.dim;
  TimeDependentField Xt;
  Xt.value = [psi, d](double t, const Vec& P) {
    Vec y = P.head(d);
    Vec out(d + 1);
    out.head(d) = psi->dot(t, y);
    out[d] = -psi->conformal_rate(t, y) * P[d];  // theta-dot = -mu_t theta
    return out;
  };
  L.iso = std::make_shared<FlowIsotopy>(L.product_chart, Xt, N);
  return L;
}

double lift_symplectic_residual(const LiftedIsotopy& L,
                                const std::vector<double>& ts,
                                const GridSpec& product_grid) {
  double res = 0.0;
  auto pts = sample_grid(L.product_chart, product_grid);
  for (double t : ts) {
    for (const Vec& P : pts) {
      Vec Q = L.iso->flow(t, P);
      Mat J = L.iso->flow_jacobian(t, P);
      Mat diff = J.transpose() * L.omega_tilde.coeff(Q) * J -
                 L.omega_tilde.coeff(P);
      res = std::max(res, diff.cwiseAbs().maxCoeff());
    }
  }
  return res;
}

double lifted_hamiltonian_check(const CosymplecticStructure& S,
                                const LiftedIsotopy& L,
                                const TimeDependentScalar& H,
                                const IsotopyPtr& base,
                                const std::vector<double>& ts,
                                const GridSpec& product_grid) {
  const int d = S.chart.dim;
  double res = 0.0;
  auto pts = sample_grid(L.product_chart, product_grid);
  for (double t : ts) {
    auto G = [&](const Vec& P) {
      Vec y = P.head(d);
      double h = H.value ? H.value(t, y) : 0.0;
      return h + P[d] * S.eta.coeff(y).dot(base->dot(t, y));
    };
    for (const Vec& P : pts) {
      Vec V = L.iso->dot(t, P);
      Vec lhs = L.omega_tilde.coeff(P).transpose() * V;
      Vec rhs = fd_gradient(G, P);
      res = std::max(res, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  return res;
}

// --------------------------------------------------------------- dynamics

OrbitProfile orbit_energy_profile(const CosymplecticStructure& S,
                                  const ScalarField& G, const Vec& p, double T,
                                  int N) {
  VectorField X = invert_I(S, exterior_derivative(G));
  auto etaX2 = [&](const Vec& q) {
    double v = S.eta.coeff(q).dot(X.value(q));
    return v * v;
  };

  OrbitProfile out;
  double h = T / N;
  Vec x = p;
  double q = 0.0;  // int_0^t eta(X)^2
  double G0 = G.value(p);
  out.times.push_back(0.0);
  out.G_values.push_back(G0);
  out.eta_X_sq.push_back(etaX2(p));
  out.integral_check.push_back(0.0);
  for (int i = 0; i < N; ++i) {
    double t = i * h;
    // RK4 on (x, q)
    Vec kx[4];
    double kq[4];
    const double c[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 0; s < 4; ++s) {
      Vec xs = s == 0 ? x : Vec(x + h * c[s] * kx[s - 1]);
      kx[s] = X.value(xs);
      kq[s] = etaX2(xs);
    }
    x += (h / 6) * (kx[0] + 2 * kx[1] + 2 * kx[2] + kx[3]);
    q += (h / 6) * (kq[0] + 2 * kq[1] + 2 * kq[2] + kq[3]);
    check_chart_margin(S.chart, x, t + h);
    double Gt = G.value(wrap_periodic(S.chart, x));
    out.times.push_back(t + h);
    out.G_values.push_back(Gt);
    out.eta_X_sq.push_back(etaX2(x));
    out.integral_check.push_back(G0 + q - Gt);
    if (Gt < out.G_values[out.G_values.size() - 2] - 1e-9) out.monotone = false;
  }
  for (double r : out.integral_check)
    out.max_identity_residual = std::max(out.max_identity_residual, std::abs(r));
  out.periodic_orbit_criterion = q < 1e-6;
  return out;
}

std::vector<FixedPointCandidate> fixed_point_scan(const ManifoldChart& M,
                                                  const SmoothMap& phi,
                                                  const ScalarField& f,
                                                  const GridSpec& g,
                                                  double tol) {
  auto disp = [&](const Vec& x) {
    return point_distance(M, x, wrap_periodic(M, phi.fwd(x)));
  };
  auto clamp_chart = [&](Vec x) {
    for (int i = 0; i < M.dim; ++i) {
      const CoordInfo& c = M.coords[i];
      if (!c.periodic()) x[i] = std::min(std::max(x[i], c.lo), c.hi);
    }
    return x;
  };

  // coarse cell size per coordinate for the scan threshold and initial step
  std::vector<double> cell(M.dim);
  double diag2 = 0;
  for (int i = 0; i < M.dim; ++i) {
    const CoordInfo& c = M.coords[i];
    double L = c.periodic() ? c.period : c.hi - c.lo;
    cell[i] = L / std::max(2, g.resolution[i]);
    diag2 += cell[i] * cell[i];
  }
  double threshold = std::max(tol, std::sqrt(diag2));

  std::vector<FixedPointCandidate> out;
  for (const Vec& p : sample_grid(M, g)) {
    double d0 = disp(p);
    if (d0 > threshold) continue;
    // compass search (pattern bisection on the displacement norm)
    Vec x = p;
    double best = d0;
    std::vector<double> step = cell;
    for (int iter = 0; iter < 200 && best > 1e-14; ++iter) {
      bool improved = false;
      for (int i = 0; i < M.dim; ++i) {
        for (double sgn : {1.0, -1.0}) {
          Vec y = x;
          y[i] += sgn * step[i];
          y = clamp_chart(y);
          double dv = disp(y);
          if (dv < best) {
            best = dv;
            x = y;
            improved = true;
          }
        }
      }
      if (!improved) {
        double mx = 0;
        for (int i = 0; i < M.dim; ++i) {
          step[i] *= 0.5;
          mx = std::max(mx, step[i]);
        }
        if (mx < 1e-12) break;
      }
    }
    if (best <= tol) {
      FixedPointCandidate c;
      c.x = wrap_periodic(M, x);
      c.displacement = best;
      c.f_value = f.value ? f.value(c.x) : 0.0;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace cosym
