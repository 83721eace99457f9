#include "cosym/forms.hpp"

#include <cmath>

namespace cosym {

double fd_step(double x) { return 1e-5 * (1.0 + std::abs(x)); }

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& p) {
  Vec g(p.size());
  Vec q = p;
  for (int i = 0; i < p.size(); ++i) {
    double h = fd_step(p[i]);
    q[i] = p[i] + h;
    double fp = f(q);
    q[i] = p[i] - h;
    double fm = f(q);
    q[i] = p[i];
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& p) {
  Vec f0 = f(p);
  Mat J(f0.size(), p.size());
  Vec q = p;
  for (int j = 0; j < p.size(); ++j) {
    double h = fd_step(p[j]);
    q[j] = p[j] + h;
    Vec fp = f(q);
    q[j] = p[j] - h;
    Vec fm = f(q);
    q[j] = p[j];
    J.col(j) = (fp - fm) / (2 * h);
  }
  return J;
}

Vec gradient(const ScalarField& f, const Vec& p) {
  return f.grad ? f.grad(p) : fd_gradient(f.value, p);
}

Mat one_form_jacobian(const OneForm& a, const Vec& p) {
  return a.dcoeff ? a.dcoeff(p) : fd_jacobian(a.coeff, p);
}

Mat map_jacobian(const SmoothMap& phi, const Vec& p) {
  return phi.jac ? phi.jac(p) : fd_jacobian(phi.fwd, p);
}

Mat field_jacobian(const VectorField& X, const Vec& p) {
  return X.jac ? X.jac(p) : fd_jacobian(X.value, p);
}

OneForm constant_one_form(const Vec& coeffs) {
  int d = static_cast<int>(coeffs.size());
  OneForm a;
  a.coeff = [coeffs](const Vec&) { return coeffs; };
  a.dcoeff = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
  return a;
}

TwoForm constant_two_form(const Mat& coeffs) {
  int d = static_cast<int>(coeffs.rows());
  TwoForm w;
  w.coeff = [coeffs](const Vec&) { return coeffs; };
  w.dcoeff = [d](const Vec&) {
    return std::vector<Mat>(static_cast<size_t>(d), Mat(Mat::Zero(d, d)));
  };
  return w;
}

VectorField constant_field(const Vec& v) {
  int d = static_cast<int>(v.size());
  VectorField X;
  X.value = [v](const Vec&) { return v; };
  X.jac = [d](const Vec&) { return Mat(Mat::Zero(d, d)); };
  return X;
}

ScalarField constant_scalar(double c, int dim) {
  ScalarField f;
  f.value = [c](const Vec&) { return c; };
  f.grad = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
  return f;
}

SmoothMap identity_map() {
  SmoothMap m;
  m.fwd = [](const Vec& p) { return p; };
  m.inv = [](const Vec& p) { return p; };
  m.jac = [](const Vec& p) {
    return Mat(Mat::Identity(p.size(), p.size()));
  };
  return m;
}

OneForm add(const OneForm& a, const OneForm& b, double sa, double sb) {
  OneForm c;
  c.coeff = [=](const Vec& p) { return Vec(sa * a.coeff(p) + sb * b.coeff(p)); };
  if (a.dcoeff && b.dcoeff)
    c.dcoeff = [=](const Vec& p) {
      return Mat(sa * a.dcoeff(p) + sb * b.dcoeff(p));
    };
  return c;
}

TwoForm add(const TwoForm& a, const TwoForm& b, double sa, double sb) {
  TwoForm c;
  c.coeff = [=](const Vec& p) { return Mat(sa * a.coeff(p) + sb * b.coeff(p)); };
  if (a.dcoeff && b.dcoeff)
    c.dcoeff = [=](const Vec& p) {
      auto da = a.dcoeff(p);
      auto db = b.dcoeff(p);
      std::vector<Mat> out(da.size());
      for (size_t k = 0; k < da.size(); ++k) out[k] = sa * da[k] + sb * db[k];
      return out;
    };
  return c;
}

VectorField add(const VectorField& X, const VectorField& Y, double sx,
                double sy) {
  VectorField Z;
  Z.value = [=](const Vec& p) { return Vec(sx * X.value(p) + sy * Y.value(p)); };
  if (X.jac && Y.jac)
    Z.jac = [=](const Vec& p) { return Mat(sx * X.jac(p) + sy * Y.jac(p)); };
  return Z;
}

KForm as_kform(const OneForm& a) {
  KForm k;
  k.degree = 1;
  k.eval = [a](const Vec& p, const std::vector<Vec>& v) {
    return a.coeff(p).dot(v.at(0));
  };
  return k;
}

KForm as_kform(const TwoForm& w) {
  KForm k;
  k.degree = 2;
  k.eval = [w](const Vec& p, const std::vector<Vec>& v) {
    return v.at(0).dot(w.coeff(p) * v.at(1));
  };
  return k;
}

OneForm exterior_derivative(const ScalarField& f) {
  OneForm a;
  a.coeff = [f](const Vec& p) { return gradient(f, p); };
  if (f.grad)
    a.dcoeff = [f](const Vec& p) {
      // Hessian by FD of the analytic gradient (symmetrized)
      Mat H = fd_jacobian(f.grad, p);
      return Mat(0.5 * (H + H.transpose()));
    };
  return a;
}

TwoForm exterior_derivative(const OneForm& a) {
  TwoForm w;
  w.coeff = [a](const Vec& p) {
    Mat J = one_form_jacobian(a, p);
    // (da)_ij = d_i a_j - d_j a_i ; J(i,j) = d a_i / d x_j
    return Mat(J.transpose() - J);
  };
  return w;
}

KForm exterior_derivative_3(const TwoForm& w) {
  KForm c3;
  c3.degree = 3;
  c3.eval = [w](const Vec& p, const std::vector<Vec>& v) {
    int d = static_cast<int>(p.size());
    std::vector<Mat> dw;
    if (w.dcoeff) {
      dw = w.dcoeff(p);
    } else {
      dw.assign(static_cast<size_t>(d), Mat());
      Vec q = p;
      for (int k = 0; k < d; ++k) {
        double h = fd_step(p[k]);
        q[k] = p[k] + h;
        Mat wp = w.coeff(q);
        q[k] = p[k] - h;
        Mat wm = w.coeff(q);
        q[k] = p[k];
        dw[static_cast<size_t>(k)] = (wp - wm) / (2 * h);
      }
    }
    // (dw)(u,v,z) = sum_k u_k (d_k w)(v,z) - v_k (d_k w)(u,z) + z_k (d_k w)(u,v)
    const Vec &u = v.at(0), &vv = v.at(1), &z = v.at(2);
    double s = 0;
    for (int k = 0; k < d; ++k) {
      const Mat& D = dw[static_cast<size_t>(k)];
      s += u[k] * vv.dot(D * z) - vv[k] * u.dot(D * z) + z[k] * u.dot(D * vv);
    }
    return s;
  };
  return c3;
}

namespace {
// iterate over (k, l)-shuffles of {0, ..., k+l-1}
void shuffles(int k, int n, std::vector<int>& pick,
              const std::function<void(const std::vector<int>&)>& visit,
              int start = 0) {
  if (static_cast<int>(pick.size()) == k) {
    visit(pick);
    return;
  }
  for (int i = start; i < n; ++i) {
    pick.push_back(i);
    shuffles(k, n, pick, visit, i + 1);
    pick.pop_back();
  }
}
}  // namespace

KForm wedge(const KForm& a, const KForm& b) {
  KForm c;
  c.degree = a.degree + b.degree;
  int ka = a.degree, kb = b.degree;
  c.eval = [a, b, ka, kb](const Vec& p, const std::vector<Vec>& v) {
    int n = ka + kb;
    if (static_cast<int>(v.size()) != n)
      throw ContractError("wedge: argument count mismatch");
    double total = 0;
    std::vector<int> pick;
    shuffles(ka, n, pick, [&](const std::vector<int>& sel) {
      std::vector<char> in(static_cast<size_t>(n), 0);
      std::vector<Vec> va, vb;
      for (int i : sel) in[static_cast<size_t>(i)] = 1;
      // sign of the shuffle permutation
      int inv = 0;
      {
        int seen_b = 0;
        for (int i = 0; i < n; ++i) {
          if (in[static_cast<size_t>(i)])
            inv += seen_b;
          else
            ++seen_b;
        }
      }
      for (int i = 0; i < n; ++i)
        (in[static_cast<size_t>(i)] ? va : vb).push_back(v[static_cast<size_t>(i)]);
      double sign = (inv % 2 == 0) ? 1.0 : -1.0;
      total += sign * a.eval(p, va) * b.eval(p, vb);
    });
    return total;
  };
  return c;
}

KForm wedge_power(const KForm& a, int n) {
  if (n < 0) throw ContractError("wedge_power: negative power");
  if (n == 0) {
    KForm one;
    one.degree = 0;
    one.eval = [](const Vec&, const std::vector<Vec>&) { return 1.0; };
    return one;
  }
  KForm out = a;
  for (int i = 1; i < n; ++i) out = wedge(out, a);
  return out;
}

ScalarField interior_product(const VectorField& X, const OneForm& a) {
  ScalarField f;
  f.value = [X, a](const Vec& p) { return a.coeff(p).dot(X.value(p)); };
  return f;
}

OneForm interior_product(const VectorField& X, const TwoForm& w) {
  OneForm a;
  // (i_X w)(Y) = w(X, Y): coefficients = w^T... row X: c_j = sum_i X_i w_ij
  a.coeff = [X, w](const Vec& p) {
    return Vec(w.coeff(p).transpose() * X.value(p));
  };
  return a;
}

TwoForm interior_product_3(const VectorField& X, const KForm& c3) {
  if (c3.degree != 3) throw ContractError("interior_product_3 needs degree 3");
  TwoForm w;
  w.coeff = [X, c3](const Vec& p) {
    int d = static_cast<int>(p.size());
    Mat out(d, d);
    Vec x = X.value(p);
    std::vector<Vec> args(3, Vec(Vec::Zero(d)));
    args[0] = x;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (j <= i) {
          out(i, j) = (i == j) ? 0.0 : -out(j, i);
          continue;
        }
        args[1] = Vec(Vec::Zero(d));
        args[1][i] = 1;
        args[2] = Vec(Vec::Zero(d));
        args[2][j] = 1;
        out(i, j) = c3.eval(p, args);
      }
    return out;
  };
  return w;
}

ScalarField lie_derivative(const VectorField& X, const ScalarField& f) {
  ScalarField g;
  g.value = [X, f](const Vec& p) { return gradient(f, p).dot(X.value(p)); };
  return g;
}

OneForm lie_derivative(const VectorField& X, const OneForm& a) {
  // L_X a = i_X(da) + d(a(X))
  OneForm t1 = interior_product(X, exterior_derivative(a));
  OneForm t2 = exterior_derivative(interior_product(X, a));
  return add(t1, t2);
}

TwoForm lie_derivative(const VectorField& X, const TwoForm& w) {
  TwoForm t1 = interior_product_3(X, exterior_derivative_3(w));
  TwoForm t2 = exterior_derivative(interior_product(X, w));
  return add(t1, t2);
}

ScalarField pullback(const SmoothMap& phi, const ScalarField& f) {
  ScalarField g;
  g.value = [phi, f](const Vec& p) { return f.value(phi.fwd(p)); };
  return g;
}

OneForm pullback(const SmoothMap& phi, const OneForm& a) {
  OneForm b;
  b.coeff = [phi, a](const Vec& p) {
    Mat J = map_jacobian(phi, p);
    return Vec(J.transpose() * a.coeff(phi.fwd(p)));
  };
  return b;
}

TwoForm pullback(const SmoothMap& phi, const TwoForm& w) {
  TwoForm u;
  u.coeff = [phi, w](const Vec& p) {
    Mat J = map_jacobian(phi, p);
    return Mat(J.transpose() * w.coeff(phi.fwd(p)) * J);
  };
  return u;
}

VectorField pushforward_field(const SmoothMap& phi, const VectorField& X) {
  if (!phi.inv)
    throw ContractError("pushforward_field needs an inverse evaluator");
  VectorField Y;
  Y.value = [phi, X](const Vec& y) {
    Vec x = phi.inv(y);
    return Vec(map_jacobian(phi, x) * X.value(x));
  };
  return Y;
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  VectorField Z;
  Z.value = [X, Y](const Vec& p) {
    return Vec(field_jacobian(Y, p) * X.value(p) -
               field_jacobian(X, p) * Y.value(p));
  };
  return Z;
}

double covector_norm(const ManifoldChart& M, const Vec& a, const Vec& p) {
  double s = 0;
  for (int i = 0; i < M.dim; ++i) s += a[i] * a[i] / M.metric_weight(i, p);
  return std::sqrt(s);
}

double vector_norm(const ManifoldChart& M, const Vec& v, const Vec& p) {
  double s = 0;
  for (int i = 0; i < M.dim; ++i) s += M.metric_weight(i, p) * v[i] * v[i];
  return std::sqrt(s);
}

double sup_norm(const ManifoldChart& M, const OneForm& a, const GridSpec& g) {
  double m = 0;
  for (const Vec& p : sample_grid(M, g))
    m = std::max(m, covector_norm(M, a.coeff(p), p));
  return m;
}

double sup_norm(const ManifoldChart& M, const VectorField& X,
                const GridSpec& g) {
  double m = 0;
  for (const Vec& p : sample_grid(M, g))
    m = std::max(m, vector_norm(M, X.value(p), p));
  return m;
}

double sup_norm(const ManifoldChart& M, const ScalarField& f,
                const GridSpec& g) {
  double m = 0;
  for (const Vec& p : sample_grid(M, g)) m = std::max(m, std::abs(f.value(p)));
  return m;
}

double sup_norm(const ManifoldChart& M, const TwoForm& w, const GridSpec& g) {
  double m = 0;
  for (const Vec& p : sample_grid(M, g))
    m = std::max(m, w.coeff(p).cwiseAbs().maxCoeff());
  return m;
}

double sup_norm_3(const ManifoldChart& M, const KForm& c3, const GridSpec& g) {
  if (c3.degree != 3) throw ContractError("sup_norm_3 needs degree 3");
  double m = 0;
  int d = M.dim;
  std::vector<Vec> args(3, Vec(Vec::Zero(d)));
  for (const Vec& p : sample_grid(M, g))
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
          args[0] = Vec(Vec::Zero(d));
          args[0][i] = 1;
          args[1] = Vec(Vec::Zero(d));
          args[1][j] = 1;
          args[2] = Vec(Vec::Zero(d));
          args[2][k] = 1;
          m = std::max(m, std::abs(c3.eval(p, args)));
        }
  return m;
}

namespace {
double top_coefficient(const ManifoldChart& M, const KForm& top, const Vec& p) {
  int d = M.dim;
  std::vector<Vec> basis;
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1;
    basis.push_back(e);
  }
  return top.eval(p, basis);
}
}  // namespace

double sup_norm_top(const ManifoldChart& M, const KForm& top,
                    const GridSpec& g) {
  double m = 0;
  for (const Vec& p : sample_grid(M, g))
    m = std::max(m, std::abs(top_coefficient(M, top, p)));
  return m;
}

double integrate_scalar_against_top_form(
    const ManifoldChart& M, const std::function<double(const Vec&)>& f,
    const KForm& top, const GridSpec& g) {
  if (top.degree != M.dim)
    throw ContractError("integrate_top_form: degree != dim");
  std::vector<std::vector<double>> nodes, weights;
  for (int i = 0; i < M.dim; ++i) {
    nodes.push_back(coordinate_nodes(M, g, i));
    weights.push_back(coordinate_weights(M, g, i));
  }
  double total = 0;
  std::vector<size_t> idx(static_cast<size_t>(M.dim), 0);
  Vec p(M.dim);
  while (true) {
    double w = 1;
    for (int i = 0; i < M.dim; ++i) {
      p[i] = nodes[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
      w *= weights[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
    }
    double c = top_coefficient(M, top, p);
    total += w * c * (f ? f(p) : 1.0);
    int i = M.dim - 1;
    for (; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < nodes[static_cast<size_t>(i)].size()) break;
      idx[static_cast<size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return total;
}

double integrate_top_form(const ManifoldChart& M, const KForm& top,
                          const GridSpec& g) {
  return integrate_scalar_against_top_form(M, nullptr, top, g);
}

double line_integral(const ManifoldChart& M, const OneForm& a, const Loop& loop,
                     int n) {
  if (n < 8) throw ContractError("line_integral: need n >= 8");
  // closedness on the chart (endpoints may differ by deck translations)
  if (point_distance(M, canonicalize(M, loop.gamma(0.0)),
                     canonicalize(M, loop.gamma(1.0))) > 1e-8)
    throw ContractError("line_integral: loop is not closed");
  auto tangent = [&](double t) {
    if (loop.dgamma) return loop.dgamma(t);
    double h = 1e-6;
    return Vec((loop.gamma(t + h) - loop.gamma(t - h)) / (2 * h));
  };
  // composite trapezoid; integrand is 1-periodic in the parameter, so uniform
  // weights over n subintervals
  double total = 0;
  for (int k = 0; k < n; ++k) {
    double t = (k + 0.5) / n;
    total += a.coeff(loop.gamma(t)).dot(tangent(t));
  }
  return total / n;
}

}  // namespace cosym
