#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cosym/catalog.hpp"
#include "cosym/forms.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cosym;

namespace {
constexpr double kPi = std::numbers::pi;

Vec pt(std::initializer_list<double> v) {
  Vec p(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// random trigonometric scalar field on a periodic chart
ScalarField random_trig(std::mt19937& rng, int dim) {
  std::uniform_real_distribution<double> amp(-1, 1);
  std::uniform_int_distribution<int> freq(1, 2);
  std::vector<double> a(static_cast<size_t>(dim)), ph(static_cast<size_t>(dim));
  std::vector<int> k(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) {
    a[static_cast<size_t>(i)] = amp(rng);
    ph[static_cast<size_t>(i)] = kPi * amp(rng);
    k[static_cast<size_t>(i)] = freq(rng);
  }
  ScalarField f;
  f.value = [=](const Vec& p) {
    double s = 0;
    for (int i = 0; i < dim; ++i)
      s += a[static_cast<size_t>(i)] *
           std::sin(k[static_cast<size_t>(i)] * p[i] + ph[static_cast<size_t>(i)]);
    return s;
  };
  return f;
}
}  // namespace

TEST_CASE("exterior derivative of scalars and 1-forms") {
  auto t3 = catalog::t2s1();
  auto g = GridSpec::uniform(t3, 12, 13);

  ScalarField f;
  f.value = [](const Vec& p) { return std::cos(p[0]); };
  OneForm df = exterior_derivative(f);
  for (const Vec& p : sample_grid(t3, g)) {
    Vec c = df.coeff(p);
    CHECK(c[0] == doctest::Approx(-std::sin(p[0])).epsilon(1e-8));
    CHECK(std::abs(c[1]) < 1e-9);
  }

  // d of a constant-coefficient form vanishes
  OneForm a = constant_one_form(pt({3, 0, 0}));
  CHECK(sup_norm(t3, exterior_derivative(a), g) < 1e-12);

  // d(eps sin(t1) dt2) = eps cos(t1) dt1^dt2
  double eps = 0.5;
  OneForm b;
  b.coeff = [eps](const Vec& p) { return pt({0, eps * std::sin(p[0]), 0}); };
  TwoForm db = exterior_derivative(b);
  for (const Vec& p : sample_grid(t3, g)) {
    Mat w = db.coeff(p);
    CHECK(w(0, 1) == doctest::Approx(eps * std::cos(p[0])).epsilon(1e-8));
    CHECK(std::abs(w(0, 2)) < 1e-9);
    CHECK(std::abs(w(1, 2)) < 1e-9);
  }
}

TEST_CASE("d o d = 0 on random fields") {
  auto t3 = catalog::t2s1();
  auto g = GridSpec::uniform(t3, 8, 9);
  std::mt19937 rng(7);
  for (int it = 0; it < 20; ++it) {
    ScalarField f = random_trig(rng, 3);
    CHECK(sup_norm(t3, exterior_derivative(exterior_derivative(f)), g) < 1e-6);
    ScalarField fa = f;
    fa.grad = [f](const Vec& p) { return fd_gradient(f.value, p); };
    // analytic-gradient branch: the Hessian is symmetrized, so dd == 0 sharply
    CHECK(sup_norm(t3, exterior_derivative(exterior_derivative(fa)), g) <
          1e-12);
  }
}

TEST_CASE("wedge products and volume forms") {
  auto box = catalog::darboux_box();
  auto S = catalog::standard_darboux();
  Vec p = pt({0.1, -0.2, 0.3});
  std::vector<Vec> basis = {pt({1, 0, 0}), pt({0, 1, 0}), pt({0, 0, 1})};

  // dz ^ (dx^dy) has unit coefficient against (ex, ey, ez)
  KForm vol = wedge(as_kform(S.eta), as_kform(S.omega));
  CHECK(vol.eval(p, basis) == doctest::Approx(1.0));

  // dt1 ^ dt1 = 0
  auto t3 = catalog::t2s1();
  OneForm dt1 = constant_one_form(pt({1, 0, 0}));
  KForm zero = wedge(as_kform(dt1), as_kform(dt1));
  CHECK(zero.eval(p, {pt({1, 0, 0}), pt({0, 1, 0})}) == doctest::Approx(0.0));

  // integral of eta^omega over T^2 x S^1 is (2 pi)^3
  auto St = catalog::standard_t2s1();
  auto g = GridSpec::uniform(t3, 16, 17);
  double V = integrate_top_form(t3, St.volume_form(), g);
  CHECK(V == doctest::Approx(std::pow(2 * kPi, 3)).epsilon(1e-12));

  CHECK_THROWS_AS(
      wedge(as_kform(dt1), as_kform(dt1)).eval(p, {pt({1, 0, 0})}),
      ContractError);
}

TEST_CASE("interior products") {
  auto S = catalog::standard_darboux();
  Vec p = pt({0, 0, 0});

  OneForm i1 = interior_product(constant_field(pt({1, 0, 0})), S.omega);
  CHECK((i1.coeff(p) - pt({0, 1, 0})).norm() < 1e-14);  // i_dx(dx^dy) = dy

  OneForm i2 = interior_product(constant_field(pt({0, 0, 1})), S.omega);
  CHECK(i2.coeff(p).norm() < 1e-14);  // i_dz(dx^dy) = 0

  // i_{dt1}(dt1^dt2 + dt1^ds) = dt2 + ds
  auto tw = catalog::twisted_darboux();
  OneForm i3 = interior_product(constant_field(pt({1, 0, 0})), tw.omega);
  CHECK((i3.coeff(p) - pt({0, 1, 1})).norm() < 1e-14);
}

TEST_CASE("Lie derivatives via Cartan") {
  auto S = catalog::standard_darboux();
  auto g = GridSpec::uniform(S.chart, 4, 7);

  // L_xi eta = 0 for the Reeb field of the Darboux structure
  VectorField xi = constant_field(pt({0, 0, 1}));
  CHECK(sup_norm(S.chart, lie_derivative(xi, S.eta), g) < 1e-10);

  // L_{z dz}(dz) = dz
  VectorField zdz;
  zdz.value = [](const Vec& p) { return pt({0, 0, p[2]}); };
  OneForm L = lie_derivative(zdz, S.eta);
  for (const Vec& p : sample_grid(S.chart, g)) {
    CHECK((L.coeff(p) - pt({0, 0, 1})).norm() < 1e-6);
  }

  // L_X omega = 0 for constant X on T^2 x S^1
  auto St = catalog::standard_t2s1();
  auto gt = GridSpec::uniform(St.chart, 6, 7);
  TwoForm Lw = lie_derivative(constant_field(pt({1, 0, 0})), St.omega);
  CHECK(sup_norm(St.chart, Lw, gt) < 1e-9);
}

TEST_CASE("Cartan consistency L_X dF = d L_X F") {
  auto t3 = catalog::t2s1();
  auto g = GridSpec::uniform(t3, 8, 9);
  std::mt19937 rng(11);
  for (int it = 0; it < 5; ++it) {
    ScalarField F = random_trig(rng, 3);
    ScalarField c1 = random_trig(rng, 3), c2 = random_trig(rng, 3),
                c3 = random_trig(rng, 3);
    VectorField X;
    X.value = [=](const Vec& p) {
      return pt({c1.value(p), c2.value(p), c3.value(p)});
    };
    OneForm lhs = lie_derivative(X, exterior_derivative(F));
    OneForm rhs = exterior_derivative(lie_derivative(X, F));
    CHECK(sup_norm(t3, add(lhs, rhs, 1, -1), g) < 1e-5);
  }
}

TEST_CASE("pullback and pushforward") {
  auto t3 = catalog::t2s1();
  auto g = GridSpec::uniform(t3, 8, 9);
  auto St = catalog::standard_t2s1();

  // id^* omega = omega
  SmoothMap id = identity_map();
  CHECK(sup_norm(t3, add(pullback(id, St.omega), St.omega, 1, -1), g) < 1e-12);

  // translations pull back constant forms to themselves
  SmoothMap rot;
  rot.fwd = [](const Vec& p) { return Vec(p + pt({0.4, 0.7, 0})); };
  rot.inv = [](const Vec& p) { return Vec(p - pt({0.4, 0.7, 0})); };
  OneForm dt1 = constant_one_form(pt({1, 0, 0}));
  CHECK(sup_norm(t3, add(pullback(rot, dt1), dt1, 1, -1), g) < 1e-9);
  VectorField e1 = constant_field(pt({1, 0, 0}));
  for (const Vec& p : sample_grid(t3, g))
    CHECK((pushforward_field(rot, e1).value(p) - pt({1, 0, 0})).norm() < 1e-9);

  // psi(x,y,z) = (x, y, e^c z): psi^* dz = e^c dz, psi_* dz-field = e^c dz-field
  double c = 0.3;
  auto box = catalog::darboux_box();
  SmoothMap psi;
  psi.fwd = [c](const Vec& p) { return pt({p[0], p[1], std::exp(c) * p[2]}); };
  psi.inv = [c](const Vec& p) { return pt({p[0], p[1], std::exp(-c) * p[2]}); };
  psi.jac = [c](const Vec&) {
    Mat J = Mat::Identity(3, 3);
    J(2, 2) = std::exp(c);
    return J;
  };
  OneForm dz = constant_one_form(pt({0, 0, 1}));
  auto gb = GridSpec::uniform(box, 4, 5);
  for (const Vec& p : sample_grid(box, gb)) {
    CHECK((pullback(psi, dz).coeff(p) - pt({0, 0, std::exp(c)})).norm() <
          1e-12);
    CHECK((pushforward_field(psi, constant_field(pt({0, 0, 1}))).value(p) -
           pt({0, 0, std::exp(c)}))
              .norm() < 1e-12);
  }

  // naturality: phi^*(dF) = d(phi^* F), phi^*(a ^ b) = phi^* a ^ phi^* b
  std::mt19937 rng(3);
  ScalarField F = random_trig(rng, 3);
  SmoothMap wavy;
  wavy.fwd = [](const Vec& p) {
    return pt({p[0] + 0.2 * std::sin(p[1]), p[1], p[2] + 0.1 * std::cos(p[0])});
  };
  OneForm n1 = pullback(wavy, exterior_derivative(F));
  OneForm n2 = exterior_derivative(pullback(wavy, F));
  CHECK(sup_norm(t3, add(n1, n2, 1, -1), g) < 1e-6);

  ScalarField G = random_trig(rng, 3);
  OneForm a = exterior_derivative(F), b = exterior_derivative(G);
  TwoForm ab;
  ab.coeff = [a, b](const Vec& p) {
    Vec ca = a.coeff(p), cb = b.coeff(p);
    return Mat(ca * cb.transpose() - cb * ca.transpose());
  };
  TwoForm lhs = pullback(wavy, ab);
  TwoForm rhs;
  OneForm pa = pullback(wavy, a), pb = pullback(wavy, b);
  rhs.coeff = [pa, pb](const Vec& p) {
    Vec ca = pa.coeff(p), cb = pb.coeff(p);
    return Mat(ca * cb.transpose() - cb * ca.transpose());
  };
  CHECK(sup_norm(t3, add(lhs, rhs, 1, -1), g) < 1e-6);

  // duality: (phi^* alpha)(X) = alpha(phi_* X) o phi
  SmoothMap wavyi = wavy;  // numeric inverse via fixed point (small perturbation)
  wavyi.inv = [](const Vec& y) {
    Vec x = y;
    for (int it = 0; it < 50; ++it) {
      x[0] = y[0] - 0.2 * std::sin(x[1]);
      x[2] = y[2] - 0.1 * std::cos(x[0]);
    }
    return x;
  };
  VectorField X;
  X.value = [G](const Vec& p) { return pt({G.value(p), 0.3, 0.1}); };
  ScalarField lhs2 = interior_product(X, pullback(wavyi, a));
  VectorField pX = pushforward_field(wavyi, X);
  ScalarField aX = interior_product(pX, a);
  for (const Vec& p : sample_grid(t3, GridSpec::uniform(t3, 5, 5)))
    CHECK(lhs2.value(p) ==
          doctest::Approx(aX.value(wavyi.fwd(p))).epsilon(1e-6));
}

TEST_CASE("brackets") {
  auto box = catalog::darboux_box();
  auto g = GridSpec::uniform(box, 4, 5);
  Vec p = pt({0.2, -0.3, 0.4});

  CHECK(lie_bracket(constant_field(pt({1, 0, 0})),
                    constant_field(pt({0, 1, 0})))
            .value(p)
            .norm() < 1e-12);

  // [x dy, dx] = -dy
  VectorField xdy;
  xdy.value = [](const Vec& q) { return pt({0, q[0], 0}); };
  VectorField dx = constant_field(pt({1, 0, 0}));
  CHECK((lie_bracket(xdy, dx).value(p) - pt({0, -1, 0})).norm() < 1e-8);

  // antisymmetry and Jacobi on random trig triples
  auto t3 = catalog::t2s1();
  std::mt19937 rng(5);
  auto rnd_field = [&]() {
    ScalarField f1 = random_trig(rng, 3), f2 = random_trig(rng, 3),
                f3 = random_trig(rng, 3);
    VectorField X;
    X.value = [=](const Vec& q) {
      return pt({f1.value(q), f2.value(q), f3.value(q)});
    };
    return X;
  };
  VectorField A = rnd_field(), B = rnd_field(), C = rnd_field();
  auto gt = GridSpec::uniform(t3, 5, 5);
  CHECK(sup_norm(t3, add(lie_bracket(A, B), lie_bracket(B, A), 1, 1), gt) <
        1e-6);
  VectorField jac = add(add(lie_bracket(A, lie_bracket(B, C)),
                            lie_bracket(B, lie_bracket(C, A))),
                        lie_bracket(C, lie_bracket(A, B)));
  CHECK(sup_norm(t3, jac, gt) < 1e-4);
}

TEST_CASE("sup norms") {
  auto t3 = catalog::t2s1();
  auto g = GridSpec::uniform(t3, 8, 9);
  CHECK(sup_norm(t3, constant_one_form(pt({1, 0, 0})), g) ==
        doctest::Approx(1.0));
  CHECK(sup_norm(t3, constant_one_form(pt({3, 4, 0})), g) ==
        doctest::Approx(5.0));
}

TEST_CASE("quadrature") {
  auto t3 = catalog::t2s1();
  OneForm dt1 = constant_one_form(pt({1, 0, 0}));

  // loop pairing: integral of dt1 over the theta1 circle is 2 pi
  Loop l;
  l.gamma = [](double t) { return pt({-kPi + 2 * kPi * t, 0, 0}); };
  l.dgamma = [](double) { return pt({2 * kPi, 0, 0}); };
  CHECK(line_integral(t3, dt1, l) == doctest::Approx(2 * kPi).epsilon(1e-12));

  // area of the disk in polar coordinates (r dr^dtheta): pi (minus the
  // r_min^2 exclusion)
  auto Sd = catalog::standard_d2s1();
  auto gd = GridSpec::uniform(Sd.chart, 32, 33);
  // integrate the 2-form over the disk through the volume form / (2 pi)
  double V =
      integrate_top_form(Sd.chart, Sd.volume_form(), gd) / (2 * kPi);
  CHECK(V == doctest::Approx(kPi * (1 - 1e-6)).epsilon(1e-10));

  // non-closed curve is rejected
  Loop open_curve;
  open_curve.gamma = [](double t) { return pt({t, 0, 0}); };
  CHECK_THROWS_AS(line_integral(t3, dt1, open_curve), ContractError);
}
