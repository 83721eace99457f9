#include "cosym/catalog.hpp"

#include <numbers>

namespace cosym::catalog {

namespace {
constexpr double kTau = 2 * std::numbers::pi;

TwoForm torus_omega(int l, int dim) {
  // omega = sum_{i<l} dtheta_i ^ dtheta_{l+i} on T^{2l} x S^1 coordinates
  Mat W = Mat::Zero(dim, dim);
  for (int i = 0; i < l; ++i) {
    W(i, l + i) = 1;
    W(l + i, i) = -1;
  }
  return constant_two_form(W);
}

OneForm coordinate_form(int dim, int k) {
  Vec c = Vec::Zero(dim);
  c[k] = 1;
  return constant_one_form(c);
}
}  // namespace

ManifoldChart t2s1() {
  return build_manifold({FactorSpec::circle(kTau, "theta1"),
                         FactorSpec::circle(kTau, "theta2"),
                         FactorSpec::circle(kTau, "s")});
}

ManifoldChart t4s1() {
  return build_manifold(
      {FactorSpec::circle(kTau, "theta1"), FactorSpec::circle(kTau, "theta2"),
       FactorSpec::circle(kTau, "theta3"), FactorSpec::circle(kTau, "theta4"),
       FactorSpec::circle(kTau, "s")});
}

ManifoldChart d2s1() {
  return build_manifold(
      {FactorSpec::polar_disk(1e-3, 1.0, "r"), FactorSpec::circle(kTau, "s")});
}

ManifoldChart darboux_box() {
  return build_manifold({FactorSpec::box(-1, 1, "x"), FactorSpec::box(-1, 1, "y"),
                         FactorSpec::box(-1, 1, "z")});
}

CosymplecticStructure standard_t2s1() {
  return make_structure(t2s1(), coordinate_form(3, 2), torus_omega(1, 3));
}

CosymplecticStructure standard_t4s1() {
  return make_structure(t4s1(), coordinate_form(5, 4), torus_omega(2, 5));
}

CosymplecticStructure standard_d2s1() {
  // coordinates (r, theta, s); omega = r dr ^ dtheta, eta = ds
  TwoForm w;
  w.coeff = [](const Vec& p) {
    Mat W = Mat::Zero(3, 3);
    W(0, 1) = p[0];
    W(1, 0) = -p[0];
    return W;
  };
  w.dcoeff = [](const Vec&) {
    std::vector<Mat> d(3, Mat(Mat::Zero(3, 3)));
    d[0](0, 1) = 1;
    d[0](1, 0) = -1;
    return d;
  };
  return make_structure(d2s1(), coordinate_form(3, 2), w);
}

CosymplecticStructure standard_darboux() {
  Mat W = Mat::Zero(3, 3);
  W(0, 1) = 1;
  W(1, 0) = -1;
  return make_structure(darboux_box(), coordinate_form(3, 2),
                        constant_two_form(W));
}

CosymplecticStructure twisted_darboux() {
  Mat W = Mat::Zero(3, 3);
  W(0, 1) = 1;
  W(1, 0) = -1;
  W(0, 2) = 1;
  W(2, 0) = -1;
  return make_structure(darboux_box(), coordinate_form(3, 2),
                        constant_two_form(W));
}

CosymplecticStructure by_name(const std::string& name) {
  if (name == "t2s1") return standard_t2s1();
  if (name == "t4s1") return standard_t4s1();
  if (name == "d2s1") return standard_d2s1();
  if (name == "darboux") return standard_darboux();
  if (name == "twisted-darboux") return twisted_darboux();
  throw ContractError("unknown structure: " + name);
}

std::vector<std::string> structure_names() {
  return {"t2s1", "t4s1", "d2s1", "darboux", "twisted-darboux"};
}

}  // namespace cosym::catalog
