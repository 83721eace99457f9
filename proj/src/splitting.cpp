#include "cosym/splitting.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace cosym {

SectionSpec SectionSpec::user_basis(std::vector<OneForm> b) {
  SectionSpec s;
  s.method = Method::UserBasis;
  s.basis = std::move(b);
  return s;
}

Vec chart_base_point(const ManifoldChart& M) {
  Vec p(M.dim);
  for (int i = 0; i < M.dim; ++i) {
    const CoordInfo& c = M.coords[static_cast<size_t>(i)];
    p[i] = c.periodic() ? 0.0 : c.lo;
  }
  return p;
}

std::vector<Loop> coordinate_loops(const ManifoldChart& M) {
  // One loop per circle factor (polar angles are contractible on the disk and
  // do not generate H^1 of the modeled manifold).
  std::vector<Loop> loops;
  Vec base = chart_base_point(M);
  for (int i = 0; i < M.dim; ++i) {
    const CoordInfo& c = M.coords[static_cast<size_t>(i)];
    if (c.kind != CoordInfo::Kind::Periodic) continue;
    Loop l;
    double L = c.period;
    int idx = i;
    l.gamma = [base, idx, L](double t) {
      Vec p = base;
      p[idx] = -L / 2 + t * L;
      return p;
    };
    l.dgamma = [base, idx, L](double) {
      Vec v = Vec::Zero(base.size());
      v[idx] = L;
      return v;
    };
    l.label = c.label;
    loops.push_back(l);
  }
  return loops;
}

namespace {

// 5-point Gauss-Legendre on [0,1]
constexpr double kGx[5] = {0.04691007703066800, 0.23076534494715845, 0.5,
                           0.76923465505284155, 0.95308992296933200};
constexpr double kGw[5] = {0.11846344252809454, 0.23931433524968324,
                           0.28444444444444444, 0.23931433524968324,
                           0.11846344252809454};

double segment_integral(const OneForm& a, const Vec& from, const Vec& to) {
  Vec d = to - from;
  double s = 0;
  for (int q = 0; q < 5; ++q) {
    Vec p = from + kGx[q] * d;
    s += kGw[q] * a.coeff(p).dot(d);
  }
  return s;
}

// Potential values of an exact form over the tensor grid, by cumulative
// segment integration along grid lines (plus one path from the base point).
std::vector<double> grid_potential(const ManifoldChart& M, const OneForm& a,
                                   const GridSpec& g) {
  std::vector<std::vector<double>> nodes;
  for (int i = 0; i < M.dim; ++i) nodes.push_back(coordinate_nodes(M, g, i));
  std::vector<long> stride(static_cast<size_t>(M.dim), 1);
  for (int i = M.dim - 2; i >= 0; --i)
    stride[static_cast<size_t>(i)] =
        stride[static_cast<size_t>(i + 1)] *
        static_cast<long>(nodes[static_cast<size_t>(i + 1)].size());
  long total = stride[0] * static_cast<long>(nodes[0].size());
  std::vector<double> U(static_cast<size_t>(total));
  std::vector<size_t> idx(static_cast<size_t>(M.dim), 0);
  Vec p(M.dim);
  for (long flat = 0; flat < total; ++flat) {
    for (int i = 0; i < M.dim; ++i)
      p[i] = nodes[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
    // predecessor: decrement the first axis with nonzero index
    int j = -1;
    for (int i = 0; i < M.dim; ++i)
      if (idx[static_cast<size_t>(i)] > 0) {
        j = i;
        break;
      }
    if (j < 0) {
      U[static_cast<size_t>(flat)] =
          path_potential(M, a, p);  // single full path from the base point
    } else {
      Vec prev = p;
      prev[j] = nodes[static_cast<size_t>(j)][idx[static_cast<size_t>(j)] - 1];
      long pflat = flat - stride[static_cast<size_t>(j)];
      U[static_cast<size_t>(flat)] =
          U[static_cast<size_t>(pflat)] + segment_integral(a, prev, p);
    }
    int i = M.dim - 1;
    for (; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < nodes[static_cast<size_t>(i)].size())
        break;
      idx[static_cast<size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return U;
}

}  // namespace

double path_potential(const ManifoldChart& M, const OneForm& a, const Vec& p,
                      int quad_n) {
  Vec base = chart_base_point(M);
  Vec cur = base;
  double total = 0;
  int legs_per_coord = std::max(1, quad_n / 32);
  for (int i = 0; i < M.dim; ++i) {
    Vec next = cur;
    next[i] = p[i];
    for (int k = 0; k < legs_per_coord; ++k) {
      Vec a0 = cur + (next - cur) * (static_cast<double>(k) / legs_per_coord);
      Vec a1 =
          cur + (next - cur) * (static_cast<double>(k + 1) / legs_per_coord);
      total += segment_integral(a, a0, a1);
    }
    cur = next;
  }
  return total;
}

double osc(const ManifoldChart& M, const ScalarField& f, const GridSpec& g) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec& p : sample_grid(M, g)) {
    double v = f.value(p);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

SplitForm split_closed_form(const ManifoldChart& M, const OneForm& alpha,
                            const GridSpec& g, const SectionSpec& section,
                            double tol) {
  // closedness precondition
  TwoForm da = exterior_derivative(alpha);
  if (sup_norm(M, da, g) > tol)
    throw ContractError("split_closed_form: form is not closed");

  SplitForm out;
  std::vector<Loop> loops = coordinate_loops(M);

  if (section.method == SectionSpec::Method::CoefficientAverage) {
    // constant-coefficient representative: grid average of each periodic
    // coefficient (equal to the loop-integral class coefficients for closed
    // forms on flat products)
    Vec c = Vec::Zero(M.dim);
    auto grid = sample_grid(M, g);
    for (const Vec& p : grid) c += alpha.coeff(p);
    c /= static_cast<double>(grid.size());
    for (int i = 0; i < M.dim; ++i)
      if (M.coords[static_cast<size_t>(i)].kind != CoordInfo::Kind::Periodic)
        c[i] = 0;
    out.s_part = constant_one_form(c);
    out.s_coefficients = c;
  } else {
    if (section.basis.size() != loops.size())
      throw ContractError(
          "user-basis section: basis size must match the homology rank");
    int m = static_cast<int>(loops.size());
    Mat L(m, m);
    Vec b(m);
    for (int i = 0; i < m; ++i) {
      b[i] = line_integral(M, alpha, loops[static_cast<size_t>(i)]);
      for (int j = 0; j < m; ++j)
        L(i, j) = line_integral(M, section.basis[static_cast<size_t>(j)],
                                loops[static_cast<size_t>(i)]);
    }
    Eigen::FullPivLU<Mat> lu(L);
    if (!lu.isInvertible())
      throw ContractError("user-basis section: degenerate basis pairing");
    Vec c = lu.solve(b);
    OneForm s = constant_one_form(Vec::Zero(M.dim));
    for (int j = 0; j < m; ++j)
      s = add(s, section.basis[static_cast<size_t>(j)], 1.0, c[j]);
    out.s_part = s;
    out.s_coefficients = c;
  }

  OneForm beta = add(alpha, out.s_part, 1.0, -1.0);

  // consistency: the remainder must have vanishing loop integrals
  double worst = 0;
  for (const Loop& l : loops)
    worst = std::max(worst, std::abs(line_integral(M, beta, l)));
  out.closedness_residual = worst;
  if (worst > std::max(tol, 1e-6) * 100)
    throw ContractError(
        "split_closed_form: loop integrals of the exact part do not vanish");

  // potential on the grid (fast cumulative path) for the mean and oscillation
  std::vector<double> U = grid_potential(M, beta, g);
  double mean = std::accumulate(U.begin(), U.end(), 0.0) /
                static_cast<double>(U.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double u : U) {
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  out.osc_potential = hi - lo;
  ScalarField pot;
  ManifoldChart chart = M;
  pot.value = [chart, beta, mean](const Vec& p) {
    return path_potential(chart, beta, p) - mean;
  };
  out.exact_potential = pot;
  return out;
}

}  // namespace cosym
