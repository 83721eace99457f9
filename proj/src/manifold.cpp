#include "cosym/manifold.hpp"

#include <cmath>
#include <numbers>

namespace cosym {

FactorSpec FactorSpec::circle(double period, std::string label) {
  if (!(period > 0)) throw ChartError("circle factor needs period > 0");
  FactorSpec f;
  f.kind = Kind::Circle;
  f.period = period;
  f.label = std::move(label);
  return f;
}

FactorSpec FactorSpec::box(double lo, double hi, std::string label) {
  if (!(lo < hi)) throw ChartError("box factor needs lo < hi");
  FactorSpec f;
  f.kind = Kind::Box;
  f.lo = lo;
  f.hi = hi;
  f.label = std::move(label);
  return f;
}

FactorSpec FactorSpec::polar_disk(double r_min, double r_max,
                                  std::string label) {
  if (!(0 < r_min && r_min < r_max && r_max <= 1.0))
    throw ChartError("polar disk needs 0 < r_min < r_max <= 1");
  FactorSpec f;
  f.kind = Kind::PolarDisk;
  f.r_min = r_min;
  f.r_max = r_max;
  f.label = std::move(label);
  return f;
}

ManifoldChart build_manifold(const std::vector<FactorSpec>& spec,
                             bool cosymplectic_use) {
  if (spec.empty()) throw ChartError("empty factor list");
  ManifoldChart M;
  M.factors = spec;
  for (const auto& f : spec) {
    switch (f.kind) {
      case FactorSpec::Kind::Circle: {
        CoordInfo c;
        c.kind = CoordInfo::Kind::Periodic;
        c.period = f.period;
        c.label = f.label;
        M.coords.push_back(c);
        break;
      }
      case FactorSpec::Kind::Box: {
        CoordInfo c;
        c.kind = CoordInfo::Kind::Box;
        c.lo = f.lo;
        c.hi = f.hi;
        c.label = f.label;
        M.coords.push_back(c);
        break;
      }
      case FactorSpec::Kind::PolarDisk: {
        CoordInfo r;
        r.kind = CoordInfo::Kind::Radial;
        r.lo = f.r_min;
        r.hi = f.r_max;
        r.label = f.label;
        M.coords.push_back(r);
        CoordInfo a;
        a.kind = CoordInfo::Kind::PolarAngle;
        a.period = 2 * std::numbers::pi;
        a.radial_index = static_cast<int>(M.coords.size()) - 1;
        a.label = f.label + "_angle";
        M.coords.push_back(a);
        break;
      }
    }
  }
  M.dim = static_cast<int>(M.coords.size());
  if (cosymplectic_use && (M.dim < 3 || M.dim % 2 == 0))
    throw ChartError("cosymplectic charts need odd dimension >= 3, got dim=" +
                     std::to_string(M.dim));
  return M;
}

double ManifoldChart::metric_weight(int i, const Vec& p) const {
  const CoordInfo& c = coords.at(static_cast<size_t>(i));
  if (c.kind == CoordInfo::Kind::PolarAngle) {
    double r = p[c.radial_index];
    return r * r;
  }
  return 1.0;
}

static double wrap_centered(double x, double L) {
  double y = std::fmod(x + L / 2, L);
  if (y < 0) y += L;
  return y - L / 2;
}

Vec canonicalize(const ManifoldChart& M, const Vec& p, double tol) {
  if (p.size() != M.dim) throw ContractError("point dimension mismatch");
  Vec q = p;
  for (int i = 0; i < M.dim; ++i) {
    const CoordInfo& c = M.coords[static_cast<size_t>(i)];
    if (!std::isfinite(q[i])) throw ChartError("non-finite coordinate");
    if (c.periodic()) {
      q[i] = wrap_centered(q[i], c.period);
    } else {
      if (q[i] < c.lo - tol || q[i] > c.hi + tol)
        throw ChartError("coordinate " + c.label + "=" + std::to_string(q[i]) +
                         " outside [" + std::to_string(c.lo) + "," +
                         std::to_string(c.hi) + "]");
      q[i] = std::min(std::max(q[i], c.lo), c.hi);
    }
  }
  return q;
}

GridSpec GridSpec::uniform(const ManifoldChart& M, int periodic_res,
                           int box_res) {
  GridSpec g;
  for (const auto& c : M.coords)
    g.resolution.push_back(c.periodic() ? periodic_res : box_res);
  return g;
}

long GridSpec::total_points() const {
  long n = 1;
  for (int r : resolution) n *= r;
  return n;
}

std::vector<double> coordinate_nodes(const ManifoldChart& M, const GridSpec& g,
                                     int coord) {
  const CoordInfo& c = M.coords.at(static_cast<size_t>(coord));
  int n = g.resolution.at(static_cast<size_t>(coord));
  std::vector<double> nodes;
  nodes.reserve(static_cast<size_t>(n));
  if (c.periodic()) {
    if (n < 4) throw ChartError("periodic resolution must be >= 4");
    double h = c.period / n;
    for (int k = 0; k < n; ++k) nodes.push_back(-c.period / 2 + (k + 0.5) * h);
  } else {
    if (n < 2) throw ChartError("box resolution must be >= 2");
    double h = (c.hi - c.lo) / (n - 1);
    for (int k = 0; k < n; ++k) nodes.push_back(c.lo + k * h);
  }
  return nodes;
}

std::vector<double> coordinate_weights(const ManifoldChart& M,
                                       const GridSpec& g, int coord) {
  const CoordInfo& c = M.coords.at(static_cast<size_t>(coord));
  int n = g.resolution.at(static_cast<size_t>(coord));
  std::vector<double> w(static_cast<size_t>(n));
  if (c.periodic()) {
    std::fill(w.begin(), w.end(), c.period / n);
  } else {
    double h = (c.hi - c.lo) / (n - 1);
    if (n % 2 == 1 && n >= 3) {
      // composite Simpson
      w[0] = w[static_cast<size_t>(n - 1)] = h / 3;
      for (int k = 1; k < n - 1; ++k)
        w[static_cast<size_t>(k)] = (k % 2 == 1 ? 4.0 : 2.0) * h / 3;
    } else {
      // trapezoid fallback for even counts
      w[0] = w[static_cast<size_t>(n - 1)] = h / 2;
      for (int k = 1; k < n - 1; ++k) w[static_cast<size_t>(k)] = h;
    }
  }
  return w;
}

std::vector<Vec> sample_grid(const ManifoldChart& M, const GridSpec& g) {
  if (static_cast<int>(g.resolution.size()) != M.dim)
    throw ContractError("grid resolution count != chart dimension");
  std::vector<std::vector<double>> nodes;
  for (int i = 0; i < M.dim; ++i) nodes.push_back(coordinate_nodes(M, g, i));
  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(g.total_points()));
  std::vector<size_t> idx(static_cast<size_t>(M.dim), 0);
  while (true) {
    Vec p(M.dim);
    for (int i = 0; i < M.dim; ++i) p[i] = nodes[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
    pts.push_back(p);
    int i = M.dim - 1;
    for (; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < nodes[static_cast<size_t>(i)].size()) break;
      idx[static_cast<size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return pts;
}

double point_distance(const ManifoldChart& M, const Vec& p, const Vec& q) {
  double d2 = 0;
  for (int i = 0; i < M.dim; ++i) {
    const CoordInfo& c = M.coords[static_cast<size_t>(i)];
    switch (c.kind) {
      case CoordInfo::Kind::Periodic: {
        double d = std::abs(wrap_centered(p[i] - q[i], c.period));
        d2 += d * d;
        break;
      }
      case CoordInfo::Kind::Box:
      case CoordInfo::Kind::Radial:
        // handled together with the polar angle below for Radial
        if (c.kind == CoordInfo::Kind::Box) {
          double d = p[i] - q[i];
          d2 += d * d;
        }
        break;
      case CoordInfo::Kind::PolarAngle: {
        // Euclidean chord distance on the disk factor (r paired with angle)
        double r1 = p[c.radial_index], r2 = q[c.radial_index];
        double dth = p[i] - q[i];
        double d = r1 * r1 + r2 * r2 - 2 * r1 * r2 * std::cos(dth);
        d2 += std::max(d, 0.0);
        break;
      }
    }
  }
  return std::sqrt(d2);
}

double c0_distance(const ManifoldChart& M, const PointMap& F, const PointMap& G,
                   const GridSpec& g) {
  double m = 0;
  for (const Vec& p : sample_grid(M, g))
    m = std::max(m, point_distance(M, F(p), G(p)));
  return m;
}

double c0_distance_symmetrized(const ManifoldChart& M, const PointMap& F,
                               const PointMap& Finv, const PointMap& G,
                               const PointMap& Ginv, const GridSpec& g) {
  if (!Finv || !Ginv)
    throw ContractError("symmetrized C0 distance needs both inverse maps");
  return std::max(c0_distance(M, F, G, g), c0_distance(M, Finv, Ginv, g));
}

}  // namespace cosym
