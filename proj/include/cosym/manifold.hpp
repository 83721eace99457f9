#pragma once

// Chart-based product manifolds: circles, boxes and a polar disk factor, with
// point canonicalization, tensor-product sampling grids and the flat-metric
// C^0 distance between maps.

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cosym {

// Small dense types; max size 8 keeps everything stack-allocated (charts used
// here have at most 5 coordinates, 6 after a symplectization lift).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

struct ChartError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FactorSpec {
  enum class Kind { Circle, Box, PolarDisk };
  Kind kind = Kind::Circle;
  double period = 0.0;            // circle
  double lo = 0.0, hi = 0.0;      // box
  double r_min = 0.0, r_max = 0.0;  // polar disk
  std::string label;

  static FactorSpec circle(double period, std::string label = "theta");
  static FactorSpec box(double lo, double hi, std::string label = "x");
  static FactorSpec polar_disk(double r_min, double r_max,
                               std::string label = "r");
  int coord_count() const { return kind == Kind::PolarDisk ? 2 : 1; }
};

// One scalar coordinate of the flattened chart.
struct CoordInfo {
  enum class Kind { Periodic, Box, Radial, PolarAngle };
  Kind kind = Kind::Periodic;
  double period = 0.0;        // Periodic / PolarAngle (always 2*pi for the latter)
  double lo = 0.0, hi = 0.0;  // Box / Radial bounds
  int radial_index = -1;      // for PolarAngle: index of its r coordinate
  std::string label;
  bool periodic() const {
    return kind == Kind::Periodic || kind == Kind::PolarAngle;
  }
};

struct ManifoldChart {
  std::vector<FactorSpec> factors;
  std::vector<CoordInfo> coords;  // flattened, one per scalar coordinate
  int dim = 0;

  // Flat product metric: diagonal weight g_i(p) for coordinate i
  // (1 everywhere except r^2 for a polar angle).
  double metric_weight(int i, const Vec& p) const;
};

struct GridSpec {
  // Resolution per scalar coordinate (periodic: point count per circle;
  // box/radial: endpoint-inclusive count).
  std::vector<int> resolution;

  static GridSpec uniform(const ManifoldChart& M, int periodic_res,
                          int box_res);
  long total_points() const;
};

ManifoldChart build_manifold(const std::vector<FactorSpec>& spec,
                             bool cosymplectic_use = true);

// Wraps periodic coordinates into their fundamental domain [-L/2, L/2);
// box/radial coordinates are validated against their bounds.
Vec canonicalize(const ManifoldChart& M, const Vec& p, double tol = 1e-9);

// Per-coordinate sample nodes (midpoint-offset on periodic factors,
// endpoint-inclusive on boxes) and the induced tensor-product grid.
std::vector<double> coordinate_nodes(const ManifoldChart& M, const GridSpec& g,
                                     int coord);
std::vector<Vec> sample_grid(const ManifoldChart& M, const GridSpec& g);

// Quadrature weights matching coordinate_nodes (trapezoid = uniform weights on
// periodic factors, composite Simpson on boxes when the count is odd).
std::vector<double> coordinate_weights(const ManifoldChart& M,
                                       const GridSpec& g, int coord);

// Flat geodesic distance between two points (circle arcs, box differences,
// Euclidean chord metric on the polar-disk factor).
double point_distance(const ManifoldChart& M, const Vec& p, const Vec& q);

// sup over the grid of d(F(x), G(x)). When both inverses are supplied the
// symmetrized d0 = max(d_C0(F,G), d_C0(F^-1,G^-1)) is available.
using PointMap = std::function<Vec(const Vec&)>;
double c0_distance(const ManifoldChart& M, const PointMap& F, const PointMap& G,
                   const GridSpec& g);
double c0_distance_symmetrized(const ManifoldChart& M, const PointMap& F,
                               const PointMap& Finv, const PointMap& G,
                               const PointMap& Ginv, const GridSpec& g);

}  // namespace cosym
