#include "cosym/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cosym {

namespace {

double l2_norm_of_form(const ManifoldChart& M, const OneForm& a,
                       const KForm& volume, const GridSpec& g,
                       double normalizer) {
  const double sq = integrate_scalar_against_top_form(
      M,
      [&](const Vec& p) {
        const double n = covector_norm(M, a.coeff(p), p);
        return n * n;
      },
      volume, g);
  return std::sqrt(std::abs(sq) / normalizer);
}

double theta_term(const CosymplecticStructure& S,
                  const std::function<double(const Vec&)>& eta_of_X,
                  const KForm& volume, const GridSpec& g, double normalizer) {
  return std::abs(integrate_scalar_against_top_form(
             S.chart, [&](const Vec& p) { return std::abs(eta_of_X(p)); },
             volume, g)) /
         normalizer;
}

}  // namespace

FieldNormReport field_norm_C(const CosymplecticStructure& S,
                             const VectorField& X, const GridSpec& g,
                             const SectionSpec& section,
                             bool paper_normalization, double tol) {
  const auto& M = S.chart;

  // eta(X) must be a constant for the |eta(X)| term to be a number (it is
  // automatic for a genuinely cosymplectic field on a connected chart)
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
  const std::vector<Vec> grid = sample_grid(M, g);
  for (const Vec& p : grid) {
    const double v = S.eta.coeff(p).dot(X.value(p));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= static_cast<double>(grid.size());
  if (hi - lo > 10 * tol) {
    std::ostringstream os;
    os << "field_norm_C: eta(X) is not constant (osc = " << hi - lo
       << "); the |eta(X)| term is undefined";
    throw ContractError(os.str());
  }

  // splitting the combined form I(X) = i_X omega + eta(X) eta equals the sum
  // of the separate splits (the section is linear); closedness of I(X) is
  // exactly the cosymplectic condition given d eta = d omega = 0
  SplitForm sp = split_closed_form(M, apply_I(S, X), g, section, tol);

  FieldNormReport rep;
  rep.paper_normalization = paper_normalization;
  KForm volume = S.volume_form();
  rep.volume = integrate_top_form(M, volume, g);
  const double normalizer = paper_normalization ? 1.0 : std::abs(rep.volume);
  rep.s_coefficients = sp.s_coefficients;
  rep.harmonic_l1 = sp.s_coefficients.lpNorm<1>();
  rep.harmonic_l2 = l2_norm_of_form(M, sp.s_part, volume, g, normalizer);
  rep.osc_term = sp.osc_potential;
  rep.reeb_term = std::abs(mean);
  rep.value = rep.harmonic_l2 + rep.osc_term + rep.reeb_term;
  return rep;
}

FieldNormReport field_norm_AC(const CosymplecticStructure& S,
                              const VectorField& X, const GridSpec& g,
                              const SectionSpec& section,
                              bool paper_normalization, double tol) {
  const auto& M = S.chart;
  SplitForm sp =
      split_closed_form(M, interior_product(X, S.omega), g, section, tol);

  FieldNormReport rep;
  rep.paper_normalization = paper_normalization;
  KForm volume = S.volume_form();
  rep.volume = integrate_top_form(M, volume, g);
  const double normalizer = paper_normalization ? 1.0 : std::abs(rep.volume);
  rep.s_coefficients = sp.s_coefficients;
  rep.harmonic_l1 = sp.s_coefficients.lpNorm<1>();
  rep.harmonic_l2 = l2_norm_of_form(M, sp.s_part, volume, g, normalizer);
  rep.osc_term = sp.osc_potential;
  rep.reeb_term = theta_term(
      S, [&](const Vec& p) { return S.eta.coeff(p).dot(X.value(p)); }, volume,
      g, normalizer);
  rep.value = rep.harmonic_l2 + rep.osc_term + rep.reeb_term;
  return rep;
}

LengthReport length(const CosymplecticStructure& S, const IsotopyPtr& phi,
                    LengthKind kind, LengthVersion version, int n_t,
                    const GridSpec& g, const SectionSpec& section,
                    bool paper_normalization) {
  if (n_t < 1) throw ContractError("length: need n_t >= 1");
  const auto& M = S.chart;
  const bool almost = kind == LengthKind::AlmostCoHoferLike ||
                      kind == LengthKind::AlmostCoHamiltonian;
  const bool hamiltonian = kind == LengthKind::CoHofer ||
                           kind == LengthKind::AlmostCoHamiltonian;

  LengthReport rep;
  rep.kind = kind;
  rep.version = version;
  rep.paper_normalization = paper_normalization;
  KForm volume = S.volume_form();
  rep.volume = integrate_top_form(M, volume, g);
  const double normalizer = paper_normalization ? 1.0 : std::abs(rep.volume);
  const std::vector<Vec> grid = sample_grid(M, g);

  double acc = 0.0, worst = 0.0;
  for (int k = 0; k <= n_t; ++k) {
    const double t = static_cast<double>(k) / n_t;
    OneForm alpha;
    if (almost) {
      const CosymplecticStructure* Sp = &S;
      alpha.coeff = [Sp, phi, t](const Vec& y) -> Vec {
        return Sp->omega.coeff(y).transpose() * phi->dot(t, y);
      };
    } else {
      alpha = generator_one_form(S, phi, t);
    }
    SplitForm sp = split_closed_form(M, alpha, g, section, 1e-5);
    if (hamiltonian &&
        sp.s_coefficients.lpNorm<Eigen::Infinity>() > 1e-4) {
      std::ostringstream os;
      os << "length: generator has a nonzero harmonic part ("
         << sp.s_coefficients.lpNorm<Eigen::Infinity>()
         << ") but a Hamiltonian kind was requested";
      throw ContractError(os.str());
    }

    double reeb;
    if (almost) {
      reeb = theta_term(
          S, [&](const Vec& y) { return S.eta.coeff(y).dot(phi->dot(t, y)); },
          volume, g, normalizer);
    } else {
      // |C^t| as the sup over the chart of |eta(phi-dot_t)|
      reeb = 0.0;
      for (const Vec& y : grid)
        reeb = std::max(reeb, std::abs(S.eta.coeff(y).dot(phi->dot(t, y))));
    }

    const double l1 = sp.s_coefficients.lpNorm<1>();
    const double integrand = l1 + sp.osc_potential + reeb;
    rep.times.push_back(t);
    rep.harmonic_l1.push_back(l1);
    rep.harmonic_l2.push_back(
        l2_norm_of_form(M, sp.s_part, volume, g, normalizer));
    rep.osc_term.push_back(sp.osc_potential);
    rep.reeb_term.push_back(reeb);

    const double w = (k == 0 || k == n_t) ? 0.5 : 1.0;
    acc += w * integrand / n_t;
    worst = std::max(worst, integrand);
  }
  rep.value = version == LengthVersion::L1Inf ? acc : worst;
  return rep;
}

double norm_upper_bound(const CosymplecticStructure& S, const SmoothMap& phi,
                        const std::vector<IsotopyPtr>& candidates,
                        LengthKind kind, LengthVersion version, int n_t,
                        const GridSpec& g, const SectionSpec& section,
                        bool paper_normalization, double c0_tol) {
  if (candidates.empty())
    throw ContractError("norm_upper_bound: empty candidate list");
  const auto& M = S.chart;
  for (const IsotopyPtr& c : candidates) {
    const double d =
        c0_distance(M, [&](const Vec& x) { return c->flow(1.0, x); }, phi.fwd,
                    g);
    if (d > c0_tol) {
      std::ostringstream os;
      os << "norm_upper_bound: candidate time-one map differs from the "
            "target (c0 distance "
         << d << ")";
      throw ContractError(os.str());
    }
  }

  auto best = [&](bool inverted) {
    double m = std::numeric_limits<double>::infinity();
    for (const IsotopyPtr& c : candidates) {
      IsotopyPtr iso = inverted ? invert_isotopy(c) : c;
      m = std::min(m, length(S, iso, kind, version, n_t, g, section,
                             paper_normalization)
                          .value);
    }
    return m;
  };

  const bool hofer_like = kind == LengthKind::CoHoferLike ||
                          kind == LengthKind::AlmostCoHoferLike;
  if (!hofer_like) return best(false);
  return 0.5 * (best(false) + best(true));
}

ProjectionCheckReport sup_norm_projection_check(const ManifoldChart& M,
                                                const OneForm& alpha,
                                                const GridSpec& g) {
  std::vector<FactorSpec> factors = M.factors;
  factors.push_back(FactorSpec::circle(2.0 * 3.14159265358979323846, "zeta"));
  ManifoldChart product = build_manifold(factors, false);

  const int d = M.dim;
  OneForm lifted;
  lifted.coeff = [alpha, d](const Vec& y) -> Vec {
    Vec c = Vec::Zero(y.size());
    c.head(d) = alpha.coeff(y.head(d));
    return c;
  };
  GridSpec pg = g;
  pg.resolution.push_back(8);

  ProjectionCheckReport rep;
  rep.product_sup = sup_norm(product, lifted, pg);
  rep.base_sup = sup_norm(M, alpha, g);
  rep.holds = rep.product_sup <= rep.base_sup + 1e-9;
  return rep;
}

EquivalenceReport section_equivalence_test(const CosymplecticStructure& S,
                                           const SectionSpec& S1,
                                           const SectionSpec& S2,
                                           const std::vector<VectorField>& samples,
                                           const GridSpec& g) {
  if (samples.size() < 10)
    throw ContractError(
        "section_equivalence_test: need at least 10 nonzero samples");
  EquivalenceReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  for (const VectorField& X : samples) {
    if (sup_norm(S.chart, X, g) < 1e-12)
      throw ContractError("section_equivalence_test: zero sample field");
    const double n1 = field_norm_C(S, X, g, S1).value;
    const double n2 = field_norm_C(S, X, g, S2).value;
    if (n1 < 1e-12 || n2 < 1e-12)
      throw ContractError(
          "section_equivalence_test: nonzero sample with vanishing norm "
          "(non-degeneracy violation)");
    const double r = n1 / n2;
    rep.ratios.push_back(r);
    rep.min_ratio = std::min(rep.min_ratio, r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  return rep;
}

}  // namespace cosym
