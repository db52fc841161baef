#include <cmath>

#include "ipl/missing_cov.hpp"
#include "ipl/quadrature.hpp"

namespace ipl {

MissingCovDesign MissingCovDesign::standard() {
  MissingCovDesign d;
  d.theta = Vector(3);
  d.theta << 0.0, 1.0, 0.0;
  for (int k = 0; k < 9; ++k) {
    d.g_support.push_back(-2.0 + 0.5 * k);
    d.g_masses.push_back(1.0 / 9.0);
  }
  d.w2 = 0.3;
  return d;
}

MissingCovPopulation missing_cov_population(const MissingCovDesign& design, const ConditionalDensity& family,
                                            int panels, int order) {
  require(design.g_support.size() == design.g_masses.size() && !design.g_support.empty(), ErrorKind::InvalidConfig,
          "covariate law malformed");
  require(design.w2 >= 0.0 && design.w2 < 1.0, ErrorKind::InvalidConfig, "w2 must lie in [0, 1)");
  require(design.theta.size() == family.dim(), ErrorKind::InvalidConfig, "theta has wrong length");
  const double w1 = 1.0 - design.w2;
  const std::size_t K = design.g_support.size();

  // outcome range: mean +/- 8 sd at every support point (location-scale reading of theta)
  const double sigma = std::exp(design.theta[2]);
  double lo = INFINITY, hi = -INFINITY;
  for (double x : design.g_support) {
    const double mu = design.theta[0] + design.theta[1] * x;
    lo = std::min(lo, mu - 8.0 * sigma);
    hi = std::max(hi, mu + 8.0 * sigma);
  }
  const auto rule = quadrature::composite_gauss_legendre(lo, hi, panels, order);
  const std::size_t Q = rule.nodes.size();

  std::vector<Atom<MissingCovRecord>> atoms;
  atoms.reserve(Q * (K + 1));
  std::vector<double> fY(Q, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double x = design.g_support[k];
    const double gk = design.g_masses[k];
    std::vector<double> wq(Q);
    double total = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
      const double f = family.eval(rule.nodes[q], x, design.theta, 0).f;
      fY[q] += gk * f;
      wq[q] = f * rule.weights[q];
      total += wq[q];
    }
    if (gk == 0.0) continue;
    for (std::size_t q = 0; q < Q; ++q)
      atoms.push_back({MissingCovRecord{1, rule.nodes[q], x}, w1 * gk * wq[q] / total});
  }
  if (design.w2 > 0.0) {
    double total = 0.0;
    for (std::size_t q = 0; q < Q; ++q) total += fY[q] * rule.weights[q];
    for (std::size_t q = 0; q < Q; ++q)
      atoms.push_back({MissingCovRecord{2, rule.nodes[q], std::nullopt}, design.w2 * fY[q] * rule.weights[q] / total});
  }

  MissingCovPopulation pop;
  pop.F = MissingCovMeasure(std::move(atoms));
  pop.support = design.g_support;
  pop.g0 = Eigen::Map<const Vector>(design.g_masses.data(), static_cast<Eigen::Index>(K));
  return pop;
}

}  // namespace ipl
