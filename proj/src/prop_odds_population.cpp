#include <cmath>

#include "ipl/prop_odds.hpp"
#include "ipl/quadrature.hpp"

namespace ipl {

PopulationCheck prop_odds_population_check(const PropOddsDesign& d, int nodes) {
  require(nodes >= 3, ErrorKind::InvalidInput, "need at least three grid nodes");
  require(d.tau > 0.0 && d.baseline_rate > 0.0, ErrorKind::InvalidConfig, "tau and baseline rate must be positive");
  require(d.censor_atom >= 0.0 && d.censor_atom <= 1.0, ErrorKind::InvalidConfig, "censoring atom outside [0,1]");
  require(d.z_values.size() == d.z_probs.size() && !d.z_values.empty(), ErrorKind::InvalidConfig,
          "covariate law malformed");

  const auto G = static_cast<std::size_t>(nodes);
  const double h = d.tau / (nodes - 1);
  std::vector<double> t(G), A0(G);
  for (std::size_t g = 0; g < G; ++g) {
    t[g] = h * static_cast<double>(g);
    A0[g] = d.baseline_rate * t[g];
  }
  t.back() = d.tau;
  const double fC = (1.0 - d.censor_atom) / d.tau;
  auto at_least = [&](double s) { return (1.0 - d.censor_atom) * (1.0 - s / d.tau) + d.censor_atom; };

  std::vector<double> events(G, 0.0), EW(G, 0.0);
  for (std::size_t z = 0; z < d.z_values.size(); ++z) {
    const double e = std::exp(d.beta * d.z_values[z]);
    const double pz = d.z_probs[z];
    std::vector<double> integrand(G);
    for (std::size_t g = 0; g < G; ++g) {
      const double S = 1.0 / (1.0 + e * A0[g]);
      const double f = e * d.baseline_rate * S * S;
      events[g] += pz * f * at_least(t[g]);
      integrand[g] = (2.0 * f * at_least(t[g]) + S * fC) / (1.0 + e * A0[g]);
    }
    const auto upper = quadrature::cumulative_to_right(integrand, h);
    const double S_tau = 1.0 / (1.0 + e * A0.back());
    const double atom = d.censor_atom * S_tau / (1.0 + e * A0.back());
    for (std::size_t g = 0; g < G; ++g) EW[g] += pz * e * (upper[g] + atom);
  }

  std::vector<double> ratio(G);
  for (std::size_t g = 0; g < G; ++g) {
    require(EW[g] > 0.0, ErrorKind::RiskSetEmpty, "population risk set empty");
    ratio[g] = events[g] / EW[g];
  }
  PopulationCheck out;
  out.psi = quadrature::cumulative_from_left(ratio, h);
  out.grid = std::move(t);
  out.truth = std::move(A0);
  for (std::size_t g = 0; g < G; ++g) out.max_error = std::max(out.max_error, std::abs(out.psi[g] - out.truth[g]));
  return out;
}

}  // namespace ipl
