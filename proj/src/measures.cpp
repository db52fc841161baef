#include "ipl/measures.hpp"

#include <numeric>

namespace ipl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ContractionViolation: return "ContractionViolation";
    case ErrorKind::SingularResolvent: return "SingularResolvent";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::SingularInformation: return "SingularInformation";
    case ErrorKind::OracleEvalFailure: return "OracleEvalFailure";
    case ErrorKind::NumericOverflow: return "NumericOverflow";
    case ErrorKind::RiskSetEmpty: return "RiskSetEmpty";
    case ErrorKind::DegenerateJump: return "DegenerateJump";
    case ErrorKind::DenominatorCollapse: return "DenominatorCollapse";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

StepFunction::StepFunction(std::vector<double> jump_times, std::vector<double> jump_sizes, double horizon)
    : times_(std::move(jump_times)), sizes_(std::move(jump_sizes)), horizon_(horizon) {
  require(horizon_ > 0.0 && std::isfinite(horizon_), ErrorKind::InvalidInput, "horizon must be positive");
  require(times_.size() == sizes_.size(), ErrorKind::InvalidInput, "jump times and sizes differ in length");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    require(times_[j] >= 0.0 && times_[j] <= horizon_, ErrorKind::InvalidInput, "jump time outside [0, tau]");
    require(j == 0 || times_[j] > times_[j - 1], ErrorKind::InvalidInput, "jump times not strictly increasing");
    require(sizes_[j] >= 0.0 && std::isfinite(sizes_[j]), ErrorKind::InvalidInput, "negative jump size");
  }
  cumulative_.resize(sizes_.size());
  std::partial_sum(sizes_.begin(), sizes_.end(), cumulative_.begin());
}

StepFunction StepFunction::from_values(std::vector<double> jump_times, std::span<const double> values,
                                       double horizon) {
  require(jump_times.size() == values.size(), ErrorKind::InvalidInput, "times and values differ in length");
  std::vector<double> sizes(values.size());
  double prev = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    sizes[j] = values[j] - prev;
    prev = values[j];
  }
  return StepFunction(std::move(jump_times), std::move(sizes), horizon);
}

StepFunction StepFunction::from_values(std::vector<double> jump_times, const Vector& values, double horizon) {
  return from_values(std::move(jump_times), std::span<const double>(values.data(), values.size()), horizon);
}

double StepFunction::operator()(double u) const {
  require(u >= 0.0 && u <= horizon_, ErrorKind::InvalidInput, "evaluation point outside [0, tau]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), u);
  if (it == times_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

Vector StepFunction::values() const {
  return Eigen::Map<const Vector>(cumulative_.data(), static_cast<Eigen::Index>(cumulative_.size()));
}

namespace {

void check_grid(const std::vector<double>& support, const Vector& masses) {
  require(static_cast<Eigen::Index>(support.size()) == masses.size(), ErrorKind::InvalidInput,
          "support and masses differ in length");
  std::vector<double> sorted = support;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), ErrorKind::InvalidInput,
          "support points not distinct");
  require((masses.array() >= 0.0).all() && masses.allFinite(), ErrorKind::InvalidInput, "negative mass");
}

}  // namespace

GridDensity::GridDensity(std::vector<double> support, Vector masses)
    : support_(std::move(support)), masses_(std::move(masses)), kind_(DensityKind::ProbabilityMass) {
  check_grid(support_, masses_);
  require(std::abs(masses_.sum() - 1.0) <= 1e-10, ErrorKind::InvalidInput, "masses do not sum to one");
}

GridDensity GridDensity::finite_measure(std::vector<double> support, Vector masses) {
  check_grid(support, masses);
  GridDensity g;
  g.support_ = std::move(support);
  g.masses_ = std::move(masses);
  g.kind_ = DensityKind::FiniteMeasure;
  return g;
}

GridDensity GridDensity::from_density(std::vector<double> support, std::span<const double> density,
                                      std::vector<double> quadrature_weights) {
  require(support.size() == density.size() && support.size() == quadrature_weights.size(),
          ErrorKind::InvalidInput, "grid arrays differ in length");
  Vector masses(static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i) {
    require(density[i] >= 0.0 && quadrature_weights[i] > 0.0, ErrorKind::InvalidInput,
            "negative density or nonpositive quadrature weight");
    masses[static_cast<Eigen::Index>(i)] = density[i] * quadrature_weights[i];
  }
  // Normalize away the quadrature error so the probability invariant holds.
  masses /= masses.sum();
  GridDensity g(std::move(support), std::move(masses));
  g.weights_ = std::move(quadrature_weights);
  g.kind_ = DensityKind::QuadratureDensity;
  return g;
}

double GridDensity::density(std::size_t i) const {
  const double m = masses_[static_cast<Eigen::Index>(i)];
  return kind_ == DensityKind::QuadratureDensity ? m / weights_[i] : m;
}

}  // namespace ipl
