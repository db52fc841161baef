#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipl/estimator.hpp"
#include "ipl/rng.hpp"

namespace ipl {

enum class ModelKind { PropOdds, MissingCov };

std::string_view to_string(ModelKind kind);
ModelKind parse_model(const std::string& name);

struct SimConfig {
  ModelKind model = ModelKind::MissingCov;
  int n = 500;
  int replications = 100;
  std::uint64_t seed = 1;
  PropOddsDesign prop_odds;
  MissingCovDesign missing_cov = MissingCovDesign::standard();
  double level = 0.95;
  bool force = false;
  int jobs = 0;  // 0 = hardware concurrency
};

void validate(const SimConfig& cfg);

std::vector<SurvivalRecord> gen_prop_odds(const PropOddsDesign& design, int n, Philox4x32& rng);
std::vector<MissingCovRecord> gen_missing_cov(const MissingCovDesign& design, int n, Philox4x32& rng,
                                              bool force = false);

/// Empirical measures with equal weights 1/n.
SurvivalMeasure to_measure(const std::vector<SurvivalRecord>& data);
MissingCovMeasure to_measure(const std::vector<MissingCovRecord>& data);

/// Fits one dataset from the true parameter.
FitResult fit_prop_odds(const std::vector<SurvivalRecord>& data, const Vector& start, const FitOptions& opts = {});
FitResult fit_missing_cov(const std::vector<MissingCovRecord>& data, const Vector& start, bool force = false,
                          const FitOptions& opts = {});

struct Replication {
  int index = 0;
  bool ok = false;
  std::string error;
  Vector theta_hat;
  Vector se;
};

struct ComponentSummary {
  double bias = 0.0;
  double sd = 0.0;
  double mean_se = 0.0;
  double coverage = 0.0;
  double ks = 0.0;
};

struct McReport {
  std::string model;
  int n = 0;
  int replications = 0;
  int succeeded = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  Vector truth;
  std::vector<ComponentSummary> components;
  double ks_max = 0.0;
  std::map<std::string, int> failures;
  bool alarm = false;
  std::vector<Replication> runs;
};

McReport monte_carlo(const SimConfig& cfg);

/// Kolmogorov-Smirnov distance of a sample from N(0, 1).
double ks_normal(std::vector<double> z);

nlohmann::json to_json(const McReport& rep);
std::string replications_csv(const McReport& rep);

}  // namespace ipl
