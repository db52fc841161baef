#pragma once

// Analytic-vs-numerical derivative audits and population checks.

#include <cstdint>
#include <string>
#include <vector>

#include "ipl/missing_cov.hpp"
#include "ipl/prop_odds.hpp"

namespace ipl::audit {

struct Entry {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value < tolerance; }
};

struct Report {
  std::string title;
  std::vector<Entry> entries;

  void add(std::string name, double value, double tolerance) {
    entries.push_back({std::move(name), value, tolerance});
  }
  bool ok() const;
  std::vector<std::string> offenders() const;
};

struct Options {
  std::uint64_t seed = 1;
  int directions = 3;
  double first_tol = 1e-5;
  double second_tol = 1e-3;
  double eta_tol = 1e-4;  // implicit first derivatives
  // scales the named analytic operator by 1.01 (fault injection)
  std::string corrupt;
};

Report prop_odds_sample(const std::vector<SurvivalRecord>& data, const std::vector<SurvivalRecord>& other,
                        const Vector& beta, const Options& opts = {});

Report missing_cov_sample(const std::vector<MissingCovRecord>& data, const std::vector<MissingCovRecord>& other,
                          const Vector& theta, const Options& opts = {});

Report prop_odds_population(const PropOddsDesign& design, int nodes = 2000);

Report missing_cov_population(const MissingCovDesign& design, const Options& opts = {});

/// Nuisance-direction derivative of the expected log-likelihood at the
/// population fixed point, max over `directions` random zero-sum directions.
double efficiency_condition(const MissingCovModel& model, const MissingCovPopulation& pop, const Vector& theta,
                            std::uint64_t seed, int directions);

/// max |E0[score * nuisance score]| over random zero-sum directions, at theta.
double orthogonality(const MissingCovModel& model, const MissingCovPopulation& pop, const Vector& theta,
                     std::uint64_t seed, int directions);

std::string format(const Report& rep);

}  // namespace ipl::audit
