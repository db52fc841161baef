#pragma once

// Dataset readers. The first non-blank line is a header; errors carry
// line and column positions.
//
//   proportional odds:   U,delta,Z1,...,Zp
//   missing covariate:   R,Y,X   (X blank when R = 2)

#include <istream>
#include <string>
#include <vector>

#include "ipl/missing_cov.hpp"
#include "ipl/prop_odds.hpp"

namespace ipl::csv {

std::vector<SurvivalRecord> read_prop_odds(std::istream& in, const std::string& source = "<input>");
std::vector<MissingCovRecord> read_missing_cov(std::istream& in, const std::string& source = "<input>");

std::vector<SurvivalRecord> read_prop_odds_file(const std::string& path);
std::vector<MissingCovRecord> read_missing_cov_file(const std::string& path);

std::string write_prop_odds(const std::vector<SurvivalRecord>& data);
std::string write_missing_cov(const std::vector<MissingCovRecord>& data);

}  // namespace ipl::csv
