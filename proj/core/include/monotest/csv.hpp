#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "monotest/models.hpp"

namespace monotest {

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All readers skip blank lines and '#' comment lines, then require the exact
// header row. Groups are returned in order of first appearance.

// Header: group,x
std::vector<DensitySample> read_density_csv(std::istream& in);

// Header: group,i,y with design indices i = 1..n_j contiguous per group.
std::vector<RegressionSample> read_regression_csv(std::istream& in);

// Header: group,x,delta with delta in {0,1}.
std::vector<CensoredSample> read_censored_csv(std::istream& in);

}  // namespace monotest
