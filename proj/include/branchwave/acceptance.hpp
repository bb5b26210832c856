#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace branchwave {

struct CriterionInfo {
  int id = 0;
  std::string tag;    // filter name, e.g. "triangles"
  std::string title;
};

struct CriterionResult {
  CriterionInfo info;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  std::vector<std::string> only;             // tags; empty runs everything
  std::map<std::string, double> tolerances;  // overrides, see tolerance_names()
  unsigned threads = 0;
  std::size_t contour_points = 48;           // per contour piece
};

const std::vector<CriterionInfo>& acceptance_criteria();
std::vector<std::string> tolerance_names();
double default_tolerance(const std::string& name);

// Runs the selected criteria in order; `report` sees each result as soon as it is known.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& report = {});

}  // namespace branchwave
