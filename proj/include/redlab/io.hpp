#pragma once

#include <string>
#include <vector>

#include "redlab/design.hpp"
#include "redlab/model.hpp"
#include "redlab/sim.hpp"

// vendored single-header nlohmann/json
#include "json.hpp"

namespace redlab {

using Json = nlohmann::json;

/// Parses {"family": "complete-uniform"|"ring"|"grid"|"custom", "n": int,
/// "epsilon": number?, "edges": [{"i","j","p"}]?}. Numeric fields convert to
/// exact rationals through their shortest decimal form. Validation errors
/// name the offending field.
EdgeWeightedGraph graph_from_json(const Json& config);

/// Canonical echo of a graph config; resolving the echo reproduces it.
Json graph_to_json(const EdgeWeightedGraph& graph, const Json& original_config);

struct ResolvedSimConfig {
  SimConfig config;
  Json resolved;  // canonical config echo with defaults applied
};

/// Sim config document: {"graph": {...}, "rho" or "lambda", "mu", "policy",
/// "events", "runs", "seed", "warmup_fraction", "jiq_tiebreak",
/// "allow_unstable"}.
ResolvedSimConfig sim_config_from_json(const Json& document);

DesignProblem design_problem_from_json(const Json& document);
Json design_solution_to_json(const DesignProblem& problem, const DesignSolution& solution);
Json stability_to_json(const StabilityReport& report);

/// 12 significant digits, '.' decimal separator, no grouping.
std::string format_sig12(double value);

class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header);

  void add_row(const std::vector<std::string>& cells);
  void add_numeric_row(const std::vector<double>& values);

  const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

ParsedCsv parse_numeric_csv(const std::string& text);

std::string empirical_to_csv(const EmpiricalDistribution& dist);
std::string difference_to_csv(const CdfDifferenceSeries& series);

void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace redlab
