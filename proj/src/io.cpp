#include "redlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "redlab/errors.hpp"

namespace redlab {

namespace {

Rational rational_field(const Json& node, const std::string& where) {
  if (node.is_string()) return parse_rational(node.get<std::string>());
  if (node.is_number_integer()) return Rational(node.get<long long>());
  if (node.is_number_float()) return rational_from_double(node.get<double>());
  throw invalid_parameter(where + ": expected a number or a fraction string");
}

int int_field(const Json& doc, const std::string& key, const std::string& scope) {
  if (!doc.contains(key)) throw invalid_parameter(scope + key + ": missing");
  if (!doc[key].is_number_integer())
    throw invalid_parameter(scope + key + ": expected an integer");
  return doc[key].get<int>();
}

double number_field(const Json& doc, const std::string& key, const std::string& scope) {
  if (!doc.contains(key)) throw invalid_parameter(scope + key + ": missing");
  if (!doc[key].is_number())
    throw invalid_parameter(scope + key + ": expected a number");
  return doc[key].get<double>();
}

}  // namespace

EdgeWeightedGraph graph_from_json(const Json& config) {
  if (!config.is_object()) throw invalid_parameter("graph: expected a JSON object");
  if (!config.contains("family") || !config["family"].is_string())
    throw invalid_parameter("graph.family: missing or not a string");
  const std::string family = config["family"].get<std::string>();
  const int n = int_field(config, "n", "graph.");

  if (family == "complete-uniform") return build_complete_uniform(n);
  if (family == "ring") {
    if (!config.contains("epsilon"))
      throw invalid_parameter("graph.epsilon: required for the ring family");
    return build_ring(n, rational_field(config["epsilon"], "graph.epsilon"));
  }
  if (family == "grid") return build_grid(n);
  if (family == "custom") {
    if (!config.contains("edges") || !config["edges"].is_array())
      throw invalid_parameter("graph.edges: required array for the custom family");
    std::vector<WeightedEdge> edges;
    for (std::size_t k = 0; k < config["edges"].size(); ++k) {
      const Json& e = config["edges"][k];
      const std::string where = "graph.edges[" + std::to_string(k) + "]";
      if (!e.is_object()) throw invalid_parameter(where + ": expected an object");
      WeightedEdge edge;
      edge.i = int_field(e, "i", where + ".");
      edge.j = int_field(e, "j", where + ".");
      if (!e.contains("p")) throw invalid_parameter(where + ".p: missing");
      edge.p = rational_field(e["p"], where + ".p");
      edges.push_back(std::move(edge));
    }
    return EdgeWeightedGraph::from_edges(n, std::move(edges));
  }
  throw invalid_parameter(
      "graph.family: expected complete-uniform|ring|grid|custom, got '" + family + "'");
}

Json graph_to_json(const EdgeWeightedGraph& graph, const Json& original_config) {
  Json echo = original_config;
  echo["n"] = graph.n_servers();
  if (echo.value("family", "custom") == std::string("custom")) {
    Json edges = Json::array();
    for (const auto& e : graph.edges())
      edges.push_back({{"i", e.i}, {"j", e.j}, {"p", to_string(e.p)}});
    echo["family"] = "custom";
    echo["edges"] = std::move(edges);
  }
  return echo;
}

ResolvedSimConfig sim_config_from_json(const Json& document) {
  if (!document.is_object()) throw invalid_parameter("config: expected a JSON object");
  if (!document.contains("graph"))
    throw invalid_parameter("config.graph: missing");
  EdgeWeightedGraph graph = graph_from_json(document["graph"]);

  const double mu = document.contains("mu") ? number_field(document, "mu", "config.") : 1.0;
  double lambda;
  if (document.contains("lambda") && document.contains("rho"))
    throw invalid_parameter("config: give either lambda or rho, not both");
  if (document.contains("lambda"))
    lambda = number_field(document, "lambda", "config.");
  else if (document.contains("rho"))
    lambda = number_field(document, "rho", "config.") * mu;
  else
    throw invalid_parameter("config: one of lambda or rho is required");

  const int n_servers = graph.n_servers();
  SimConfig config{std::move(graph), SystemParams(n_servers, lambda, mu)};
  config.policy = policy_from_name(document.value("policy", std::string("coc")));
  config.n_events = document.value("events", std::int64_t{1000000});
  config.n_runs = document.value("runs", 50);
  config.seed = document.value("seed", kDefaultSeed);
  config.warmup_fraction = document.value("warmup_fraction", 0.1);
  const std::string tiebreak = document.value("jiq_tiebreak", std::string("uniform"));
  if (tiebreak == "uniform")
    config.jiq_tiebreak = JiqTiebreak::kUniform;
  else if (tiebreak == "longest-idle")
    config.jiq_tiebreak = JiqTiebreak::kLongestIdle;
  else
    throw invalid_parameter("config.jiq_tiebreak: expected uniform|longest-idle");
  config.allow_unstable = document.value("allow_unstable", false);

  ResolvedSimConfig resolved{std::move(config), Json{}};
  Json& echo = resolved.resolved;
  echo["graph"] = graph_to_json(resolved.config.graph, document["graph"]);
  echo["lambda"] = resolved.config.params.arrival_rate_per_server;
  echo["mu"] = mu;
  echo["policy"] = policy_name(resolved.config.policy);
  echo["events"] = resolved.config.n_events;
  echo["runs"] = resolved.config.n_runs;
  echo["seed"] = resolved.config.seed;
  echo["warmup_fraction"] = resolved.config.warmup_fraction;
  echo["jiq_tiebreak"] =
      resolved.config.jiq_tiebreak == JiqTiebreak::kUniform ? "uniform" : "longest-idle";
  echo["allow_unstable"] = resolved.config.allow_unstable;
  return resolved;
}

DesignProblem design_problem_from_json(const Json& document) {
  if (!document.is_object()) throw invalid_parameter("problem: expected a JSON object");
  DesignProblem problem;
  problem.n_servers = int_field(document, "n", "problem.");
  problem.service_speed =
      document.contains("mu") ? number_field(document, "mu", "problem.") : 1.0;
  if (!document.contains("type_rates") || !document["type_rates"].is_array())
    throw invalid_parameter("problem.type_rates: required array");
  for (std::size_t k = 0; k < document["type_rates"].size(); ++k) {
    const Json& rate = document["type_rates"][k];
    if (!rate.is_number())
      throw invalid_parameter("problem.type_rates[" + std::to_string(k) +
                              "]: expected a number");
    problem.type_rates.push_back(rate.get<double>());
  }
  if (document.contains("candidate_edges")) {
    if (!document["candidate_edges"].is_array())
      throw invalid_parameter("problem.candidate_edges: expected an array of pairs");
    for (std::size_t k = 0; k < document["candidate_edges"].size(); ++k) {
      const Json& pair = document["candidate_edges"][k];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer())
        throw invalid_parameter("problem.candidate_edges[" + std::to_string(k) +
                                "]: expected [i, j]");
      problem.candidate_edges.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  }
  return problem;
}

Json stability_to_json(const StabilityReport& report) {
  Json j;
  j["stable"] = report.stable;
  j["mode"] = report.mode == StabilityReport::Mode::kFull ? "full" : "necessary-only";
  j["slack"] = report.slack;
  if (report.violating_subset) {
    Json v;
    v["edge_indices"] = report.violating_subset->edge_indices;
    v["aggregate_arrival"] = report.violating_subset->aggregate_arrival;
    v["aggregate_service"] = report.violating_subset->aggregate_service;
    j["violating_subset"] = std::move(v);
  }
  return j;
}

Json design_solution_to_json(const DesignProblem& problem,
                             const DesignSolution& solution) {
  Json j;
  switch (solution.status) {
    case SolveStatus::kOptimal: j["status"] = "optimal"; break;
    case SolveStatus::kInfeasible: j["status"] = "infeasible"; break;
    case SolveStatus::kHeuristic: j["status"] = "heuristic"; break;
  }
  if (!solution.note.empty()) j["note"] = solution.note;
  j["stability"] = stability_to_json(solution.stability);
  if (solution.status == SolveStatus::kInfeasible) return j;

  const auto candidates = resolved_candidates(problem);
  Json assignment = Json::array();
  for (std::size_t k = 0; k < solution.assignment.edge_of_type.size(); ++k) {
    const auto& edge =
        candidates[static_cast<std::size_t>(solution.assignment.edge_of_type[k])];
    assignment.push_back({{"type", k + 1}, {"edge", {edge.first, edge.second}}});
  }
  j["assignment"] = std::move(assignment);
  Json induced = Json::array();
  for (const auto& e : solution.induced->edges())
    induced.push_back({{"i", e.i}, {"j", e.j}, {"p", e.p_d}});
  j["induced_probabilities"] = std::move(induced);
  j["alpha2"] = solution.alpha2;
  j["alpha3"] = solution.diagnostic_alpha[0];
  j["alpha4"] = solution.diagnostic_alpha[1];
  return j;
}

std::string format_sig12(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header)
    : columns_(header.size()) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) text_ += ',';
    text_ += header[k];
  }
  text_ += '\n';
}

void CsvBuilder::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw invalid_parameter("csv row width does not match the header");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k) text_ += ',';
    text_ += cells[k];
  }
  text_ += '\n';
}

void CsvBuilder::add_numeric_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (const double v : values) cells.push_back(format_sig12(v));
  add_row(cells);
}

std::size_t ParsedCsv::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return k;
  throw invalid_parameter("csv: missing column '" + name + "'");
}

ParsedCsv parse_numeric_csv(const std::string& text) {
  ParsedCsv parsed;
  std::istringstream stream(text);
  std::string line;
  bool first = true;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      parsed.header = std::move(cells);
      first = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(std::stod(cell));
    parsed.rows.push_back(std::move(row));
  }
  return parsed;
}

std::string empirical_to_csv(const EmpiricalDistribution& dist) {
  CsvBuilder csv({"q", "pmf_mean", "pmf_ci95", "cdf_mean", "ccdf_mean", "ccdf_se"});
  for (int q = 0; q <= dist.qmax; ++q) {
    const auto idx = static_cast<std::size_t>(q);
    csv.add_numeric_row({static_cast<double>(q), dist.pmf_mean[idx], dist.pmf_ci95[idx],
                         dist.cdf_mean[idx], dist.ccdf_mean[idx], dist.ccdf_se[idx]});
  }
  return csv.str();
}

std::string difference_to_csv(const CdfDifferenceSeries& series) {
  CsvBuilder csv({"q", "ccdf_diff", "se", "ci95"});
  for (int q = 0; q <= series.qmax; ++q) {
    const auto idx = static_cast<std::size_t>(q);
    csv.add_numeric_row({static_cast<double>(q), series.difference[idx], series.se[idx],
                         series.ci95[idx]});
  }
  return csv.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace redlab
