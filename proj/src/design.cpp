#include "redlab/design.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "redlab/alpha.hpp"
#include "redlab/errors.hpp"

namespace redlab {

namespace {

void validate_problem(const DesignProblem& problem) {
  if (problem.n_servers < 2)
    throw invalid_parameter("design.n: must be >= 2");
  if (!(problem.service_speed > 0.0))
    throw invalid_parameter("design.mu: must be > 0");
  if (problem.type_rates.empty())
    throw invalid_parameter("design.type_rates: at least one job type required");
  for (std::size_t k = 0; k < problem.type_rates.size(); ++k)
    if (!(problem.type_rates[k] > 0.0))
      throw invalid_parameter("design.type_rates[" + std::to_string(k) +
                              "]: must be > 0");
}

SystemParams derived_params(const DesignProblem& problem) {
  double total = 0.0;
  for (const double rate : problem.type_rates) total += rate;
  return SystemParams(problem.n_servers, total / problem.n_servers,
                      problem.service_speed);
}

EdgeWeightedGraph induced_graph(const DesignProblem& problem,
                                const std::vector<std::pair<int, int>>& candidates,
                                const std::vector<int>& edge_of_type) {
  std::map<std::pair<int, int>, double> rate_on_edge;
  double total = 0.0;
  for (std::size_t k = 0; k < edge_of_type.size(); ++k) {
    rate_on_edge[candidates[static_cast<std::size_t>(edge_of_type[k])]] +=
        problem.type_rates[k];
    total += problem.type_rates[k];
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(rate_on_edge.size());
  for (const auto& [pair, rate] : rate_on_edge)
    edges.push_back({pair.first, pair.second, rational_from_double(rate / total), 0.0});
  return EdgeWeightedGraph::from_edges(problem.n_servers, std::move(edges), "designed");
}

}  // namespace

std::vector<std::pair<int, int>> resolved_candidates(const DesignProblem& problem) {
  if (!problem.candidate_edges.empty()) {
    std::vector<std::pair<int, int>> candidates;
    candidates.reserve(problem.candidate_edges.size());
    for (std::size_t k = 0; k < problem.candidate_edges.size(); ++k) {
      auto [i, j] = problem.candidate_edges[k];
      const std::string where = "design.candidate_edges[" + std::to_string(k) + "]";
      if (i < 1 || j < 1 || i > problem.n_servers || j > problem.n_servers)
        throw invalid_parameter(where + ": server ids out of range");
      if (i == j) throw invalid_parameter(where + ": endpoints must differ");
      if (i > j) std::swap(i, j);
      candidates.emplace_back(i, j);
    }
    std::sort(candidates.begin(), candidates.end());
    if (std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end())
      throw invalid_parameter("design.candidate_edges: duplicate pair");
    return candidates;
  }
  std::vector<std::pair<int, int>> all;
  for (int i = 1; i <= problem.n_servers; ++i)
    for (int j = i + 1; j <= problem.n_servers; ++j) all.emplace_back(i, j);
  return all;
}

EdgeWeightedGraph induced_probabilities(const DesignProblem& problem,
                                        const Assignment& assignment) {
  validate_problem(problem);
  const auto candidates = resolved_candidates(problem);
  if (assignment.edge_of_type.size() != problem.type_rates.size())
    throw invalid_parameter("assignment: must map every job type to one edge");
  for (const int e : assignment.edge_of_type)
    if (e < 0 || e >= static_cast<int>(candidates.size()))
      throw invalid_parameter("assignment: edge index out of range");
  return induced_graph(problem, candidates, assignment.edge_of_type);
}

FeasibilityReport feasible(const DesignProblem& problem, const Assignment& assignment) {
  FeasibilityReport report;
  const EdgeWeightedGraph graph = induced_probabilities(problem, assignment);
  report.stability = check_stability(graph, derived_params(problem));
  report.feasible = report.stability.stable;
  if (!report.feasible) report.reason = "induced load violates subset stability";
  return report;
}

double alpha2_pair_sum(const EdgeWeightedGraph& graph) {
  const auto& edges = graph.edges();
  double sum = 0.0;
  for (std::size_t a = 0; a < edges.size(); ++a) {
    for (std::size_t b = 0; b < edges.size(); ++b) {
      const std::uint64_t covered = graph.node_mask(a) | graph.node_mask(b);
      sum += edges[a].p_d * edges[b].p_d / (2.0 * std::popcount(covered));
    }
  }
  return sum;
}

namespace {

struct Candidate {
  double alpha2 = std::numeric_limits<double>::infinity();
  std::vector<int> assignment;
  bool found = false;
};

DesignSolution finish_solution(const DesignProblem& problem,
                               const std::vector<std::pair<int, int>>& candidates,
                               std::vector<int> winner, SolveStatus status) {
  DesignSolution solution;
  solution.status = status;
  solution.assignment.edge_of_type = std::move(winner);
  EdgeWeightedGraph graph =
      induced_graph(problem, candidates, solution.assignment.edge_of_type);
  solution.alpha2 = alpha2_pair_sum(graph);
  const auto table = alpha_dp<double>(graph, 4);
  solution.diagnostic_alpha = {table.alpha(3), table.alpha(4)};
  solution.stability = check_stability(graph, derived_params(problem));
  solution.induced = std::move(graph);
  return solution;
}

}  // namespace

DesignSolution optimize(const DesignProblem& problem) {
  validate_problem(problem);
  const auto candidates = resolved_candidates(problem);
  const SystemParams params = derived_params(problem);
  const std::size_t n_types = problem.type_rates.size();
  const std::size_t n_candidates = candidates.size();

  const double total_assignments =
      std::pow(static_cast<double>(n_candidates), static_cast<double>(n_types));
  if (total_assignments <= 1e7) {
    Candidate best;
    std::vector<int> assignment(n_types, 0);
    bool done = false;
    while (!done) {
      const EdgeWeightedGraph graph = induced_graph(problem, candidates, assignment);
      if (check_stability(graph, params).stable) {
        const double alpha2 = alpha2_pair_sum(graph);
        // Lexicographic enumeration order makes strict improvement keep the
        // lexicographically smallest minimizer.
        if (!best.found || alpha2 < best.alpha2) {
          best.found = true;
          best.alpha2 = alpha2;
          best.assignment = assignment;
        }
      }
      // Advance the K-digit counter in lexicographic order.
      int pos = static_cast<int>(n_types) - 1;
      while (pos >= 0) {
        if (++assignment[static_cast<std::size_t>(pos)] <
            static_cast<int>(n_candidates))
          break;
        assignment[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      done = pos < 0;
    }
    if (!best.found) {
      DesignSolution solution;
      solution.status = SolveStatus::kInfeasible;
      double max_rate = 0.0;
      std::size_t max_type = 0;
      for (std::size_t k = 0; k < n_types; ++k)
        if (problem.type_rates[k] > max_rate) {
          max_rate = problem.type_rates[k];
          max_type = k;
        }
      solution.note =
          "no feasible assignment among " +
          std::to_string(static_cast<long long>(total_assignments)) + " candidates";
      if (max_rate >= 2.0 * problem.service_speed)
        solution.note += "; type " + std::to_string(max_type + 1) + " arrival rate " +
                         std::to_string(max_rate) +
                         " meets or exceeds the 2*mu capacity of any server pair";
      solution.stability =
          check_stability(induced_graph(problem, candidates,
                                        std::vector<int>(n_types, 0)),
                          params);
      return solution;
    }
    return finish_solution(problem, candidates, std::move(best.assignment),
                           SolveStatus::kOptimal);
  }

  // Greedy: heaviest types first, each on the edge minimizing the partial
  // pair sum; then single-type reassignment local search.
  std::vector<std::size_t> order(n_types);
  for (std::size_t k = 0; k < n_types; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (problem.type_rates[a] != problem.type_rates[b])
      return problem.type_rates[a] > problem.type_rates[b];
    return a < b;
  });

  double total_rate = 0.0;
  for (const double rate : problem.type_rates) total_rate += rate;

  std::vector<double> edge_rate(n_candidates, 0.0);
  std::vector<std::uint64_t> masks(n_candidates);
  for (std::size_t e = 0; e < n_candidates; ++e)
    masks[e] = (std::uint64_t{1} << (candidates[e].first - 1)) |
               (std::uint64_t{1} << (candidates[e].second - 1));
  auto pair_sum_of = [&](const std::vector<double>& rates) {
    double sum = 0.0;
    for (std::size_t a = 0; a < n_candidates; ++a) {
      if (rates[a] == 0.0) continue;
      for (std::size_t b = 0; b < n_candidates; ++b) {
        if (rates[b] == 0.0) continue;
        sum += rates[a] * rates[b] / (2.0 * std::popcount(masks[a] | masks[b]));
      }
    }
    return sum / (total_rate * total_rate);
  };

  std::vector<int> assignment(n_types, -1);
  for (const std::size_t k : order) {
    double best_value = std::numeric_limits<double>::infinity();
    std::size_t best_edge = 0;
    for (std::size_t e = 0; e < n_candidates; ++e) {
      edge_rate[e] += problem.type_rates[k];
      const double value = pair_sum_of(edge_rate);
      edge_rate[e] -= problem.type_rates[k];
      if (value < best_value) {
        best_value = value;
        best_edge = e;
      }
    }
    assignment[k] = static_cast<int>(best_edge);
    edge_rate[best_edge] += problem.type_rates[k];
  }

  auto evaluate = [&](const std::vector<int>& a) -> std::pair<bool, double> {
    const EdgeWeightedGraph graph = induced_graph(problem, candidates, a);
    if (!check_stability(graph, params).stable)
      return {false, std::numeric_limits<double>::infinity()};
    return {true, alpha2_pair_sum(graph)};
  };

  auto [feasible_now, current] = evaluate(assignment);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t k = 0; k < n_types && !improved; ++k) {
      const int original = assignment[k];
      for (std::size_t e = 0; e < n_candidates; ++e) {
        if (static_cast<int>(e) == original) continue;
        assignment[k] = static_cast<int>(e);
        const auto [ok, value] = evaluate(assignment);
        // Walk toward feasibility first, then strictly downhill on alpha_2.
        if ((ok && !feasible_now) || (ok == feasible_now && value < current)) {
          feasible_now = ok;
          current = value;
          improved = true;
          break;
        }
        assignment[k] = original;
      }
    }
  }

  if (!feasible_now) {
    DesignSolution solution;
    solution.status = SolveStatus::kInfeasible;
    solution.note = "heuristic search found no stable assignment";
    solution.stability =
        check_stability(induced_graph(problem, candidates, assignment), params);
    return solution;
  }
  return finish_solution(problem, candidates, std::move(assignment),
                         SolveStatus::kHeuristic);
}

}  // namespace redlab
