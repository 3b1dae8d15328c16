#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "redlab/model.hpp"

namespace redlab {

/// Assignment design problem: K job types with fixed arrival rates must each
/// be mapped to one admissible server pair; the induced selection
/// probabilities should make light-traffic performance as good as possible.
struct DesignProblem {
  int n_servers = 0;
  double service_speed = 1.0;                       // mu
  std::vector<double> type_rates;                   // lambda_1..lambda_K
  std::vector<std::pair<int, int>> candidate_edges; // empty = all pairs
};

/// type k (0-based) is served by candidate edge edge_of_type[k].
struct Assignment {
  std::vector<int> edge_of_type;
};

enum class SolveStatus { kOptimal, kInfeasible, kHeuristic };

struct FeasibilityReport {
  bool feasible = false;
  StabilityReport stability;
  std::string reason;
};

struct DesignSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  Assignment assignment;
  std::optional<EdgeWeightedGraph> induced;
  double alpha2 = 0.0;
  std::vector<double> diagnostic_alpha;  // alpha_3, alpha_4 of the winner
  StabilityReport stability;
  std::string note;
};

/// Returns the problem's candidate list with the all-pairs default applied.
std::vector<std::pair<int, int>> resolved_candidates(const DesignProblem& problem);

/// p_e proportional to the total arrival rate routed to e; zero edges drop.
EdgeWeightedGraph induced_probabilities(const DesignProblem& problem,
                                        const Assignment& assignment);

/// Total single-edge map plus the subset stability condition on the induced
/// graph with lambda = sum(type_rates) / n.
FeasibilityReport feasible(const DesignProblem& problem, const Assignment& assignment);

/// alpha_2 via the closed double sum over ordered edge pairs.
double alpha2_pair_sum(const EdgeWeightedGraph& graph);

/// Exact enumeration when |candidates|^K stays within 10^7 assignments,
/// minimizing alpha_2 of the induced graph over feasible assignments with
/// lexicographic tie-breaking; otherwise greedy construction plus single-type
/// reassignment local search (status kHeuristic).
DesignSolution optimize(const DesignProblem& problem);

}  // namespace redlab
