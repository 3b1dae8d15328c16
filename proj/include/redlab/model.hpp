#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "redlab/rational.hpp"

namespace redlab {

/// Load parameters of the parallel-server system. Jobs arrive in a Poisson
/// stream of total rate n_servers * arrival_rate_per_server; every server
/// works at speed service_speed with exponential unit-mean requirements.
struct SystemParams {
  int n_servers;
  double arrival_rate_per_server;  // lambda
  double service_speed;            // mu

  SystemParams(int n, double lambda, double mu);

  /// Offered load per server, rho = lambda / mu. Always derived.
  double load() const { return arrival_rate_per_server / service_speed; }
};

/// A server pair with its selection probability. Endpoints are 1-based and
/// stored with i < j. The weight is kept exact; p_d caches the double value.
struct WeightedEdge {
  int i = 0;
  int j = 0;
  Rational p;
  double p_d = 0.0;
};

/// Simple graph on servers 1..N whose positive edge weights sum to one.
/// Each arriving job samples its compatible server pair from these weights.
class EdgeWeightedGraph {
 public:
  /// Validates and normalizes a raw edge list: ids in 1..n, i != j, no
  /// duplicate pairs, weights >= 0 with zero-weight edges dropped, and the
  /// total weight equal to one (exactly, or within 1e-12 for dyadic input).
  static EdgeWeightedGraph from_edges(int n_servers,
                                      std::vector<WeightedEdge> edges,
                                      std::string label = "custom");

  int n_servers() const { return n_servers_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  std::size_t n_edges() const { return edges_.size(); }

  /// Bitmask of the two endpoints of edge k, bit (id - 1).
  std::uint64_t node_mask(std::size_t k) const { return masks_[k]; }

  const std::string& label() const { return label_; }

  std::vector<double> weights_double() const;

 private:
  EdgeWeightedGraph() = default;

  int n_servers_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<std::uint64_t> masks_;
  std::string label_;
};

/// All C(n,2) pairs, each with probability 1/C(n,2).
EdgeWeightedGraph build_complete_uniform(int n);

/// Cycle 1-2-...-n-1 with alternating weights: edge {i, i+1} carries
/// epsilon*2/n when i is even and (1-epsilon)*2/n when i is odd; the wrap
/// edge {n, 1} uses index n. epsilon in [0,1]; zero-weight edges are
/// dropped, so epsilon of 0 or 1 leaves two disjoint pairs.
EdgeWeightedGraph build_ring(int n, const Rational& epsilon);
EdgeWeightedGraph build_ring(int n, double epsilon);

/// Toroidal sqrt(n) x sqrt(n) grid: servers are tuples in row-major order
/// (1-based ids), each node links to its right and down neighbours modulo
/// sqrt(n), every edge with probability 1/(2n). For sqrt(n) = 2 the two
/// parallel wrap edges of a pair merge into one edge with summed weight.
EdgeWeightedGraph build_grid(int n);

struct StabilityReport {
  enum class Mode { kFull, kNecessaryOnly };

  struct Violation {
    std::vector<std::size_t> edge_indices;  // indices into graph.edges()
    double aggregate_arrival = 0.0;         // N*lambda * sum of p over subset
    double aggregate_service = 0.0;         // mu * |union of endpoints|
  };

  bool stable = false;
  Mode mode = Mode::kFull;
  // Minimum of aggregate service minus aggregate arrival over all checked
  // non-empty edge subsets; positive iff stable.
  double slack = 0.0;
  std::optional<Violation> violating_subset;
};

/// Exhaustive scan over every non-empty subset S of stored edges: stable iff
/// N*lambda * sum_{e in S} p_e < mu * |union of endpoints of S| for all S.
/// Reports the tightest subset. Refuses graphs with more than 30 edges.
StabilityReport check_stability(const EdgeWeightedGraph& graph,
                                const SystemParams& params);

/// Fallback when the exhaustive scan is infeasible: only the necessary
/// condition lambda < mu, flagged as partial via Mode::kNecessaryOnly.
StabilityReport stability_necessary_only(const SystemParams& params);

}  // namespace redlab
