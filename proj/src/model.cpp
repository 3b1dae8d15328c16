#include "redlab/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "redlab/errors.hpp"

namespace redlab {

SystemParams::SystemParams(int n, double lambda, double mu)
    : n_servers(n), arrival_rate_per_server(lambda), service_speed(mu) {
  if (n < 2) throw invalid_parameter("SystemParams.n_servers: must be >= 2");
  if (!(mu > 0.0)) throw invalid_parameter("SystemParams.service_speed: must be > 0");
  if (!(lambda >= 0.0))
    throw invalid_parameter("SystemParams.arrival_rate_per_server: must be >= 0");
}

EdgeWeightedGraph EdgeWeightedGraph::from_edges(int n_servers,
                                                std::vector<WeightedEdge> edges,
                                                std::string label) {
  if (n_servers < 2)
    throw invalid_parameter("graph.n: must be >= 2, got " + std::to_string(n_servers));
  if (n_servers > 64)
    throw size_error("graph.n: at most 64 servers supported, got " +
                     std::to_string(n_servers));

  std::set<std::pair<int, int>> seen;
  std::vector<WeightedEdge> kept;
  kept.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    WeightedEdge e = edges[k];
    const std::string where = "graph.edges[" + std::to_string(k) + "]";
    if (e.i < 1 || e.i > n_servers || e.j < 1 || e.j > n_servers)
      throw invalid_parameter(where + ": server ids must lie in 1.." +
                              std::to_string(n_servers));
    if (e.i == e.j) throw invalid_parameter(where + ": endpoints must differ");
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.p < 0) throw invalid_parameter(where + ".p: must be non-negative");
    if (e.p == 0) continue;  // only positive-weight edges are stored
    if (!seen.insert({e.i, e.j}).second)
      throw invalid_parameter(where + ": duplicate pair {" + std::to_string(e.i) +
                              "," + std::to_string(e.j) + "}");
    e.p_d = to_double(e.p);
    kept.push_back(std::move(e));
  }
  if (kept.empty()) throw invalid_parameter("graph.edges: no positive-weight edges");

  Rational total(0);
  for (const auto& e : kept) total += e.p;
  if (total != 1) {
    const double drift = std::abs(to_double(total) - 1.0);
    if (drift > 1e-12)
      throw invalid_parameter("graph.edges: weights sum to " + to_string(total) +
                              ", expected 1");
  }

  std::sort(kept.begin(), kept.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });

  EdgeWeightedGraph g;
  g.n_servers_ = n_servers;
  g.edges_ = std::move(kept);
  g.label_ = std::move(label);
  g.masks_.reserve(g.edges_.size());
  for (const auto& e : g.edges_)
    g.masks_.push_back((std::uint64_t{1} << (e.i - 1)) | (std::uint64_t{1} << (e.j - 1)));
  return g;
}

std::vector<double> EdgeWeightedGraph::weights_double() const {
  std::vector<double> w;
  w.reserve(edges_.size());
  for (const auto& e : edges_) w.push_back(e.p_d);
  return w;
}

EdgeWeightedGraph build_complete_uniform(int n) {
  if (n < 2) throw invalid_parameter("complete-uniform: n must be >= 2");
  const long long pairs = static_cast<long long>(n) * (n - 1) / 2;
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(pairs));
  const Rational p(1, pairs);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) edges.push_back({i, j, p, 0.0});
  return EdgeWeightedGraph::from_edges(n, std::move(edges),
                                       "complete-uniform(" + std::to_string(n) + ")");
}

EdgeWeightedGraph build_ring(int n, const Rational& epsilon) {
  if (n < 4 || n % 2 != 0)
    throw invalid_parameter("ring: n must be even and >= 4, got " + std::to_string(n));
  if (epsilon < 0 || epsilon > 1)
    throw invalid_parameter("ring: epsilon must lie in [0,1], got " + to_string(epsilon));
  const Rational even_weight = epsilon * Rational(2, n);
  const Rational odd_weight = (Rational(1) - epsilon) * Rational(2, n);
  std::vector<WeightedEdge> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const int j = (i == n) ? 1 : i + 1;
    edges.push_back({i, j, (i % 2 == 0) ? even_weight : odd_weight, 0.0});
  }
  return EdgeWeightedGraph::from_edges(
      n, std::move(edges), "ring(" + std::to_string(n) + ",eps=" + to_string(epsilon) + ")");
}

EdgeWeightedGraph build_ring(int n, double epsilon) {
  return build_ring(n, rational_from_double(epsilon));
}

EdgeWeightedGraph build_grid(int n) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (side * side != n || side < 2)
    throw invalid_parameter("grid: n must be a perfect square with sqrt(n) >= 2, got " +
                            std::to_string(n));
  const Rational p(1, 2LL * n);
  std::map<std::pair<int, int>, Rational> weight;  // parallel wrap edges merge
  const auto id = [side](int r, int c) { return r * side + c + 1; };
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const int here = id(r, c);
      for (const int there : {id(r, (c + 1) % side), id((r + 1) % side, c)}) {
        auto key = std::minmax(here, there);
        weight[{key.first, key.second}] += p;
      }
    }
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(weight.size());
  for (const auto& [pair, w] : weight) edges.push_back({pair.first, pair.second, w, 0.0});
  return EdgeWeightedGraph::from_edges(n, std::move(edges),
                                       "grid(" + std::to_string(n) + ")");
}

namespace {

struct SubsetScan {
  const EdgeWeightedGraph& graph;
  double n_lambda;
  double mu;
  double min_slack = std::numeric_limits<double>::infinity();
  std::uint32_t argmin_subset = 0;
  double argmin_arrival = 0.0;
  double argmin_service = 0.0;

  void visit(std::size_t idx, double sum_p, std::uint64_t nodes, std::uint32_t chosen) {
    if (idx == graph.n_edges()) {
      if (chosen == 0) return;
      const double arrival = n_lambda * sum_p;
      const double service = mu * static_cast<double>(std::popcount(nodes));
      const double slack = service - arrival;
      if (slack < min_slack) {
        min_slack = slack;
        argmin_subset = chosen;
        argmin_arrival = arrival;
        argmin_service = service;
      }
      return;
    }
    visit(idx + 1, sum_p, nodes, chosen);
    visit(idx + 1, sum_p + graph.edges()[idx].p_d, nodes | graph.node_mask(idx),
          chosen | (std::uint32_t{1} << idx));
  }
};

}  // namespace

StabilityReport check_stability(const EdgeWeightedGraph& graph, const SystemParams& params) {
  if (graph.n_servers() != params.n_servers)
    throw invalid_parameter("check_stability: graph and params disagree on n_servers");
  if (graph.n_edges() > 30)
    throw size_error("check_stability: exhaustive subset scan infeasible beyond 30 edges (" +
                     std::to_string(graph.n_edges()) +
                     " stored); fall back to stability_necessary_only");

  // lambda < mu is necessary for any graph; taking S as the full edge set
  // (whose weights sum to one exactly) shows the violation directly, without
  // the rounding noise of the per-subset double sums.
  if (params.arrival_rate_per_server >= params.service_speed) {
    std::uint64_t nodes = 0;
    for (std::size_t k = 0; k < graph.n_edges(); ++k) nodes |= graph.node_mask(k);
    StabilityReport report;
    report.mode = StabilityReport::Mode::kFull;
    StabilityReport::Violation v;
    for (std::size_t k = 0; k < graph.n_edges(); ++k) v.edge_indices.push_back(k);
    v.aggregate_arrival = params.n_servers * params.arrival_rate_per_server;
    v.aggregate_service =
        params.service_speed * static_cast<double>(std::popcount(nodes));
    report.slack = v.aggregate_service - v.aggregate_arrival;
    report.stable = false;
    report.violating_subset = std::move(v);
    return report;
  }

  SubsetScan scan{graph, params.n_servers * params.arrival_rate_per_server,
                  params.service_speed};
  scan.visit(0, 0.0, 0, 0);

  StabilityReport report;
  report.mode = StabilityReport::Mode::kFull;
  report.slack = scan.min_slack;
  report.stable = scan.min_slack > 0.0;
  if (!report.stable) {
    StabilityReport::Violation v;
    for (std::size_t k = 0; k < graph.n_edges(); ++k)
      if (scan.argmin_subset & (std::uint32_t{1} << k)) v.edge_indices.push_back(k);
    v.aggregate_arrival = scan.argmin_arrival;
    v.aggregate_service = scan.argmin_service;
    report.violating_subset = std::move(v);
  }
  return report;
}

StabilityReport stability_necessary_only(const SystemParams& params) {
  StabilityReport report;
  report.mode = StabilityReport::Mode::kNecessaryOnly;
  report.slack = params.n_servers *
                 (params.service_speed - params.arrival_rate_per_server);
  report.stable = params.arrival_rate_per_server < params.service_speed;
  if (!report.stable) {
    StabilityReport::Violation v;
    v.aggregate_arrival = params.n_servers * params.arrival_rate_per_server;
    v.aggregate_service = params.n_servers * params.service_speed;
    report.violating_subset = std::move(v);
  }
  return report;
}

}  // namespace redlab
