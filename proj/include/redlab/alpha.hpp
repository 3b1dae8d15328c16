#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "redlab/errors.hpp"
#include "redlab/model.hpp"
#include "redlab/rational.hpp"

namespace redlab {

// Coverage polynomials alpha_q: for a graph with selection probabilities P,
// alpha_q(P) is the sum over all ordered q-tuples of edges of the product of
// p_{c_i} / |union of the first i edges|. They are the light-traffic
// fingerprint of the graph: P{Q = q} = P{Q = 0} * alpha_q * (N lambda/mu)^q.

inline constexpr int kMaxAlphaServers = 24;

template <class T>
struct BasicAlphaTable {
  std::string graph_label;
  int qmax = 0;
  std::vector<T> values;  // values[q-1] holds alpha_q

  const T& alpha(int q) const { return values.at(static_cast<std::size_t>(q) - 1); }
};

using AlphaTable = BasicAlphaTable<double>;
using AlphaTableExact = BasicAlphaTable<Rational>;

namespace detail {

template <class T>
T edge_weight(const WeightedEdge& e);

template <>
inline double edge_weight<double>(const WeightedEdge& e) { return e.p_d; }

template <>
inline Rational edge_weight<Rational>(const WeightedEdge& e) { return e.p; }

}  // namespace detail

/// Layered dynamic program over busy-server sets: layer i maps each set of
/// covered servers to the accumulated weight of all length-i edge sequences
/// whose union is that set; alpha_i is the layer total. One layer is kept
/// in memory at a time. Cost O(qmax * 2^N * |E|).
template <class T>
BasicAlphaTable<T> alpha_dp(const EdgeWeightedGraph& graph, int qmax) {
  if (qmax < 1) throw invalid_parameter("alpha_dp: qmax must be >= 1");
  if (graph.n_servers() > kMaxAlphaServers)
    throw size_error("alpha_dp: more than " + std::to_string(kMaxAlphaServers) +
                     " servers; 2^N layer state space too large");
  const auto& edges = graph.edges();
  std::unordered_map<std::uint64_t, T> layer;
  layer.emplace(0, T(1));
  BasicAlphaTable<T> table{graph.label(), qmax, {}};
  table.values.reserve(static_cast<std::size_t>(qmax));
  for (int q = 1; q <= qmax; ++q) {
    std::unordered_map<std::uint64_t, T> next;
    next.reserve(layer.size() * 2 + edges.size());
    for (const auto& [covered, weight] : layer) {
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::uint64_t grown = covered | graph.node_mask(k);
        T contribution = weight * detail::edge_weight<T>(edges[k]);
        contribution /= T(std::popcount(grown));
        auto [it, inserted] = next.try_emplace(grown, contribution);
        if (!inserted) it->second += contribution;
      }
    }
    T total(0);
    for (const auto& [covered, weight] : next) total += weight;
    table.values.push_back(std::move(total));
    layer = std::move(next);
  }
  return table;
}

/// Literal enumeration of all |E|^q edge sequences; the independent oracle
/// for alpha_dp. Refuses budgets above 10^7 sequences.
template <class T>
T alpha_bruteforce(const EdgeWeightedGraph& graph, int q) {
  if (q < 1) throw invalid_parameter("alpha_bruteforce: q must be >= 1");
  const double budget =
      std::pow(static_cast<double>(graph.n_edges()), static_cast<double>(q));
  if (budget > 1e7)
    throw size_error("alpha_bruteforce: |E|^q exceeds the 10^7 enumeration budget");
  const auto& edges = graph.edges();
  T total(0);
  auto recurse = [&](auto&& self, int depth, std::uint64_t covered, const T& product) -> void {
    if (depth == q) {
      total += product;
      return;
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::uint64_t grown = covered | graph.node_mask(k);
      T next = product * detail::edge_weight<T>(edges[k]);
      next /= T(std::popcount(grown));
      self(self, depth + 1, grown, next);
    }
  };
  recurse(recurse, 0, 0, T(1));
  return total;
}

/// alpha_q(a) / alpha_q(b): the limit of P{Q(a) >= q} / P{Q(b) >= q} as the
/// arrival rate vanishes.
template <class T>
T light_traffic_ratio(const EdgeWeightedGraph& a, const EdgeWeightedGraph& b, int q) {
  if (a.n_servers() != b.n_servers())
    throw invalid_parameter("light_traffic_ratio: graphs must share n_servers");
  const T num = alpha_dp<T>(a, q).alpha(q);
  const T den = alpha_dp<T>(b, q).alpha(q);
  return num / den;
}

struct DominanceReport {
  int qmax = 0;
  bool holds = false;
  std::optional<int> first_violation;
  // ratios[q-1] = alpha_{q-1} / alpha_q with alpha_0 = 1, for q = 1..qmax.
  std::vector<double> ratios_a;
  std::vector<double> ratios_b;
};

/// Birth-death ratio condition: alpha_{q-1}(a)/alpha_q(a) >=
/// alpha_{q-1}(b)/alpha_q(b) for 2 <= q <= qmax. When it holds for every q
/// the total occupancy under a is stochastically smaller than under b at any
/// stable load; a finite qmax makes this evidence, not proof.
template <class T>
DominanceReport bd_dominance_check(const EdgeWeightedGraph& a,
                                   const EdgeWeightedGraph& b, int qmax) {
  if (a.n_servers() != b.n_servers())
    throw invalid_parameter("bd_dominance_check: graphs must share n_servers");
  if (qmax < 2) throw invalid_parameter("bd_dominance_check: qmax must be >= 2");
  const auto ta = alpha_dp<T>(a, qmax);
  const auto tb = alpha_dp<T>(b, qmax);
  DominanceReport report;
  report.qmax = qmax;
  report.holds = true;
  for (int q = 1; q <= qmax; ++q) {
    const T prev_a = (q == 1) ? T(1) : ta.alpha(q - 1);
    const T prev_b = (q == 1) ? T(1) : tb.alpha(q - 1);
    const T ra = prev_a / ta.alpha(q);
    const T rb = prev_b / tb.alpha(q);
    report.ratios_a.push_back(static_cast<double>(ra));
    report.ratios_b.push_back(static_cast<double>(rb));
    if (q >= 2 && ra < rb && report.holds) {
      report.holds = false;
      report.first_violation = q;
    }
  }
  return report;
}

/// alpha_q evaluated on a raw weight vector (no normalization requirement);
/// alpha_q is a polynomial, so off-simplex evaluation is well defined.
double alpha_q_raw(int n_servers, const std::vector<std::pair<int, int>>& edges,
                   const std::vector<double>& weights, int q);

struct MinimalityProbeReport {
  int n_servers = 0;
  int q = 0;
  int trials = 0;
  double step = 0.0;
  double alpha_uniform = 0.0;
  // Minimum over all trials and both perturbation signs of
  // alpha_q(perturbed) - alpha_q(uniform).
  double min_difference = 0.0;
  double max_difference = 0.0;
  double projected_gradient_norm = 0.0;
  int rescaled_trials = 0;  // perturbations clipped to the simplex boundary
};

/// Random-direction probe of alpha_q around the uniform complete graph:
/// samples zero-sum directions, evaluates alpha_q at uniform +- step * d,
/// and reports the worst difference together with the finite-difference
/// gradient projected onto the simplex tangent space.
MinimalityProbeReport uniform_minimality_probe(int n, int q, int trials, double step,
                                               std::uint64_t seed);

struct PodPmf {
  int n = 0;
  int d = 0;
  double rho = 0.0;
  std::vector<double> ratio;  // ratio[q] = P{Q = q} / P{Q = 0}, q = 0..qmax
  std::vector<double> pmf;    // normalized law on 0..qmax
  double normalizer = 0.0;    // sum of the full ratio series
};

/// Exact stationary law of the total occupancy under classical uniform
/// power-of-d sampling on n servers. The unnormalized ratio series comes
/// from an alternating sum over integer partitions with elementary-symmetric
/// weights, evaluated in exact integer arithmetic; normalization closes the
/// geometric tail analytically through the underlying mixture of geometric
/// terms with bases rho * C(i-1,d-1) / C(n-1,d-1).
PodPmf classical_pod_pmf(int n, int d, double rho, int qmax);

/// Reconstructs the cancel-on-completion occupancy law of an arbitrary graph
/// from its coverage polynomials: pmf(q) proportional to alpha_q * (N rho)^q,
/// normalized with a relative tail bound of 1e-15.
std::vector<double> coc_pmf_from_alpha(const EdgeWeightedGraph& graph, double rho,
                                       int qmax);

}  // namespace redlab
