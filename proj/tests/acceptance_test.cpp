// Acceptance suite: each test case covers one numbered criterion and prints
// one [PASS]/[FAIL] line with the measured quantities.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "redlab/alpha.hpp"
#include "redlab/closed_forms.hpp"
#include "redlab/design.hpp"
#include "redlab/io.hpp"
#include "redlab/model.hpp"
#include "redlab/reports.hpp"
#include "redlab/sim.hpp"

using namespace redlab;

namespace {

using Clock = std::chrono::steady_clock;

struct Stopwatch {
  Clock::time_point start = Clock::now();
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
};

void report(int criterion, bool ok, const std::string& details) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion,
              details.c_str());
  std::fflush(stdout);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

bool rel_near(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

TEST_CASE("criterion 1: light-traffic ratio table") {
  Stopwatch timer;
  struct Expected {
    const char* row;
    int n;
    int q;
    double value;
  };
  // Printed table values; the (eps=0.7, N=4, q=10) entry is 0.8057 by exact
  // enumeration of all 4^10 edge sequences (three independent routes agree),
  // while the printed source shows 0.8957 with every neighbouring entry
  // matching; asserted against the enumeration-verified value.
  const std::vector<Expected> expected{
      {"hom. ring", 4, 2, 0.9804},         {"hom. ring", 4, 4, 0.9432},
      {"hom. ring", 4, 10, 0.9046},        {"hom. ring", 4, 16, 0.9004},
      {"hom. ring", 8, 2, 0.9754},         {"hom. ring", 8, 4, 0.8947},
      {"hom. ring", 8, 10, 0.6586},        {"het. ring eps=0.7", 4, 2, 0.9713},
      {"het. ring eps=0.7", 4, 4, 0.9055}, {"het. ring eps=0.7", 4, 10, 0.8057},
      {"het. ring eps=0.7", 4, 16, 0.7850}, {"het. ring eps=0.7", 8, 2, 0.9700},
      {"het. ring eps=0.7", 8, 4, 0.8707}, {"het. ring eps=0.7", 8, 10, 0.5831},
      {"het. ring eps=0.9", 4, 2, 0.9448}, {"het. ring eps=0.9", 4, 4, 0.8063},
      {"het. ring eps=0.9", 4, 10, 0.5481}, {"het. ring eps=0.9", 4, 16, 0.4509},
      {"het. ring eps=0.9", 8, 2, 0.9543}, {"het. ring eps=0.9", 8, 4, 0.8051},
      {"het. ring eps=0.9", 8, 10, 0.4095},
  };

  const auto cells = table1_cells();  // rational N=4, double N=8
  int matched = 0;
  std::string failures;
  for (const auto& want : expected) {
    bool found = false;
    for (const auto& cell : cells) {
      if (cell.row == want.row && cell.n == want.n && cell.q == want.q) {
        found = true;
        if (near(cell.ratio, want.value, 5e-5)) {
          ++matched;
        } else {
          char buffer[160];
          std::snprintf(buffer, sizeof(buffer), " [%s N=%d q=%d: got %.4f want %.4f]",
                        want.row, want.n, want.q, cell.ratio, want.value);
          failures += buffer;
        }
      }
    }
    if (!found) failures += std::string(" [missing ") + want.row + "]";
  }
  const double elapsed = timer.seconds();
  const bool ok = matched == static_cast<int>(expected.size()) && elapsed < 10.0;
  report(1, ok,
         "table of alpha ratios: " + std::to_string(matched) + "/21 cells to 4 d.p. "
         "(eps=0.7 N=4 q=10 pinned to the enumeration-verified 0.8057; printed "
         "source shows 0.8957), " + std::to_string(elapsed) + " s" + failures);
  CHECK(ok);
}

TEST_CASE("criterion 2: dp equals brute-force enumeration") {
  Stopwatch timer;
  std::mt19937 rng(321);
  int graphs_checked = 0;
  bool all_equal = true;
  while (graphs_checked < 24) {
    std::uniform_int_distribution<int> n_dist(2, 5);
    const int n = n_dist(rng);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::uniform_int_distribution<int> count_dist(1, std::min<int>(6, pairs.size()));
    const int n_edges = count_dist(rng);
    std::uniform_int_distribution<int> numerator(1, 30);
    Rational total(0);
    std::vector<Rational> raw;
    for (int k = 0; k < n_edges; ++k) {
      raw.emplace_back(numerator(rng));
      total += raw.back();
    }
    std::vector<WeightedEdge> edges;
    for (int k = 0; k < n_edges; ++k)
      edges.push_back({pairs[static_cast<std::size_t>(k)].first,
                       pairs[static_cast<std::size_t>(k)].second, raw[k] / total, 0.0});
    const auto graph = EdgeWeightedGraph::from_edges(n, std::move(edges), "random");
    ++graphs_checked;

    const auto exact = alpha_dp<Rational>(graph, 4);
    const auto approx = alpha_dp<double>(graph, 4);
    for (int q = 1; q <= 4; ++q) {
      if (exact.alpha(q) != alpha_bruteforce<Rational>(graph, q)) all_equal = false;
      if (!rel_near(approx.alpha(q), alpha_bruteforce<double>(graph, q), 1e-12))
        all_equal = false;
    }
  }
  const double elapsed = timer.seconds();
  const bool ok = all_equal && elapsed < 5.0;
  report(2, ok,
         "alpha_dp == alpha_bruteforce on " + std::to_string(graphs_checked) +
             " random graphs (exact rationals and 1e-12 doubles), " +
             std::to_string(elapsed) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 3: closed forms bridge to the coverage polynomials") {
  Stopwatch timer;
  bool ok = true;
  int checks = 0;
  for (const double rho : {0.2, 0.5, 0.8}) {
    const double x = 4.0 * rho;
    const auto complete = coc_complete4_pmf(rho);
    const auto complete_alpha = alpha_dp<double>(build_complete_uniform(4), 12);
    for (int q = 1; q <= 12; ++q, ++checks)
      ok &= rel_near(complete.pmf(q) / complete.pmf(0),
                     complete_alpha.alpha(q) * std::pow(x, q), 1e-10);
    for (const double eps : {0.3, 0.5, 0.7, 0.9}) {
      const auto ring = coc_hetring4_pmf(rho, eps);
      const auto ring_alpha = alpha_dp<double>(build_ring(4, eps), 12);
      for (int q = 1; q <= 12; ++q, ++checks)
        ok &= rel_near(ring.pmf(q) / ring.pmf(0), ring_alpha.alpha(q) * std::pow(x, q),
                       1e-10);
    }
  }
  const double elapsed = timer.seconds();
  ok = ok && elapsed < 5.0;
  report(3, ok,
         "pmf(q)/pmf(0) == alpha_q * (4 rho)^q for " + std::to_string(checks) +
             " (rho, eps, q) combinations to 1e-10, " + std::to_string(elapsed) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 4: four-server dominance and the ratio condition") {
  Stopwatch timer;
  bool margins_positive = true;
  int margin_checks = 0;
  for (int decile = 1; decile <= 9; ++decile) {
    const double rho = decile / 10.0;
    const auto verdict = stochastic_dominance_compare(coc_complete4_pmf(rho),
                                                      coc_hetring4_pmf(rho, 0.5), 50);
    if (!verdict.a_le_b) margins_positive = false;
    for (const double margin : verdict.margins) {
      ++margin_checks;
      if (!(margin > 0.0)) margins_positive = false;
    }
  }
  const auto bd = bd_dominance_check<Rational>(build_complete_uniform(4),
                                               build_ring(4, Rational(1, 2)), 16);
  const bool ok = margins_positive && bd.holds;
  report(4, ok,
         "P{hom >= q} - P{uniform >= q} > 0 for all " +
             std::to_string(margin_checks) +
             " (rho, q) pairs and the birth-death ratio condition holds to q = 16, " +
             std::to_string(timer.seconds()) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 5: classical power-of-d consistency") {
  Stopwatch timer;
  bool ok = true;
  for (const double rho : {0.2, 0.5, 0.8}) {
    const auto pod = classical_pod_pmf(4, 2, rho, 15);
    const auto closed = coc_complete4_pmf(rho);
    for (int q = 0; q <= 15; ++q)
      ok &= rel_near(pod.pmf[static_cast<std::size_t>(q)], closed.pmf(q), 1e-10);

    const auto pooled = classical_pod_pmf(4, 4, rho, 15);
    for (int q = 0; q <= 15; ++q)
      ok &= rel_near(pooled.pmf[static_cast<std::size_t>(q)],
                     (1.0 - rho) * std::pow(rho, q), 1e-14);
  }
  report(5, ok,
         "(N,d)=(4,2) matches the explicit four-server law to 1e-10 and "
         "(N,d)=(4,4) matches (1-rho) rho^q to final rounding, " +
             std::to_string(timer.seconds()) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 6: simulation within confidence bands of the closed forms") {
  Stopwatch timer;
  struct LawCheck {
    const char* name;
    Policy policy;
    EdgeWeightedGraph graph;
    SpectralDistribution law;
  };
  const double rho = 0.8;
  std::vector<LawCheck> laws;
  laws.push_back({"coc complete4", Policy::kRedundancyCoC, build_complete_uniform(4),
                  coc_complete4_pmf(rho)});
  laws.push_back({"cos complete4", Policy::kRedundancyCoS, build_complete_uniform(4),
                  cos_complete4_pmf(rho)});
  laws.push_back({"cos hom ring4", Policy::kRedundancyCoS, build_ring(4, Rational(1, 2)),
                  cos_homring4_pmf(rho)});

  int in_band = 0;
  int total = 0;
  std::string detail;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    SimConfig config{laws[i].graph, SystemParams(4, rho, 1.0)};
    config.policy = laws[i].policy;
    config.n_runs = 50;
    config.n_events = 100000;
    config.seed = kDefaultSeed + i;
    const auto dist = simulate(config);
    int hits = 0;
    for (int q = 0; q <= 8; ++q, ++total) {
      const auto idx = static_cast<std::size_t>(q);
      if (std::abs(dist.pmf_mean[idx] - laws[i].law.pmf(q)) <= dist.pmf_ci95[idx]) {
        ++hits;
        ++in_band;
      }
    }
    detail += std::string(laws[i].name) + " " + std::to_string(hits) + "/9, ";
  }
  const double elapsed = timer.seconds();
  const int needed = (total * 9 + 9) / 10;  // ceil(0.9 * total)
  const bool ok = in_band >= needed && elapsed < 180.0;
  report(6, ok,
         "pooled pmf within the 95% band for " + std::to_string(in_band) + "/" +
             std::to_string(total) + " per-q checks (need >= " +
             std::to_string(needed) + "): " + detail + std::to_string(elapsed) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 7: grid and ring trends at reduced scale") {
  Stopwatch timer;
  const std::int64_t events = 150000;
  const int runs = 30;

  auto run = [&](const EdgeWeightedGraph& graph, double rho, std::uint64_t salt) {
    SimConfig config{graph, SystemParams(graph.n_servers(), rho, 1.0)};
    config.policy = Policy::kRedundancyCoC;
    config.n_events = events;
    config.n_runs = runs;
    config.seed = kDefaultSeed + salt;
    return simulate(config);
  };

  bool ok = true;
  std::string detail;
  for (const double rho : {0.3, 0.7}) {
    const auto complete9 = run(build_complete_uniform(9), rho, 11);
    const auto grid9 = run(build_grid(9), rho, 12);
    const auto complete8 = run(build_complete_uniform(8), rho, 13);
    const auto ring8 = run(build_ring(8, Rational(1, 2)), rho, 14);

    const auto grid_diff = compare_empirical(complete9, grid9, 40);
    const auto ring_diff = compare_empirical(complete8, ring8, 40);

    double grid_peak = 0.0;
    double ring_peak = 0.0;
    for (int q = 0; q <= grid_diff.qmax; ++q) {
      const auto idx = static_cast<std::size_t>(q);
      if (grid_diff.difference[idx] < -2.0 * grid_diff.se[idx]) ok = false;
      grid_peak = std::max(grid_peak, grid_diff.difference[idx]);
    }
    for (int q = 0; q <= ring_diff.qmax; ++q) {
      const auto idx = static_cast<std::size_t>(q);
      if (ring_diff.difference[idx] < -2.0 * ring_diff.se[idx]) ok = false;
      ring_peak = std::max(ring_peak, ring_diff.difference[idx]);
    }
    if (!(grid_peak < ring_peak)) ok = false;
    char buffer[120];
    std::snprintf(buffer, sizeof(buffer), "rho=%.1f peak gap grid %.4f < ring %.4f; ",
                  rho, grid_peak, ring_peak);
    detail += buffer;
  }
  const double elapsed = timer.seconds();
  report(7, ok,
         "CDF differences vs uniform stay >= -2 se everywhere and the grid gap "
         "is smaller in pattern: " + detail + std::to_string(elapsed) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 8: design optimizer") {
  Stopwatch timer;
  DesignProblem overload;
  overload.n_servers = 4;
  overload.service_speed = 1.0;
  overload.type_rates = {2.5, 1.0};
  const auto infeasible = optimize(overload);
  bool ok = infeasible.status == SolveStatus::kInfeasible;

  DesignProblem equal;
  equal.n_servers = 4;
  equal.service_speed = 1.0;
  equal.type_rates = {0.5, 0.5};
  const auto solution = optimize(equal);
  ok = ok && solution.status == SolveStatus::kOptimal &&
       near(solution.alpha2, 0.1875, 1e-12);

  // Independent enumeration over all 36 assignments with the dp-based alpha_2.
  const auto candidates = resolved_candidates(equal);
  double best = 1.0;
  for (int e1 = 0; e1 < 6; ++e1) {
    for (int e2 = 0; e2 < 6; ++e2) {
      const Assignment a{{e1, e2}};
      if (!feasible(equal, a).feasible) continue;
      best = std::min(best,
                      alpha_dp<double>(induced_probabilities(equal, a), 2).alpha(2));
    }
  }
  ok = ok && near(best, solution.alpha2, 1e-12);

  if (solution.status == SolveStatus::kOptimal) {
    const auto e1 =
        candidates[static_cast<std::size_t>(solution.assignment.edge_of_type[0])];
    const auto e2 =
        candidates[static_cast<std::size_t>(solution.assignment.edge_of_type[1])];
    ok = ok && e1.first != e2.first && e1.first != e2.second &&
         e1.second != e2.first && e1.second != e2.second;
  }
  report(8, ok,
         "overloaded two-type instance infeasible; equal rates give disjoint edges "
         "with alpha_2 = 0.1875 equal to the enumerated optimum, " +
             std::to_string(timer.seconds()) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 9: uniform minimality probe") {
  Stopwatch timer;
  bool ok = true;
  std::string detail;
  for (const int q : {2, 3}) {
    const auto probe = uniform_minimality_probe(4, q, 200, 0.02, kDefaultSeed);
    if (!(probe.min_difference >= -1e-12)) ok = false;
    if (!(probe.projected_gradient_norm < 1e-6)) ok = false;
    char buffer[120];
    std::snprintf(buffer, sizeof(buffer), "q=%d min diff %.3e grad %.3e; ", q,
                  probe.min_difference, probe.projected_gradient_norm);
    detail += buffer;
  }
  report(9, ok,
         "200 perturbations at step 0.02 never beat uniform and the projected "
         "gradient vanishes: " + detail + std::to_string(timer.seconds()) + " s");
  CHECK(ok);
}

TEST_CASE("criterion 10: determinism of simulation output") {
  Stopwatch timer;
  SimConfig config{build_ring(4, Rational(7, 10)), SystemParams(4, 0.7, 1.0)};
  config.policy = Policy::kRedundancyCoS;
  config.n_events = 20000;
  config.n_runs = 8;
  config.seed = 123456789;
  const std::string first = empirical_to_csv(simulate(config));
  const std::string second = empirical_to_csv(simulate(config));
  config.max_threads = 1;
  const std::string serial = empirical_to_csv(simulate(config));
  const bool ok = first == second && first == serial;
  report(10, ok,
         std::string("same seed reproduces byte-identical CSVs (parallel and "
                     "single-threaded), ") + std::to_string(timer.seconds()) + " s");
  CHECK(ok);
}
