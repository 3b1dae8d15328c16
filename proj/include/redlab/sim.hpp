#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redlab/model.hpp"

namespace redlab {

enum class Policy { kRedundancyCoC, kRedundancyCoS, kJiq };
enum class JiqTiebreak { kUniform, kLongestIdle };

std::string policy_name(Policy policy);
Policy policy_from_name(const std::string& name);

// Fixed documented default so runs without an explicit seed stay reproducible.
inline constexpr std::uint64_t kDefaultSeed = 20240614;

struct SimConfig {
  EdgeWeightedGraph graph;
  SystemParams params;
  Policy policy = Policy::kRedundancyCoC;
  std::int64_t n_events = 1000000;  // state transitions per run, arrivals plus departures
  int n_runs = 50;
  std::uint64_t seed = kDefaultSeed;
  double warmup_fraction = 0.1;
  JiqTiebreak jiq_tiebreak = JiqTiebreak::kUniform;
  bool allow_unstable = false;
  bool check_invariants = false;  // per-event state assertions (slow)
  int max_threads = 0;            // 0 = hardware, still capped by REDLAB_THREADS
};

/// Time-weighted occupancy distribution pooled over independent replications.
struct EmpiricalDistribution {
  int qmax = 0;
  int n_runs = 0;
  std::int64_t events_per_run = 0;
  std::vector<std::vector<double>> per_run_pmf;  // [run][q], each sums to 1
  std::vector<double> pmf_mean;
  std::vector<double> pmf_se;
  std::vector<double> pmf_ci95;
  std::vector<double> cdf_mean;
  std::vector<double> ccdf_mean;
  std::vector<double> ccdf_se;
  std::vector<double> run_total_time;
  std::vector<double> run_mean_busy;  // time-average number of busy servers
  bool stability_partial = false;     // only the necessary condition was checkable
};

/// Continuous-time jump-chain simulation of the configured policy. Runs are
/// independent replications with seeds derived from (seed, run index); equal
/// configs reproduce identical output bit for bit. Replications may execute
/// in parallel; REDLAB_THREADS caps the worker count.
EmpiricalDistribution simulate(const SimConfig& config);

struct CdfDifferenceSeries {
  int qmax = 0;
  bool truncated = false;  // inputs disagreed on support and were cut back
  std::vector<double> difference;  // difference[q] = P{B >= q} - P{A >= q}
  std::vector<double> se;
  std::vector<double> ci95;
};

/// Per-q difference of pooled tail distributions with replication-based
/// standard errors, the quantity plotted when comparing two policies.
CdfDifferenceSeries compare_empirical(const EmpiricalDistribution& a,
                                      const EmpiricalDistribution& b, int qmax);

/// Worker cap honoring the REDLAB_THREADS environment variable.
int effective_thread_count(int requested, int jobs);

}  // namespace redlab
