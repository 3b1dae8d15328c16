#include "redlab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

#include "redlab/errors.hpp"

namespace redlab {

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::kRedundancyCoC: return "coc";
    case Policy::kRedundancyCoS: return "cos";
    case Policy::kJiq: return "jiq";
  }
  return "?";
}

Policy policy_from_name(const std::string& name) {
  if (name == "coc") return Policy::kRedundancyCoC;
  if (name == "cos") return Policy::kRedundancyCoS;
  if (name == "jiq") return Policy::kJiq;
  throw invalid_parameter("policy: expected one of coc|cos|jiq, got '" + name + "'");
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Uniform in (0,1), built from the raw engine output so streams do not
// depend on standard-library distribution internals.
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(std::mt19937_64& rng, double rate) {
  return -std::log(uniform01(rng)) / rate;
}

struct Job {
  std::uint64_t mask = 0;  // endpoint bits of the sampled edge
};

// Cancel-on-completion: replicas join both FCFS queues, so a server is busy
// iff some job in the central queue contains it; a completion at server s
// removes the oldest job containing s entirely.
class CocState {
 public:
  void reset(int n) {
    replica_count_.assign(static_cast<std::size_t>(n) + 1, 0);
    jobs_.clear();
    n_busy_ = 0;
  }

  long long q_total() const { return static_cast<long long>(jobs_.size()); }
  int busy() const { return n_busy_; }

  void arrival(int i, int j, double, std::mt19937_64&) {
    jobs_.push_back({(std::uint64_t{1} << (i - 1)) | (std::uint64_t{1} << (j - 1))});
    if (replica_count_[static_cast<std::size_t>(i)]++ == 0) ++n_busy_;
    if (replica_count_[static_cast<std::size_t>(j)]++ == 0) ++n_busy_;
  }

  void completion(int kth_busy, double, std::mt19937_64&) {
    const int s = find_kth_busy(kth_busy);
    const std::uint64_t bit = std::uint64_t{1} << (s - 1);
    for (auto it = jobs_.begin(); it != jobs_.end(); ++it) {
      if (it->mask & bit) {
        release(it->mask);
        jobs_.erase(it);
        return;
      }
    }
    throw std::logic_error("coc: busy server without a compatible job");
  }

  void check_invariants() const {
    std::uint64_t covered = 0;
    for (const auto& job : jobs_) covered |= job.mask;
    if (std::popcount(covered) != n_busy_)
      throw std::logic_error("coc: busy set deviates from the union of queued jobs");
  }

 private:
  int find_kth_busy(int k) const {
    for (int s = 1; s < static_cast<int>(replica_count_.size()); ++s) {
      if (replica_count_[static_cast<std::size_t>(s)] > 0 && k-- == 0) return s;
    }
    throw std::logic_error("coc: busy index out of range");
  }

  void release(std::uint64_t mask) {
    while (mask) {
      const int s = std::countr_zero(mask) + 1;
      mask &= mask - 1;
      if (--replica_count_[static_cast<std::size_t>(s)] == 0) --n_busy_;
    }
  }

  std::vector<int> replica_count_;
  std::vector<Job> jobs_;
  int n_busy_ = 0;
};

// Cancel-on-start with assign-to-longest-idle-server: waiting replicas sit in
// a central FCFS queue; a server turning idle claims the first compatible
// waiting job, else joins the back of the idle list.
class CosState {
 public:
  void reset(int n) {
    n_servers_ = n;
    serving_.assign(static_cast<std::size_t>(n) + 1, false);
    idle_order_.clear();
    for (int s = 1; s <= n; ++s) idle_order_.push_back(s);
    waiting_.clear();
    n_serving_ = 0;
  }

  long long q_total() const {
    return static_cast<long long>(waiting_.size()) + n_serving_;
  }
  int busy() const { return n_serving_; }

  void arrival(int i, int j, double, std::mt19937_64&) {
    for (auto it = idle_order_.begin(); it != idle_order_.end(); ++it) {
      if (*it == i || *it == j) {  // first hit has been idle the longest
        start_service(*it);
        idle_order_.erase(it);
        return;
      }
    }
    waiting_.push_back({(std::uint64_t{1} << (i - 1)) | (std::uint64_t{1} << (j - 1))});
  }

  void completion(int kth_busy, double, std::mt19937_64&) {
    const int s = find_kth_busy(kth_busy);
    serving_[static_cast<std::size_t>(s)] = false;
    --n_serving_;
    const std::uint64_t bit = std::uint64_t{1} << (s - 1);
    for (auto it = waiting_.begin(); it != waiting_.end(); ++it) {
      if (it->mask & bit) {  // sibling replica is cancelled with the job
        waiting_.erase(it);
        start_service(s);
        return;
      }
    }
    idle_order_.push_back(s);
  }

  void check_invariants() const {
    std::uint64_t idle_mask = 0;
    for (const int s : idle_order_) idle_mask |= std::uint64_t{1} << (s - 1);
    for (const auto& job : waiting_)
      if (job.mask & idle_mask)
        throw std::logic_error("cos: waiting job compatible with an idle server");
    if (static_cast<int>(idle_order_.size()) + n_serving_ != n_servers_)
      throw std::logic_error("cos: idle list and serving count disagree");
  }

 private:
  void start_service(int s) {
    serving_[static_cast<std::size_t>(s)] = true;
    ++n_serving_;
  }

  int find_kth_busy(int k) const {
    for (int s = 1; s <= n_servers_; ++s) {
      if (serving_[static_cast<std::size_t>(s)] && k-- == 0) return s;
    }
    throw std::logic_error("cos: busy index out of range");
  }

  int n_servers_ = 0;
  std::vector<bool> serving_;
  std::vector<int> idle_order_;  // front = longest idle
  std::vector<Job> waiting_;
  int n_serving_ = 0;
};

// Join-the-idle-queue: no replication; an arrival joins an idle endpoint if
// any, otherwise a uniformly random endpoint, and queues FCFS.
class JiqState {
 public:
  explicit JiqState(JiqTiebreak tiebreak) : tiebreak_(tiebreak) {}

  void reset(int n) {
    queue_len_.assign(static_cast<std::size_t>(n) + 1, 0);
    idle_since_.assign(static_cast<std::size_t>(n) + 1, 0.0);
    n_busy_ = 0;
    total_jobs_ = 0;
  }

  long long q_total() const { return total_jobs_; }
  int busy() const { return n_busy_; }

  void arrival(int i, int j, double, std::mt19937_64& rng) {
    const bool idle_i = queue_len_[static_cast<std::size_t>(i)] == 0;
    const bool idle_j = queue_len_[static_cast<std::size_t>(j)] == 0;
    int target;
    if (idle_i && idle_j) {
      if (tiebreak_ == JiqTiebreak::kLongestIdle) {
        const double ti = idle_since_[static_cast<std::size_t>(i)];
        const double tj = idle_since_[static_cast<std::size_t>(j)];
        target = (ti < tj || (ti == tj && i < j)) ? i : j;
      } else {
        target = uniform01(rng) < 0.5 ? i : j;
      }
    } else if (idle_i) {
      target = i;
    } else if (idle_j) {
      target = j;
    } else {
      target = uniform01(rng) < 0.5 ? i : j;
    }
    if (queue_len_[static_cast<std::size_t>(target)]++ == 0) ++n_busy_;
    ++total_jobs_;
  }

  void completion(int kth_busy, double now, std::mt19937_64&) {
    const int s = find_kth_busy(kth_busy);
    if (--queue_len_[static_cast<std::size_t>(s)] == 0) {
      --n_busy_;
      idle_since_[static_cast<std::size_t>(s)] = now;
    }
    --total_jobs_;
  }

  void check_invariants() const {
    long long total = 0;
    int busy = 0;
    for (std::size_t s = 1; s < queue_len_.size(); ++s) {
      total += queue_len_[s];
      busy += queue_len_[s] > 0 ? 1 : 0;
    }
    if (total != total_jobs_ || busy != n_busy_)
      throw std::logic_error("jiq: cached totals deviate from the queues");
  }

 private:
  int find_kth_busy(int k) const {
    for (int s = 1; s < static_cast<int>(queue_len_.size()); ++s) {
      if (queue_len_[static_cast<std::size_t>(s)] > 0 && k-- == 0) return s;
    }
    throw std::logic_error("jiq: busy index out of range");
  }

  JiqTiebreak tiebreak_;
  std::vector<int> queue_len_;
  std::vector<double> idle_since_;
  int n_busy_ = 0;
  long long total_jobs_ = 0;
};

struct RunResult {
  std::vector<double> pmf;
  double total_time = 0.0;
  double mean_busy = 0.0;
};

struct EdgeSampler {
  std::vector<double> cumulative;
  std::vector<std::pair<int, int>> endpoints;

  explicit EdgeSampler(const EdgeWeightedGraph& graph) {
    double acc = 0.0;
    for (const auto& e : graph.edges()) {
      acc += e.p_d;
      cumulative.push_back(acc);
      endpoints.emplace_back(e.i, e.j);
    }
  }

  std::pair<int, int> sample(std::mt19937_64& rng) const {
    const double x = uniform01(rng) * cumulative.back();
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), x);
    const std::size_t k = std::min(
        static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
    return endpoints[k];
  }
};

template <class State>
RunResult run_one(State state, const SimConfig& config, const EdgeSampler& sampler,
                  std::uint64_t run_seed) {
  std::mt19937_64 rng(run_seed);
  state.reset(config.params.n_servers);

  const double n_lambda =
      config.params.n_servers * config.params.arrival_rate_per_server;
  const double mu = config.params.service_speed;
  const std::int64_t warmup_events = static_cast<std::int64_t>(
      config.warmup_fraction * static_cast<double>(config.n_events));

  std::vector<double> occupancy_time;
  double total_time = 0.0;
  double busy_time = 0.0;
  double now = 0.0;

  for (std::int64_t event = 0; event < config.n_events; ++event) {
    const double rate = n_lambda + mu * state.busy();
    const double dt = exponential(rng, rate);
    if (event >= warmup_events) {
      const auto q = static_cast<std::size_t>(state.q_total());
      if (q >= occupancy_time.size()) occupancy_time.resize(q + 1, 0.0);
      occupancy_time[q] += dt;
      busy_time += state.busy() * dt;
      total_time += dt;
    }
    now += dt;

    const double pick = uniform01(rng) * rate;
    if (pick < n_lambda) {
      const auto [i, j] = sampler.sample(rng);
      state.arrival(i, j, now, rng);
    } else {
      const int kth = std::min(static_cast<int>((pick - n_lambda) / mu),
                               state.busy() - 1);
      state.completion(kth, now, rng);
    }
    if (config.check_invariants) state.check_invariants();
  }

  RunResult result;
  result.total_time = total_time;
  result.mean_busy = total_time > 0.0 ? busy_time / total_time : 0.0;
  result.pmf.resize(occupancy_time.size());
  for (std::size_t q = 0; q < occupancy_time.size(); ++q)
    result.pmf[q] = occupancy_time[q] / total_time;
  return result;
}

void fill_pooled_statistics(EmpiricalDistribution& dist) {
  const int runs = dist.n_runs;
  std::size_t support = 0;
  for (const auto& pmf : dist.per_run_pmf) support = std::max(support, pmf.size());
  for (auto& pmf : dist.per_run_pmf) pmf.resize(support, 0.0);
  dist.qmax = static_cast<int>(support) - 1;

  dist.pmf_mean.assign(support, 0.0);
  dist.pmf_se.assign(support, 0.0);
  dist.pmf_ci95.assign(support, 0.0);
  dist.cdf_mean.assign(support, 0.0);
  dist.ccdf_mean.assign(support, 0.0);
  dist.ccdf_se.assign(support, 0.0);

  std::vector<std::vector<double>> per_run_ccdf(static_cast<std::size_t>(runs));
  for (int r = 0; r < runs; ++r) {
    auto& ccdf = per_run_ccdf[static_cast<std::size_t>(r)];
    ccdf.assign(support, 0.0);
    double tail = 0.0;
    for (std::size_t q = support; q-- > 0;) {
      tail += dist.per_run_pmf[static_cast<std::size_t>(r)][q];
      ccdf[q] = tail;
    }
  }

  for (std::size_t q = 0; q < support; ++q) {
    double mean = 0.0;
    double mean_ccdf = 0.0;
    for (int r = 0; r < runs; ++r) {
      mean += dist.per_run_pmf[static_cast<std::size_t>(r)][q];
      mean_ccdf += per_run_ccdf[static_cast<std::size_t>(r)][q];
    }
    mean /= runs;
    mean_ccdf /= runs;
    double var = 0.0;
    double var_ccdf = 0.0;
    for (int r = 0; r < runs; ++r) {
      const double d = dist.per_run_pmf[static_cast<std::size_t>(r)][q] - mean;
      const double dc = per_run_ccdf[static_cast<std::size_t>(r)][q] - mean_ccdf;
      var += d * d;
      var_ccdf += dc * dc;
    }
    if (runs > 1) {
      var /= (runs - 1);
      var_ccdf /= (runs - 1);
    }
    dist.pmf_mean[q] = mean;
    dist.pmf_se[q] = std::sqrt(var / runs);
    dist.pmf_ci95[q] = 1.96 * dist.pmf_se[q];
    dist.ccdf_mean[q] = mean_ccdf;
    dist.ccdf_se[q] = std::sqrt(var_ccdf / runs);
  }
  double acc = 0.0;
  for (std::size_t q = 0; q < support; ++q) {
    acc += dist.pmf_mean[q];
    dist.cdf_mean[q] = acc;
  }
}

}  // namespace

int effective_thread_count(int requested, int jobs) {
  int threads = requested > 0 ? requested
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("REDLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return std::max(1, std::min(threads, jobs));
}

EmpiricalDistribution simulate(const SimConfig& config) {
  if (config.graph.n_servers() != config.params.n_servers)
    throw invalid_parameter("simulate: graph and params disagree on n_servers");
  if (config.n_events < 1000)
    throw invalid_parameter("simulate: n_events must be >= 1000");
  if (config.n_runs < 1) throw invalid_parameter("simulate: n_runs must be >= 1");
  if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 1.0))
    throw invalid_parameter("simulate: warmup_fraction must lie in [0,1)");

  EmpiricalDistribution dist;
  dist.n_runs = config.n_runs;
  dist.events_per_run = config.n_events;

  StabilityReport stability;
  try {
    stability = check_stability(config.graph, config.params);
  } catch (const size_error&) {
    stability = stability_necessary_only(config.params);
    dist.stability_partial = true;
  }
  if (!stability.stable && !config.allow_unstable)
    throw unstable_system(
        "simulate: configured load is unstable (pass allow_unstable to override)");

  if (config.params.arrival_rate_per_server == 0.0) {
    dist.per_run_pmf.assign(static_cast<std::size_t>(config.n_runs), {1.0});
    dist.run_total_time.assign(static_cast<std::size_t>(config.n_runs), 0.0);
    dist.run_mean_busy.assign(static_cast<std::size_t>(config.n_runs), 0.0);
    fill_pooled_statistics(dist);
    return dist;
  }

  const EdgeSampler sampler(config.graph);
  std::vector<RunResult> results(static_cast<std::size_t>(config.n_runs));

  auto run_index = [&](int r) {
    const std::uint64_t run_seed =
        splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(r) + 1));
    switch (config.policy) {
      case Policy::kRedundancyCoC:
        results[static_cast<std::size_t>(r)] =
            run_one(CocState{}, config, sampler, run_seed);
        break;
      case Policy::kRedundancyCoS:
        results[static_cast<std::size_t>(r)] =
            run_one(CosState{}, config, sampler, run_seed);
        break;
      case Policy::kJiq:
        results[static_cast<std::size_t>(r)] =
            run_one(JiqState{config.jiq_tiebreak}, config, sampler, run_seed);
        break;
    }
  };

  const int threads = effective_thread_count(config.max_threads, config.n_runs);
  if (threads <= 1) {
    for (int r = 0; r < config.n_runs; ++r) run_index(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < config.n_runs; r = next.fetch_add(1))
          run_index(r);
      });
    }
    for (auto& worker : pool) worker.join();
  }

  dist.per_run_pmf.reserve(results.size());
  for (auto& r : results) {
    dist.per_run_pmf.push_back(std::move(r.pmf));
    dist.run_total_time.push_back(r.total_time);
    dist.run_mean_busy.push_back(r.mean_busy);
  }
  fill_pooled_statistics(dist);
  return dist;
}

CdfDifferenceSeries compare_empirical(const EmpiricalDistribution& a,
                                      const EmpiricalDistribution& b, int qmax) {
  if (qmax < 0) throw invalid_parameter("compare_empirical: qmax must be >= 0");
  CdfDifferenceSeries series;
  const int common = std::min({qmax, a.qmax, b.qmax});
  series.truncated = common < qmax;
  series.qmax = common;
  for (int q = 0; q <= common; ++q) {
    const auto idx = static_cast<std::size_t>(q);
    series.difference.push_back(b.ccdf_mean[idx] - a.ccdf_mean[idx]);
    const double se = std::sqrt(a.ccdf_se[idx] * a.ccdf_se[idx] +
                                b.ccdf_se[idx] * b.ccdf_se[idx]);
    series.se.push_back(se);
    series.ci95.push_back(1.96 * se);
  }
  return series;
}

}  // namespace redlab
