#include "redlab/sim.hpp"

#include <cmath>

#include "doctest.h"
#include "redlab/closed_forms.hpp"
#include "redlab/errors.hpp"
#include "redlab/io.hpp"

using namespace redlab;

namespace {

SimConfig base_config(Policy policy, double rho, int runs, std::int64_t events) {
  SimConfig config{build_complete_uniform(4), SystemParams(4, rho, 1.0)};
  config.policy = policy;
  config.n_runs = runs;
  config.n_events = events;
  config.seed = 4242;
  return config;
}

}  // namespace

TEST_CASE("identical configs reproduce bit-identical results") {
  for (const Policy policy :
       {Policy::kRedundancyCoC, Policy::kRedundancyCoS, Policy::kJiq}) {
    auto config = base_config(policy, 0.7, 6, 20000);
    const auto a = simulate(config);
    const auto b = simulate(config);
    CHECK(a.per_run_pmf == b.per_run_pmf);
    CHECK(a.run_total_time == b.run_total_time);
    CHECK(empirical_to_csv(a) == empirical_to_csv(b));

    config.max_threads = 1;
    const auto serial = simulate(config);
    CHECK(serial.per_run_pmf == a.per_run_pmf);  // threading cannot change results
  }
}

TEST_CASE("zero arrivals give the point mass at zero") {
  SimConfig config{build_complete_uniform(4), SystemParams(4, 0.0, 1.0)};
  config.n_runs = 3;
  config.n_events = 1000;
  const auto dist = simulate(config);
  CHECK(dist.qmax == 0);
  CHECK(dist.pmf_mean[0] == 1.0);
}

TEST_CASE("unstable loads are refused unless overridden") {
  SimConfig config{build_complete_uniform(4), SystemParams(4, 1.2, 1.0)};
  config.n_runs = 1;
  config.n_events = 2000;
  CHECK_THROWS_AS(simulate(config), unstable_system);
  config.allow_unstable = true;
  CHECK_NOTHROW(simulate(config));
}

TEST_CASE("per-run pmfs are normalized") {
  const auto dist = simulate(base_config(Policy::kRedundancyCoC, 0.8, 5, 20000));
  for (const auto& pmf : dist.per_run_pmf) {
    double mass = 0.0;
    for (const double p : pmf) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("throughput balance: accepted work equals served work") {
  // In stationarity N * lambda = mu * E[busy servers].
  const double rho = 0.5;
  for (const Policy policy :
       {Policy::kRedundancyCoC, Policy::kRedundancyCoS, Policy::kJiq}) {
    const auto dist = simulate(base_config(policy, rho, 10, 100000));
    double mean_busy = 0.0;
    for (const double b : dist.run_mean_busy) mean_busy += b;
    mean_busy /= static_cast<double>(dist.run_mean_busy.size());
    CHECK(mean_busy == doctest::Approx(4.0 * rho).epsilon(0.02));
  }
}

TEST_CASE("cancel-on-completion tracks the explicit four-server law") {
  const auto dist = simulate(base_config(Policy::kRedundancyCoC, 0.8, 16, 60000));
  const auto closed = coc_complete4_pmf(0.8);
  for (int q = 0; q <= 5; ++q) {
    const auto idx = static_cast<std::size_t>(q);
    CHECK(std::abs(dist.pmf_mean[idx] - closed.pmf(q)) <= 4.0 * dist.pmf_ci95[idx]);
  }
}

TEST_CASE("cancel-on-start tracks its explicit law with invariants enabled") {
  auto config = base_config(Policy::kRedundancyCoS, 0.8, 12, 40000);
  config.check_invariants = true;
  const auto dist = simulate(config);
  const auto closed = cos_complete4_pmf(0.8);
  for (int q = 0; q <= 4; ++q) {
    const auto idx = static_cast<std::size_t>(q);
    CHECK(std::abs(dist.pmf_mean[idx] - closed.pmf(q)) <= 4.0 * dist.pmf_ci95[idx]);
  }
}

TEST_CASE("jiq runs under both tie-break rules with invariants enabled") {
  for (const JiqTiebreak tiebreak : {JiqTiebreak::kUniform, JiqTiebreak::kLongestIdle}) {
    auto config = base_config(Policy::kJiq, 0.6, 4, 20000);
    config.jiq_tiebreak = tiebreak;
    config.check_invariants = true;
    const auto dist = simulate(config);
    CHECK(dist.pmf_mean[0] > 0.0);
    CHECK(dist.qmax >= 1);
  }
}

TEST_CASE("validation of simulation configs") {
  auto config = base_config(Policy::kRedundancyCoC, 0.5, 2, 500);
  CHECK_THROWS_AS(simulate(config), invalid_parameter);  // too few events
  config.n_events = 2000;
  config.warmup_fraction = 1.0;
  CHECK_THROWS_AS(simulate(config), invalid_parameter);
  config.warmup_fraction = 0.1;
  config.n_runs = 0;
  CHECK_THROWS_AS(simulate(config), invalid_parameter);
}

TEST_CASE("compare_empirical") {
  const auto a = simulate(base_config(Policy::kRedundancyCoC, 0.7, 6, 20000));

  SUBCASE("a run against itself is exactly zero") {
    const auto diff = compare_empirical(a, a, 20);
    for (const double d : diff.difference) CHECK(d == 0.0);
    for (const double s : diff.se) CHECK(s >= 0.0);
  }

  SUBCASE("mismatched supports truncate with a flag") {
    auto tiny = base_config(Policy::kRedundancyCoC, 0.1, 6, 20000);
    const auto b = simulate(tiny);
    const auto diff = compare_empirical(a, b, 100);
    CHECK(diff.truncated);
    CHECK(diff.qmax == std::min(a.qmax, b.qmax));
  }
}

TEST_CASE("ring near the disconnected limit matches the negative binomial") {
  SimConfig config{build_ring(4, Rational(1)), SystemParams(4, 0.8, 1.0)};
  config.policy = Policy::kRedundancyCoC;
  config.n_runs = 12;
  config.n_events = 50000;
  config.seed = 99;
  const auto dist = simulate(config);
  for (int q = 0; q <= 5; ++q) {
    const auto idx = static_cast<std::size_t>(q);
    CHECK(std::abs(dist.pmf_mean[idx] - negbinom_pmf(0.8, q)) <=
          4.0 * dist.pmf_ci95[idx]);
  }
}
