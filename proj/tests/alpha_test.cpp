#include "redlab/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "redlab/closed_forms.hpp"
#include "redlab/errors.hpp"

using namespace redlab;

namespace {

EdgeWeightedGraph random_graph(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_dist(2, 5);
  const int n = n_dist(rng);
  std::vector<std::pair<int, int>> all_pairs;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) all_pairs.emplace_back(i, j);
  std::shuffle(all_pairs.begin(), all_pairs.end(), rng);
  std::uniform_int_distribution<int> count_dist(1, std::min<int>(6, all_pairs.size()));
  const int n_edges = count_dist(rng);
  std::uniform_int_distribution<int> numerator(1, 20);
  std::vector<Rational> raw;
  Rational total(0);
  for (int k = 0; k < n_edges; ++k) {
    raw.emplace_back(numerator(rng));
    total += raw.back();
  }
  std::vector<WeightedEdge> edges;
  for (int k = 0; k < n_edges; ++k)
    edges.push_back({all_pairs[static_cast<std::size_t>(k)].first,
                     all_pairs[static_cast<std::size_t>(k)].second, raw[k] / total, 0.0});
  return EdgeWeightedGraph::from_edges(n, std::move(edges), "random");
}

EdgeWeightedGraph relabel(const EdgeWeightedGraph& g, const std::vector<int>& perm) {
  std::vector<WeightedEdge> edges;
  for (const auto& e : g.edges())
    edges.push_back({perm[static_cast<std::size_t>(e.i) - 1],
                     perm[static_cast<std::size_t>(e.j) - 1], e.p, 0.0});
  return EdgeWeightedGraph::from_edges(g.n_servers(), std::move(edges), "relabel");
}

}  // namespace

TEST_CASE("alpha_1 is exactly one half") {
  for (const auto& g : {build_complete_uniform(4), build_ring(6, Rational(1, 3)),
                        build_grid(9), build_complete_uniform(2)}) {
    CHECK(alpha_dp<Rational>(g, 1).alpha(1) == Rational(1, 2));
  }
}

TEST_CASE("frozen alpha_2 values") {
  CHECK(alpha_dp<Rational>(build_complete_uniform(4), 2).alpha(2) == Rational(25, 144));
  CHECK(alpha_dp<Rational>(build_ring(4, Rational(1, 2)), 2).alpha(2) == Rational(17, 96));
  // 16-term sum with weights 0.05 / 0.45: 0.18375.
  CHECK(alpha_bruteforce<Rational>(build_ring(4, Rational(9, 10)), 2) ==
        Rational(147, 800));
  CHECK(alpha_dp<double>(build_ring(4, Rational(9, 10)), 2).alpha(2) ==
        doctest::Approx(0.18375).epsilon(1e-12));
}

TEST_CASE("single-edge graph has alpha_q = (1/2)^q") {
  const auto g = build_complete_uniform(2);
  const auto table = alpha_dp<Rational>(g, 8);
  for (int q = 1; q <= 8; ++q) {
    CHECK(table.alpha(q) == pow_rational(Rational(1, 2), q));
    if (q <= 6) CHECK(alpha_bruteforce<Rational>(g, q) == table.alpha(q));
  }
}

TEST_CASE("dp matches brute force enumeration on random graphs") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = random_graph(rng);
    const auto exact = alpha_dp<Rational>(g, 4);
    const auto approx = alpha_dp<double>(g, 4);
    for (int q = 1; q <= 4; ++q) {
      CHECK(exact.alpha(q) == alpha_bruteforce<Rational>(g, q));
      CHECK(approx.alpha(q) ==
            doctest::Approx(alpha_bruteforce<double>(g, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("alpha is invariant under server relabeling") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_graph(rng);
    std::vector<int> perm(static_cast<std::size_t>(g.n_servers()));
    for (int s = 0; s < g.n_servers(); ++s) perm[static_cast<std::size_t>(s)] = s + 1;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = alpha_dp<Rational>(g, 4);
    const auto b = alpha_dp<Rational>(relabel(g, perm), 4);
    for (int q = 1; q <= 4; ++q) CHECK(a.alpha(q) == b.alpha(q));
  }
}

TEST_CASE("ring alphas are symmetric in epsilon") {
  for (const auto& eps : {Rational(1, 10), Rational(3, 10), Rational(2, 5)}) {
    const auto a = alpha_dp<Rational>(build_ring(6, eps), 6);
    const auto b = alpha_dp<Rational>(build_ring(6, Rational(1) - eps), 6);
    for (int q = 1; q <= 6; ++q) CHECK(a.alpha(q) == b.alpha(q));
  }
}

TEST_CASE("alpha guards") {
  CHECK_THROWS_AS(alpha_dp<double>(build_complete_uniform(4), 0), invalid_parameter);
  CHECK_THROWS_AS(alpha_bruteforce<double>(build_complete_uniform(8), 8), size_error);
}

TEST_CASE("light traffic ratios reproduce the ring table") {
  const auto uniform = build_complete_uniform(4);
  CHECK(to_double(light_traffic_ratio<Rational>(uniform, build_ring(4, Rational(1, 2)), 2)) ==
        doctest::Approx(0.9804).epsilon(5e-5));
  CHECK(to_double(light_traffic_ratio<Rational>(uniform, build_ring(4, Rational(9, 10)), 2)) ==
        doctest::Approx(0.9448).epsilon(5e-5));
  CHECK(light_traffic_ratio<Rational>(uniform, uniform, 5) == 1);
  CHECK_THROWS_AS(
      light_traffic_ratio<double>(uniform, build_complete_uniform(6), 2),
      invalid_parameter);
}

TEST_CASE("birth-death ratio condition") {
  const auto uniform = build_complete_uniform(4);
  const auto hom_ring = build_ring(4, Rational(1, 2));

  const auto forward = bd_dominance_check<Rational>(uniform, hom_ring, 16);
  CHECK(forward.holds);
  CHECK_FALSE(forward.first_violation.has_value());
  CHECK(forward.ratios_a.size() == 16);
  CHECK(forward.ratios_a[0] == doctest::Approx(2.0));  // alpha_0 / alpha_1

  const auto self = bd_dominance_check<Rational>(uniform, uniform, 8);
  CHECK(self.holds);
  CHECK(self.ratios_a == self.ratios_b);

  const auto reversed =
      bd_dominance_check<Rational>(build_ring(4, Rational(9, 10)), uniform, 4);
  CHECK_FALSE(reversed.holds);
  REQUIRE(reversed.first_violation.has_value());
  CHECK(*reversed.first_violation <= 4);
}

TEST_CASE("uniform minimality probe") {
  const auto zero_step = uniform_minimality_probe(4, 2, 20, 0.0, 99);
  CHECK(zero_step.min_difference == 0.0);
  CHECK(zero_step.max_difference == 0.0);

  for (const int q : {2, 3}) {
    const auto probe = uniform_minimality_probe(4, q, 200, 0.02, 12345);
    CHECK(probe.min_difference >= -1e-12);
    CHECK(probe.projected_gradient_norm < 1e-6);
    CHECK(probe.alpha_uniform ==
          doctest::Approx(alpha_dp<double>(build_complete_uniform(4), q).alpha(q)));
  }

  // Same seed reproduces the same report.
  const auto a = uniform_minimality_probe(4, 2, 50, 0.02, 777);
  const auto b = uniform_minimality_probe(4, 2, 50, 0.02, 777);
  CHECK(a.min_difference == b.min_difference);
  CHECK(a.rescaled_trials == b.rescaled_trials);
}

TEST_CASE("classical power-of-d pmf") {
  SUBCASE("ratio series bridges to the coverage polynomials at d = 2") {
    const auto pod = classical_pod_pmf(4, 2, 0.8, 10);
    const auto table = alpha_dp<double>(build_complete_uniform(4), 10);
    CHECK(pod.ratio[0] == 1.0);
    for (int q = 1; q <= 10; ++q) {
      const double expected = table.alpha(q) * std::pow(4.0 * 0.8, q);
      CHECK(pod.ratio[static_cast<std::size_t>(q)] ==
            doctest::Approx(expected).epsilon(1e-11));
    }
  }

  SUBCASE("fully pooled d = n collapses to the M/M/1 law") {
    for (const double rho : {0.2, 0.5, 0.8}) {
      const auto pod = classical_pod_pmf(4, 4, rho, 20);
      for (int q = 0; q <= 20; ++q)
        CHECK(pod.pmf[static_cast<std::size_t>(q)] ==
              doctest::Approx((1.0 - rho) * std::pow(rho, q)).epsilon(1e-13));
    }
  }

  SUBCASE("pmf is a probability law") {
    const auto pod = classical_pod_pmf(9, 2, 0.7, 30);
    double mass = 0.0;
    for (const double p : pod.pmf) mass += p;
    CHECK(mass < 1.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));  // truncated at qmax
    for (const double p : pod.pmf) CHECK(p > 0.0);
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(classical_pod_pmf(4, 2, 0.8, 31), size_error);
    CHECK_THROWS_AS(classical_pod_pmf(4, 5, 0.8, 10), invalid_parameter);
    CHECK_THROWS_AS(classical_pod_pmf(4, 2, 1.1, 10), unstable_system);
  }
}

TEST_CASE("occupancy law reconstructed from alphas") {
  SUBCASE("complete graph matches the explicit four-server law") {
    const auto pmf = coc_pmf_from_alpha(build_complete_uniform(4), 0.8, 12);
    const auto closed = coc_complete4_pmf(0.8);
    for (int q = 0; q <= 12; ++q)
      CHECK(pmf[static_cast<std::size_t>(q)] ==
            doctest::Approx(closed.pmf(q)).epsilon(1e-10));
  }

  SUBCASE("disconnected ring gives the negative binomial") {
    const auto pmf = coc_pmf_from_alpha(build_ring(4, Rational(1)), 0.8, 12);
    for (int q = 0; q <= 12; ++q)
      CHECK(pmf[static_cast<std::size_t>(q)] ==
            doctest::Approx(negbinom_pmf(0.8, q)).epsilon(1e-10));
  }

  SUBCASE("zero load is the point mass at zero") {
    const auto pmf = coc_pmf_from_alpha(build_complete_uniform(4), 0.0, 3);
    CHECK(pmf[0] == 1.0);
    CHECK(pmf[1] == 0.0);
  }
}
