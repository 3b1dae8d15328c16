#include "redlab/alpha.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace redlab {

double alpha_q_raw(int n_servers, const std::vector<std::pair<int, int>>& edges,
                   const std::vector<double>& weights, int q) {
  if (q < 1) throw invalid_parameter("alpha_q_raw: q must be >= 1");
  if (n_servers < 2 || n_servers > kMaxAlphaServers)
    throw invalid_parameter("alpha_q_raw: n_servers out of range");
  if (edges.size() != weights.size())
    throw invalid_parameter("alpha_q_raw: edges and weights differ in length");
  std::vector<std::uint64_t> masks;
  masks.reserve(edges.size());
  for (const auto& [i, j] : edges) {
    if (i < 1 || j < 1 || i > n_servers || j > n_servers || i == j)
      throw invalid_parameter("alpha_q_raw: bad edge endpoints");
    masks.push_back((std::uint64_t{1} << (i - 1)) | (std::uint64_t{1} << (j - 1)));
  }
  std::unordered_map<std::uint64_t, double> layer{{0, 1.0}};
  for (int step = 0; step < q; ++step) {
    std::unordered_map<std::uint64_t, double> next;
    next.reserve(layer.size() * 2 + masks.size());
    for (const auto& [covered, weight] : layer) {
      for (std::size_t k = 0; k < masks.size(); ++k) {
        if (weights[k] == 0.0) continue;
        const std::uint64_t grown = covered | masks[k];
        next[grown] += weight * weights[k] / std::popcount(grown);
      }
    }
    layer = std::move(next);
  }
  double total = 0.0;
  for (const auto& [covered, weight] : layer) total += weight;
  return total;
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller; avoids distribution objects so streams are reproducible
// across standard libraries.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

MinimalityProbeReport uniform_minimality_probe(int n, int q, int trials, double step,
                                               std::uint64_t seed) {
  if (n < 2 || n > 10)
    throw invalid_parameter("uniform_minimality_probe: n must lie in 2..10");
  if (q < 1) throw invalid_parameter("uniform_minimality_probe: q must be >= 1");
  if (trials < 1) throw invalid_parameter("uniform_minimality_probe: trials must be >= 1");
  if (!(step >= 0.0)) throw invalid_parameter("uniform_minimality_probe: step must be >= 0");

  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) edges.emplace_back(i, j);
  const std::size_t n_edges = edges.size();
  const double uniform = 1.0 / static_cast<double>(n_edges);
  const std::vector<double> base(n_edges, uniform);

  MinimalityProbeReport report;
  report.n_servers = n;
  report.q = q;
  report.trials = trials;
  report.step = step;
  report.alpha_uniform = alpha_q_raw(n, edges, base, q);

  std::mt19937_64 rng(splitmix64(seed));
  double min_diff = std::numeric_limits<double>::infinity();
  double max_diff = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    std::vector<double> direction(n_edges);
    double mean = 0.0;
    for (auto& d : direction) {
      d = standard_normal(rng);
      mean += d;
    }
    mean /= static_cast<double>(n_edges);
    for (auto& d : direction) d -= mean;  // tangent to the simplex

    // Largest symmetric scale keeping uniform +- scale*d non-negative.
    double scale = step;
    for (const double d : direction) {
      const double magnitude = std::abs(d);
      if (magnitude > 0.0) scale = std::min(scale, uniform / magnitude);
    }
    if (scale < step) ++report.rescaled_trials;

    for (const double sign : {1.0, -1.0}) {
      std::vector<double> perturbed(n_edges);
      for (std::size_t k = 0; k < n_edges; ++k)
        perturbed[k] = std::max(0.0, uniform + sign * scale * direction[k]);
      const double diff = alpha_q_raw(n, edges, perturbed, q) - report.alpha_uniform;
      min_diff = std::min(min_diff, diff);
      max_diff = std::max(max_diff, diff);
    }
  }
  report.min_difference = min_diff;
  report.max_difference = max_diff;

  const double h = 1e-4;
  std::vector<double> gradient(n_edges);
  double gradient_mean = 0.0;
  for (std::size_t k = 0; k < n_edges; ++k) {
    std::vector<double> up = base;
    std::vector<double> down = base;
    up[k] += h;
    down[k] -= h;
    gradient[k] = (alpha_q_raw(n, edges, up, q) - alpha_q_raw(n, edges, down, q)) / (2.0 * h);
    gradient_mean += gradient[k];
  }
  gradient_mean /= static_cast<double>(n_edges);
  double norm_sq = 0.0;
  for (const double g : gradient) {
    const double projected = g - gradient_mean;
    norm_sq += projected * projected;
  }
  report.projected_gradient_norm = std::sqrt(norm_sq);
  return report;
}

namespace {

// Sum over partitions of q (n_j = multiplicity of part j) of
// (-1)^{|n|+q} * multinomial(|n|; n_1..n_q) * prod_j F_j^{n_j}.
// F_j beyond the number of symmetric values is zero, so parts are capped.
BigInt partition_bracket(int q, const std::vector<BigInt>& elem_sym,
                         const std::vector<BigInt>& factorial) {
  const int max_part = static_cast<int>(elem_sym.size()) - 1;
  BigInt bracket(0);
  // parts[j] = multiplicity of part size j+1
  std::vector<int> multiplicity(static_cast<std::size_t>(q) + 1, 0);
  auto recurse = [&](auto&& self, int remaining, int largest) -> void {
    if (remaining == 0) {
      long long total_parts = 0;
      for (int j = 1; j <= q; ++j) total_parts += multiplicity[j];
      BigInt term = factorial[static_cast<std::size_t>(total_parts)];
      for (int j = 1; j <= q; ++j) {
        const int mult = multiplicity[j];
        if (mult == 0) continue;
        for (int r = 0; r < mult; ++r) term *= elem_sym[j];
        term /= factorial[static_cast<std::size_t>(mult)];
      }
      if ((total_parts + q) % 2 != 0) term = -term;
      bracket += term;
      return;
    }
    for (int part = std::min(remaining, largest); part >= 1; --part) {
      ++multiplicity[part];
      self(self, remaining - part, part);
      --multiplicity[part];
    }
  };
  recurse(recurse, q, std::min(q, max_part));
  return bracket;
}

// Exact solve of sum_k w_k base_k^{r+1} = rhs_r, r = 0..m-1.
std::vector<Rational> solve_vandermonde(const std::vector<Rational>& bases,
                                        const std::vector<Rational>& rhs) {
  const std::size_t m = bases.size();
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t k = 0; k < m; ++k)
      a[r][k] = pow_rational(bases[k], static_cast<int>(r) + 1);
    a[r][m] = rhs[r];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    while (pivot < m && a[pivot][col] == 0) ++pivot;
    if (pivot == m) throw std::logic_error("degenerate geometric-mixture system");
    std::swap(a[col], a[pivot]);
    for (std::size_t row = 0; row < m; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const Rational factor = a[row][col] / a[col][col];
      for (std::size_t k = col; k <= m; ++k) a[row][k] -= factor * a[col][k];
    }
  }
  std::vector<Rational> solution(m);
  for (std::size_t k = 0; k < m; ++k) solution[k] = a[k][m] / a[k][k];
  return solution;
}

}  // namespace

PodPmf classical_pod_pmf(int n, int d, double rho, int qmax) {
  if (n < 2) throw invalid_parameter("classical_pod_pmf: n must be >= 2");
  if (d < 2 || d > n) throw invalid_parameter("classical_pod_pmf: d must lie in 2..n");
  if (!(rho > 0.0 && rho < 1.0))
    throw unstable_system("classical_pod_pmf: requires 0 < rho < 1");
  if (qmax < 1 || qmax > 30)
    throw size_error("classical_pod_pmf: qmax must lie in 1..30 (partition growth)");

  const int m = n - d + 1;  // number of distinct service-rate levels
  if (m > 30)
    throw size_error("classical_pod_pmf: n - d + 1 mixture components exceed 30");
  std::vector<BigInt> values;
  values.reserve(static_cast<std::size_t>(m));
  for (int i = d; i <= n; ++i) values.push_back(binomial(i - 1, d - 1));

  const int q_top = std::max(qmax, m + 3);
  std::vector<BigInt> elem_sym(static_cast<std::size_t>(m) + 1, BigInt(0));
  elem_sym[0] = 1;
  for (const BigInt& v : values)
    for (int j = m; j >= 1; --j)
      elem_sym[static_cast<std::size_t>(j)] += elem_sym[static_cast<std::size_t>(j) - 1] * v;

  std::vector<BigInt> factorial(static_cast<std::size_t>(q_top) + 1, BigInt(1));
  for (int i = 1; i <= q_top; ++i)
    factorial[static_cast<std::size_t>(i)] = factorial[static_cast<std::size_t>(i) - 1] * i;

  const Rational rho_exact = rational_from_double(rho);
  const Rational denom(binomial(n - 1, d - 1));
  const Rational x = rho_exact / denom;

  std::vector<Rational> ratio_exact(static_cast<std::size_t>(q_top) + 1);
  ratio_exact[0] = 1;
  for (int q = 1; q <= q_top; ++q)
    ratio_exact[static_cast<std::size_t>(q)] =
        Rational(partition_bracket(q, elem_sym, factorial)) * pow_rational(x, q);

  // Mixture of geometrics with bases rho * v_i / C(n-1,d-1); the weights are
  // pinned by the first m ratios and cross-checked against the partition sum.
  std::vector<Rational> bases;
  bases.reserve(static_cast<std::size_t>(m));
  for (const BigInt& v : values) bases.push_back(rho_exact * Rational(v) / denom);
  std::vector<Rational> rhs(bases.size());
  for (std::size_t r = 0; r < bases.size(); ++r) rhs[r] = ratio_exact[r + 1];
  const std::vector<Rational> mixture = solve_vandermonde(bases, rhs);
  for (int q = m + 1; q <= q_top; ++q) {
    Rational predicted(0);
    for (std::size_t k = 0; k < bases.size(); ++k)
      predicted += mixture[k] * pow_rational(bases[k], q);
    if (predicted != ratio_exact[static_cast<std::size_t>(q)])
      throw std::logic_error("classical_pod_pmf: mixture disagrees with partition sum");
  }

  Rational normalizer(1);
  for (std::size_t k = 0; k < bases.size(); ++k)
    normalizer += mixture[k] * bases[k] / (Rational(1) - bases[k]);

  PodPmf result;
  result.n = n;
  result.d = d;
  result.rho = rho;
  result.normalizer = to_double(normalizer);
  result.ratio.reserve(static_cast<std::size_t>(qmax) + 1);
  result.pmf.reserve(static_cast<std::size_t>(qmax) + 1);
  for (int q = 0; q <= qmax; ++q) {
    const Rational& r = ratio_exact[static_cast<std::size_t>(q)];
    result.ratio.push_back(to_double(r));
    result.pmf.push_back(to_double(r / normalizer));
  }
  return result;
}

std::vector<double> coc_pmf_from_alpha(const EdgeWeightedGraph& graph, double rho,
                                       int qmax) {
  if (qmax < 0) throw invalid_parameter("coc_pmf_from_alpha: qmax must be >= 0");
  if (!(rho >= 0.0 && rho < 1.0))
    throw unstable_system("coc_pmf_from_alpha: requires 0 <= rho < 1");
  std::vector<double> pmf(static_cast<std::size_t>(qmax) + 1, 0.0);
  if (rho == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (graph.n_servers() > kMaxAlphaServers)
    throw size_error("coc_pmf_from_alpha: graph too large for the alpha recursion");

  const double x = graph.n_servers() * rho;  // N lambda / mu
  const auto& edges = graph.edges();

  // Layer weights carry the factor x per job, so the layer total at depth q
  // equals alpha_q * x^q and stays bounded by the geometric tail.
  std::unordered_map<std::uint64_t, double> layer{{0, 1.0}};
  std::vector<double> terms{1.0};
  double total = 1.0;
  int tail_ok_streak = 0;
  const int hard_cap = 200000;
  for (int q = 1; q <= hard_cap; ++q) {
    std::unordered_map<std::uint64_t, double> next;
    next.reserve(layer.size() * 2 + edges.size());
    for (const auto& [covered, weight] : layer) {
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::uint64_t grown = covered | graph.node_mask(k);
        next[grown] += weight * x * edges[k].p_d / std::popcount(grown);
      }
    }
    double term = 0.0;
    for (const auto& [covered, weight] : next) term += weight;
    terms.push_back(term);
    total += term;
    layer = std::move(next);

    if (q > qmax && q >= 8) {
      const double ratio =
          std::clamp(std::max(term / terms[static_cast<std::size_t>(q) - 1], rho), 0.0,
                     1.0 - 1e-9);
      const double tail = term * ratio / (1.0 - ratio);
      tail_ok_streak = (tail <= 1e-15 * total) ? tail_ok_streak + 1 : 0;
      if (tail_ok_streak >= 3) break;
    }
    if (q == hard_cap)
      throw size_error("coc_pmf_from_alpha: tail did not close; load too near 1");
  }
  for (int q = 0; q <= qmax; ++q)
    pmf[static_cast<std::size_t>(q)] =
        (q < static_cast<int>(terms.size())) ? terms[static_cast<std::size_t>(q)] / total
                                             : 0.0;
  return pmf;
}

}  // namespace redlab
