#include "redlab/reports.hpp"

#include <cmath>
#include <cstdio>

#include "redlab/alpha.hpp"
#include "redlab/closed_forms.hpp"
#include "redlab/errors.hpp"
#include "redlab/io.hpp"

namespace redlab {

ArithmeticMode arithmetic_from_name(const std::string& name) {
  if (name == "auto") return ArithmeticMode::kAuto;
  if (name == "rational") return ArithmeticMode::kRational;
  if (name == "double") return ArithmeticMode::kDouble;
  throw invalid_parameter("arithmetic: expected auto|rational|double, got '" + name +
                          "'");
}

bool use_rational(ArithmeticMode mode, int n_servers, int qmax) {
  switch (mode) {
    case ArithmeticMode::kRational: return true;
    case ArithmeticMode::kDouble: return false;
    case ArithmeticMode::kAuto: return n_servers <= 8 && qmax <= 16;
  }
  return false;
}

namespace {

struct Table1Row {
  std::string name;
  Rational epsilon;
};

const std::vector<Table1Row>& table1_rows() {
  static const std::vector<Table1Row> rows{
      {"hom. ring", Rational(1, 2)},
      {"het. ring eps=0.7", Rational(7, 10)},
      {"het. ring eps=0.9", Rational(9, 10)},
  };
  return rows;
}

std::string format4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

std::vector<Table1Cell> table1_cells(ArithmeticMode mode) {
  struct Column {
    int n;
    std::vector<int> qs;
  };
  const std::vector<Column> columns{{4, {2, 4, 10, 16}}, {8, {2, 4, 10}}};

  std::vector<Table1Cell> cells;
  for (const auto& column : columns) {
    const int qmax = column.qs.back();
    const EdgeWeightedGraph uniform = build_complete_uniform(column.n);
    for (const auto& row : table1_rows()) {
      const EdgeWeightedGraph ring = build_ring(column.n, row.epsilon);
      if (use_rational(mode, column.n, qmax)) {
        const auto tu = alpha_dp<Rational>(uniform, qmax);
        const auto tr = alpha_dp<Rational>(ring, qmax);
        for (const int q : column.qs)
          cells.push_back({row.name, column.n, q,
                           to_double(tu.alpha(q) / tr.alpha(q))});
      } else {
        const auto tu = alpha_dp<double>(uniform, qmax);
        const auto tr = alpha_dp<double>(ring, qmax);
        for (const int q : column.qs)
          cells.push_back({row.name, column.n, q, tu.alpha(q) / tr.alpha(q)});
      }
    }
  }
  return cells;
}

std::string table1_csv(ArithmeticMode mode) {
  const auto cells = table1_cells(mode);
  CsvBuilder csv({"structure", "N4_q2", "N4_q4", "N4_q10", "N4_q16", "N8_q2", "N8_q4",
                  "N8_q10"});
  for (const auto& row : table1_rows()) {
    std::vector<std::string> line{row.name};
    for (const int n : {4, 8}) {
      for (const auto& cell : cells)
        if (cell.row == row.name && cell.n == n) line.push_back(format4(cell.ratio));
    }
    csv.add_row(line);
  }
  return csv.str();
}

std::string figure2_csv() {
  const double rho = 0.8;
  const int qmax = 25;
  const SpectralDistribution classical = coc_complete4_pmf(rho);
  const SpectralDistribution hom_ring = coc_hetring4_pmf(rho, 0.5);
  const SpectralDistribution het07 = coc_hetring4_pmf(rho, 0.7);
  const SpectralDistribution het09 = coc_hetring4_pmf(rho, 0.9);

  CsvBuilder csv({"q", "pooled_po4", "classical_po2", "hom_ring", "het_ring_eps0.7",
                  "het_ring_eps0.9", "disconnected_negbinom"});
  for (int q = 0; q <= qmax; ++q) {
    csv.add_numeric_row({static_cast<double>(q), pooled_mm1_ccdf(rho, q),
                         classical.ccdf(q), hom_ring.ccdf(q), het07.ccdf(q),
                         het09.ccdf(q), negbinom_ccdf(rho, q)});
  }
  return csv.str();
}

namespace {

// Mean over q = 0..qmax of P{B >= q} - P{A >= q}; equals the average gap
// between the two cumulative distributions over that window.
double mean_ccdf_gap(const SpectralDistribution& a, const SpectralDistribution& b,
                     int qmax) {
  double total = 0.0;
  for (int q = 0; q <= qmax; ++q) total += b.ccdf(q) - a.ccdf(q);
  return total / (qmax + 1);
}

}  // namespace

std::vector<Figure3Point> figure3_points(const Figure3Params& params) {
  std::vector<Figure3Point> points;
  const EdgeWeightedGraph uniform = build_complete_uniform(4);
  const EdgeWeightedGraph ring = build_ring(4, Rational(1, 2));

  for (const double rho : params.rhos) {
    Figure3Point point;
    point.rho = rho;
    point.cos_gap =
        mean_ccdf_gap(cos_complete4_pmf(rho), cos_homring4_pmf(rho), params.qmax);

    auto run = [&](const EdgeWeightedGraph& graph, std::uint64_t salt) {
      SimConfig config{graph, SystemParams(4, rho, 1.0)};
      config.policy = Policy::kJiq;
      config.n_events = params.events;
      config.n_runs = params.runs;
      config.seed = params.seed + salt;
      return simulate(config);
    };
    const EmpiricalDistribution a = run(uniform, 1);
    const EmpiricalDistribution b = run(ring, 2);

    // Per-run paired gap means give the replication CI.
    std::vector<double> gaps;
    gaps.reserve(static_cast<std::size_t>(params.runs));
    for (int r = 0; r < params.runs; ++r) {
      const auto& pa = a.per_run_pmf[static_cast<std::size_t>(r)];
      const auto& pb = b.per_run_pmf[static_cast<std::size_t>(r)];
      double gap = 0.0;
      for (int q = 1; q <= params.qmax; ++q) {
        double ta = 0.0;
        for (std::size_t k = static_cast<std::size_t>(q); k < pa.size(); ++k) ta += pa[k];
        double tb = 0.0;
        for (std::size_t k = static_cast<std::size_t>(q); k < pb.size(); ++k) tb += pb[k];
        gap += tb - ta;
      }
      gaps.push_back(gap / (params.qmax + 1));
    }
    double mean = 0.0;
    for (const double g : gaps) mean += g;
    mean /= params.runs;
    double var = 0.0;
    for (const double g : gaps) var += (g - mean) * (g - mean);
    if (params.runs > 1) var /= (params.runs - 1);
    point.jiq_gap = mean;
    point.jiq_gap_ci95 = 1.96 * std::sqrt(var / params.runs);
    points.push_back(point);
  }
  return points;
}

std::string figure3_csv(const Figure3Params& params) {
  CsvBuilder csv({"rho", "cos_cdf_gap", "jiq_cdf_gap", "jiq_cdf_gap_ci95"});
  for (const auto& point : figure3_points(params))
    csv.add_numeric_row({point.rho, point.cos_gap, point.jiq_gap, point.jiq_gap_ci95});
  return csv.str();
}

}  // namespace redlab
