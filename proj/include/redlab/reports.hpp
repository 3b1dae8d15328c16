#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "redlab/sim.hpp"

namespace redlab {

enum class ArithmeticMode { kAuto, kRational, kDouble };

ArithmeticMode arithmetic_from_name(const std::string& name);

/// Auto rule: exact rationals when N <= 8 and qmax <= 16, doubles otherwise.
bool use_rational(ArithmeticMode mode, int n_servers, int qmax);

struct Table1Cell {
  std::string row;  // hom. ring | het. ring eps=0.7 | het. ring eps=0.9
  int n = 0;
  int q = 0;
  double ratio = 0.0;  // alpha_q(uniform complete) / alpha_q(ring)
};

/// The seven (N, q) columns of the light-traffic ratio table over the three
/// ring rows: N=4 with q in {2,4,10,16} exactly, N=8 with q in {2,4,10} in
/// doubles.
std::vector<Table1Cell> table1_cells(ArithmeticMode mode = ArithmeticMode::kAuto);
std::string table1_csv(ArithmeticMode mode = ArithmeticMode::kAuto);

/// Tail probabilities P{Q >= q} at rho = 0.8 for q <= 25 under six laws:
/// fully pooled power-of-4, classical power-of-2, homogeneous ring,
/// heterogeneous rings at eps 0.7 and 0.9, and the disconnected limit.
std::string figure2_csv();

struct Figure3Point {
  double rho = 0.0;
  double cos_gap = 0.0;       // closed-form mean CDF difference, hom ring vs uniform
  double jiq_gap = 0.0;       // simulated mean CDF difference under JIQ
  double jiq_gap_ci95 = 0.0;
};

struct Figure3Params {
  std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int qmax = 50;
  std::int64_t events = 100000;
  int runs = 20;
  std::uint64_t seed = kDefaultSeed;
};

std::vector<Figure3Point> figure3_points(const Figure3Params& params);
std::string figure3_csv(const Figure3Params& params);

}  // namespace redlab
