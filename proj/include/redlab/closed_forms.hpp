#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "redlab/errors.hpp"

namespace redlab {

/// A queue-length law of the form pmf(q) = prefactor * sum_i c_i * b_i^q for
/// q >= 1 (and also q = 0 unless an explicit special value is supplied), with
/// all bases in [0,1). cdf and ccdf close the geometric sums analytically, so
/// deep-tail values keep full relative accuracy.
class SpectralDistribution {
 public:
  struct Term {
    double coefficient = 0.0;
    double base = 0.0;
  };

  SpectralDistribution(double prefactor, std::vector<Term> terms,
                       std::optional<double> special_q0 = std::nullopt);

  double pmf(int q) const;
  double cdf(int q) const;   // P{Q <= q}
  double ccdf(int q) const;  // P{Q >= q}
  double total_mass() const;

  double prefactor() const { return prefactor_; }
  const std::vector<Term>& terms() const { return terms_; }
  const std::optional<double>& special_q0() const { return special_q0_; }

 private:
  double prefactor_;
  std::vector<Term> terms_;
  std::optional<double> special_q0_;
};

/// Total occupancy of four servers under cancel-on-completion redundancy
/// with the uniform complete graph.
SpectralDistribution coc_complete4_pmf(double rho);

/// Same system over the ring with alternating weights epsilon, 1-epsilon.
/// epsilon within 1e-9 of 1/2 routes to the dedicated homogeneous formula
/// (the two middle geometric terms merge at base rho/2). epsilon at 0 or 1
/// is rejected: that system is two independent pooled pairs, use
/// negbinom_pmf. epsilon within 1e-9 of 1/3 or 2/3 is rejected as well: two
/// geometric bases coincide there and the finite-mixture coefficients blow
/// up; coc_pmf_from_alpha covers those points numerically.
SpectralDistribution coc_hetring4_pmf(double rho, double epsilon);

/// Two independent pooled server pairs: (q+1) * (1-rho)^2 * rho^q.
double negbinom_pmf(double rho, int q);
double negbinom_ccdf(double rho, int q);

/// Fully pooled d = N = 4 replication: plain M/M/1 law (1-rho) * rho^q.
double pooled_mm1_pmf(double rho, int q);
double pooled_mm1_ccdf(double rho, int q);

/// Cancel-on-start redundancy on the uniform complete four-server graph;
/// the q >= 1 mixture with P{Q = 0} supplied by complement.
SpectralDistribution cos_complete4_pmf(double rho);

/// Cancel-on-start redundancy on the homogeneous four-server ring.
SpectralDistribution cos_homring4_pmf(double rho);

/// d/d(epsilon) of the empty-system probability of the heterogeneous ring;
/// vanishes at epsilon = 1/2 and is negative beyond it, so the homogeneous
/// ring maximizes the empty-system probability.
double empty_prob_epsilon_derivative(double rho, double epsilon);

struct DominanceVerdict {
  bool a_le_b = false;
  std::optional<int> first_violation;
  std::vector<double> margins;  // margins[q-1] = P{B >= q} - P{A >= q}
};

/// A is stochastically smaller than B iff P{A >= q} <= P{B >= q} + tol for
/// all 1 <= q <= qmax. Tolerance 0 suits exact laws; empirical inputs pass
/// a noise allowance.
DominanceVerdict stochastic_dominance_compare(const SpectralDistribution& a,
                                              const SpectralDistribution& b, int qmax,
                                              double tol = 0.0);
DominanceVerdict stochastic_dominance_compare(const std::vector<double>& pmf_a,
                                              const std::vector<double>& pmf_b, int qmax,
                                              double tol = 0.0);

}  // namespace redlab
