#include "redlab/closed_forms.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace redlab {

namespace {

void require_stable(double rho, const char* who) {
  if (!(rho > 0.0 && rho < 1.0))
    throw unstable_system(std::string(who) + ": requires 0 < rho < 1");
}

}  // namespace

SpectralDistribution::SpectralDistribution(double prefactor, std::vector<Term> terms,
                                           std::optional<double> special_q0)
    : prefactor_(prefactor), terms_(std::move(terms)), special_q0_(special_q0) {
  for (const auto& t : terms_)
    if (!(t.base >= 0.0 && t.base < 1.0))
      throw invalid_parameter("SpectralDistribution: bases must lie in [0,1)");
  // Mass-one sanity check, scaled by the cancellation between terms so that
  // near-degenerate coefficient blowups (ring epsilon at the boundary) do not
  // trip on roundoff alone.
  double condition = 1.0;
  for (const auto& t : terms_)
    condition += std::abs(prefactor_ * t.coefficient) / (1.0 - t.base);
  const double mass = total_mass();
  if (std::abs(mass - 1.0) > 1e-10 * condition)
    throw std::logic_error("SpectralDistribution: mass " + std::to_string(mass) +
                           " deviates from 1");
}

double SpectralDistribution::pmf(int q) const {
  if (q < 0) throw invalid_parameter("pmf: q must be >= 0");
  if (q == 0 && special_q0_) return *special_q0_;
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.coefficient * std::pow(t.base, q);
  return prefactor_ * sum;
}

double SpectralDistribution::ccdf(int q) const {
  if (q <= 0) return 1.0;
  double sum = 0.0;
  for (const auto& t : terms_)
    sum += t.coefficient * std::pow(t.base, q) / (1.0 - t.base);
  return prefactor_ * sum;
}

double SpectralDistribution::cdf(int q) const {
  if (q < 0) return 0.0;
  return 1.0 - ccdf(q + 1);
}

double SpectralDistribution::total_mass() const {
  double mass = special_q0_ ? *special_q0_ : 0.0;
  const int from_q = special_q0_ ? 1 : 0;
  for (const auto& t : terms_) {
    double tail = t.coefficient / (1.0 - t.base);  // sum over q >= 0
    if (from_q == 1) tail -= t.coefficient;
    mass += prefactor_ * tail;
  }
  return mass;
}

SpectralDistribution coc_complete4_pmf(double rho) {
  require_stable(rho, "coc_complete4_pmf");
  const double prefactor = (1.0 / 9.0) * (1.0 - rho) * (3.0 - rho) * (3.0 - 2.0 * rho);
  return SpectralDistribution(prefactor, {{-4.0, 2.0 * rho / 3.0},
                                          {0.5, rho / 3.0},
                                          {4.5, rho}});
}

namespace {

// Homogeneous ring: the epsilon = 1/2 substitution collapses the two middle
// geometric terms of the heterogeneous formula into base rho/2.
SpectralDistribution coc_homring4(double rho) {
  const double prefactor =
      (1.0 - rho) * (2.0 - rho) * (3.0 - 2.0 * rho) / (6.0 - rho);
  return SpectralDistribution(prefactor, {{-6.0, 2.0 * rho / 3.0},
                                          {2.0, rho / 2.0},
                                          {5.0, rho}});
}

}  // namespace

SpectralDistribution coc_hetring4_pmf(double rho, double epsilon) {
  require_stable(rho, "coc_hetring4_pmf");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw invalid_parameter(
        "coc_hetring4_pmf: epsilon must lie strictly in (0,1); the disconnected "
        "boundary is negbinom_pmf");
  if (std::abs(epsilon - 0.5) < 1e-9) return coc_homring4(rho);
  if (std::abs(epsilon - 1.0 / 3.0) < 1e-9 || std::abs(epsilon - 2.0 / 3.0) < 1e-9)
    throw invalid_parameter(
        "coc_hetring4_pmf: geometric bases coincide at epsilon = 1/3 and 2/3; "
        "use coc_pmf_from_alpha there");

  const double eps = epsilon;
  const double u = eps * (1.0 - eps);
  const double prefactor = (1.0 - rho) * (1.0 - (1.0 - eps) * rho) * (1.0 - eps * rho) *
                           (3.0 - 2.0 * rho) / (3.0 - 2.0 * rho + u * rho * rho);
  return SpectralDistribution(
      prefactor,
      {{6.0 * u / (2.0 - 9.0 * u), 2.0 * rho / 3.0},
       {(1.0 - eps) * (1.0 - eps) / (eps * (3.0 * eps - 1.0)), (1.0 - eps) * rho},
       {eps * eps / ((1.0 - eps) * (2.0 - 3.0 * eps)), eps * rho},
       {(1.0 + u) / u, rho}});
}

double negbinom_pmf(double rho, int q) {
  require_stable(rho, "negbinom_pmf");
  if (q < 0) throw invalid_parameter("negbinom_pmf: q must be >= 0");
  return (q + 1) * (1.0 - rho) * (1.0 - rho) * std::pow(rho, q);
}

double negbinom_ccdf(double rho, int q) {
  require_stable(rho, "negbinom_ccdf");
  if (q <= 0) return 1.0;
  return std::pow(rho, q) * ((q + 1) - q * rho);
}

double pooled_mm1_pmf(double rho, int q) {
  require_stable(rho, "pooled_mm1_pmf");
  if (q < 0) throw invalid_parameter("pooled_mm1_pmf: q must be >= 0");
  return (1.0 - rho) * std::pow(rho, q);
}

double pooled_mm1_ccdf(double rho, int q) {
  require_stable(rho, "pooled_mm1_ccdf");
  if (q <= 0) return 1.0;
  return std::pow(rho, q);
}

// Both cancel-on-start mixtures below were pinned against an exact rational
// enumeration of the (c_1..c_Q'; u_1..u_L) product form: the coefficients are
// the source's with the (q-4) exponent bookkeeping folded in (a factor
// base^-4 * rho^4 per term), which is what makes the law normalize.

SpectralDistribution cos_complete4_pmf(double rho) {
  require_stable(rho, "cos_complete4_pmf");
  const double c = (1.0 - rho) * (3.0 - rho) * (3.0 - 2.0 * rho) /
                   ((1.0 + rho) * (3.0 + rho) * (3.0 + 2.0 * rho));
  std::vector<SpectralDistribution::Term> terms{{20.0, rho},
                                                {12.0, rho / 3.0},
                                                {-30.0, 2.0 * rho / 3.0}};
  double mass_q_ge_1 = 0.0;
  for (const auto& t : terms)
    mass_q_ge_1 += c * t.coefficient * t.base / (1.0 - t.base);
  return SpectralDistribution(c, std::move(terms), 1.0 - mass_q_ge_1);
}

SpectralDistribution cos_homring4_pmf(double rho) {
  require_stable(rho, "cos_homring4_pmf");
  const double c = 48.0 * (1.0 - rho) * (2.0 - rho) * (3.0 - 2.0 * rho) /
                   (-2.0 * rho * rho * rho + 55.0 * rho * rho + 121.0 * rho + 66.0);
  std::vector<SpectralDistribution::Term> terms{{5.0, rho},
                                                {16.0 / 3.0, rho / 2.0},
                                                {-81.0 / 8.0, 2.0 * rho / 3.0}};
  double mass_q_ge_1 = 0.0;
  for (const auto& t : terms)
    mass_q_ge_1 += c * t.coefficient * t.base / (1.0 - t.base);
  return SpectralDistribution(c, std::move(terms), 1.0 - mass_q_ge_1);
}

double empty_prob_epsilon_derivative(double rho, double epsilon) {
  require_stable(rho, "empty_prob_epsilon_derivative");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw invalid_parameter("empty_prob_epsilon_derivative: epsilon must lie in (0,1)");
  const double denom = 3.0 - 2.0 * rho + epsilon * (1.0 - epsilon) * rho * rho;
  return rho * rho * (1.0 - rho) * (3.0 - 2.0 * rho) * (2.0 - rho) *
         (1.0 - 2.0 * epsilon) / (denom * denom);
}

namespace {

DominanceVerdict compare_ccdfs(const std::function<double(int)>& ccdf_a,
                               const std::function<double(int)>& ccdf_b, int qmax,
                               double tol) {
  if (qmax < 1) throw invalid_parameter("stochastic_dominance_compare: qmax must be >= 1");
  DominanceVerdict verdict;
  verdict.a_le_b = true;
  verdict.margins.reserve(static_cast<std::size_t>(qmax));
  for (int q = 1; q <= qmax; ++q) {
    const double margin = ccdf_b(q) - ccdf_a(q);
    verdict.margins.push_back(margin);
    if (margin < -tol && verdict.a_le_b) {
      verdict.a_le_b = false;
      verdict.first_violation = q;
    }
  }
  return verdict;
}

}  // namespace

DominanceVerdict stochastic_dominance_compare(const SpectralDistribution& a,
                                              const SpectralDistribution& b, int qmax,
                                              double tol) {
  return compare_ccdfs([&](int q) { return a.ccdf(q); },
                       [&](int q) { return b.ccdf(q); }, qmax, tol);
}

DominanceVerdict stochastic_dominance_compare(const std::vector<double>& pmf_a,
                                              const std::vector<double>& pmf_b, int qmax,
                                              double tol) {
  // The vectors hold the law up to their length; the complement form keeps
  // any mass beyond the truncation inside the tail probabilities.
  auto ccdf_of = [](const std::vector<double>& pmf, int q) {
    if (q <= 0) return 1.0;
    double head = 0.0;
    for (int k = 0; k < q && k < static_cast<int>(pmf.size()); ++k)
      head += pmf[static_cast<std::size_t>(k)];
    return std::max(0.0, 1.0 - head);
  };
  return compare_ccdfs([&](int q) { return ccdf_of(pmf_a, q); },
                       [&](int q) { return ccdf_of(pmf_b, q); }, qmax, tol);
}

}  // namespace redlab
