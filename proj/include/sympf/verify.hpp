#pragma once

// Verification suites comparing the Pfaffian formulas against independent
// oracles: direct quadrature, real-line brutes, algebraic identities, and
// Metropolis sampling.

#include <cstdint>
#include <string>
#include <vector>

#include "sympf/oracle.hpp"

namespace sympf {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // residual or statistic being judged
  double tolerance = 0.0;  // threshold it is judged against
  std::string detail;
};

struct VerifySuiteResult {
  std::string suite;
  std::vector<VerifyCheck> checks;
  double seconds = 0.0;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

// Max normalized deviation of the numerical skew products of a basis from
// the canonical pairing (q_even paired with q_odd at minus the norm).
double skew_orthogonality_residual(const SkewBasis& basis, const WeightSpec& w,
                                   const QuadratureGrid& grid);

// Pfaffian-formula partition functions and one-point correlators against
// direct 2N-dimensional quadrature across both families, N <= 2, M <= 2,
// with complex masses.
VerifySuiteResult verify_theorem1(int threads = 1);

// Hermitean-limit sweeps, projected correlators against real-line brutes,
// and the equivalence of the Omega-Pfaffian and quaternion kernel forms.
VerifySuiteResult verify_theorem2();

// Pfaffian algebra, kernel basis-independence, and the one- and two-mass
// characteristic polynomial identities with their coincident-mass limits.
// threads parallelizes the brute-force quadratures.
VerifySuiteResult verify_identities(std::uint64_t seed = 12345, int threads = 1);

// Metropolis one-point histograms against Pfaffian predictions for
// N in 2..6 on both families.
VerifySuiteResult verify_mcmc(long long steps = 1000000,
                              std::uint64_t seed = 20240901ULL);

// Fixed-width pass/fail table for terminal output.
std::string format_table(const VerifySuiteResult& result);

}  // namespace sympf
