// Pfaffian matrix assembly (complex-plane and real-line block forms) and
// the observables built from them: characteristic-polynomial expectations,
// massive partition functions, k-point correlators, their Hermitean-limit
// projections, and the quaternion-kernel cross-check forms.
#pragma once

#include "sympf/numerics.hpp"
#include "sympf/skewortho.hpp"
#include "sympf/weights.hpp"

namespace sympf {

// Ordered evaluation arguments u = (z_1, z_1*, ..., z_k, z_k*, m_1..m_M).
struct ArgumentList {
  std::vector<cd> entries;
  int k = 0;
  int M = 0;
};

// Builds and validates the ordered list: conjugates interleaved exactly,
// points pairwise distinct, masses separated by more than 1e-9 times
// their magnitude scale.
ArgumentList make_argument_list(const std::vector<cd>& points,
                                const std::vector<cd>& masses);

// Kernel matrix [kappa_R(u_i, u_j)]; odd-length lists gain a border column
// q_{2R}(u_i) / row -q_{2R}(u_j) with zero corner. Chiral bases square all
// arguments internally.
Eigen::MatrixXcd theta_matrix(const SkewBasis& basis, int R,
                              const ArgumentList& args);

// <prod_f det-factor(m_f)> = (-1)^{floor(M/2)} / Delta_M * prod_{h=N}^{R-1} r_h
// * Pf[Theta_R(m)] with R = N + floor(M/2); the chiral Vandermonde runs over
// squared masses.
cd char_poly_expectation(const SkewBasis& basis, int N,
                         const std::vector<cd>& masses);

// Z_N^(M) = N! prod_{i<N} r_i * char_poly_expectation; chiral results carry
// the extra prod_f m_f^{2 nu}.
cd partition_function(const SkewBasis& basis, int N,
                      const std::vector<cd>& masses);

struct CorrelatorResult {
  cd value = 0.0;
  int R_index = 0;      // N + floor(M/2)
  bool odd_M = false;
  // Pfaffian cancellation diagnostics (peak intermediate pivot product
  // over final value); values above 1e8 flag untrustworthy digits.
  double cancellation_numerator = 1.0;
  double cancellation_denominator = 1.0;
};
inline constexpr double kCancellationWarning = 1e8;

// R_{N,k}^(M)(z_1..z_k) = prod_h w(z_h) (z_h* - z_h) [chiral (z_h*^2 - z_h^2)]
// * Pf[Theta_R(u)] / Pf[Theta_R(m)]. The M = 0 denominator is the empty
// Pfaffian, 1. A denominator below 1e-12 of its natural scale is an error.
CorrelatorResult correlation(const SkewBasis& basis, const WeightSpec& w, int N,
                             int k, const std::vector<cd>& points,
                             const std::vector<cd>& masses);

// Real-line block matrix of the projected kernel: one 2-row group per
// eigenvalue (derivative row above plain row), then mass rows, then the
// q_{2R} border when 2k+M is odd.
Eigen::MatrixXcd omega_matrix(const SkewBasis& basis, int R,
                              const std::vector<double>& xs,
                              const std::vector<double>& masses);

// Rbar_{N,k}^(M)(x) = prod_h wbar_eff(x_h) * Pf[Omega(x; m)] / Pf[Omega(m)]
// with wbar_eff = wbar (non-chiral) or 2x wbar (chiral).
double real_correlation(const SkewBasis& basis, const RealWeightSpec& wbar,
                        int N, int k, const std::vector<double>& xs,
                        const std::vector<double>& masses);

// Matrix elements of the quaternion-valued projected kernel,
// I = sqrt(wb(x) wb(t)) kappa(x,t), S = sqrt(wb(x) wb(t)) d_t kappa(t,x),
// D = -sqrt(wb(x) wb(t)) d_x d_t kappa(x,t), with the dressed weight
// (2x wbar for chiral weights).
struct IsdKernels {
  double I = 0.0, S = 0.0, D = 0.0;
};
IsdKernels isd_kernels(const SkewBasis& basis, const RealWeightSpec& wbar,
                       int R, double x, double t);

// M = 0 quaternion-kernel density: Pfaffian of the interleaved per-pair
// blocks [[I(x_i,x_j), S(x_i,x_j)], [-S(x_j,x_i), -D(x_i,x_j)]]. Equals
// real_correlation with no masses.
double quaternion_kernel_density(const SkewBasis& basis,
                                 const RealWeightSpec& wbar, int R,
                                 const std::vector<double>& xs);

// Rearranged quaternion form for odd M: ordering (masses, border, plain
// rows, derivative rows) with the dressed border polynomial; carries the
// (-1)^{k(k-1)/2} reordering sign. Equals real_correlation.
double quaternion_form_correlation(const SkewBasis& basis,
                                   const RealWeightSpec& wbar, int N,
                                   const std::vector<double>& xs,
                                   const std::vector<double>& masses);

// Hermitean-limit convergence study: evaluates the y-integrated 1-point
// density along a non-Hermiticity parameter sequence and reports the sup
// deviation from the projected real-line density on a fixed x grid.
struct SweepRow {
  double param = 0.0;
  double sup_deviation = 0.0;   // absolute sup over the x grid
  double rel_to_peak = 0.0;     // sup deviation / peak of the target
};
struct SweepReport {
  std::vector<SweepRow> rows;
  bool monotone = false;       // deviations strictly decreasing
  double final_rel_deviation = 0.0;
};
SweepReport hermitean_limit_sweep(weight_family family, int N, int nu,
                                  const std::vector<double>& params);

}  // namespace sympf
