// Skew-symmetric scalar products, monomial skew-product matrices,
// skew-orthogonal polynomial bases (closed-form Hermite/Laguerre families
// and general weights via skew Gram-Schmidt), and kernel evaluation.
#pragma once

#include <string>

#include "sympf/numerics.hpp"
#include "sympf/weights.hpp"

namespace sympf {

enum class basis_source { closed_form, w_matrix };

// Monic skew-orthogonal polynomials q_0..q_{2R-1} with norms r_0..r_{R-1}:
// <q_{2k+1}, q_{2l}> = r_k delta_kl, all other pairings zero. Chiral bases
// are polynomials in z^2; evaluation sites are squared by the callers.
struct SkewBasis {
  std::vector<poly> polys;    // ascending coefficients, q_k monic of degree k
  std::vector<double> norms;  // r_k, nonzero
  bool chiral = false;
  int nu = 0;
  basis_source source = basis_source::closed_form;

  int pairs() const { return static_cast<int>(norms.size()); }
  // q_k with a size error when the basis is too short (the bordered
  // matrices of odd-length argument lists need q_{2R}).
  const poly& q(int k) const;
  void validate() const;
};

// Degree cap: double precision conditioning degrades beyond this.
inline constexpr int kMaxPairs = 12;

// Closed-form Hermite-family basis; tau = 1 gives the projected basis of
// the Hermitean limit. Norms r_k = sqrt(pi) sqrt(1+tau) (2k+1)! / N^{2k+1/2}.
SkewBasis gse_skew_basis(int N, double tau, int R);

// Closed-form Laguerre-family basis in u = z^2; mu = 0 gives the projected
// basis. At mu = 1 the norms drop the same (N(1-mu^2))^{3/2} factor the
// weight's normalization drops there.
SkewBasis chgse_skew_basis(int N, double mu, int nu, int R);

// <f, g> = Int d^2z w(z, z*) (z* - z) [f(z) g(z*) - f(z*) g(z)]; the chiral
// product replaces (z* - z) by (z*^2 - z^2) with f, g polynomials in z^2.
// Real for real-coefficient inputs, which the contract requires (they
// justify g(z)* = g(z*)).
double skew_product(const poly& f, const poly& g, const WeightSpec& w,
                    const QuadratureGrid& grid);
// Complex-coefficient entry point; non-real coefficients are rejected.
double skew_product(const std::vector<cd>& f, const std::vector<cd>& g,
                    const WeightSpec& w, const QuadratureGrid& grid);

// W_{m,n} = <z^m, z^n> over monomials of the reduced variable (z, or z^2
// when chiral), optionally in the scaled variable z -> z/scale for
// conditioning. Carries the inverse and a spectral condition estimate.
struct SkewProductMatrix {
  Eigen::MatrixXd W;          // in the scaled variable
  Eigen::MatrixXd W_inverse;
  double condition_estimate = 0.0;
  double scale = 1.0;         // monomial argument was divided by this
  bool chiral = false;
  int nu = 0;
};

// size must be even and at most 2 * kMaxPairs; condition estimates beyond
// 1e12 are an error (rescale variables rather than return noise).
SkewProductMatrix monomial_W(const WeightSpec& w, int size,
                             const QuadratureGrid& grid, double scale = 1.0);

// Skew Gram-Schmidt on W with the odd-polynomial gauge fixed by never
// mixing q_{2k} into q_{2k+1} (c = 0). Coefficients and norms are mapped
// back to the original variable.
SkewBasis general_skew_basis(const SkewProductMatrix& wm);

// kappa_R(z, v) = sum_{k<R} [q_{2k+1}(z) q_{2k}(v) - q_{2k+1}(v) q_{2k}(z)] / r_k
// (chiral bases evaluate at z^2, v^2).
cd prekernel(const SkewBasis& basis, int R, cd z, cd v);

// Basis-independent kernel kappa(z, v) = sum_{m,n} z^m (W^{-1})_{n,m} v^n
// in the scaled monomials; equals prekernel built from the same weight.
cd kernel_via_W(const SkewProductMatrix& wm, cd z, cd v);

// Kernel and its exact first/second derivatives with respect to the real
// arguments; chiral bases use d/dx = 2x d/du at u = x^2.
struct KernelDerivatives {
  double kappa = 0.0;  // kappa_R(x, t)
  double dx = 0.0;     // d/dx
  double dt = 0.0;     // d/dt
  double dxdt = 0.0;   // d^2/dxdt
};
KernelDerivatives kernel_derivatives(const SkewBasis& basis, int R, double x,
                                     double t);

// JSON round-trip: {chiral, nu, norms: [re,im][], polys: [[re,im][]][]},
// coefficients ascending.
std::string skew_basis_to_json(const SkewBasis& basis);
SkewBasis skew_basis_from_json(const std::string& text);

}  // namespace sympf
