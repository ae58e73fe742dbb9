// Weight families on the complex plane (Gaussian symplectic and chiral
// Gaussian symplectic, plus user-supplied), their Hermitean-limit
// projections onto the real axis, and quadrature grids matched to their
// decay.
#pragma once

#include <functional>

#include "sympf/numerics.hpp"

namespace sympf {

enum class weight_family { gse, chgse, custom };

// Weight w(x, y) on the complex plane z = x + iy, even in y, with Gaussian
// decay metadata used for quadrature truncation. Immutable after
// construction and safe to evaluate concurrently.
struct WeightSpec {
  weight_family family = weight_family::gse;
  bool chiral = false;
  int N = 1;
  double tau = 0.0;  // gse anisotropy, in [0, 1)
  double mu = 1.0;   // chgse anisotropy, in (0, 1]
  int nu = 0;        // chiral topological index
  double sigma_x = 0.0, sigma_y = 0.0;  // Gaussian decay scales
  std::function<double(double, double)> evaluator;  // custom family only

  double value(double x, double y) const;
  // log w(x, y); -inf where w vanishes. The chiral family is evaluated in
  // log scale throughout (scaled Bessel), so this is exact, not log(value).
  double log_value(double x, double y) const;
};

// w = [N^{3/2} / (2 sqrt(pi) (1-tau)^{3/2})] exp(-N y^2/(1-tau)) exp(-N x^2/(1+tau))
// with sigma_x = sqrt((1+tau)/(2N)), sigma_y = sqrt((1-tau)/(2N)).
WeightSpec gse_weight(int N, double tau);

// w = pref * (r^2)^{2 nu + 1} K_{2 nu}(a r^2) exp(b (x^2 - y^2)) with
// a = N(1+mu^2)/(2 mu^2), b = N(1-mu^2)/(2 mu^2),
// pref = sqrt(N)/(2 pi mu) * (N(1-mu^2)/mu^2)^{3/2}; the second prefactor
// factor is dropped at mu = 1 exactly (it is reinstated consistently in
// the companion norms, see chgse_skew_basis). sigma_x = 1/sqrt(2N),
// sigma_y = mu/sqrt(2N).
WeightSpec chgse_weight(int N, double mu, int nu);

// User-defined weight; evaluator must be even in y and non-negative, and
// decay scales are required for grid truncation.
WeightSpec custom_weight(std::function<double(double, double)> evaluator,
                         double sigma_x, double sigma_y, bool chiral);

// Weight on the real axis obtained in the Hermitean limit.
struct RealWeightSpec {
  weight_family family = weight_family::gse;
  bool chiral = false;  // support [0, inf) instead of the full line
  int N = 1;
  int nu = 0;
  double sigma = 0.0;
  double value(double x) const;
};

// gse -> exp(-N x^2 / 2); chgse -> |x|^{4 nu + 1} exp(-N x^2), evaluated as
// its even extension so real-line densities normalize over the full line.
// A custom family has no closed projection and is rejected.
RealWeightSpec projected_weight(const WeightSpec& w);

// Tensor grid over the weight's truncation box: half-widths
// box_halfwidth(sigma, degmax) per axis. Chiral weights get the
// exponentially graded axes (they are non-analytic at the origin);
// the rest get plain Gauss-Legendre. points_per_axis = 0 picks the
// family default (320 chiral, 160 otherwise).
QuadratureGrid build_grid(const WeightSpec& w, int points_per_axis = 0,
                          int degmax = 0);

// Real-axis quadrature for the projected weights: Gauss-Legendre on
// [-h, h] (full line) or [0, h] (chiral half-line), h from the weight's
// scale and degmax. points = 0 picks the default of 240.
struct LineGrid {
  std::vector<double> nodes, weights;
};
LineGrid build_line_grid(const RealWeightSpec& w, int points = 0, int degmax = 0);

}  // namespace sympf
