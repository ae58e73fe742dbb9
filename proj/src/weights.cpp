#include "sympf/weights.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>
#include <limits>
#include <sstream>

namespace sympf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gse_log_value(int N, double tau, double x, double y) {
  return 1.5 * std::log(static_cast<double>(N)) - std::log(2.0) -
         0.5 * std::log(kPi) - 1.5 * std::log1p(-tau) -
         N * y * y / (1.0 - tau) - N * x * x / (1.0 + tau);
}

double chgse_log_value(int N, double mu, int nu, double x, double y) {
  const double r2 = x * x + y * y;
  if (r2 <= 0.0) return kNegInf;  // (r^2)^{2nu+1} K_{2nu} vanishes at the origin
  const double mu2 = mu * mu;
  const double a = N * (1.0 + mu2) / (2.0 * mu2);
  const double b = N * (1.0 - mu2) / (2.0 * mu2);
  double logpref = 0.5 * std::log(static_cast<double>(N)) - std::log(mu) -
                   std::log(kPi) - std::log(2.0);
  // The (N(1-mu^2)/mu^2)^{3/2} normalization diverges in the Hermitean
  // limit and is dropped at mu = 1; the basis norms follow the same
  // convention so every ratio of the theory is unchanged.
  if (mu < 1.0)
    logpref += 1.5 * (std::log(static_cast<double>(N)) + std::log1p(-mu2) -
                      2.0 * std::log(mu));
  gsl_sf_result kres;
  const int status = gsl_sf_bessel_Kn_scaled_e(2 * nu, a * r2, &kres);
  if (status != GSL_SUCCESS || !(kres.val > 0.0)) {
    std::ostringstream msg;
    msg << "Bessel K_" << 2 * nu << " evaluation failed at argument " << a * r2;
    fail(errc::numeric, msg.str());
  }
  return logpref + (2.0 * nu + 1.0) * std::log(r2) + std::log(kres.val) -
         a * r2 + b * (x * x - y * y);
}

}  // namespace

double WeightSpec::log_value(double x, double y) const {
  switch (family) {
    case weight_family::gse:
      return gse_log_value(N, tau, x, y);
    case weight_family::chgse:
      return chgse_log_value(N, mu, nu, x, y);
    case weight_family::custom: {
      const double v = evaluator(x, y);
      if (!(v >= 0.0)) fail(errc::invalid, "custom weight returned a negative value");
      return v > 0.0 ? std::log(v) : kNegInf;
    }
  }
  fail(errc::invalid, "unknown weight family");
}

double WeightSpec::value(double x, double y) const {
  if (family == weight_family::custom) {
    const double v = evaluator(x, y);
    if (!(v >= 0.0)) fail(errc::invalid, "custom weight returned a negative value");
    return v;
  }
  return std::exp(log_value(x, y));
}

WeightSpec gse_weight(int N, double tau) {
  if (N < 1) fail(errc::invalid, "gse_weight: N must be a positive integer");
  if (!(tau >= 0.0 && tau < 1.0))
    fail(errc::invalid, "gse_weight: tau must lie in [0, 1)");
  WeightSpec w;
  w.family = weight_family::gse;
  w.chiral = false;
  w.N = N;
  w.tau = tau;
  w.sigma_x = std::sqrt((1.0 + tau) / (2.0 * N));
  w.sigma_y = std::sqrt((1.0 - tau) / (2.0 * N));
  return w;
}

WeightSpec chgse_weight(int N, double mu, int nu) {
  if (N < 1) fail(errc::invalid, "chgse_weight: N must be a positive integer");
  if (!(mu > 0.0 && mu <= 1.0))
    fail(errc::invalid, "chgse_weight: mu must lie in (0, 1]");
  if (nu < 0) fail(errc::invalid, "chgse_weight: nu must be non-negative");
  WeightSpec w;
  w.family = weight_family::chgse;
  w.chiral = true;
  w.N = N;
  w.mu = mu;
  w.nu = nu;
  w.sigma_x = 1.0 / std::sqrt(2.0 * N);
  w.sigma_y = mu / std::sqrt(2.0 * N);
  return w;
}

WeightSpec custom_weight(std::function<double(double, double)> evaluator,
                         double sigma_x, double sigma_y, bool chiral) {
  if (!evaluator) fail(errc::invalid, "custom_weight: evaluator is empty");
  if (!(sigma_x > 0.0 && sigma_y > 0.0))
    fail(errc::invalid, "custom_weight: decay scales must be positive");
  WeightSpec w;
  w.family = weight_family::custom;
  w.chiral = chiral;
  w.sigma_x = sigma_x;
  w.sigma_y = sigma_y;
  w.evaluator = std::move(evaluator);
  return w;
}

double RealWeightSpec::value(double x) const {
  if (chiral) {
    // Even extension |x|^{4 nu + 1} exp(-N x^2): the chiral real-line
    // machinery treats each eigenvalue through its +-x pair, so densities
    // normalize over the full line.
    return std::pow(std::abs(x), 4.0 * nu + 1.0) * std::exp(-N * x * x);
  }
  return std::exp(-0.5 * N * x * x);
}

RealWeightSpec projected_weight(const WeightSpec& w) {
  if (w.family == weight_family::custom)
    fail(errc::invalid,
         "projected_weight: no closed projection for a custom weight; "
         "supply the projected form explicitly");
  RealWeightSpec r;
  r.family = w.family;
  r.chiral = (w.family == weight_family::chgse);
  r.N = w.N;
  r.nu = w.nu;
  r.sigma = r.chiral ? 1.0 / std::sqrt(2.0 * w.N) : 1.0 / std::sqrt(static_cast<double>(w.N));
  return r;
}

QuadratureGrid build_grid(const WeightSpec& w, int points_per_axis, int degmax) {
  if (!(w.sigma_x > 0.0 && w.sigma_y > 0.0))
    fail(errc::invalid, "build_grid: weight has no decay metadata");
  const int n = points_per_axis > 0 ? points_per_axis : (w.chiral ? 320 : 160);
  QuadratureGrid g;
  g.x_max = box_halfwidth(w.sigma_x, degmax);
  g.y_max = box_halfwidth(w.sigma_y, degmax);
  if (w.chiral) {
    exp_graded_axis(g.x_max, n, g.nodes_x, g.weights_x);
    exp_graded_axis(g.y_max, n, g.nodes_y, g.weights_y);
  } else {
    gauss_legendre(-g.x_max, g.x_max, n, g.nodes_x, g.weights_x);
    gauss_legendre(-g.y_max, g.y_max, n, g.nodes_y, g.weights_y);
  }
  g.validate();
  return g;
}

LineGrid build_line_grid(const RealWeightSpec& w, int points, int degmax) {
  if (!(w.sigma > 0.0)) fail(errc::invalid, "build_line_grid: weight has no scale");
  const int n = points > 0 ? points : 240;
  const double h = box_halfwidth(w.sigma, degmax);
  LineGrid g;
  gauss_legendre(w.chiral ? 0.0 : -h, h, n, g.nodes, g.weights);
  return g;
}

}  // namespace sympf
