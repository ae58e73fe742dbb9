#pragma once

// Independent verification tools: direct quadrature of the defining
// eigenvalue integrals at tiny N, Metropolis sampling of the joint density
// at moderate N, and histogram comparison reports.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sympf/correlators.hpp"
#include "sympf/skewortho.hpp"
#include "sympf/weights.hpp"

namespace sympf {

// Upper-half-plane representatives of the eigenvalue pairs (quadrant
// representatives for chiral ensembles); conjugates are implicit.
struct EigenConfig {
  std::vector<cd> points;
};

struct ChainStats {
  long long steps = 0;     // retained post-burn-in sweeps
  long long burn_in = 0;   // total discarded sweeps: requested + tuning probes
  double acceptance_rate = 0.0;  // sampling phase, per site update
  std::uint64_t seed = 0;
  double effective_sample_estimate = 0.0;
  double proposal_scale = 0.0;  // tuned multiple of (sigma_x, sigma_y)
};

struct McmcOptions {
  long long steps = 1000000;  // sweeps; one sweep updates every site once
  long long burn_in = 0;      // 0 selects steps/10 clamped to [2000, 100000]
  std::uint64_t seed = 1;
  int thin = 1;
  std::vector<double> masses;  // sampling supports real masses only
};

// Log of the joint eigenvalue density of upper-half-plane representatives:
// sum of log w(z_i), the one-body Jacobian logs, the pair-repulsion logs,
// and real-mass factor logs. Returns -infinity on an axis.
double joint_log_density(const WeightSpec& w, const EigenConfig& config,
                         const std::vector<double>& masses);

struct BruteOptions {
  int points_per_axis = 0;  // 0 selects family defaults per dimension
  int degmax = 0;           // truncation-box degree; 0 selects defaults
  int threads = 1;
  bool estimate_accuracy = true;  // compare against a 3/4-resolution grid
  double accuracy_tol = 1e-5;
  // Explicit box override; used when nx > 0.
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  int nx = 0, ny = 0;
};

// Direct quadrature of the 2N-dimensional eigenvalue integral, N <= 2.
// Complex masses are allowed; chiral mass power factors are included.
cd brute_force_partition(const WeightSpec& w, int N,
                         const std::vector<cd>& masses,
                         const BruteOptions& opt = {});

// Direct quadrature of the one-point correlator R_{N,1}(z), N <= 2.
// An already-computed partition value can be supplied to avoid recomputing.
cd brute_force_correlator(const WeightSpec& w, int N, int k, cd z,
                          const std::vector<cd>& masses,
                          const BruteOptions& opt = {},
                          const cd* partition = nullptr);

// Real-line (Hermitean limit) counterparts on N <= 2 eigenvalues with the
// fourth-power Vandermonde. Chiral integrands use the even extension of the
// half-line weight, so densities integrate to N over the full line.
double brute_real_partition(const RealWeightSpec& wbar, int N,
                            const std::vector<double>& masses,
                            const BruteOptions& opt = {});
double brute_real_correlator(const RealWeightSpec& wbar, int N, double x,
                             const std::vector<double>& masses,
                             const BruteOptions& opt = {},
                             const double* partition = nullptr);

// Real-line skew product <f|g> = int dx wbar (f'g - f g'); chiral inputs are
// polynomials in x^2 under the dressed measure 2x wbar(x).
double real_skew_product(const poly& f, const poly& g,
                         const RealWeightSpec& wbar, const LineGrid& grid);

// Random-walk Metropolis over upper-half-plane (quadrant) representatives.
// One step of the chain is a sweep of single-site updates; the proposal
// scale is tuned during burn-in toward 30 percent acceptance. Deterministic
// for a fixed seed. The sink receives each retained sweep.
ChainStats mcmc_sample(const WeightSpec& w, int N, const McmcOptions& opt,
                       const std::function<void(const EigenConfig&)>& sink);

struct HistogramGrid {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  int nx = 40, ny = 40;
};

// Grid sized to cover the sampled one-point density support.
HistogramGrid default_histogram_grid(const WeightSpec& w, int N);

struct DensityBin {
  double x_lo, x_hi, y_lo, y_hi;
  long long count = 0;
  double expected = 0.0;
  double z_score = 0.0;
  bool used = false;  // bins below 20 counts are excluded
};

struct DensityCompareReport {
  std::vector<DensityBin> bins;
  long long total_points = 0;   // all sampled points
  long long total_in_grid = 0;  // points landing inside the grid
  long long used_bins = 0;
  double max_abs_z = 0.0;
  double fraction_beyond_3 = 0.0;
  double predicted_total = 0.0;  // integral of the prediction over the grid
  ChainStats chain;
};

// Bins chain-ordered samples and compares counts against a predicted
// density (already folded onto the representative domain, so it integrates
// to N there). Per-bin variances come from batch means, which absorb the
// autocorrelation a bare Poisson estimate misses.
DensityCompareReport density_compare(
    const std::vector<EigenConfig>& samples,
    const std::function<double(double, double)>& predicted,
    const HistogramGrid& grid, int batches = 64);

// One-shot streaming variant: runs a chain and compares its histogram with
// the Pfaffian one-point prediction 2 R_{N,1} (4 R_{N,1} on the quadrant).
DensityCompareReport mcmc_density_compare(const SkewBasis& basis,
                                          const WeightSpec& w, int N,
                                          const McmcOptions& opt,
                                          const HistogramGrid& grid);

}  // namespace sympf
