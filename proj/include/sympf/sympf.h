/* C interface to the sympf shared library.
 *
 * All functions return a sympf_status; outputs are written through pointer
 * arguments. On any nonzero status, sympf_last_error() returns a
 * thread-local description of the failure. Objects returned through
 * sympf_weight / sympf_basis handles are immutable and must be released
 * with their matching *_free function. Complex scalars and arrays are
 * passed as interleaved doubles (re, im, re, im, ...).
 */
#ifndef SYMPF_H
#define SYMPF_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sympf_status {
  SYMPF_OK = 0,
  SYMPF_VERIFY_FAILED = 1, /* a verification suite reported failures */
  SYMPF_INVALID = 2,       /* parameter domain / validation problems */
  SYMPF_NUMERIC = 3,       /* NaN, non-convergence, accuracy failures */
  SYMPF_SINGULAR = 4       /* near-singular denominators or weights */
} sympf_status;

/* Library version, e.g. "1.0.0". Static storage; do not free. */
const char* sympf_version(void);

/* Message for the most recent failure on this thread. Static storage. */
const char* sympf_last_error(void);

/* Releases strings returned through char** outputs. */
void sympf_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Weights                                                            */

typedef struct sympf_weight sympf_weight;

/* Elliptic symplectic Gaussian weight; n >= 1, 0 <= tau <= 1. */
sympf_status sympf_weight_gse(int n, double tau, sympf_weight** out);

/* Chiral symplectic weight; n >= 1, 0 < mu <= 1, nu >= 0. */
sympf_status sympf_weight_chgse(int n, double mu, int nu, sympf_weight** out);

/* User-supplied weight w(x, y) >= 0 with Gaussian-decay scales sigma_x,
 * sigma_y used for quadrature truncation. The callback must stay valid for
 * the life of the handle. Chiral weights are evaluated on x >= 0 only. */
typedef double (*sympf_weight_fn)(void* ctx, double x, double y);
sympf_status sympf_weight_custom(sympf_weight_fn fn, void* ctx, int chiral,
                                 int nu, double sigma_x, double sigma_y,
                                 sympf_weight** out);

void sympf_weight_free(sympf_weight* w);

/* Gaussian-decay scales of the weight, as used for grid truncation. */
sympf_status sympf_weight_scales(const sympf_weight* w, double* sigma_x,
                                 double* sigma_y);

/* ------------------------------------------------------------------ */
/* Skew-orthogonal bases                                              */

typedef struct sympf_basis sympf_basis;

/* Closed-form Hermite-family basis with `pairs` (q_{2k}, q_{2k+1}) pairs;
 * tau = 1 selects the Hermitean-limit basis. */
sympf_status sympf_basis_gse(int n, double tau, int pairs, sympf_basis** out);

/* Closed-form Laguerre-family basis; mu = 0 selects the Hermitean limit. */
sympf_status sympf_basis_chgse(int n, double mu, int nu, int pairs,
                               sympf_basis** out);

/* Numerical basis for an arbitrary weight: monomial skew-product matrix at
 * `points_per_axis` quadrature points (0 = default) followed by skew
 * Gram-Schmidt in the variable z / scale (scale 0 = unscaled). When
 * condition_out is non-NULL it receives the condition estimate of the
 * monomial matrix. */
sympf_status sympf_basis_general(const sympf_weight* w, int pairs,
                                 int points_per_axis, double scale,
                                 double* condition_out, sympf_basis** out);

void sympf_basis_free(sympf_basis* b);

/* Number of polynomial pairs. */
sympf_status sympf_basis_pairs(const sympf_basis* b, int* out);

/* Skew norm r_k, 0 <= k < pairs. */
sympf_status sympf_basis_norm(const sympf_basis* b, int k, double* out);

/* Ascending coefficients of q_k (degree k in the reduced variable),
 * 0 <= k < 2 pairs. `capacity` is the element count of coeffs; the written
 * length (k + 1) is stored in *len. */
sympf_status sympf_basis_coefficients(const sympf_basis* b, int k,
                                      double* coeffs, int capacity, int* len);

/* JSON round-trip of the full basis. */
sympf_status sympf_basis_to_json(const sympf_basis* b, char** out);
sympf_status sympf_basis_from_json(const char* text, sympf_basis** out);

/* Kernel sum_{j<r} [q_{2j+1}(z) q_{2j}(v) - (z <-> v)] / r_j; chiral bases
 * evaluate at the squared arguments. */
sympf_status sympf_prekernel(const sympf_basis* b, int r, double z_re,
                             double z_im, double v_re, double v_im,
                             double* out_re, double* out_im);

/* Max normalized skew-orthogonality residual of the basis under numerical
 * skew products at `points_per_axis` quadrature points (0 = default). */
sympf_status sympf_skew_residual(const sympf_basis* b, const sympf_weight* w,
                                 int points_per_axis, double* out);

/* ------------------------------------------------------------------ */
/* Pfaffian observables                                               */

/* Expectation of prod_f det-factors at the given masses (n_masses complex
 * values, interleaved). */
sympf_status sympf_char_expectation(const sympf_basis* b, int n_eigen,
                                    const double* masses, int n_masses,
                                    double* out_re, double* out_im);

/* Massive partition function Z_N^(M). */
sympf_status sympf_partition(const sympf_basis* b, int n_eigen,
                             const double* masses, int n_masses,
                             double* out_re, double* out_im);

typedef struct sympf_correlator_diag {
  double cancellation_numerator;   /* > 1e8 flags untrustworthy digits */
  double cancellation_denominator;
  int r_index;
  int odd_m;
} sympf_correlator_diag;

/* k-point correlation function at complex points (interleaved, length 2k)
 * with n_masses complex masses. diag may be NULL. */
sympf_status sympf_correlation(const sympf_basis* b, const sympf_weight* w,
                               int n_eigen, int k, const double* points,
                               const double* masses, int n_masses,
                               double* out_re, double* out_im,
                               sympf_correlator_diag* diag);

/* Hermitean-limit k-point correlator at real points against the projected
 * weight of w, using a basis built at the Hermitean-limit parameter. */
sympf_status sympf_projected_correlation(const sympf_basis* b,
                                         const sympf_weight* w, int n_eigen,
                                         int k, const double* points,
                                         const double* masses, int n_masses,
                                         double* out);

/* ------------------------------------------------------------------ */
/* Oracles                                                            */

/* Direct quadrature of the massive partition function, n_eigen <= 2.
 * points_per_axis 0 = family defaults; pass nx > 0 with an explicit
 * integration box to override it. */
sympf_status sympf_brute_partition(const sympf_weight* w, int n_eigen,
                                   const double* masses, int n_masses,
                                   int points_per_axis, int threads,
                                   double x_min, double x_max, int nx,
                                   double y_min, double y_max, int ny,
                                   double* out_re, double* out_im);

typedef struct sympf_chain_stats {
  long long steps;   /* retained post-burn-in sweeps */
  long long burn_in;
  double acceptance_rate;
  unsigned long long seed;
  double effective_samples;
  double proposal_scale;
} sympf_chain_stats;

/* Called once per retained sweep with the n_eigen eigenvalue
 * representatives (interleaved re, im; length 2 n_eigen). */
typedef void (*sympf_sample_sink)(void* ctx, const double* points,
                                  int n_eigen);

/* Random-walk Metropolis over the joint eigenvalue density, 1 <= n_eigen
 * <= 6, with optional real masses. burn_in 0 selects steps/10 clamped to
 * [2000, 100000]. Deterministic for a fixed seed. */
sympf_status sympf_sample(const sympf_weight* w, int n_eigen, long long steps,
                          long long burn_in, unsigned long long seed, int thin,
                          const double* masses, int n_masses,
                          sympf_sample_sink sink, void* ctx,
                          sympf_chain_stats* stats);

/* ------------------------------------------------------------------ */
/* Verification suites                                                */

/* Runs one of {"theorem1", "theorem2", "identities", "mcmc"} and stores a
 * fixed-width pass/fail table in *table (free with sympf_string_free).
 * steps and seed apply to the mcmc suite, seed also to identities, threads
 * to theorem1. Returns SYMPF_VERIFY_FAILED when any check fails. */
sympf_status sympf_verify(const char* suite, long long steps,
                          unsigned long long seed, int threads,
                          char** table);

/* Hermitean-limit convergence sweep for a closed-form family ("gse" or
 * "chgse"): fills sup_deviation[i] and rel_to_peak[i] for each of the
 * n_params non-Hermiticity parameters, sets *monotone to 1 when the
 * deviations strictly decrease, and stores the last relative deviation in
 * *final_rel. */
sympf_status sympf_hermitean_sweep(const char* family, int n_eigen, int nu,
                                   const double* params, int n_params,
                                   double* sup_deviation, double* rel_to_peak,
                                   int* monotone, double* final_rel);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SYMPF_H */
