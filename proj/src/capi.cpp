#include "sympf/sympf.h"

#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "sympf/correlators.hpp"
#include "sympf/numerics.hpp"
#include "sympf/oracle.hpp"
#include "sympf/skewortho.hpp"
#include "sympf/verify.hpp"
#include "sympf/weights.hpp"

struct sympf_weight {
  sympf::WeightSpec w;
};

struct sympf_basis {
  sympf::SkewBasis b;
};

namespace {

thread_local std::string g_last_error;

sympf_status to_status(sympf::errc c) {
  return static_cast<sympf_status>(static_cast<int>(c));
}

// Runs the body and converts exceptions into status codes plus the
// thread-local message; the C surface never lets one escape.
template <class F>
sympf_status guarded(F&& body) noexcept {
  try {
    body();
    return SYMPF_OK;
  } catch (const sympf::error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SYMPF_NUMERIC;
  } catch (...) {
    g_last_error = "unknown failure";
    return SYMPF_NUMERIC;
  }
}

void require(bool ok, const char* what) {
  if (!ok) sympf::fail(sympf::errc::invalid, what);
}

std::vector<sympf::cd> complex_list(const double* data, int n,
                                    const char* what) {
  require(n >= 0 && (n == 0 || data != nullptr), what);
  std::vector<sympf::cd> out(n);
  for (int i = 0; i < n; ++i) out[i] = {data[2 * i], data[2 * i + 1]};
  return out;
}

std::vector<double> real_list(const double* data, int n, const char* what) {
  require(n >= 0 && (n == 0 || data != nullptr), what);
  return std::vector<double>(data, data + n);
}

// Quadrature degree that keeps the highest monomial skew product of a basis
// with `pairs` pairs inside the truncation box.
int basis_degmax(bool chiral, int nu, int pairs) {
  const int dmax = 2 * pairs - 1;
  return chiral ? 4 * dmax + 4 * nu + 4 : 2 * dmax + 2;
}

}  // namespace

extern "C" {

const char* sympf_version(void) {
#ifdef SYMPF_VERSION_STRING
  return SYMPF_VERSION_STRING;
#else
  return "0.0.0";
#endif
}

const char* sympf_last_error(void) { return g_last_error.c_str(); }

void sympf_string_free(char* s) { delete[] s; }

sympf_status sympf_weight_gse(int n, double tau, sympf_weight** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new sympf_weight{sympf::gse_weight(n, tau)};
  });
}

sympf_status sympf_weight_chgse(int n, double mu, int nu, sympf_weight** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new sympf_weight{sympf::chgse_weight(n, mu, nu)};
  });
}

sympf_status sympf_weight_custom(sympf_weight_fn fn, void* ctx, int chiral,
                                 int nu, double sigma_x, double sigma_y,
                                 sympf_weight** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(fn != nullptr, "null weight callback");
    require(nu >= 0, "nu must be >= 0");
    auto spec = sympf::custom_weight(
        [fn, ctx](double x, double y) { return fn(ctx, x, y); }, sigma_x,
        sigma_y, chiral != 0);
    spec.nu = nu;
    *out = new sympf_weight{std::move(spec)};
  });
}

void sympf_weight_free(sympf_weight* w) { delete w; }

sympf_status sympf_weight_scales(const sympf_weight* w, double* sigma_x,
                                 double* sigma_y) {
  return guarded([&] {
    require(w != nullptr, "null weight handle");
    if (sigma_x) *sigma_x = w->w.sigma_x;
    if (sigma_y) *sigma_y = w->w.sigma_y;
  });
}

sympf_status sympf_basis_gse(int n, double tau, int pairs, sympf_basis** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new sympf_basis{sympf::gse_skew_basis(n, tau, pairs)};
  });
}

sympf_status sympf_basis_chgse(int n, double mu, int nu, int pairs,
                               sympf_basis** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new sympf_basis{sympf::chgse_skew_basis(n, mu, nu, pairs)};
  });
}

sympf_status sympf_basis_general(const sympf_weight* w, int pairs,
                                 int points_per_axis, double scale,
                                 double* condition_out, sympf_basis** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(w != nullptr, "null weight handle");
    require(pairs >= 1, "pairs must be >= 1");
    const int degmax = basis_degmax(w->w.chiral, w->w.nu, pairs);
    const auto grid = sympf::build_grid(w->w, points_per_axis, degmax);
    const auto wm = sympf::monomial_W(w->w, 2 * pairs, grid,
                                      scale == 0.0 ? 1.0 : scale);
    if (condition_out) *condition_out = wm.condition_estimate;
    *out = new sympf_basis{sympf::general_skew_basis(wm)};
  });
}

void sympf_basis_free(sympf_basis* b) { delete b; }

sympf_status sympf_basis_pairs(const sympf_basis* b, int* out) {
  return guarded([&] {
    require(b != nullptr && out != nullptr, "null handle");
    *out = static_cast<int>(b->b.norms.size());
  });
}

sympf_status sympf_basis_norm(const sympf_basis* b, int k, double* out) {
  return guarded([&] {
    require(b != nullptr && out != nullptr, "null handle");
    require(k >= 0 && k < static_cast<int>(b->b.norms.size()),
            "norm index out of range");
    *out = b->b.norms[k];
  });
}

sympf_status sympf_basis_coefficients(const sympf_basis* b, int k,
                                      double* coeffs, int capacity, int* len) {
  return guarded([&] {
    require(b != nullptr && len != nullptr, "null handle");
    const auto& q = b->b.q(k);
    *len = static_cast<int>(q.size());
    require(coeffs != nullptr && capacity >= *len,
            "coefficient buffer too small");
    std::memcpy(coeffs, q.data(), q.size() * sizeof(double));
  });
}

sympf_status sympf_basis_to_json(const sympf_basis* b, char** out) {
  return guarded([&] {
    require(b != nullptr && out != nullptr, "null handle");
    const std::string text = sympf::skew_basis_to_json(b->b);
    *out = new char[text.size() + 1];
    std::memcpy(*out, text.c_str(), text.size() + 1);
  });
}

sympf_status sympf_basis_from_json(const char* text, sympf_basis** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null handle");
    *out = new sympf_basis{sympf::skew_basis_from_json(text)};
  });
}

sympf_status sympf_prekernel(const sympf_basis* b, int r, double z_re,
                             double z_im, double v_re, double v_im,
                             double* out_re, double* out_im) {
  return guarded([&] {
    require(b != nullptr && out_re != nullptr && out_im != nullptr,
            "null handle");
    const sympf::cd k =
        sympf::prekernel(b->b, r, {z_re, z_im}, {v_re, v_im});
    *out_re = k.real();
    *out_im = k.imag();
  });
}

sympf_status sympf_skew_residual(const sympf_basis* b, const sympf_weight* w,
                                 int points_per_axis, double* out) {
  return guarded([&] {
    require(b != nullptr && w != nullptr && out != nullptr, "null handle");
    const int pairs = static_cast<int>(b->b.norms.size());
    const int degmax = basis_degmax(b->b.chiral, b->b.nu, pairs);
    const auto grid = sympf::build_grid(w->w, points_per_axis, degmax);
    *out = sympf::skew_orthogonality_residual(b->b, w->w, grid);
  });
}

sympf_status sympf_char_expectation(const sympf_basis* b, int n_eigen,
                                    const double* masses, int n_masses,
                                    double* out_re, double* out_im) {
  return guarded([&] {
    require(b != nullptr && out_re != nullptr && out_im != nullptr,
            "null handle");
    const auto ms = complex_list(masses, n_masses, "null mass array");
    const sympf::cd v = sympf::char_poly_expectation(b->b, n_eigen, ms);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sympf_status sympf_partition(const sympf_basis* b, int n_eigen,
                             const double* masses, int n_masses,
                             double* out_re, double* out_im) {
  return guarded([&] {
    require(b != nullptr && out_re != nullptr && out_im != nullptr,
            "null handle");
    const auto ms = complex_list(masses, n_masses, "null mass array");
    const sympf::cd v = sympf::partition_function(b->b, n_eigen, ms);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sympf_status sympf_correlation(const sympf_basis* b, const sympf_weight* w,
                               int n_eigen, int k, const double* points,
                               const double* masses, int n_masses,
                               double* out_re, double* out_im,
                               sympf_correlator_diag* diag) {
  return guarded([&] {
    require(b != nullptr && w != nullptr && out_re != nullptr &&
                out_im != nullptr,
            "null handle");
    require(k >= 1 && points != nullptr, "need at least one point");
    const auto pts = complex_list(points, k, "null point array");
    const auto ms = complex_list(masses, n_masses, "null mass array");
    const auto r = sympf::correlation(b->b, w->w, n_eigen, k, pts, ms);
    *out_re = r.value.real();
    *out_im = r.value.imag();
    if (diag) {
      diag->cancellation_numerator = r.cancellation_numerator;
      diag->cancellation_denominator = r.cancellation_denominator;
      diag->r_index = r.R_index;
      diag->odd_m = r.odd_M;
    }
  });
}

sympf_status sympf_projected_correlation(const sympf_basis* b,
                                         const sympf_weight* w, int n_eigen,
                                         int k, const double* points,
                                         const double* masses, int n_masses,
                                         double* out) {
  return guarded([&] {
    require(b != nullptr && w != nullptr && out != nullptr, "null handle");
    require(k >= 1 && points != nullptr, "need at least one point");
    const auto xs = real_list(points, k, "null point array");
    const auto ms = real_list(masses, n_masses, "null mass array");
    const auto wbar = sympf::projected_weight(w->w);
    *out = sympf::real_correlation(b->b, wbar, n_eigen, k, xs, ms);
  });
}

sympf_status sympf_brute_partition(const sympf_weight* w, int n_eigen,
                                   const double* masses, int n_masses,
                                   int points_per_axis, int threads,
                                   double x_min, double x_max, int nx,
                                   double y_min, double y_max, int ny,
                                   double* out_re, double* out_im) {
  return guarded([&] {
    require(w != nullptr && out_re != nullptr && out_im != nullptr,
            "null handle");
    const auto ms = complex_list(masses, n_masses, "null mass array");
    sympf::BruteOptions opt;
    opt.points_per_axis = points_per_axis;
    opt.threads = threads;
    opt.x_min = x_min;
    opt.x_max = x_max;
    opt.nx = nx;
    opt.y_min = y_min;
    opt.y_max = y_max;
    opt.ny = ny;
    const sympf::cd v = sympf::brute_force_partition(w->w, n_eigen, ms, opt);
    *out_re = v.real();
    *out_im = v.imag();
  });
}

sympf_status sympf_sample(const sympf_weight* w, int n_eigen, long long steps,
                          long long burn_in, unsigned long long seed, int thin,
                          const double* masses, int n_masses,
                          sympf_sample_sink sink, void* ctx,
                          sympf_chain_stats* stats) {
  return guarded([&] {
    require(w != nullptr, "null weight handle");
    sympf::McmcOptions opt;
    opt.steps = steps;
    opt.burn_in = burn_in;
    opt.seed = seed;
    opt.thin = thin;
    opt.masses = real_list(masses, n_masses, "null mass array");
    std::vector<double> flat;
    const auto chain = sympf::mcmc_sample(
        w->w, n_eigen, opt, [&](const sympf::EigenConfig& c) {
          if (!sink) return;
          flat.resize(2 * c.points.size());
          for (std::size_t i = 0; i < c.points.size(); ++i) {
            flat[2 * i] = c.points[i].real();
            flat[2 * i + 1] = c.points[i].imag();
          }
          sink(ctx, flat.data(), static_cast<int>(c.points.size()));
        });
    if (stats) {
      stats->steps = chain.steps;
      stats->burn_in = chain.burn_in;
      stats->acceptance_rate = chain.acceptance_rate;
      stats->seed = chain.seed;
      stats->effective_samples = chain.effective_sample_estimate;
      stats->proposal_scale = chain.proposal_scale;
    }
  });
}

sympf_status sympf_verify(const char* suite, long long steps,
                          unsigned long long seed, int threads, char** table) {
  bool all_passed = false;
  const sympf_status st = guarded([&] {
    require(suite != nullptr, "null suite name");
    const std::string name = suite;
    sympf::VerifySuiteResult result;
    if (name == "theorem1") {
      result = sympf::verify_theorem1(threads);
    } else if (name == "theorem2") {
      result = sympf::verify_theorem2();
    } else if (name == "identities") {
      result = sympf::verify_identities(seed, threads);
    } else if (name == "mcmc") {
      result = sympf::verify_mcmc(steps, seed);
    } else {
      sympf::fail(sympf::errc::invalid,
                  "unknown suite '" + name +
                      "' (expected theorem1, theorem2, identities, mcmc)");
    }
    all_passed = result.all_passed();
    if (table) {
      const std::string text = sympf::format_table(result);
      *table = new char[text.size() + 1];
      std::memcpy(*table, text.c_str(), text.size() + 1);
    }
  });
  if (st != SYMPF_OK) return st;
  if (!all_passed) {
    g_last_error = "verification suite reported failing checks";
    return SYMPF_VERIFY_FAILED;
  }
  return SYMPF_OK;
}

sympf_status sympf_hermitean_sweep(const char* family, int n_eigen, int nu,
                                   const double* params, int n_params,
                                   double* sup_deviation, double* rel_to_peak,
                                   int* monotone, double* final_rel) {
  return guarded([&] {
    require(family != nullptr && params != nullptr && n_params > 0,
            "need a family and a parameter sequence");
    sympf::weight_family fam;
    const std::string name = family;
    if (name == "gse") {
      fam = sympf::weight_family::gse;
    } else if (name == "chgse") {
      fam = sympf::weight_family::chgse;
    } else {
      sympf::fail(sympf::errc::invalid,
                  "unknown family '" + name + "' (expected gse or chgse)");
    }
    const auto report = sympf::hermitean_limit_sweep(
        fam, n_eigen, nu, std::vector<double>(params, params + n_params));
    for (int i = 0; i < n_params; ++i) {
      if (sup_deviation) sup_deviation[i] = report.rows[i].sup_deviation;
      if (rel_to_peak) rel_to_peak[i] = report.rows[i].rel_to_peak;
    }
    if (monotone) *monotone = report.monotone ? 1 : 0;
    if (final_rel) *final_rel = report.final_rel_deviation;
  });
}

}  // extern "C"
