// Acceptance battery: eight release criteria, one test case each, printing
// a single pass/fail line per criterion. The suites behind criteria 1, 5,
// 6 and 7 dump their full check tables when something fails.
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "sympf/correlators.hpp"
#include "sympf/numerics.hpp"
#include "sympf/oracle.hpp"
#include "sympf/skewortho.hpp"
#include "sympf/verify.hpp"
#include "sympf/weights.hpp"

using namespace sympf;

namespace {

int worker_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(std::min(hw, 4u)) : 1;
}

std::string strf(const char* f, ...) {
  va_list args;
  va_start(args, f);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

void verdict(int idx, bool pass, const std::string& what) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", idx,
              what.c_str());
  std::fflush(stdout);
}

void dump_on_failure(const VerifySuiteResult& r) {
  if (!r.all_passed()) std::fputs(format_table(r).c_str(), stdout);
}

double rel_diff(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Shared by criteria 5 (and, when the whole binary runs unfiltered, reused
// rather than recomputed).
const VerifySuiteResult& identities_suite() {
  static const VerifySuiteResult r = verify_identities(12345, worker_threads());
  return r;
}

double now_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

TEST_CASE("criterion1") {
  // Pfaffian partition functions and one-point correlators equal direct
  // quadrature of the defining 2N-dimensional integrals, both families,
  // N <= 2, M <= 2, complex masses included, relative 1e-5, within 10 min.
  const VerifySuiteResult r = verify_theorem1(worker_threads());
  const bool ok = r.all_passed() && r.seconds < 600.0;
  verdict(1, ok,
          strf("Pfaffian formulas vs direct quadrature, %zu checks in %.0f s "
               "(budget 600 s)",
               r.checks.size(), r.seconds));
  dump_on_failure(r);
  CHECK(r.all_passed());
  CHECK(r.seconds < 600.0);
}

TEST_CASE("criterion2") {
  // Closed-form bases stay skew-orthogonal under numerical skew products:
  // max normalized residual < 1e-6 across the parameter sweep, within 2 min.
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_tag;
  int cases = 0;
  const int pairs = 4;

  auto run = [&](const WeightSpec& w, const SkewBasis& b, std::string tag) {
    const int dmax = 2 * pairs - 1;
    const int degmax = w.chiral ? 4 * dmax + 4 * w.nu + 4 : 2 * dmax + 2;
    const QuadratureGrid grid = build_grid(w, 0, degmax);
    const double res = skew_orthogonality_residual(b, w, grid);
    ++cases;
    if (res > worst) {
      worst = res;
      worst_tag = std::move(tag);
    }
  };

  for (double tau : {0.0, 0.5, 0.9})
    for (int N : {1, 2, 3})
      run(gse_weight(N, tau), gse_skew_basis(N, tau, pairs),
          strf("gse tau=%g N=%d", tau, N));
  for (double mu : {1.0, 0.5, 0.1})
    for (int nu : {0, 1, 2})
      for (int N : {1, 2, 3})
        run(chgse_weight(N, mu, nu), chgse_skew_basis(N, mu, nu, pairs),
            strf("chgse mu=%g nu=%d N=%d", mu, nu, N));

  const double secs = now_seconds(t0);
  const bool ok = worst < 1e-6 && secs < 120.0;
  verdict(2, ok,
          strf("skew-orthogonality residual over %d parameter sets: worst "
               "%.3g at %s (tol 1e-6), %.0f s (budget 120 s)",
               cases, worst, worst_tag.c_str(), secs));
  CHECK(worst < 1e-6);
  CHECK(secs < 120.0);
}

TEST_CASE("criterion3") {
  // Quadrature norms reproduce the closed forms to relative 1e-5 for
  // k <= 3; spot value r_0 = sqrt(pi (1 + tau)) at (N=1, tau=0.5).
  double worst = 0.0;
  const int pairs = 4;
  struct Case {
    WeightSpec w;
    SkewBasis b;
  };
  const Case cases[] = {
      {gse_weight(1, 0.5), gse_skew_basis(1, 0.5, pairs)},
      {chgse_weight(1, 0.5, 1), chgse_skew_basis(1, 0.5, 1, pairs)},
  };
  for (const Case& c : cases) {
    const int dmax = 2 * pairs - 1;
    const int degmax = c.w.chiral ? 4 * dmax + 4 * c.w.nu + 4 : 2 * dmax + 2;
    const QuadratureGrid grid = build_grid(c.w, 0, degmax);
    for (int k = 0; k <= 3; ++k) {
      const double rq = -skew_product(c.b.q(2 * k), c.b.q(2 * k + 1), c.w, grid);
      worst = std::max(worst, rel_diff(rq, c.b.norms[k]));
    }
  }
  const QuadratureGrid g0 = build_grid(gse_weight(1, 0.5), 0, 4);
  const double r0 =
      -skew_product(gse_skew_basis(1, 0.5, 1).q(0),
                    gse_skew_basis(1, 0.5, 1).q(1), gse_weight(1, 0.5), g0);
  const double spot = rel_diff(r0, 2.170803);

  const bool ok = worst < 1e-5 && spot < 1e-5;
  verdict(3, ok,
          strf("norm closed forms k <= 3: worst rel %.3g (tol 1e-5); "
               "r_0 = %.7f vs 2.170803",
               worst, r0));
  CHECK(worst < 1e-5);
  CHECK(spot < 1e-5);
}

TEST_CASE("criterion4") {
  // The kernel from the monomial W-inverse equals the closed-form
  // prekernel at 50 random point pairs per ensemble, relative 1e-9
  // wherever |kappa| > 1e-8.
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  int used_total = 0;
  struct Case {
    WeightSpec w;
    SkewBasis b;
  };
  const Case cases[] = {
      {gse_weight(2, 0.5), gse_skew_basis(2, 0.5, 3)},
      {chgse_weight(2, 0.5, 1), chgse_skew_basis(2, 0.5, 1, 3)},
  };
  for (const Case& c : cases) {
    const int size = 6, dmax = size - 1;
    const int degmax = c.w.chiral ? 4 * dmax + 4 * c.w.nu + 4 : 2 * dmax + 2;
    const QuadratureGrid grid = build_grid(c.w, 0, degmax);
    const SkewProductMatrix wm = monomial_W(c.w, size, grid);
    for (int t = 0; t < 50; ++t) {
      const cd z(4.0 * c.w.sigma_x * u(eng), 4.0 * c.w.sigma_y * u(eng));
      const cd v(4.0 * c.w.sigma_x * u(eng), 4.0 * c.w.sigma_y * u(eng));
      const cd a = prekernel(c.b, 3, z, v);
      if (std::abs(a) <= 1e-8) continue;
      worst = std::max(worst, std::abs(kernel_via_W(wm, z, v) - a) /
                                  std::abs(a));
      ++used_total;
    }
  }
  const bool ok = worst < 1e-9 && used_total > 80;
  verdict(4, ok,
          strf("kernel basis-independence at %d random pairs: worst rel "
               "%.3g (tol 1e-9)",
               used_total, worst));
  CHECK(worst < 1e-9);
  CHECK(used_total > 80);
}

TEST_CASE("criterion5") {
  // One- and two-mass characteristic polynomial identities at N in {1,2},
  // closed form and brute force (relative 1e-5), and the coincident-mass
  // limit Richardson-stable to 1e-5.
  const VerifySuiteResult& r = identities_suite();
  bool ok = true;
  int n = 0;
  double worst = 0.0;
  for (const VerifyCheck& c : r.checks) {
    if (c.name.find("<det") == std::string::npos &&
        c.name.find("coincident-mass") == std::string::npos)
      continue;
    ++n;
    ok = ok && c.passed;
    worst = std::max(worst, c.measured);
  }
  ok = ok && n == 26;
  verdict(5, ok,
          strf("characteristic polynomial identities and coincident-mass "
               "limit: %d checks, worst rel %.3g",
               n, worst));
  dump_on_failure(r);
  CHECK(ok);
}

TEST_CASE("criterion6") {
  // Hermitean limit: monotone sweep convergence with final sup deviation
  // < 1%, projected correlators vs real-line brute force (rel 1e-5), and
  // the quaternion kernel forms (rel 1e-9).
  const VerifySuiteResult r = verify_theorem2();
  verdict(6, r.all_passed(),
          strf("Hermitean-limit sweeps, projected correlators and "
               "quaternion forms, %zu checks in %.0f s",
               r.checks.size(), r.seconds));
  dump_on_failure(r);
  CHECK(r.all_passed());
}

TEST_CASE("criterion7") {
  // Metropolis histograms vs Pfaffian one-point predictions, N in 2..6,
  // both families, 1e6 sweeps: < 1% of well-filled bins beyond 3 sigma,
  // within 15 min.
  const VerifySuiteResult r = verify_mcmc(1000000, 20240901ULL);
  const bool ok = r.all_passed() && r.seconds < 900.0;
  verdict(7, ok,
          strf("Metropolis histograms vs predictions, %zu checks in %.0f s "
               "(budget 900 s)",
               r.checks.size(), r.seconds));
  dump_on_failure(r);
  CHECK(r.all_passed());
  CHECK(r.seconds < 900.0);
}

TEST_CASE("criterion8") {
  // Pfaffian algebra on random matrices, dims 2..12: Pf^2 = det and
  // Pf(BAB^T) = Pf(A) det(B) to relative 1e-9; swapping a row/column pair
  // flips the sign; odd dimensions vanish identically.
  std::mt19937_64 eng(888);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&] { return cd(u(eng), u(eng)); };

  double worst_sq = 0.0, worst_tr = 0.0, worst_swap = 0.0;
  bool odd_ok = true;
  for (int n = 2; n <= 12; ++n) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        a(i, j) = rnd();
        a(j, i) = -a(i, j);
      }
    const cd pf = pfaffian(a).value;
    if (n % 2) {
      odd_ok = odd_ok && pf == cd(0.0);
      continue;
    }
    const cd det = a.determinant();
    worst_sq = std::max(worst_sq, std::abs(pf * pf - det) / std::abs(det));

    Eigen::MatrixXcd b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = rnd();
    const cd tr = pfaffian(Eigen::MatrixXcd(b * a * b.transpose())).value;
    worst_tr = std::max(worst_tr,
                        std::abs(tr - pf * b.determinant()) / std::abs(tr));

    Eigen::MatrixXcd s = a;
    const int i = n / 3, j = n - 1;
    s.row(i).swap(s.row(j));
    s.col(i).swap(s.col(j));
    const cd ps = pfaffian(s).value;
    worst_swap = std::max(worst_swap, std::abs(ps + pf) / std::abs(pf));
  }

  const bool ok =
      worst_sq < 1e-9 && worst_tr < 1e-9 && worst_swap < 1e-12 && odd_ok;
  verdict(8, ok,
          strf("Pfaffian algebra dims 2..12: Pf^2=det %.3g, congruence %.3g "
               "(tol 1e-9), swap sign %.3g, odd dims %s",
               worst_sq, worst_tr, worst_swap,
               odd_ok ? "vanish" : "NONZERO"));
  CHECK(worst_sq < 1e-9);
  CHECK(worst_tr < 1e-9);
  CHECK(worst_swap < 1e-12);
  CHECK(odd_ok);
}
