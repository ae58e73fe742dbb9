#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "sympf/sympf.h"

namespace {

// RAII wrappers so failed CHECKs cannot leak handles.
struct Weight {
  sympf_weight* p = nullptr;
  ~Weight() { sympf_weight_free(p); }
};
struct Basis {
  sympf_basis* p = nullptr;
  ~Basis() { sympf_basis_free(p); }
};

double gse_half_weight(void*, double x, double y) {
  // Elliptic Gaussian at N = 1, tau = 0.5, spelled out independently.
  const double pref = 1.0 / (2.0 * std::sqrt(M_PI) * std::pow(0.5, 1.5));
  return pref * std::exp(-y * y / 0.5) * std::exp(-x * x / 1.5);
}

}  // namespace

TEST_CASE("version and error reporting") {
  const char* v = sympf_version();
  REQUIRE(v != nullptr);
  CHECK(std::string(v).find('.') != std::string::npos);

  Weight w;
  CHECK(sympf_weight_gse(1, 1.5, &w.p) == SYMPF_INVALID);
  CHECK(w.p == nullptr);
  CHECK(std::string(sympf_last_error()).find("tau") != std::string::npos);

  CHECK(sympf_weight_gse(1, 0.5, nullptr) == SYMPF_INVALID);
}

TEST_CASE("weight handles expose their decay scales") {
  Weight w;
  REQUIRE(sympf_weight_gse(1, 0.5, &w.p) == SYMPF_OK);
  double sx = 0, sy = 0;
  REQUIRE(sympf_weight_scales(w.p, &sx, &sy) == SYMPF_OK);
  CHECK(sx == doctest::Approx(0.8660254037844386).epsilon(1e-15));
  CHECK(sy == doctest::Approx(0.5).epsilon(1e-15));

  Weight c;
  REQUIRE(sympf_weight_chgse(2, 0.5, 1, &c.p) == SYMPF_OK);
  REQUIRE(sympf_weight_scales(c.p, &sx, &sy) == SYMPF_OK);
  CHECK(sx == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sy == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("basis accessors") {
  Basis b;
  REQUIRE(sympf_basis_gse(1, 0.5, 2, &b.p) == SYMPF_OK);
  int pairs = 0;
  REQUIRE(sympf_basis_pairs(b.p, &pairs) == SYMPF_OK);
  CHECK(pairs == 2);

  double r0 = 0;
  REQUIRE(sympf_basis_norm(b.p, 0, &r0) == SYMPF_OK);
  CHECK(r0 == doctest::Approx(2.1708037636748028).epsilon(1e-14));
  CHECK(sympf_basis_norm(b.p, 2, &r0) == SYMPF_INVALID);

  double coeffs[8];
  int len = 0;
  REQUIRE(sympf_basis_coefficients(b.p, 2, coeffs, 8, &len) == SYMPF_OK);
  REQUIRE(len == 3);
  CHECK(coeffs[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(coeffs[1] == doctest::Approx(0.0));
  CHECK(coeffs[2] == doctest::Approx(1.0));
  CHECK(sympf_basis_coefficients(b.p, 2, coeffs, 2, &len) == SYMPF_INVALID);
  CHECK(sympf_basis_coefficients(b.p, 4, coeffs, 8, &len) == SYMPF_INVALID);
}

TEST_CASE("kernel and skew residual through the C interface") {
  Basis b;
  REQUIRE(sympf_basis_gse(1, 0.5, 2, &b.p) == SYMPF_OK);
  double re = 0, im = 0;
  REQUIRE(sympf_prekernel(b.p, 1, 0.3, 0.2, -0.1, 0.4, &re, &im) == SYMPF_OK);
  double r0 = 0;
  sympf_basis_norm(b.p, 0, &r0);
  CHECK(re == doctest::Approx(0.4 / r0).epsilon(1e-14));
  CHECK(im == doctest::Approx(-0.2 / r0).epsilon(1e-14));

  Weight w;
  REQUIRE(sympf_weight_gse(1, 0.5, &w.p) == SYMPF_OK);
  double residual = 1.0;
  REQUIRE(sympf_skew_residual(b.p, w.p, 0, &residual) == SYMPF_OK);
  CHECK(residual < 1e-9);
}

TEST_CASE("observables: expectation, partition, correlators") {
  Basis b1;
  REQUIRE(sympf_basis_gse(1, 0.5, 3, &b1.p) == SYMPF_OK);
  const double mass[2] = {0.37, 0.21};
  double re = 0, im = 0;
  REQUIRE(sympf_char_expectation(b1.p, 1, mass, 1, &re, &im) == SYMPF_OK);
  CHECK(re == doctest::Approx(1.5928).epsilon(1e-13));
  CHECK(im == doctest::Approx(0.1554).epsilon(1e-13));

  Basis b2;
  REQUIRE(sympf_basis_gse(2, 0.5, 4, &b2.p) == SYMPF_OK);
  const double pair[4] = {0.3, 0.1, 0.3, -0.1};
  REQUIRE(sympf_partition(b2.p, 2, pair, 2, &re, &im) == SYMPF_OK);
  CHECK(re == doctest::Approx(46.27187514997776).epsilon(1e-12));

  Weight w1;
  REQUIRE(sympf_weight_gse(1, 0.5, &w1.p) == SYMPF_OK);
  const double pt[2] = {0.2, 0.5};
  sympf_correlator_diag diag;
  REQUIRE(sympf_correlation(b1.p, w1.p, 1, 1, pt, nullptr, 0, &re, &im,
                            &diag) == SYMPF_OK);
  CHECK(re == doctest::Approx(0.21706563270934154).epsilon(1e-13));
  CHECK(diag.r_index == 1);
  CHECK(diag.odd_m == 0);
  CHECK(diag.cancellation_numerator >= 1.0);

  // Coincident masses are a validation error, mapped to the invalid code.
  const double bad[4] = {0.3, 0.0, 0.3, 0.0};
  CHECK(sympf_correlation(b1.p, w1.p, 1, 1, pt, bad, 2, &re, &im, nullptr) ==
        SYMPF_INVALID);

  Basis proj;
  REQUIRE(sympf_basis_gse(1, 1.0, 2, &proj.p) == SYMPF_OK);
  const double x = 0.4;
  double val = 0;
  REQUIRE(sympf_projected_correlation(proj.p, w1.p, 1, 1, &x, nullptr, 0,
                                      &val) == SYMPF_OK);
  CHECK(val == doctest::Approx(0.3682701403033233).epsilon(1e-13));
}

TEST_CASE("custom weights drive the numerical basis construction") {
  Weight w;
  REQUIRE(sympf_weight_custom(gse_half_weight, nullptr, 0, 0,
                              0.8660254037844386, 0.5, &w.p) == SYMPF_OK);
  Basis b;
  double cond = 0.0;
  REQUIRE(sympf_basis_general(w.p, 2, 0, 0.0, &cond, &b.p) == SYMPF_OK);
  CHECK(cond > 0.0);
  double r0 = 0, r1 = 0;
  REQUIRE(sympf_basis_norm(b.p, 0, &r0) == SYMPF_OK);
  REQUIRE(sympf_basis_norm(b.p, 1, &r1) == SYMPF_OK);
  CHECK(r0 == doctest::Approx(2.1708037636748028).epsilon(1e-7));
  CHECK(r1 == doctest::Approx(13.024822582048817).epsilon(1e-7));
}

TEST_CASE("basis JSON round trip through the C interface") {
  Basis b;
  REQUIRE(sympf_basis_chgse(2, 0.5, 1, 3, &b.p) == SYMPF_OK);
  char* text = nullptr;
  REQUIRE(sympf_basis_to_json(b.p, &text) == SYMPF_OK);
  REQUIRE(text != nullptr);

  Basis back;
  REQUIRE(sympf_basis_from_json(text, &back.p) == SYMPF_OK);
  sympf_string_free(text);
  double a = 0, c = 0;
  sympf_basis_norm(b.p, 1, &a);
  sympf_basis_norm(back.p, 1, &c);
  CHECK(a == doctest::Approx(c).epsilon(1e-15));

  Basis bad;
  CHECK(sympf_basis_from_json("{]", &bad.p) == SYMPF_INVALID);
  CHECK(bad.p == nullptr);
}

TEST_CASE("direct quadrature oracle through the C interface") {
  Weight w;
  REQUIRE(sympf_weight_gse(1, 0.5, &w.p) == SYMPF_OK);
  double re = 0, im = 0;
  REQUIRE(sympf_brute_partition(w.p, 1, nullptr, 0, 120, 1, 0, 0, 0, 0, 0, 0,
                                &re, &im) == SYMPF_OK);
  CHECK(re == doctest::Approx(2.1708037636748028).epsilon(1e-6));
  CHECK(std::abs(im) < 1e-12);
}

TEST_CASE("Metropolis sampling through the C interface") {
  Weight w;
  REQUIRE(sympf_weight_gse(2, 0.5, &w.p) == SYMPF_OK);

  struct Sink {
    std::vector<double> rows;
    static void cb(void* ctx, const double* pts, int n) {
      auto* s = static_cast<Sink*>(ctx);
      s->rows.insert(s->rows.end(), pts, pts + 2 * n);
    }
  };
  Sink s1, s2;
  sympf_chain_stats st1{}, st2{};
  REQUIRE(sympf_sample(w.p, 2, 60, 200, 11, 1, nullptr, 0, Sink::cb, &s1,
                       &st1) == SYMPF_OK);
  REQUIRE(sympf_sample(w.p, 2, 60, 200, 11, 1, nullptr, 0, Sink::cb, &s2,
                       &st2) == SYMPF_OK);
  REQUIRE(s1.rows.size() == 240);
  CHECK(s1.rows == s2.rows);
  CHECK(st1.steps == 60);
  CHECK(st1.seed == 11);
  CHECK(st1.acceptance_rate > 0.05);
  CHECK(st1.acceptance_rate < 0.7);

  CHECK(sympf_sample(w.p, 9, 60, 200, 11, 1, nullptr, 0, Sink::cb, &s1,
                     &st1) == SYMPF_INVALID);
}

TEST_CASE("Hermitean-limit sweep through the C interface") {
  const double params[2] = {0.9, 0.99};
  double sup[2], rel[2];
  int monotone = 0;
  double final_rel = 0;
  REQUIRE(sympf_hermitean_sweep("gse", 1, 0, params, 2, sup, rel, &monotone,
                                &final_rel) == SYMPF_OK);
  CHECK(sup[0] == doctest::Approx(0.010363863).epsilon(1e-6));
  CHECK(rel[1] == doctest::Approx(0.00250941423).epsilon(1e-6));
  CHECK(monotone == 1);
  CHECK(final_rel == doctest::Approx(rel[1]));

  CHECK(sympf_hermitean_sweep("bogus", 1, 0, params, 2, sup, rel, &monotone,
                              &final_rel) == SYMPF_INVALID);
}
