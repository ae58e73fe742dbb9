#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "sympf/numerics.hpp"

using namespace sympf;

namespace {

template <typename F>
errc thrown_code(F&& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  return static_cast<errc>(0);
}

}  // namespace

TEST_CASE("polynomial evaluation and derivative") {
  const poly p{1.0, 2.0, 3.0};  // 1 + 2x + 3x^2
  CHECK(poly_eval(p, 2.0) == doctest::Approx(17.0));
  const cd z(1.0, 1.0);
  const cd v = poly_eval(p, z);
  CHECK(v.real() == doctest::Approx(3.0));
  CHECK(v.imag() == doctest::Approx(8.0));

  const poly dp = poly_derivative(p);
  REQUIRE(dp.size() == 2);
  CHECK(dp[0] == doctest::Approx(2.0));
  CHECK(dp[1] == doctest::Approx(6.0));
  CHECK(poly_derivative(poly{5.0}).empty());
}

TEST_CASE("complex coefficients narrow only when genuinely real") {
  const std::vector<cd> ok{{1.0, 1e-15}, {2.0, 0.0}};
  const poly p = poly_from_complex(ok);
  CHECK(p[0] == doctest::Approx(1.0));

  const std::vector<cd> bad{{1.0, 1e-3}, {2.0, 0.0}};
  CHECK(thrown_code([&] { poly_from_complex(bad); }) == errc::invalid);
}

TEST_CASE("Gauss-Legendre integrates polynomials to machine precision") {
  std::vector<double> x, w;
  gauss_legendre(0.0, 1.0, 8, x, w);
  REQUIRE(x.size() == 8);
  double len = 0.0, moment5 = 0.0;
  for (int i = 0; i < 8; ++i) {
    CHECK(x[i] > 0.0);
    CHECK(x[i] < 1.0);
    CHECK(w[i] > 0.0);
    if (i) CHECK(x[i] > x[i - 1]);
    len += w[i];
    moment5 += w[i] * std::pow(x[i], 5);
  }
  CHECK(len == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(moment5 == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

  CHECK(thrown_code([] {
          std::vector<double> a, b;
          gauss_legendre(1.0, 1.0, 4, a, b);
        }) == errc::invalid);
}

TEST_CASE("truncation boxes scale with the decay and the degree") {
  CHECK(box_halfwidth(1.0, 0) == doctest::Approx(8.0));
  CHECK(box_halfwidth(2.0, 6) == doctest::Approx(20.0));
  CHECK(box_halfwidth(0.5, 20) > box_halfwidth(0.5, 4));
  CHECK(thrown_code([] { box_halfwidth(-1.0, 4); }) == errc::invalid);
}

TEST_CASE("exponentially graded axis is symmetric and handles |x| kinks") {
  std::vector<double> x, w;
  exp_graded_axis(6.0, 160, x, w);
  REQUIRE(x.size() == 160);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i] == doctest::Approx(-x[x.size() - 1 - i]).epsilon(1e-15));
    CHECK(w[i] == doctest::Approx(w[x.size() - 1 - i]).epsilon(1e-15));
    CHECK(w[i] > 0.0);
    if (i) CHECK(x[i] > x[i - 1]);
  }
  // The rule is built for integrands vanishing at least quadratically at
  // the origin (the axis Jacobians of the weights guarantee that):
  // int x^2 exp(-x^2) = sqrt(pi)/2, and the non-analytic
  // int |x|^3 exp(-x^2) = 1, which a plain polynomial rule would resolve
  // only algebraically.
  double quad = 0.0, kink = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::exp(-x[i] * x[i]);
    quad += w[i] * x[i] * x[i] * g;
    kink += w[i] * std::abs(x[i] * x[i] * x[i]) * g;
  }
  CHECK(quad == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(kink == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Pfaffian conventions: empty, odd, 2x2 and 4x4 closed forms") {
  CHECK(pfaffian(Eigen::MatrixXcd::Zero(0, 0)).value == cd(1.0));
  CHECK(pfaffian(Eigen::MatrixXcd::Zero(4, 4)).value == cd(0.0));

  Eigen::MatrixXcd odd = Eigen::MatrixXcd::Zero(3, 3);
  odd(0, 1) = 2.0;
  odd(1, 0) = -2.0;
  odd(0, 2) = -1.5;
  odd(2, 0) = 1.5;
  CHECK(pfaffian(odd).value == cd(0.0));

  Eigen::MatrixXcd two = Eigen::MatrixXcd::Zero(2, 2);
  two(0, 1) = cd(2.0, 3.0);
  two(1, 0) = -two(0, 1);
  const cd p2 = pfaffian(two).value;
  CHECK(std::abs(p2 - cd(2.0, 3.0)) < 1e-15);

  // Pf of the generic 4x4 with upper entries a..f is af - be + cd.
  Eigen::MatrixXcd four = Eigen::MatrixXcd::Zero(4, 4);
  const double entries[6] = {1, 2, 3, 4, 5, 6};
  int t = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      four(i, j) = entries[t++];
      four(j, i) = -four(i, j);
    }
  CHECK(std::abs(pfaffian(four).value - cd(8.0)) < 1e-12);
}

TEST_CASE("Pfaffian squared equals the determinant") {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {6, 10}) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        a(i, j) = cd(u(eng), u(eng));
        a(j, i) = -a(i, j);
      }
    const pfaffian_result r = pfaffian(a);
    const cd det = a.determinant();
    CHECK(std::abs(r.value * r.value - det) <= 1e-12 * std::abs(det));
    CHECK(r.cancellation >= 1.0);
  }
}

TEST_CASE("Pfaffian input validation") {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
  a(0, 1) = 1.0;
  a(1, 0) = -0.5;  // not antisymmetric
  CHECK(thrown_code([&] { pfaffian(a); }) == errc::invalid);

  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2, 2);
  b(0, 1) = std::numeric_limits<double>::quiet_NaN();
  b(1, 0) = -b(0, 1);
  CHECK(thrown_code([&] { pfaffian(b); }) == errc::numeric);

  CHECK(thrown_code([] { pfaffian(Eigen::MatrixXcd::Zero(2, 3)); }) ==
        errc::invalid);
}

TEST_CASE("tensor quadrature reproduces the Gaussian integral") {
  QuadratureGrid g;
  gauss_legendre(-8.0, 8.0, 80, g.nodes_x, g.weights_x);
  gauss_legendre(-8.0, 8.0, 80, g.nodes_y, g.weights_y);
  g.x_max = 8.0;
  g.y_max = 8.0;
  g.validate();

  const cd v = quad2d(
      [](double x, double y) { return cd(std::exp(-x * x - y * y)); }, g);
  CHECK(v.real() == doctest::Approx(M_PI).epsilon(1e-13));
  CHECK(v.imag() == doctest::Approx(0.0));

  CHECK(thrown_code([&] {
          quad2d([](double, double) {
            return cd(std::numeric_limits<double>::quiet_NaN());
          }, g);
        }) == errc::numeric);
}
