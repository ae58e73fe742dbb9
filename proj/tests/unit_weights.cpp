#include <doctest.h>

#include <cmath>

#include "sympf/weights.hpp"

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

TEST_CASE("elliptic Gaussian weight values and decay scales") {
  const WeightSpec w = gse_weight(1, 0.5);
  CHECK(w.value(0.3, 0.2) == doctest::Approx(0.6936475138315301).epsilon(1e-14));
  CHECK(w.sigma_x == doctest::Approx(0.8660254037844386).epsilon(1e-15));
  CHECK(w.sigma_y == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w.value(0.3, -0.2) == doctest::Approx(w.value(0.3, 0.2)));
  CHECK(std::exp(w.log_value(0.3, 0.2)) ==
        doctest::Approx(w.value(0.3, 0.2)).epsilon(1e-13));

  const WeightSpec strong = gse_weight(2, 0.9);
  CHECK(strong.value(-0.4, 0.1) ==
        doctest::Approx(17.45568239313479).epsilon(1e-13));
}

TEST_CASE("chiral weight values, mu = 1 normalization, evenness") {
  const WeightSpec w = chgse_weight(1, 0.5, 0);
  CHECK(w.chiral);
  CHECK(w.value(0.3, 0.2) == doctest::Approx(0.3011753598404773).epsilon(1e-13));
  CHECK(w.sigma_x == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(w.sigma_y == doctest::Approx(0.35355339059327373).epsilon(1e-15));
  CHECK(w.value(0.3, -0.2) == doctest::Approx(w.value(0.3, 0.2)));

  const WeightSpec topo = chgse_weight(2, 0.5, 1);
  CHECK(topo.value(0.4, 0.1) ==
        doctest::Approx(0.1208413165292467).epsilon(1e-13));

  // At mu = 1 the diverging normalization factor is dropped; the value
  // stays finite and matches the companion norms' convention.
  const WeightSpec iso = chgse_weight(1, 1.0, 0);
  CHECK(iso.value(0.5, 0.3) ==
        doctest::Approx(0.0681134655557951).epsilon(1e-13));

  // The Bessel factor is evaluated in log scale, so the tails stay finite
  // far beyond where a naive exp(...) * K_nu(...) would overflow.
  CHECK(std::isfinite(w.log_value(4.0, 0.1)));
  CHECK(std::exp(w.log_value(0.7, 0.3)) ==
        doctest::Approx(w.value(0.7, 0.3)).epsilon(1e-12));
}

TEST_CASE("weight parameter domains are validated") {
  CHECK(thrown_code([] { gse_weight(0, 0.5); }) == errc::invalid);
  CHECK(thrown_code([] { gse_weight(1, 1.5); }) == errc::invalid);
  CHECK(thrown_code([] { gse_weight(1, -0.1); }) == errc::invalid);
  CHECK(thrown_code([] { chgse_weight(1, 0.0, 0); }) == errc::invalid);
  CHECK(thrown_code([] { chgse_weight(1, 1.2, 0); }) == errc::invalid);
  CHECK(thrown_code([] { chgse_weight(1, 0.5, -1); }) == errc::invalid);
  CHECK(thrown_code([] {
          custom_weight(nullptr, 1.0, 1.0, false);
        }) == errc::invalid);
  CHECK(thrown_code([] {
          custom_weight([](double, double) { return 1.0; }, -1.0, 1.0, false);
        }) == errc::invalid);
}

TEST_CASE("Hermitean-limit projections") {
  const RealWeightSpec gbar = projected_weight(gse_weight(2, 0.7));
  CHECK_FALSE(gbar.chiral);
  CHECK(gbar.sigma == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(gbar.value(0.7) == doctest::Approx(std::exp(-0.49)).epsilon(1e-14));

  const RealWeightSpec cbar = projected_weight(chgse_weight(1, 0.5, 0));
  CHECK(cbar.chiral);
  CHECK(cbar.sigma == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cbar.value(0.7) ==
        doctest::Approx(0.42883847592909125).epsilon(1e-14));
  // Even extension: densities built from it normalize over the full line.
  CHECK(cbar.value(-0.7) == doctest::Approx(cbar.value(0.7)));

  const WeightSpec custom =
      custom_weight([](double, double) { return 1.0; }, 1.0, 1.0, false);
  CHECK(thrown_code([&] { projected_weight(custom); }) == errc::invalid);
}

TEST_CASE("grids match the weight's decay and family defaults") {
  const WeightSpec g = gse_weight(1, 0.5);
  const QuadratureGrid gg = build_grid(g);
  gg.validate();
  CHECK(gg.nodes_x.size() == 160);
  CHECK(gg.nodes_y.size() == 160);
  CHECK(gg.x_max >= 8.0 * g.sigma_x);
  CHECK(gg.y_max >= 8.0 * g.sigma_y);

  const WeightSpec c = chgse_weight(1, 0.5, 0);
  const QuadratureGrid cg = build_grid(c);
  cg.validate();
  CHECK(cg.nodes_x.size() == 320);
  // Graded axes are symmetric about the origin.
  CHECK(cg.nodes_x.front() ==
        doctest::Approx(-cg.nodes_x.back()).epsilon(1e-15));

  const QuadratureGrid custom_count = build_grid(g, 96);
  CHECK(custom_count.nodes_x.size() == 96);
}

TEST_CASE("real-line grids for the projected weights") {
  const LineGrid full = build_line_grid(projected_weight(gse_weight(1, 0.5)));
  CHECK(full.nodes.size() == 240);
  CHECK(full.nodes.front() < 0.0);
  CHECK(full.nodes.back() > 0.0);

  const LineGrid half =
      build_line_grid(projected_weight(chgse_weight(1, 0.5, 1)));
  CHECK(half.nodes.size() == 240);
  for (double x : half.nodes) CHECK(x >= 0.0);
}
