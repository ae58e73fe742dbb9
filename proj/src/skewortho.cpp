#include "sympf/skewortho.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <json.hpp>

namespace sympf {

namespace {

constexpr double kPi = 3.14159265358979323846;

double fact(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// (n)!! for odd n, with (-1)!! = 1.
double dfact_odd(int n) {
  double r = 1.0;
  for (int i = n; i > 1; i -= 2) r *= i;
  return r;
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void force_monic(poly& c) {
  const double lead = c.back();
  if (!(std::abs(lead - 1.0) < 1e-9))
    fail(errc::numeric, "closed-form polynomial is not monic");
  for (double& v : c) v /= lead;
}

poly gse_even_poly(int N, double tau, int k) {
  poly c(2 * k + 1, 0.0);
  const double pref = std::pow(2.0 / N, k) * fact(k);
  for (int j = 0; j <= k; ++j) {
    const double dd = dfact_odd(2 * j - 1);
    for (int m = 0; m <= j; ++m) {
      c[2 * j - 2 * m] += pref * ((m % 2) ? -1.0 : 1.0) * dd /
                          (fact(m) * fact(2 * j - 2 * m)) *
                          std::pow(tau / 2.0, m) * std::pow(N, j - m);
    }
  }
  force_monic(c);
  return c;
}

poly gse_odd_poly(int N, double tau, int k) {
  poly c(2 * k + 2, 0.0);
  for (int m = 0; m <= k; ++m) {
    c[2 * k + 1 - 2 * m] = ((m % 2) ? -1.0 : 1.0) * fact(2 * k + 1) /
                           (fact(m) * fact(2 * k + 1 - 2 * m)) *
                           std::pow(tau / (2.0 * N), m);
  }
  force_monic(c);
  return c;
}

poly chgse_even_poly(int N, double mu, int nu, int k) {
  const double mu2 = mu * mu;
  poly c(2 * k + 1, 0.0);
  const double pref =
      fact(k) * fact(k + nu) * std::pow(2.0 * (1.0 + mu2) / N, 2 * k);
  for (int i = 0; i <= 2 * k; ++i) {
    double s = 0.0;
    for (int j = (i + 1) / 2; j <= k; ++j) {
      s += fact(2 * j) / (std::pow(4.0, j) * fact(j) * fact(j + nu)) *
           binom(2 * j + 2 * nu, 2 * j - i) * std::pow(1.0 - mu2, 2 * j - i) /
           std::pow(1.0 + mu2, 2 * j);
    }
    c[i] = pref * ((i % 2) ? -1.0 : 1.0) * std::pow(N, i) / fact(i) * s;
  }
  force_monic(c);
  return c;
}

poly chgse_odd_poly(int N, double mu, int nu, int k) {
  const double beta = (1.0 - mu * mu) / N;
  poly c(2 * k + 2, 0.0);
  for (int i = 0; i <= 2 * k + 1; ++i) {
    c[i] = ((i % 2) ? 1.0 : -1.0) * fact(2 * k + 1) *
           binom(2 * k + 1 + 2 * nu, 2 * k + 1 - i) / fact(i) *
           std::pow(beta, 2 * k + 1 - i);
  }
  force_monic(c);
  return c;
}

void check_pair_count(int R) {
  if (R < 1) fail(errc::invalid, "basis needs at least one pair");
  if (R > kMaxPairs) {
    std::ostringstream msg;
    msg << "requested " << R << " pairs exceeds the degree cap of " << kMaxPairs
        << " (double precision conditioning)";
    fail(errc::invalid, msg.str());
  }
}

}  // namespace

const poly& SkewBasis::q(int k) const {
  if (k < 0 || k >= static_cast<int>(polys.size())) {
    std::ostringstream msg;
    msg << "basis holds q_0..q_" << polys.size() - 1 << " but q_" << k
        << " was requested; construct the basis with more pairs";
    fail(errc::invalid, msg.str());
  }
  return polys[static_cast<std::size_t>(k)];
}

void SkewBasis::validate() const {
  if (polys.size() != 2 * norms.size())
    fail(errc::invalid, "basis must hold two polynomials per norm");
  for (std::size_t k = 0; k < polys.size(); ++k) {
    if (polys[k].size() != k + 1)
      fail(errc::invalid, "basis polynomial has the wrong degree");
    if (std::abs(polys[k].back() - 1.0) > 1e-12)
      fail(errc::invalid, "basis polynomial is not monic");
  }
  for (double r : norms)
    if (!(std::abs(r) > 0.0) || !std::isfinite(r))
      fail(errc::singular, "basis norm vanishes or is not finite");
}

SkewBasis gse_skew_basis(int N, double tau, int R) {
  if (N < 1) fail(errc::invalid, "gse_skew_basis: N must be a positive integer");
  if (!(tau >= 0.0 && tau <= 1.0))
    fail(errc::invalid, "gse_skew_basis: tau must lie in [0, 1]");
  check_pair_count(R);
  SkewBasis b;
  b.chiral = false;
  b.nu = 0;
  b.source = basis_source::closed_form;
  for (int k = 0; k < R; ++k) {
    b.polys.push_back(gse_even_poly(N, tau, k));
    b.polys.push_back(gse_odd_poly(N, tau, k));
    b.norms.push_back(std::sqrt(kPi) * std::sqrt(1.0 + tau) * fact(2 * k + 1) /
                      std::pow(N, 2 * k + 0.5));
  }
  b.validate();
  return b;
}

SkewBasis chgse_skew_basis(int N, double mu, int nu, int R) {
  if (N < 1) fail(errc::invalid, "chgse_skew_basis: N must be a positive integer");
  if (!(mu >= 0.0 && mu <= 1.0))
    fail(errc::invalid, "chgse_skew_basis: mu must lie in [0, 1]");
  if (nu < 0) fail(errc::invalid, "chgse_skew_basis: nu must be non-negative");
  check_pair_count(R);
  const double mu2 = mu * mu;
  SkewBasis b;
  b.chiral = true;
  b.nu = nu;
  b.source = basis_source::closed_form;
  for (int k = 0; k < R; ++k) {
    b.polys.push_back(chgse_even_poly(N, mu, nu, k));
    b.polys.push_back(chgse_odd_poly(N, mu, nu, k));
    double rk = 4.0 * fact(2 * k + 1) * fact(2 * k + 2 * nu + 1) *
                std::pow(1.0 + mu2, 4 * k + 2 * nu) /
                std::pow(N, 4 * k + 2 * nu + 2);
    if (mu < 1.0) {
      rk *= std::pow(1.0 - mu2, 1.5);
    } else {
      // The weight drops its whole (N(1-mu^2)/mu^2)^{3/2} normalization at
      // mu = 1; dividing the norm by the same factor keeps every ratio of
      // the theory unchanged.
      rk /= std::pow(N, 1.5);
    }
    b.norms.push_back(rk);
  }
  b.validate();
  return b;
}

double skew_product(const poly& f, const poly& g, const WeightSpec& w,
                    const QuadratureGrid& grid) {
  grid.validate();
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < grid.nodes_x.size(); ++i) {
    const double x = grid.nodes_x[i];
    for (std::size_t j = 0; j < grid.nodes_y.size(); ++j) {
      const double y = grid.nodes_y[j];
      const cd z(x, y);
      const cd arg = w.chiral ? z * z : z;
      const cd fv = poly_eval(f, arg);
      const cd gv = poly_eval(g, arg);
      const double jac = w.chiral ? 8.0 * x * y : 4.0 * y;
      const double v = grid.weights_x[i] * grid.weights_y[j] * w.value(x, y) *
                       jac * std::imag(fv * std::conj(gv));
      const double t = v - comp;
      const double u = sum + t;
      comp = (u - sum) - t;
      sum = u;
    }
  }
  if (!std::isfinite(sum))
    fail(errc::numeric, "skew product quadrature produced a non-finite value");
  return sum;
}

double skew_product(const std::vector<cd>& f, const std::vector<cd>& g,
                    const WeightSpec& w, const QuadratureGrid& grid) {
  return skew_product(poly_from_complex(f), poly_from_complex(g), w, grid);
}

SkewProductMatrix monomial_W(const WeightSpec& w, int size,
                             const QuadratureGrid& grid, double scale) {
  if (size < 2 || size % 2 != 0)
    fail(errc::invalid, "monomial_W: size must be a positive even integer");
  if (size > 2 * kMaxPairs)
    fail(errc::invalid, "monomial_W: size exceeds the degree cap");
  if (!(scale > 0.0)) fail(errc::invalid, "monomial_W: scale must be positive");
  grid.validate();

  SkewProductMatrix out;
  out.scale = scale;
  out.chiral = w.chiral;
  out.nu = w.nu;
  out.W = Eigen::MatrixXd::Zero(size, size);
  Eigen::MatrixXd compensation = Eigen::MatrixXd::Zero(size, size);
  std::vector<cd> powers(static_cast<std::size_t>(size));

  for (std::size_t i = 0; i < grid.nodes_x.size(); ++i) {
    const double x = grid.nodes_x[i];
    for (std::size_t j = 0; j < grid.nodes_y.size(); ++j) {
      const double y = grid.nodes_y[j];
      const cd z(x, y);
      const cd t = (w.chiral ? z * z : z) / scale;
      powers[0] = 1.0;
      for (int m = 1; m < size; ++m) powers[m] = powers[m - 1] * t;
      const double jac = w.chiral ? 8.0 * x * y : 4.0 * y;
      const double base =
          grid.weights_x[i] * grid.weights_y[j] * w.value(x, y) * jac;
      for (int m = 0; m < size; ++m) {
        for (int n = m + 1; n < size; ++n) {
          const double v = base * std::imag(powers[m] * std::conj(powers[n]));
          const double ty = v - compensation(m, n);
          const double tu = out.W(m, n) + ty;
          compensation(m, n) = (tu - out.W(m, n)) - ty;
          out.W(m, n) = tu;
        }
      }
    }
  }
  for (int m = 0; m < size; ++m)
    for (int n = m + 1; n < size; ++n) out.W(n, m) = -out.W(m, n);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.W);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  out.condition_estimate = smin > 0.0 ? smax / smin
                                      : std::numeric_limits<double>::infinity();
  if (!(out.condition_estimate < 1e12)) {
    std::ostringstream msg;
    msg << "monomial skew-product matrix is ill-conditioned (estimate "
        << out.condition_estimate
        << "); rescale variables (pass scale = the weight's x-scale) or reduce "
           "the size";
    fail(errc::numeric, msg.str());
  }
  out.W_inverse = out.W.fullPivLu().inverse();
  return out;
}

SkewBasis general_skew_basis(const SkewProductMatrix& wm) {
  const int dim = static_cast<int>(wm.W.rows());
  const int npairs = dim / 2;
  const double wscale = wm.W.cwiseAbs().maxCoeff();

  // Skew Gram-Schmidt in the scaled variable: start each q_n from the
  // monomial e_n and cancel its products with all completed pairs. The
  // odd polynomial never receives a q_{2k} component (gauge c = 0).
  std::vector<Eigen::VectorXd> Q;
  std::vector<double> norms;
  for (int n = 0; n < 2 * npairs; ++n) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    c(n) = 1.0;
    for (int l = 0; l < n / 2; ++l) {
      const double a_c = c.dot(wm.W * Q[2 * l]);
      const double b_c = c.dot(wm.W * Q[2 * l + 1]);
      c -= (a_c / norms[l]) * Q[2 * l + 1];
      c += (b_c / norms[l]) * Q[2 * l];
    }
    if (n % 2 == 1) {
      const double rk = c.dot(wm.W * Q[n - 1]);
      if (!(std::abs(rk) > 1e-10 * wscale))
        fail(errc::singular,
             "degenerate weight: a skew-orthogonal norm vanishes during "
             "construction");
      norms.push_back(rk);
    }
    Q.push_back(c);
  }

  // Map back to the original variable: q(z) = s^n q_scaled(z/s) so
  // coefficient i picks up s^{n-i}, and r_k = <q_{2k+1}, q_{2k}> picks up
  // s^{4k+1}.
  SkewBasis b;
  b.chiral = wm.chiral;
  b.nu = wm.nu;
  b.source = basis_source::w_matrix;
  for (int n = 0; n < 2 * npairs; ++n) {
    poly c(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
      c[i] = Q[n](i) * std::pow(wm.scale, n - i);
    b.polys.push_back(std::move(c));
  }
  for (int k = 0; k < npairs; ++k)
    b.norms.push_back(norms[k] * std::pow(wm.scale, 4 * k + 1));
  b.validate();
  return b;
}

cd prekernel(const SkewBasis& basis, int R, cd z, cd v) {
  if (R < 0 || R > basis.pairs())
    fail(errc::invalid, "prekernel: order exceeds the basis pair count");
  if (basis.chiral) {
    z *= z;
    v *= v;
  }
  cd s = 0.0;
  for (int k = 0; k < R; ++k) {
    s += (poly_eval(basis.polys[2 * k + 1], z) * poly_eval(basis.polys[2 * k], v) -
          poly_eval(basis.polys[2 * k + 1], v) * poly_eval(basis.polys[2 * k], z)) /
         basis.norms[k];
  }
  return s;
}

cd kernel_via_W(const SkewProductMatrix& wm, cd z, cd v) {
  const int dim = static_cast<int>(wm.W.rows());
  if (wm.chiral) {
    z *= z;
    v *= v;
  }
  Eigen::VectorXcd zp(dim), vp(dim);
  zp(0) = 1.0;
  vp(0) = 1.0;
  for (int m = 1; m < dim; ++m) {
    zp(m) = zp(m - 1) * (z / wm.scale);
    vp(m) = vp(m - 1) * (v / wm.scale);
  }
  // Plain bilinear sum_{m,n} z^m (W^{-1})_{n,m} v^n, no conjugation.
  cd acc = 0.0;
  for (int m = 0; m < dim; ++m) {
    cd row = 0.0;
    for (int n = 0; n < dim; ++n) row += wm.W_inverse(n, m) * vp(n);
    acc += zp(m) * row;
  }
  return acc;
}

KernelDerivatives kernel_derivatives(const SkewBasis& basis, int R, double x,
                                     double t) {
  if (R < 0 || R > basis.pairs())
    fail(errc::invalid, "kernel_derivatives: order exceeds the basis pair count");
  KernelDerivatives out;
  for (int j = 0; j < R; ++j) {
    const poly& qo = basis.polys[2 * j + 1];
    const poly& qe = basis.polys[2 * j];
    const poly qod = poly_derivative(qo);
    const poly qed = poly_derivative(qe);
    double qox, qex, qot, qet, qodx, qedx, qodt, qedt;
    if (basis.chiral) {
      const double X = x * x, T = t * t;
      qox = poly_eval(qo, X);
      qex = poly_eval(qe, X);
      qot = poly_eval(qo, T);
      qet = poly_eval(qe, T);
      qodx = 2.0 * x * poly_eval(qod, X);
      qedx = 2.0 * x * poly_eval(qed, X);
      qodt = 2.0 * t * poly_eval(qod, T);
      qedt = 2.0 * t * poly_eval(qed, T);
    } else {
      qox = poly_eval(qo, x);
      qex = poly_eval(qe, x);
      qot = poly_eval(qo, t);
      qet = poly_eval(qe, t);
      qodx = poly_eval(qod, x);
      qedx = poly_eval(qed, x);
      qodt = poly_eval(qod, t);
      qedt = poly_eval(qed, t);
    }
    const double r = basis.norms[j];
    out.kappa += (qox * qet - qot * qex) / r;
    out.dx += (qodx * qet - qot * qedx) / r;
    out.dt += (qox * qedt - qodt * qex) / r;
    out.dxdt += (qodx * qedt - qodt * qedx) / r;
  }
  return out;
}

std::string skew_basis_to_json(const SkewBasis& basis) {
  nlohmann::json j;
  j["chiral"] = basis.chiral;
  j["nu"] = basis.nu;
  auto norms = nlohmann::json::array();
  for (double r : basis.norms) norms.push_back({r, 0.0});
  j["norms"] = std::move(norms);
  auto polys = nlohmann::json::array();
  for (const poly& p : basis.polys) {
    auto coeffs = nlohmann::json::array();
    for (double c : p) coeffs.push_back({c, 0.0});
    polys.push_back(std::move(coeffs));
  }
  j["polys"] = std::move(polys);
  return j.dump(2);
}

SkewBasis skew_basis_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid, std::string("basis JSON parse failure: ") + e.what());
  }
  SkewBasis b;
  try {
    b.chiral = j.at("chiral").get<bool>();
    b.nu = j.at("nu").get<int>();
    for (const auto& pair : j.at("norms")) {
      const double re = pair.at(0).get<double>();
      const double im = pair.at(1).get<double>();
      if (std::abs(im) > 1e-12 * std::max(std::abs(re), 1.0))
        fail(errc::invalid, "basis JSON: norm has a non-negligible imaginary part");
      b.norms.push_back(re);
    }
    for (const auto& parr : j.at("polys")) {
      std::vector<cd> coeffs;
      for (const auto& pair : parr)
        coeffs.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
      b.polys.push_back(poly_from_complex(coeffs));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid, std::string("basis JSON has the wrong shape: ") + e.what());
  }
  b.source = basis_source::w_matrix;
  b.validate();
  return b;
}

}  // namespace sympf
