#include "sympf/numerics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sympf {

cd poly_eval(const poly& p, cd z) {
  cd acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double poly_eval(const poly& p, double x) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

poly poly_derivative(const poly& p) {
  if (p.size() <= 1) return {};
  poly d(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
  return d;
}

poly poly_from_complex(const std::vector<cd>& coeffs) {
  double scale = 0.0;
  for (const cd& c : coeffs) scale = std::max(scale, std::abs(c));
  poly out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (std::abs(coeffs[i].imag()) > 1e-12 * std::max(scale, 1.0)) {
      std::ostringstream msg;
      msg << "polynomial coefficient " << i << " has non-negligible imaginary part "
          << coeffs[i].imag();
      fail(errc::invalid, msg.str());
    }
    out[i] = coeffs[i].real();
  }
  return out;
}

void check_antisymmetric(const Eigen::MatrixXcd& a, double tol) {
  if (a.rows() != a.cols()) fail(errc::invalid, "matrix is not square");
  if (a.rows() == 0) return;
  if (!a.allFinite()) fail(errc::numeric, "matrix has non-finite entries");
  const double scale = a.cwiseAbs().maxCoeff();
  const double resid = (a + a.transpose()).cwiseAbs().maxCoeff();
  if (resid > tol * std::max(scale, 1.0)) {
    std::ostringstream msg;
    msg << "matrix is not antisymmetric (symmetrized residual " << resid << ", scale "
        << scale << ")";
    fail(errc::invalid, msg.str());
  }
}

pfaffian_result pfaffian(const Eigen::MatrixXcd& a_in) {
  check_antisymmetric(a_in);
  const Eigen::Index n = a_in.rows();
  pfaffian_result res;
  if (n == 0) {
    res.value = 1.0;
    return res;
  }
  if (n % 2 == 1) {
    res.value = 0.0;
    return res;
  }

  Eigen::MatrixXcd a = a_in;
  cd pf = 1.0;
  double sign = 1.0;
  double running = 1.0;     // product of |pivot| so far
  double max_running = 1.0; // peak of the running product

  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // Partial pivoting: bring the largest |a(i, k)|, i >= k+1, into row k+1.
    Eigen::Index ip = k + 1;
    double best = std::abs(a(ip, k));
    for (Eigen::Index i = k + 2; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        ip = i;
      }
    }
    if (best == 0.0) {
      // Column k decouples entirely: the Pfaffian vanishes.
      res.value = 0.0;
      res.cancellation = 1.0;
      return res;
    }
    if (ip != k + 1) {
      a.row(ip).swap(a.row(k + 1));
      a.col(ip).swap(a.col(k + 1));
      sign = -sign;
    }

    const cd pivot = a(k, k + 1);
    pf *= pivot;
    running *= std::abs(pivot);
    max_running = std::max(max_running, running);

    const Eigen::Index m = n - k - 2;
    if (m > 0) {
      // Congruence with unit elementary matrices (Pfaffian-preserving):
      // zero row/col k beyond k+1, then row/col k+1 beyond k.
      Eigen::RowVectorXcd t = a.row(k).segment(k + 2, m) / pivot;
      a.block(k + 2, 0, m, n).noalias() -= t.transpose() * a.row(k + 1);
      a.block(0, k + 2, n, m).noalias() -= a.col(k + 1) * t;

      Eigen::RowVectorXcd s = a.row(k + 1).segment(k + 2, m) / a(k + 1, k);
      a.block(k + 2, 0, m, n).noalias() -= s.transpose() * a.row(k);
      a.block(0, k + 2, n, m).noalias() -= a.col(k) * s;
    }
  }

  res.value = sign * pf;
  res.cancellation = (running > 0.0) ? max_running / running : 1.0;
  if (!std::isfinite(res.value.real()) || !std::isfinite(res.value.imag()))
    fail(errc::numeric, "pfaffian elimination produced a non-finite value");
  return res;
}

void gauss_legendre(double a, double b, int n, std::vector<double>& x,
                    std::vector<double>& w) {
  if (n < 1) fail(errc::invalid, "gauss_legendre: need at least one node");
  if (!(b > a)) fail(errc::invalid, "gauss_legendre: interval is empty");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  const double xm = 0.5 * (b + a);
  const double xl = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    // Chebyshev initial guess, then Newton on the Legendre recurrence.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0.0, dp = 0.0;
    for (int iter = 0;; ++iter) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
      if (iter > 100) fail(errc::numeric, "gauss_legendre: Newton iteration stalled");
    }
    x[i] = xm - xl * z;
    x[n - 1 - i] = xm + xl * z;
    w[i] = 2.0 * xl / ((1.0 - z * z) * dp * dp);
    w[n - 1 - i] = w[i];
  }
}

double box_halfwidth(double sigma, int degmax) {
  if (!(sigma > 0.0)) fail(errc::invalid, "box_halfwidth: scale must be positive");
  if (degmax < 0) fail(errc::invalid, "box_halfwidth: negative degree");
  // Tail of x^degmax exp(-x^2 / (2 sigma^2)) beyond h stays below 1e-14 of
  // the whole integral for h^2/sigma^2 >= 64 + 6 degmax; floor of 8 sigma.
  return sigma * std::sqrt(64.0 + 6.0 * degmax);
}

void exp_graded_axis(double h, int n, std::vector<double>& x, std::vector<double>& w) {
  if (!(h > 0.0)) fail(errc::invalid, "exp_graded_axis: half-width must be positive");
  if (n < 2) fail(errc::invalid, "exp_graded_axis: need at least two nodes");
  const int m = n / 2;
  // Integrands vanish at least quadratically toward the axes, so the
  // truncated tail below exp(log h - T) contributes < exp(-3 T) relatively.
  const double T = 14.0;
  std::vector<double> t, wt;
  gauss_legendre(std::log(h) - T, std::log(h), m, t, wt);
  x.resize(2 * m);
  w.resize(2 * m);
  for (int i = 0; i < m; ++i) {
    const double xp = std::exp(t[i]);
    const double wp = wt[i] * xp;  // Jacobian dx = e^t dt
    x[m + i] = xp;
    w[m + i] = wp;
    x[m - 1 - i] = -xp;
    w[m - 1 - i] = wp;
  }
}

void QuadratureGrid::validate() const {
  if (nodes_x.size() != weights_x.size() || nodes_y.size() != weights_y.size())
    fail(errc::invalid, "quadrature grid: node/weight size mismatch");
  if (nodes_x.empty() || nodes_y.empty())
    fail(errc::invalid, "quadrature grid: empty axis");
  for (const auto* axis : {&nodes_x, &nodes_y})
    for (std::size_t i = 1; i < axis->size(); ++i)
      if (!((*axis)[i] > (*axis)[i - 1]))
        fail(errc::invalid, "quadrature grid: nodes not strictly increasing");
  for (const auto* ws : {&weights_x, &weights_y})
    for (double v : *ws)
      if (!(v > 0.0)) fail(errc::invalid, "quadrature grid: non-positive weight");
}

cd quad2d(const std::function<cd(double, double)>& f, const QuadratureGrid& grid) {
  grid.validate();
  // Kahan-compensated accumulation in a fixed row-major order keeps the
  // result deterministic and the summation error near machine precision.
  cd sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < grid.nodes_x.size(); ++i) {
    for (std::size_t j = 0; j < grid.nodes_y.size(); ++j) {
      const cd v = f(grid.nodes_x[i], grid.nodes_y[j]) *
                   (grid.weights_x[i] * grid.weights_y[j]);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        std::ostringstream msg;
        msg << "quad2d: integrand not finite at node (x=" << grid.nodes_x[i]
            << ", y=" << grid.nodes_y[j] << ")";
        fail(errc::numeric, msg.str());
      }
      const cd y = v - comp;
      const cd t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
  }
  return sum;
}

}  // namespace sympf
