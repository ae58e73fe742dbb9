#include "sympf/correlators.hpp"

#include <cmath>
#include <sstream>

namespace sympf {

namespace {

cd ipow(cd base, int e) {
  cd p = 1.0;
  for (int i = 0; i < e; ++i) p *= base;
  return p;
}

double fact(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

cd vandermonde(const std::vector<cd>& vals) {
  cd d = 1.0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) d *= vals[i] - vals[j];
  return d;
}

// Masses must stay separated; for chiral ensembles the formulas divide by
// the Vandermonde of the squared masses, so the separation rule applies
// to m^2 there.
void check_mass_separation(const std::vector<cd>& masses, bool chiral) {
  std::vector<cd> vals;
  for (const cd& m : masses) vals.push_back(chiral ? m * m : m);
  double scale = 0.0;
  for (const cd& v : vals) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1e-30);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      if (std::abs(vals[i] - vals[j]) <= 1e-9 * scale) {
        std::ostringstream msg;
        msg << "masses " << i << " and " << j << " are "
            << (chiral ? "coincident in m^2" : "coincident")
            << " (separation " << std::abs(vals[i] - vals[j])
            << "); the coincident limit is finite but must be approached "
               "explicitly, e.g. by perturbing with --perturb-masses";
        fail(errc::invalid, msg.str());
      }
    }
  }
}

int needed_pairs(int R, bool bordered) { return bordered ? R + 1 : R; }

void check_basis_depth(const SkewBasis& basis, int R, bool bordered) {
  if (basis.pairs() < needed_pairs(R, bordered)) {
    std::ostringstream msg;
    msg << "basis holds " << basis.pairs() << " pairs but order R = " << R
        << (bordered ? " with a border polynomial q_{2R}" : "")
        << " needs " << needed_pairs(R, bordered)
        << "; construct the basis with more pairs";
    fail(errc::invalid, msg.str());
  }
}

struct PfWithDiag {
  cd value;
  double cancellation;
  double scale;  // (1 + max entry)^{dim/2}, the natural Pfaffian magnitude
};

PfWithDiag guarded_pfaffian(const Eigen::MatrixXcd& a) {
  PfWithDiag out;
  const auto res = pfaffian(a);
  out.value = res.value;
  out.cancellation = res.cancellation;
  const double maxabs = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  out.scale = std::pow(std::max(1.0, maxabs), a.rows() / 2.0);
  return out;
}

double real_weight_dressing(const RealWeightSpec& wbar, double x) {
  return wbar.chiral ? 2.0 * x * wbar.value(x) : wbar.value(x);
}

}  // namespace

ArgumentList make_argument_list(const std::vector<cd>& points,
                                const std::vector<cd>& masses) {
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        fail(errc::invalid, "evaluation points must be pairwise distinct");
  ArgumentList out;
  out.k = static_cast<int>(points.size());
  out.M = static_cast<int>(masses.size());
  for (const cd& z : points) {
    out.entries.push_back(z);
    out.entries.push_back(std::conj(z));
  }
  for (const cd& m : masses) out.entries.push_back(m);
  return out;
}

Eigen::MatrixXcd theta_matrix(const SkewBasis& basis, int R,
                              const ArgumentList& args) {
  const int n = static_cast<int>(args.entries.size());
  const bool border = (n % 2 == 1);
  check_basis_depth(basis, R, border);
  const int dim = border ? n + 1 : n;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      a(i, j) = prekernel(basis, R, args.entries[i], args.entries[j]);
      a(j, i) = -a(i, j);
    }
  }
  if (border) {
    const poly& q2R = basis.q(2 * R);
    for (int i = 0; i < n; ++i) {
      const cd u = basis.chiral ? args.entries[i] * args.entries[i]
                                : args.entries[i];
      a(i, n) = poly_eval(q2R, u);
      a(n, i) = -a(i, n);
    }
  }
  return a;
}

cd char_poly_expectation(const SkewBasis& basis, int N,
                         const std::vector<cd>& masses) {
  if (N < 1) fail(errc::invalid, "char_poly_expectation: N must be positive");
  check_mass_separation(masses, basis.chiral);
  const int M = static_cast<int>(masses.size());
  const int R = N + M / 2;
  check_basis_depth(basis, R, M % 2 == 1);

  ArgumentList args;
  args.k = 0;
  args.M = M;
  args.entries = masses;
  const Eigen::MatrixXcd th = theta_matrix(basis, R, args);

  std::vector<cd> vals;
  for (const cd& m : masses) vals.push_back(basis.chiral ? m * m : m);
  const cd dv = vandermonde(vals);

  cd pref = ((M / 2) % 2 ? -1.0 : 1.0) / dv;
  double nrm = 1.0;
  for (int h = N; h < R; ++h) nrm *= basis.norms[h];
  return pref * nrm * pfaffian(th).value;
}

cd partition_function(const SkewBasis& basis, int N,
                      const std::vector<cd>& masses) {
  if (N < 1) fail(errc::invalid, "partition_function: N must be positive");
  if (basis.pairs() < N)
    fail(errc::invalid,
         "partition_function: basis holds fewer norms than N; construct more "
         "pairs");
  cd z0 = fact(N);
  for (int i = 0; i < N; ++i) z0 *= basis.norms[i];
  cd val = z0 * char_poly_expectation(basis, N, masses);
  if (basis.chiral)
    for (const cd& m : masses) val *= ipow(m, 2 * basis.nu);
  return val;
}

CorrelatorResult correlation(const SkewBasis& basis, const WeightSpec& w, int N,
                             int k, const std::vector<cd>& points,
                             const std::vector<cd>& masses) {
  if (k < 1) fail(errc::invalid, "correlation: k must be at least 1");
  if (k > N)
    fail(errc::invalid, "correlation: cannot fix more eigenvalues than N");
  if (static_cast<int>(points.size()) != k)
    fail(errc::invalid, "correlation: point count does not match k");
  if (w.chiral != basis.chiral)
    fail(errc::invalid, "correlation: weight and basis disagree on chirality");
  check_mass_separation(masses, basis.chiral);

  const int M = static_cast<int>(masses.size());
  const int R = N + M / 2;
  const ArgumentList args = make_argument_list(points, masses);
  const auto num = guarded_pfaffian(theta_matrix(basis, R, args));

  CorrelatorResult out;
  out.R_index = R;
  out.odd_M = (M % 2 == 1);
  out.cancellation_numerator = num.cancellation;

  cd den = 1.0;
  if (M > 0) {
    ArgumentList margs;
    margs.k = 0;
    margs.M = M;
    margs.entries = masses;
    const auto denp = guarded_pfaffian(theta_matrix(basis, R, margs));
    out.cancellation_denominator = denp.cancellation;
    if (std::abs(denp.value) < 1e-12 * denp.scale) {
      std::ostringstream msg;
      msg << "near-singular mass Pfaffian (|Pf| = " << std::abs(denp.value)
          << " against scale " << denp.scale
          << "); the mass configuration is too degenerate";
      fail(errc::singular, msg.str());
    }
    den = denp.value;
  }

  cd pref = 1.0;
  for (const cd& z : points) {
    const cd zc = std::conj(z);
    const cd f = basis.chiral ? zc * zc - z * z : zc - z;
    pref *= w.value(z.real(), z.imag()) * f;
  }
  out.value = pref * num.value / den;

  if (M == 0 && std::abs(out.value) > 1e-200) {
    // The mass-free k-point density is a real non-negative quantity.
    const double tol = 1e-8 * std::abs(out.value);
    if (std::abs(out.value.imag()) > tol || out.value.real() < -tol) {
      std::ostringstream msg;
      msg << "mass-free correlator failed its realness invariant (value "
          << out.value << ", numerator cancellation "
          << out.cancellation_numerator << ")";
      fail(errc::numeric, msg.str());
    }
  }
  return out;
}

Eigen::MatrixXcd omega_matrix(const SkewBasis& basis, int R,
                              const std::vector<double>& xs,
                              const std::vector<double>& masses) {
  const int k = static_cast<int>(xs.size());
  const int M = static_cast<int>(masses.size());
  const int n = 2 * k + M;
  const bool border = (n % 2 == 1);
  check_basis_depth(basis, R, border);
  const int dim = border ? n + 1 : n;

  // Row layout: per eigenvalue the derivative row above the plain row,
  // then mass rows, then the border.
  const auto di = [](int i) { return 2 * i; };
  const auto pi = [](int i) { return 2 * i + 1; };
  const auto mi = [k](int g) { return 2 * k + g; };

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const auto kd = kernel_derivatives(basis, R, xs[i], xs[j]);
      a(di(i), di(j)) = kd.dxdt;
      a(di(i), pi(j)) = kd.dx;
      a(pi(i), di(j)) = kd.dt;
      a(pi(i), pi(j)) = kd.kappa;
    }
    const auto kd = kernel_derivatives(basis, R, xs[i], xs[i]);
    a(di(i), pi(i)) = kd.dx;
  }
  for (int i = 0; i < k; ++i) {
    for (int g = 0; g < M; ++g) {
      const auto kd = kernel_derivatives(basis, R, xs[i], masses[g]);
      a(di(i), mi(g)) = kd.dx;
      a(pi(i), mi(g)) = kd.kappa;
    }
  }
  for (int g = 0; g < M; ++g)
    for (int f = g + 1; f < M; ++f)
      a(mi(g), mi(f)) =
          kernel_derivatives(basis, R, masses[g], masses[f]).kappa;

  if (border) {
    const poly& q = basis.q(2 * R);
    const poly qd = poly_derivative(q);
    for (int i = 0; i < k; ++i) {
      if (basis.chiral) {
        a(di(i), n) = 2.0 * xs[i] * poly_eval(qd, xs[i] * xs[i]);
        a(pi(i), n) = poly_eval(q, xs[i] * xs[i]);
      } else {
        a(di(i), n) = poly_eval(qd, xs[i]);
        a(pi(i), n) = poly_eval(q, xs[i]);
      }
    }
    for (int g = 0; g < M; ++g) {
      const double mg = basis.chiral ? masses[g] * masses[g] : masses[g];
      a(mi(g), n) = poly_eval(q, mg);
    }
  }
  const Eigen::MatrixXd anti = a - a.transpose();
  return anti.cast<cd>();
}

double real_correlation(const SkewBasis& basis, const RealWeightSpec& wbar,
                        int N, int k, const std::vector<double>& xs,
                        const std::vector<double>& masses) {
  if (N < 1) fail(errc::invalid, "real_correlation: N must be positive");
  if (static_cast<int>(xs.size()) != k)
    fail(errc::invalid, "real_correlation: point count does not match k");
  if (k > N)
    fail(errc::invalid, "real_correlation: cannot fix more eigenvalues than N");
  if (wbar.chiral != basis.chiral)
    fail(errc::invalid, "real_correlation: weight and basis disagree on chirality");
  {
    std::vector<cd> cmasses(masses.begin(), masses.end());
    check_mass_separation(cmasses, basis.chiral);
  }
  const int M = static_cast<int>(masses.size());
  const int R = N + M / 2;

  const auto num = guarded_pfaffian(omega_matrix(basis, R, xs, masses));
  cd den = 1.0;
  if (M > 0) {
    const auto denp = guarded_pfaffian(omega_matrix(basis, R, {}, masses));
    if (std::abs(denp.value) < 1e-12 * denp.scale) {
      std::ostringstream msg;
      msg << "near-singular mass Pfaffian on the real line (|Pf| = "
          << std::abs(denp.value) << " against scale " << denp.scale << ")";
      fail(errc::singular, msg.str());
    }
    den = denp.value;
  }
  double pref = 1.0;
  for (double x : xs) pref *= real_weight_dressing(wbar, x);
  const cd val = pref * num.value / den;
  return val.real();
}

IsdKernels isd_kernels(const SkewBasis& basis, const RealWeightSpec& wbar,
                       int R, double x, double t) {
  const double dwx = real_weight_dressing(wbar, x);
  const double dwt = real_weight_dressing(wbar, t);
  if (dwx < 0.0 || dwt < 0.0)
    fail(errc::invalid, "isd_kernels: dressed weight is negative");
  const double root = std::sqrt(dwx) * std::sqrt(dwt);
  IsdKernels out;
  const auto kd = kernel_derivatives(basis, R, x, t);
  out.I = root * kd.kappa;
  out.D = -root * kd.dxdt;
  // S carries the derivative on the first argument of kappa(t, x).
  out.S = root * kernel_derivatives(basis, R, t, x).dx;
  return out;
}

double quaternion_kernel_density(const SkewBasis& basis,
                                 const RealWeightSpec& wbar, int R,
                                 const std::vector<double>& xs) {
  const int k = static_cast<int>(xs.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const auto ij = isd_kernels(basis, wbar, R, xs[i], xs[j]);
      const auto ji = isd_kernels(basis, wbar, R, xs[j], xs[i]);
      a(2 * i, 2 * j) = ij.I;
      a(2 * i, 2 * j + 1) = ij.S;
      a(2 * i + 1, 2 * j) = -ji.S;
      a(2 * i + 1, 2 * j + 1) = -ij.D;
    }
  }
  return pfaffian(a.cast<cd>()).value.real();
}

namespace {

double phi_dressed(const SkewBasis& basis, const RealWeightSpec& wbar, int R,
                   double x) {
  const double dw = real_weight_dressing(wbar, x);
  const double u = basis.chiral ? x * x : x;
  return std::sqrt(dw) * poly_eval(basis.q(2 * R), u);
}

double dphi_dressed(const SkewBasis& basis, const RealWeightSpec& wbar, int R,
                    double x) {
  const double dw = real_weight_dressing(wbar, x);
  const poly qd = poly_derivative(basis.q(2 * R));
  if (basis.chiral) return std::sqrt(dw) * 2.0 * x * poly_eval(qd, x * x);
  return std::sqrt(dw) * poly_eval(qd, x);
}

}  // namespace

double quaternion_form_correlation(const SkewBasis& basis,
                                   const RealWeightSpec& wbar, int N,
                                   const std::vector<double>& xs,
                                   const std::vector<double>& masses) {
  const int k = static_cast<int>(xs.size());
  const int M = static_cast<int>(masses.size());
  if (M % 2 != 1)
    fail(errc::invalid, "the rearranged quaternion form needs an odd mass count");
  const int R = N + M / 2;
  check_basis_depth(basis, R, true);

  // Ordering: masses, dressed border, plain rows, derivative rows.
  const int nb = M + 1 + 2 * k;
  const int bi = M;
  const auto mi = [](int g) { return g; };
  const auto pi = [M](int i) { return M + 1 + i; };
  const auto di = [M, k](int i) { return M + 1 + k + i; };

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nb, nb);
  for (int g = 0; g < M; ++g) {
    for (int f = g + 1; f < M; ++f)
      a(mi(g), mi(f)) = isd_kernels(basis, wbar, R, masses[g], masses[f]).I;
    a(mi(g), bi) = phi_dressed(basis, wbar, R, masses[g]);
    for (int j = 0; j < k; ++j) {
      const auto gj = isd_kernels(basis, wbar, R, masses[g], xs[j]);
      a(mi(g), pi(j)) = gj.I;
      a(mi(g), di(j)) = gj.S;
    }
  }
  for (int j = 0; j < k; ++j) {
    a(bi, pi(j)) = -phi_dressed(basis, wbar, R, xs[j]);
    a(bi, di(j)) = dphi_dressed(basis, wbar, R, xs[j]);
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const auto ij = isd_kernels(basis, wbar, R, xs[i], xs[j]);
      if (i < j) {
        a(pi(i), pi(j)) = ij.I;
        a(di(i), di(j)) = -ij.D;
      }
      a(pi(i), di(j)) = ij.S;
    }
  }
  const Eigen::MatrixXcd full = (a - a.transpose()).cast<cd>();

  const auto num = guarded_pfaffian(full);
  const auto den =
      guarded_pfaffian(full.topLeftCorner(M + 1, M + 1).eval());
  if (std::abs(den.value) < 1e-12 * den.scale)
    fail(errc::singular,
         "near-singular mass block in the rearranged quaternion form");
  const double sign = ((k * (k - 1) / 2) % 2) ? -1.0 : 1.0;
  return sign * (num.value / den.value).real();
}

SweepReport hermitean_limit_sweep(weight_family family, int N, int nu,
                                  const std::vector<double>& params) {
  if (family == weight_family::custom)
    fail(errc::invalid, "hermitean_limit_sweep: no closed projection for a "
                        "custom weight");
  if (params.empty())
    fail(errc::invalid, "hermitean_limit_sweep: empty parameter sequence");
  const bool chiral = (family == weight_family::chgse);

  // Fixed x stations; the chiral density lives on the open half-line.
  std::vector<double> xgrid;
  if (chiral)
    for (int i = 0; i < 10; ++i) xgrid.push_back(0.25 + 2.25 * i / 9.0);
  else
    for (int i = 0; i < 13; ++i) xgrid.push_back(-3.0 + 6.0 * i / 12.0);

  // Projected (real-line) targets; the projection does not depend on the
  // non-Hermiticity parameter, so any interior value seeds it.
  const SkewBasis proj = chiral ? chgse_skew_basis(N, 0.0, nu, N + 1)
                                : gse_skew_basis(N, 1.0, N + 1);
  const RealWeightSpec wbar = projected_weight(
      chiral ? chgse_weight(N, 0.5, nu) : gse_weight(N, 0.5));
  std::vector<double> target;
  double peak = 0.0;
  for (double x : xgrid) {
    target.push_back(real_correlation(proj, wbar, N, 1, {x}, {}));
    peak = std::max(peak, std::abs(target.back()));
  }

  SweepReport report;
  for (double p : params) {
    const WeightSpec w = chiral ? chgse_weight(N, p, nu) : gse_weight(N, p);
    const SkewBasis basis = chiral ? chgse_skew_basis(N, p, nu, N + 1)
                                   : gse_skew_basis(N, p, N + 1);
    std::vector<double> yv, yw;
    const double hy = box_halfwidth(w.sigma_y, chiral ? 12 : 8);
    if (chiral)
      exp_graded_axis(hy, 160, yv, yw);
    else
      gauss_legendre(-hy, hy, 120, yv, yw);
    double sup = 0.0;
    for (std::size_t ix = 0; ix < xgrid.size(); ++ix) {
      double dens = 0.0;
      for (std::size_t j = 0; j < yv.size(); ++j) {
        const cd z(xgrid[ix], yv[j]);
        dens += yw[j] *
                correlation(basis, w, N, 1, {z}, {}).value.real();
      }
      sup = std::max(sup, std::abs(dens - target[ix]));
    }
    report.rows.push_back({p, sup, sup / peak});
  }
  report.monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    if (!(report.rows[i].sup_deviation < report.rows[i - 1].sup_deviation))
      report.monotone = false;
  report.final_rel_deviation = report.rows.back().rel_to_peak;
  return report;
}

}  // namespace sympf
