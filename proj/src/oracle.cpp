#include "sympf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace sympf {

namespace {

cd ipow(cd base, int e) {
  cd p = 1.0;
  for (int i = 0; i < e; ++i) p *= base;
  return p;
}

double ipow_real(double base, int e) {
  double p = 1.0;
  for (int i = 0; i < e; ++i) p *= base;
  return p;
}

// Flattened tensor grid with cached weight values.
struct FlatGrid {
  std::vector<cd> z;
  std::vector<double> om;  // quadrature weight products
  std::vector<double> wv;  // weight function values
};

FlatGrid flatten(const WeightSpec& w, const QuadratureGrid& g) {
  FlatGrid f;
  const std::size_t n = g.nodes_x.size() * g.nodes_y.size();
  f.z.reserve(n);
  f.om.reserve(n);
  f.wv.reserve(n);
  for (std::size_t ix = 0; ix < g.nodes_x.size(); ++ix) {
    for (std::size_t iy = 0; iy < g.nodes_y.size(); ++iy) {
      f.z.emplace_back(g.nodes_x[ix], g.nodes_y[iy]);
      f.om.push_back(g.weights_x[ix] * g.weights_y[iy]);
      f.wv.push_back(w.value(g.nodes_x[ix], g.nodes_y[iy]));
    }
  }
  return f;
}

QuadratureGrid brute_grid(const WeightSpec& w, int N, int nmasses,
                          const BruteOptions& opt, double shrink) {
  if (opt.nx > 0) {
    if (opt.ny <= 0 || opt.x_max <= opt.x_min || opt.y_max <= opt.y_min)
      fail(errc::invalid, "explicit quadrature box is malformed");
    QuadratureGrid g;
    gauss_legendre(opt.x_min, opt.x_max,
                   std::max(4, int(opt.nx * shrink)), g.nodes_x, g.weights_x);
    gauss_legendre(opt.y_min, opt.y_max,
                   std::max(4, int(opt.ny * shrink)), g.nodes_y, g.weights_y);
    g.x_max = std::max(std::abs(opt.x_min), std::abs(opt.x_max));
    g.y_max = std::max(std::abs(opt.y_min), std::abs(opt.y_max));
    return g;
  }
  // Defaults calibrated so the family batteries converge well past the
  // acceptance tolerances: denser 2D axes for the chiral weights, wider
  // boxes for the higher-degree joint integrands. Each chiral mass (and the
  // topological power) raises the integrand degree, so the 4D grids grow
  // with both.
  int n = opt.points_per_axis;
  if (n == 0)
    n = w.chiral ? (N == 1 ? 400 : 200 + 20 * nmasses + 20 * w.nu) : 160;
  n = std::max(8, int(n * shrink));
  int degmax = opt.degmax;
  if (degmax == 0) degmax = w.chiral ? 8 * N + 16 + 4 * w.nu : 4 * N + 8;
  return build_grid(w, n, degmax);
}

cd mass_factor(cd z, const std::vector<cd>& masses, bool chiral) {
  cd v = 1.0;
  const cd zc = std::conj(z);
  for (const cd& m : masses) {
    if (chiral)
      v *= (m * m - z * z) * (m * m - zc * zc);
    else
      v *= (m - z) * (m - zc);
  }
  return v;
}

double jac_single(cd z, bool chiral) {
  const double y = z.imag();
  if (chiral) {
    const double xy = z.real() * y;
    return 16.0 * xy * xy;
  }
  return 4.0 * y * y;
}

cd chiral_mass_power(const std::vector<cd>& masses, int nu) {
  cd v = 1.0;
  for (const cd& m : masses) v *= ipow(m, 2 * nu);
  return v;
}

// Sum over ordered eigenvalue pairs of base_i base_j |b-a|^2 |b-conj(a)|^2;
// contiguous outer chunks per thread, partials combined in chunk order so a
// fixed thread count reproduces exactly.
cd pair_sum(const std::vector<cd>& base, const std::vector<cd>& av,
            int threads) {
  const std::size_t n = base.size();
  const int nt = std::max(1, std::min<int>(threads, 64));
  std::vector<cd> partial(nt, 0.0);
  const auto worker = [&](int t) {
    const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
    cd acc = 0.0, comp = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const cd a = av[i];
      const cd ac = std::conj(a);
      cd row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double jp = std::norm(av[j] - a) * std::norm(av[j] - ac);
        row += base[j] * jp;
      }
      const cd term = base[i] * row - comp;
      const cd next = acc + term;
      comp = (next - acc) - term;
      acc = next;
    }
    partial[t] = acc;
  };
  if (nt == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  cd tot = 0.0;
  for (const cd& p : partial) tot += p;
  return tot;
}

cd brute_partition_on(const WeightSpec& w, int N, const std::vector<cd>& masses,
                      const FlatGrid& g, int threads) {
  const std::size_t n = g.z.size();
  std::vector<cd> base(n), av(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = g.om[i] * g.wv[i] * mass_factor(g.z[i], masses, w.chiral) *
              jac_single(g.z[i], w.chiral);
    av[i] = w.chiral ? g.z[i] * g.z[i] : g.z[i];
  }
  cd val;
  if (N == 1) {
    cd acc = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cd term = base[i] - comp;
      const cd next = acc + term;
      comp = (next - acc) - term;
      acc = next;
    }
    val = acc;
  } else {
    val = pair_sum(base, av, threads);
  }
  if (w.chiral) val *= chiral_mass_power(masses, w.nu);
  return val;
}

void check_accuracy(cd fine, cd coarse, double tol, const char* what) {
  const double denom = std::max(std::abs(fine), 1e-30);
  const double est = std::abs(fine - coarse) / denom;
  if (est > tol) {
    std::ostringstream msg;
    msg << what << ": quadrature accuracy estimate " << est
        << " exceeds tolerance " << tol << "; refine the grid";
    fail(errc::numeric, msg.str());
  }
}

}  // namespace

double joint_log_density(const WeightSpec& w, const EigenConfig& config,
                         const std::vector<double>& masses) {
  if (config.points.empty())
    fail(errc::invalid, "joint_log_density: empty configuration");
  for (const cd& z : config.points) {
    if (z.imag() < 0.0)
      fail(errc::invalid,
           "configuration points must be upper-half-plane representatives");
    if (w.chiral && z.real() < 0.0)
      fail(errc::invalid,
           "chiral configuration points must be quadrant representatives");
  }
  const int N = static_cast<int>(config.points.size());
  std::vector<cd> a(N);
  for (int i = 0; i < N; ++i)
    a[i] = w.chiral ? config.points[i] * config.points[i] : config.points[i];

  double l = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = config.points[i].real(), y = config.points[i].imag();
    l += w.log_value(x, y);
    l += w.chiral ? std::log(16.0 * x * x * y * y) : std::log(4.0 * y * y);
    for (int j = 0; j < i; ++j)
      l += std::log(std::norm(a[i] - a[j])) +
           std::log(std::norm(a[i] - std::conj(a[j])));
    for (double m : masses) {
      const double mm = w.chiral ? m * m : m;
      l += std::log(std::norm(cd(mm, 0.0) - a[i]));
    }
  }
  return l;  // -infinity on an axis via log(0)
}

cd brute_force_partition(const WeightSpec& w, int N,
                         const std::vector<cd>& masses,
                         const BruteOptions& opt) {
  if (N < 1 || N > 2)
    fail(errc::invalid,
         "brute_force_partition integrates 2N real dimensions and supports "
         "N in {1, 2} only");
  const int nm = static_cast<int>(masses.size());
  const FlatGrid fine = flatten(w, brute_grid(w, N, nm, opt, 1.0));
  const cd val = brute_partition_on(w, N, masses, fine, opt.threads);
  if (opt.estimate_accuracy) {
    const FlatGrid coarse = flatten(w, brute_grid(w, N, nm, opt, 0.75));
    const cd cval = brute_partition_on(w, N, masses, coarse, opt.threads);
    check_accuracy(val, cval, opt.accuracy_tol, "brute_force_partition");
  }
  return val;
}

cd brute_force_correlator(const WeightSpec& w, int N, int k, cd z,
                          const std::vector<cd>& masses,
                          const BruteOptions& opt, const cd* partition) {
  if (k != 1)
    fail(errc::invalid, "brute_force_correlator supports k = 1 only");
  if (N < 1 || N > 2)
    fail(errc::invalid, "brute_force_correlator supports N in {1, 2} only");

  const auto evaluate = [&](const FlatGrid& g, cd Z) -> cd {
    const cd mfz = mass_factor(z, masses, w.chiral);
    const double wz = w.value(z.real(), z.imag());
    cd val;
    if (N == 1) {
      val = wz * mfz * jac_single(z, w.chiral);
    } else {
      const cd a = w.chiral ? z * z : z;
      const cd ac = std::conj(a);
      cd inner = 0.0;
      for (std::size_t j = 0; j < g.z.size(); ++j) {
        const cd b = w.chiral ? g.z[j] * g.z[j] : g.z[j];
        const double jp = std::norm(b - a) * std::norm(b - ac);
        inner += g.om[j] * g.wv[j] * mass_factor(g.z[j], masses, w.chiral) *
                 jac_single(g.z[j], w.chiral) * jp;
      }
      val = 2.0 * wz * mfz * jac_single(z, w.chiral) * inner;
    }
    if (w.chiral) val *= chiral_mass_power(masses, w.nu);
    return val / Z;
  };

  const int nm = static_cast<int>(masses.size());
  const FlatGrid fine = flatten(w, brute_grid(w, N, nm, opt, 1.0));
  const cd Z = partition ? *partition
                         : brute_partition_on(w, N, masses, fine, opt.threads);
  const cd val = evaluate(fine, Z);
  if (opt.estimate_accuracy && !partition) {
    const FlatGrid coarse = flatten(w, brute_grid(w, N, nm, opt, 0.75));
    const cd cZ = brute_partition_on(w, N, masses, coarse, opt.threads);
    check_accuracy(val, evaluate(coarse, cZ), opt.accuracy_tol,
                   "brute_force_correlator");
  }
  return val;
}

namespace {

// Full-line node set for the real-line integrals. The chiral weight is
// extended evenly so the integrand stays even and densities normalize over
// the full line.
struct RealLineNodes {
  std::vector<double> x, om, wb;
};

RealLineNodes real_line_nodes(const RealWeightSpec& wbar, int points,
                              int degmax) {
  // The fourth-power Vandermonde and mass factors push the integrand degree
  // well past the one-body weights; default to a generous box.
  const LineGrid g =
      build_line_grid(wbar, points > 0 ? points : 300, degmax ? degmax : 40);
  RealLineNodes out;
  if (wbar.chiral) {
    const std::size_t n = g.nodes.size();
    out.x.resize(2 * n);
    out.om.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] = -g.nodes[n - 1 - i];
      out.om[i] = g.weights[n - 1 - i];
      out.x[n + i] = g.nodes[i];
      out.om[n + i] = g.weights[i];
    }
  } else {
    out.x = g.nodes;
    out.om = g.weights;
  }
  out.wb.resize(out.x.size());
  for (std::size_t i = 0; i < out.x.size(); ++i)
    out.wb[i] = wbar.value(std::abs(out.x[i]));
  return out;
}

double real_mass_factor(double x, const std::vector<double>& masses,
                        bool chiral) {
  double v = 1.0;
  for (double m : masses) {
    const double d = chiral ? m * m - x * x : m - x;
    v *= d * d;
  }
  return v;
}

double brute_real_partition_on(const RealWeightSpec& wbar, int N,
                               const std::vector<double>& masses,
                               const RealLineNodes& g) {
  const std::size_t n = g.x.size();
  std::vector<double> base(n), t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double meas =
        g.om[i] * g.wb[i] * (wbar.chiral ? 4.0 * g.x[i] * g.x[i] : 1.0);
    base[i] = meas * real_mass_factor(g.x[i], masses, wbar.chiral);
    t[i] = wbar.chiral ? g.x[i] * g.x[i] : g.x[i];
  }
  double val = 0.0;
  if (N == 1) {
    for (std::size_t i = 0; i < n; ++i) val += base[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = t[i] - t[j];
        const double d2 = d * d;
        row += base[j] * d2 * d2;
      }
      val += base[i] * row;
    }
  }
  if (wbar.chiral)
    for (double m : masses) val *= ipow_real(m, 2 * wbar.nu);
  return val;
}

}  // namespace

double brute_real_partition(const RealWeightSpec& wbar, int N,
                            const std::vector<double>& masses,
                            const BruteOptions& opt) {
  if (N < 1 || N > 2)
    fail(errc::invalid, "brute_real_partition supports N in {1, 2} only");
  const double val = brute_real_partition_on(
      wbar, N, masses,
      real_line_nodes(wbar, opt.points_per_axis, opt.degmax));
  if (opt.estimate_accuracy) {
    const int base_pts = opt.points_per_axis > 0 ? opt.points_per_axis : 300;
    const double cval = brute_real_partition_on(
        wbar, N, masses,
        real_line_nodes(wbar, (3 * base_pts) / 4, opt.degmax));
    check_accuracy(val, cval, opt.accuracy_tol, "brute_real_partition");
  }
  return val;
}

double brute_real_correlator(const RealWeightSpec& wbar, int N, double x,
                             const std::vector<double>& masses,
                             const BruteOptions& opt, const double* partition) {
  if (N < 1 || N > 2)
    fail(errc::invalid, "brute_real_correlator supports N in {1, 2} only");
  const auto point_base = [&](double xv) {
    const double meas =
        wbar.value(std::abs(xv)) * (wbar.chiral ? 4.0 * xv * xv : 1.0);
    return meas * real_mass_factor(xv, masses, wbar.chiral);
  };
  const auto evaluate = [&](const RealLineNodes& g, double Z) {
    double val;
    if (N == 1) {
      val = point_base(x);
    } else {
      const double t0 = wbar.chiral ? x * x : x;
      double inner = 0.0;
      for (std::size_t j = 0; j < g.x.size(); ++j) {
        const double meas =
            g.om[j] * g.wb[j] * (wbar.chiral ? 4.0 * g.x[j] * g.x[j] : 1.0);
        const double tj = wbar.chiral ? g.x[j] * g.x[j] : g.x[j];
        const double d = tj - t0;
        const double d2 = d * d;
        inner +=
            meas * real_mass_factor(g.x[j], masses, wbar.chiral) * d2 * d2;
      }
      val = 2.0 * point_base(x) * inner;
    }
    if (wbar.chiral)
      for (double m : masses) val *= ipow_real(m, 2 * wbar.nu);
    return val / Z;
  };

  const RealLineNodes fine =
      real_line_nodes(wbar, opt.points_per_axis, opt.degmax);
  const double Z = partition ? *partition
                             : brute_real_partition_on(wbar, N, masses, fine);
  const double val = evaluate(fine, Z);
  if (opt.estimate_accuracy && !partition) {
    const int base_pts = opt.points_per_axis > 0 ? opt.points_per_axis : 300;
    const RealLineNodes coarse =
        real_line_nodes(wbar, (3 * base_pts) / 4, opt.degmax);
    const double cZ = brute_real_partition_on(wbar, N, masses, coarse);
    check_accuracy(val, evaluate(coarse, cZ), opt.accuracy_tol,
                   "brute_real_correlator");
  }
  return val;
}

double real_skew_product(const poly& f, const poly& g,
                         const RealWeightSpec& wbar, const LineGrid& grid) {
  const poly fd = poly_derivative(f);
  const poly gd = poly_derivative(g);
  double acc = 0.0;
  if (wbar.chiral) {
    // Polynomials in u = x^2 under the dressed measure 2x wbar(x); the
    // integrand is even, so twice the half-line grid covers the full line.
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
      const double x = grid.nodes[i], u = x * x;
      const double cross = poly_eval(fd, u) * poly_eval(g, u) -
                           poly_eval(f, u) * poly_eval(gd, u);
      acc += grid.weights[i] * 4.0 * u * wbar.value(x) * cross;
    }
    return 2.0 * acc;
  }
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const double x = grid.nodes[i];
    const double cross = poly_eval(fd, x) * poly_eval(g, x) -
                         poly_eval(f, x) * poly_eval(gd, x);
    acc += grid.weights[i] * wbar.value(x) * cross;
  }
  return acc;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Portable deterministic draws: explicit conversions and Box-Muller keep
// chains byte-identical across standard libraries for a fixed seed.
struct Rng {
  std::mt19937_64 eng;
  double spare = 0.0;
  bool has_spare = false;

  explicit Rng(std::uint64_t seed) : eng(splitmix64(seed)) {}
  double uniform() { return double(eng() >> 11) * 0x1.0p-53; }  // [0, 1)
  double normal() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare = v * f;
    has_spare = true;
    return u * f;
  }
};

// Log density terms involving one site only; O(N) per call.
double site_log_density(const WeightSpec& w, const std::vector<cd>& pts,
                        int site, cd zi, const std::vector<double>& masses) {
  const double x = zi.real(), y = zi.imag();
  double l = w.log_value(x, y);
  l += w.chiral ? std::log(16.0 * x * x * y * y) : std::log(4.0 * y * y);
  const cd a = w.chiral ? zi * zi : zi;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (static_cast<int>(j) == site) continue;
    const cd b = w.chiral ? pts[j] * pts[j] : pts[j];
    l += std::log(std::norm(a - b)) + std::log(std::norm(a - std::conj(b)));
  }
  for (double m : masses) {
    const double mm = w.chiral ? m * m : m;
    l += std::log(std::norm(cd(mm, 0.0) - a));
  }
  return l;
}

struct ChainState {
  std::vector<cd> pts;
  double scale = 1.0;  // common multiple of (sigma_x, sigma_y)
  long long proposed = 0, accepted = 0;
};

void run_sweeps(const WeightSpec& w, ChainState& st, Rng& rng, long long sweeps,
                const std::vector<double>& masses) {
  const int N = static_cast<int>(st.pts.size());
  for (long long s = 0; s < sweeps; ++s) {
    for (int i = 0; i < N; ++i) {
      const double gx = rng.normal();
      const double gy = rng.normal();
      const double u = rng.uniform();
      ++st.proposed;
      const cd zi = st.pts[i];
      const cd zp(zi.real() + st.scale * w.sigma_x * gx,
                  zi.imag() + st.scale * w.sigma_y * gy);
      if (zp.imag() <= 0.0) continue;
      if (w.chiral && zp.real() <= 0.0) continue;
      const double delta = site_log_density(w, st.pts, i, zp, masses) -
                           site_log_density(w, st.pts, i, zi, masses);
      if (std::log(u + 1e-300) < delta) {
        st.pts[i] = zp;
        ++st.accepted;
      }
    }
  }
}

// Burn-in with windowed step-size adaptation toward 30 percent acceptance.
void tune(const WeightSpec& w, ChainState& st, Rng& rng, long long sweeps,
          const std::vector<double>& masses) {
  const int windows = 25;
  const long long per = std::max<long long>(1, sweeps / windows);
  for (int k = 0; k < windows; ++k) {
    const long long p0 = st.proposed, a0 = st.accepted;
    run_sweeps(w, st, rng, per, masses);
    const double acc =
        double(st.accepted - a0) / double(std::max<long long>(1, st.proposed - p0));
    if (acc > 0.4)
      st.scale = std::min(st.scale * 1.35, 50.0);
    else if (acc < 0.2)
      st.scale = std::max(st.scale / 1.35, 0.02);
  }
}

}  // namespace

ChainStats mcmc_sample(const WeightSpec& w, int N, const McmcOptions& opt,
                       const std::function<void(const EigenConfig&)>& sink) {
  if (N < 1 || N > 6)
    fail(errc::invalid, "mcmc_sample supports N in 1..6");
  if (opt.steps < 1 || opt.thin < 1 || opt.burn_in < 0)
    fail(errc::invalid, "mcmc_sample: steps and thin must be positive");
  if (w.sigma_x <= 0.0 || w.sigma_y <= 0.0)
    fail(errc::invalid, "mcmc_sample: weight carries no proposal scales");

  Rng rng(opt.seed);
  ChainState st;
  st.pts.resize(N);
  for (int i = 0; i < N; ++i) {
    double x = w.sigma_x * rng.normal();
    if (w.chiral) x = w.sigma_x * (0.5 + std::abs(rng.normal()));
    const double y = w.sigma_y * (0.5 + std::abs(rng.normal()));
    st.pts[i] = cd(x, y);
  }

  long long burn = opt.burn_in;
  if (burn == 0)
    burn = std::clamp<long long>(opt.steps / 10, 2000, 100000);

  ChainStats stats;
  stats.seed = opt.seed;
  tune(w, st, rng, burn, opt.masses);
  stats.burn_in = burn;

  // Probe the tuned acceptance before committing samples to the sink.
  for (int attempt = 0; attempt < 3; ++attempt) {
    const long long p0 = st.proposed, a0 = st.accepted;
    run_sweeps(w, st, rng, 500, opt.masses);
    stats.burn_in += 500;
    const double acc = double(st.accepted - a0) / double(st.proposed - p0);
    if (acc >= 0.15 && acc <= 0.55) break;
    if (attempt == 2)
      fail(errc::numeric, "mcmc_sample: proposal tuning failed to reach a "
                          "workable acceptance rate");
    tune(w, st, rng, burn / 2, opt.masses);
    stats.burn_in += burn / 2;
  }

  const long long p0 = st.proposed, a0 = st.accepted;
  EigenConfig cfg;
  std::vector<double> observable;
  observable.reserve(opt.steps / opt.thin + 1);
  long long retained = 0;
  for (long long s = 0; s < opt.steps; ++s) {
    run_sweeps(w, st, rng, 1, opt.masses);
    if ((s + 1) % opt.thin) continue;
    cfg.points = st.pts;
    sink(cfg);
    double o = 0.0;
    for (const cd& z : st.pts) o += z.imag();
    observable.push_back(o);
    ++retained;
  }
  stats.steps = retained;
  stats.proposal_scale = st.scale;
  stats.acceptance_rate =
      double(st.accepted - a0) / double(std::max<long long>(1, st.proposed - p0));

  // Effective samples from batch means on the summed-height observable.
  const long long n = retained;
  if (n >= 32) {
    const int B = n >= 128 ? 64 : 8;
    const long long b = n / B;
    double mean = 0.0;
    for (long long i = 0; i < B * b; ++i) mean += observable[i];
    mean /= double(B * b);
    double var = 0.0;
    for (long long i = 0; i < B * b; ++i) {
      const double d = observable[i] - mean;
      var += d * d;
    }
    var /= double(B * b - 1);
    double var_bm = 0.0;
    for (int k = 0; k < B; ++k) {
      double bm = 0.0;
      for (long long i = k * b; i < (k + 1) * b; ++i) bm += observable[i];
      bm /= double(b);
      const double d = bm - mean;
      var_bm += d * d;
    }
    var_bm /= double(B - 1);
    stats.effective_sample_estimate =
        var_bm > 0.0 ? std::clamp(double(B) * var / var_bm, 1.0, double(n))
                     : double(n);
  } else {
    stats.effective_sample_estimate = double(n);
  }
  return stats;
}

HistogramGrid default_histogram_grid(const WeightSpec& w, int N) {
  HistogramGrid g;
  // Chiral densities put more weight in the tails relative to sigma (level
  // repulsion from the mirror images pushes eigenvalues outward), so the box
  // needs a wider safety factor to capture all but ~1e-8 of the mass.
  const double f = (w.chiral ? 2.5 : 1.5) * std::sqrt(2.0 * N) + 3.0;
  const double hx = w.sigma_x * f;
  const double hy = w.sigma_y * f;
  g.x_min = w.chiral ? 0.0 : -hx;
  g.x_max = hx;
  g.y_min = 0.0;  // samples live in the upper half plane
  g.y_max = hy;
  return g;
}

namespace {

struct BatchedCounts {
  HistogramGrid g;
  int B;
  std::vector<long long> counts;  // bin-major, B entries per bin
  long long total = 0, in_grid = 0;

  BatchedCounts(const HistogramGrid& grid, int batches)
      : g(grid), B(batches), counts(std::size_t(grid.nx) * grid.ny * batches, 0) {}

  void add(double x, double y, int batch) {
    ++total;
    if (x < g.x_min || x >= g.x_max || y < g.y_min || y >= g.y_max) return;
    const int ix = int((x - g.x_min) / (g.x_max - g.x_min) * g.nx);
    const int iy = int((y - g.y_min) / (g.y_max - g.y_min) * g.ny);
    if (ix < 0 || ix >= g.nx || iy < 0 || iy >= g.ny) return;
    ++in_grid;
    ++counts[(std::size_t(ix) * g.ny + iy) * B + batch];
  }
};

DensityCompareReport finish_compare(
    const BatchedCounts& bc, long long n_sweeps,
    const std::function<double(double, double)>& predicted) {
  const HistogramGrid& g = bc.g;
  DensityCompareReport rep;
  rep.total_points = bc.total;
  rep.total_in_grid = bc.in_grid;

  std::vector<double> qx, qw;
  gauss_legendre(0.0, 1.0, 4, qx, qw);
  const double dx = (g.x_max - g.x_min) / g.nx;
  const double dy = (g.y_max - g.y_min) / g.ny;

  long long beyond = 0;
  for (int ix = 0; ix < g.nx; ++ix) {
    for (int iy = 0; iy < g.ny; ++iy) {
      DensityBin bin;
      bin.x_lo = g.x_min + ix * dx;
      bin.x_hi = bin.x_lo + dx;
      bin.y_lo = g.y_min + iy * dy;
      bin.y_hi = bin.y_lo + dy;

      double integral = 0.0;
      for (std::size_t a = 0; a < qx.size(); ++a)
        for (std::size_t b = 0; b < qx.size(); ++b)
          integral += qw[a] * qw[b] *
                      predicted(bin.x_lo + qx[a] * dx, bin.y_lo + qx[b] * dy);
      integral *= dx * dy;
      bin.expected = double(n_sweeps) * integral;
      rep.predicted_total += integral;

      const long long* row = &bc.counts[(std::size_t(ix) * g.ny + iy) * bc.B];
      long long count = 0;
      for (int k = 0; k < bc.B; ++k) count += row[k];
      bin.count = count;

      if (count >= 20) {
        const double m = double(count) / bc.B;
        double s2 = 0.0;
        for (int k = 0; k < bc.B; ++k) {
          const double d = double(row[k]) - m;
          s2 += d * d;
        }
        s2 /= double(bc.B - 1);
        const double sd = std::sqrt(double(bc.B) * s2);
        if (sd > 0.0) {
          bin.z_score = (double(count) - bin.expected) / sd;
          bin.used = true;
          ++rep.used_bins;
          rep.max_abs_z = std::max(rep.max_abs_z, std::abs(bin.z_score));
          if (std::abs(bin.z_score) > 3.0) ++beyond;
        }
      }
      rep.bins.push_back(bin);
    }
  }
  rep.fraction_beyond_3 =
      rep.used_bins > 0 ? double(beyond) / double(rep.used_bins) : 0.0;
  return rep;
}

}  // namespace

DensityCompareReport density_compare(
    const std::vector<EigenConfig>& samples,
    const std::function<double(double, double)>& predicted,
    const HistogramGrid& grid, int batches) {
  if (samples.empty()) fail(errc::invalid, "density_compare: no samples");
  if (grid.nx < 1 || grid.ny < 1 || grid.x_max <= grid.x_min ||
      grid.y_max <= grid.y_min)
    fail(errc::invalid, "density_compare: malformed grid");
  const int B = std::max(2, batches);
  BatchedCounts bc(grid, B);
  const long long n = static_cast<long long>(samples.size());
  for (long long i = 0; i < n; ++i) {
    const int batch = int(i * B / n);
    for (const cd& z : samples[i].points) bc.add(z.real(), z.imag(), batch);
  }
  return finish_compare(bc, n, predicted);
}

DensityCompareReport mcmc_density_compare(const SkewBasis& basis,
                                          const WeightSpec& w, int N,
                                          const McmcOptions& opt,
                                          const HistogramGrid& grid) {
  if (grid.nx < 1 || grid.ny < 1 || grid.x_max <= grid.x_min ||
      grid.y_max <= grid.y_min)
    fail(errc::invalid, "mcmc_density_compare: malformed grid");
  const int B = 64;
  BatchedCounts bc(grid, B);
  const long long total_retained = opt.steps / opt.thin;
  if (total_retained < 1)
    fail(errc::invalid, "mcmc_density_compare: no retained sweeps");
  long long index = 0;
  ChainStats stats = mcmc_sample(w, N, opt, [&](const EigenConfig& cfg) {
    const int batch = int(std::min(index * B / total_retained,
                                   (long long)(B - 1)));
    for (const cd& z : cfg.points) bc.add(z.real(), z.imag(), batch);
    ++index;
  });

  const double fold = w.chiral ? 4.0 : 2.0;
  std::vector<cd> cmasses(opt.masses.begin(), opt.masses.end());
  const auto predicted = [&](double x, double y) {
    return fold *
           correlation(basis, w, N, 1, {cd(x, y)}, cmasses).value.real();
  };
  DensityCompareReport rep = finish_compare(bc, index, predicted);
  rep.chain = stats;
  return rep;
}

}  // namespace sympf
