// Command-line front end over the sympf C library: skew-orthogonal basis
// construction, Pfaffian observables on the complex plane and the real
// line, Hermitean-limit sweeps, Metropolis sampling, and the verification
// suites. Output is CSV/JSON with the resolved configuration embedded so
// identical invocations produce byte-identical files.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sympf/sympf.h"

using ojson = nlohmann::ordered_json;

namespace {

// Validation or library failure carrying the process exit code.
struct CliError {
  int code;
  std::string message;
};

void check(sympf_status st) {
  if (st != SYMPF_OK) throw CliError{static_cast<int>(st), sympf_last_error()};
}

[[noreturn]] void invalid(const std::string& msg) { throw CliError{2, msg}; }

struct WeightHandle {
  sympf_weight* p = nullptr;
  WeightHandle() = default;
  WeightHandle(WeightHandle&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
  WeightHandle& operator=(WeightHandle&& o) noexcept {
    if (this != &o) {
      sympf_weight_free(p);
      p = std::exchange(o.p, nullptr);
    }
    return *this;
  }
  WeightHandle(const WeightHandle&) = delete;
  WeightHandle& operator=(const WeightHandle&) = delete;
  ~WeightHandle() { sympf_weight_free(p); }
};

struct BasisHandle {
  sympf_basis* p = nullptr;
  BasisHandle() = default;
  BasisHandle(BasisHandle&& o) noexcept : p(std::exchange(o.p, nullptr)) {}
  BasisHandle& operator=(BasisHandle&& o) noexcept {
    if (this != &o) {
      sympf_basis_free(p);
      p = std::exchange(o.p, nullptr);
    }
    return *this;
  }
  BasisHandle(const BasisHandle&) = delete;
  BasisHandle& operator=(const BasisHandle&) = delete;
  ~BasisHandle() { sympf_basis_free(p); }
};

// ------------------------------------------------------------------
// Parsing

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string trimmed(std::string s) {
  const auto from = s.find_first_not_of(" \t");
  const auto to = s.find_last_not_of(" \t");
  if (from == std::string::npos) return "";
  return s.substr(from, to - from + 1);
}

// a+bi syntax: "0.4", "-0.5+0.2i", "0.3i", "1e-3-2e-4i".
bool parse_complex_one(std::string s, double& re, double& im) {
  s = trimmed(s);
  if (s.empty()) return false;
  if (s.back() != 'i' && s.back() != 'I') {
    im = 0.0;
    return parse_double(s, re);
  }
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t p = s.size(); p-- > 1;) {
    if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  std::string re_part = split == std::string::npos ? "0" : s.substr(0, split);
  std::string im_part = split == std::string::npos ? s : s.substr(split);
  if (im_part.empty() || im_part == "+" || im_part == "-") im_part += "1";
  return parse_double(re_part, re) && parse_double(im_part, im);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Interleaved (re, im) pairs from a comma-separated a+bi list.
std::vector<double> parse_complex_list(const std::string& csv,
                                       const char* what) {
  std::vector<double> out;
  if (trimmed(csv).empty()) return out;
  for (const auto& tok : split(csv, ',')) {
    double re = 0, im = 0;
    if (!parse_complex_one(tok, re, im))
      invalid(std::string(what) + ": cannot parse complex number '" + tok +
              "' (expected a+bi syntax)");
    out.push_back(re);
    out.push_back(im);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& csv, const char* what) {
  std::vector<double> cx = parse_complex_list(csv, what);
  std::vector<double> out;
  for (std::size_t i = 0; i < cx.size(); i += 2) {
    if (cx[i + 1] != 0.0)
      invalid(std::string(what) + ": value must be real, got imaginary part");
    out.push_back(cx[i]);
  }
  return out;
}

struct AxisSpec {
  double lo = 0, hi = 0;
  int n = 0;
};

struct GridSpec {
  AxisSpec x, y;
  bool has_y = false;
};

// "xmin:xmax:nx" or "xmin:xmax:nx,ymin:ymax:ny".
GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  const auto axes = split(s, ',');
  if (axes.empty() || axes.size() > 2)
    invalid("--grid expects xmin:xmax:nx[,ymin:ymax:ny]");
  auto parse_axis = [](const std::string& spec, AxisSpec& a) {
    const auto parts = split(spec, ':');
    double n = 0;
    if (parts.size() != 3 || !parse_double(parts[0], a.lo) ||
        !parse_double(parts[1], a.hi) || !parse_double(parts[2], n) ||
        n != std::floor(n) || n < 1 || a.hi <= a.lo)
      invalid("bad grid axis '" + spec + "' (expected min:max:count)");
    a.n = static_cast<int>(n);
  };
  parse_axis(axes[0], g.x);
  if (axes.size() == 2) {
    parse_axis(axes[1], g.y);
    g.has_y = true;
  }
  return g;
}

// ------------------------------------------------------------------
// Formatting

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string complex_str(double re, double im) {
  if (im == 0.0) return fmt17(re);
  return fmt17(re) + (im < 0 ? "" : "+") + fmt17(im) + "i";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError{3, "cannot open output file '" + path + "'"};
  f << text;
}

// ------------------------------------------------------------------
// Config file: JSON keys override command-line flags.

struct ConfigBinder {
  std::map<std::string, std::function<void(const ojson&)>> setters;

  template <class T>
  void bind(const std::string& key, T& var) {
    setters[key] = [&var](const ojson& v) { var = v.get<T>(); };
  }

  void apply(const std::string& path) {
    if (path.empty()) return;
    std::ifstream f(path);
    if (!f) invalid("cannot open config file '" + path + "'");
    ojson cfg;
    try {
      f >> cfg;
    } catch (const nlohmann::json::exception& e) {
      invalid("config parse failure: " + std::string(e.what()));
    }
    for (const auto& [key, value] : cfg.items()) {
      const auto it = setters.find(key);
      if (it == setters.end()) invalid("unknown config key '" + key + "'");
      try {
        it->second(value);
      } catch (const nlohmann::json::exception& e) {
        invalid("config key '" + key + "': " + e.what());
      }
    }
  }
};

// ------------------------------------------------------------------
// Shared ensemble options

struct EnsembleOpts {
  std::string family = "gse";
  int n = 1;
  double tau = 0.5;
  double mu = 0.5;
  int nu = 0;
};

void add_ensemble_flags(CLI::App* cmd, EnsembleOpts& e, ConfigBinder& cfg) {
  cmd->add_option("--family", e.family, "ensemble family")
      ->check(CLI::IsMember({"gse", "chgse"}))
      ->capture_default_str();
  cmd->add_option("--n", e.n, "number of eigenvalues N (pairs of a 2N x 2N "
                              "matrix)")
      ->capture_default_str();
  cmd->add_option("--tau", e.tau, "gse non-Hermiticity, 0 <= tau <= 1")
      ->capture_default_str();
  cmd->add_option("--mu", e.mu, "chgse non-Hermiticity, 0 < mu <= 1")
      ->capture_default_str();
  cmd->add_option("--nu", e.nu, "chgse topological index, nu >= 0")
      ->capture_default_str();
  cfg.bind("family", e.family);
  cfg.bind("n", e.n);
  cfg.bind("tau", e.tau);
  cfg.bind("mu", e.mu);
  cfg.bind("nu", e.nu);
}

bool is_chiral(const EnsembleOpts& e) { return e.family == "chgse"; }

WeightHandle make_weight(const EnsembleOpts& e) {
  WeightHandle w;
  if (e.family == "gse")
    check(sympf_weight_gse(e.n, e.tau, &w.p));
  else
    check(sympf_weight_chgse(e.n, e.mu, e.nu, &w.p));
  return w;
}

// projected = true builds the basis at the Hermitean-limit parameter.
BasisHandle make_basis(const EnsembleOpts& e, int pairs, bool projected) {
  BasisHandle b;
  if (e.family == "gse")
    check(sympf_basis_gse(e.n, projected ? 1.0 : e.tau, pairs, &b.p));
  else
    check(sympf_basis_chgse(e.n, projected ? 0.0 : e.mu, e.nu, pairs, &b.p));
  return b;
}

ojson base_config(const char* command, const EnsembleOpts& e, bool projected) {
  ojson c;
  c["command"] = command;
  c["family"] = e.family;
  c["n"] = e.n;
  if (e.family == "gse") {
    c["tau"] = projected ? 1.0 : e.tau;
  } else {
    c["mu"] = projected ? 0.0 : e.mu;
    c["nu"] = e.nu;
  }
  return c;
}

ojson complex_array(const std::vector<double>& interleaved) {
  ojson a = ojson::array();
  for (std::size_t i = 0; i < interleaved.size(); i += 2)
    a.push_back({interleaved[i], interleaved[i + 1]});
  return a;
}

// Symmetric perturbation of mass pairs closer than the distinctness rule
// allows; opted into by --perturb-masses.
void perturb_masses(std::vector<double>& ms, double eps) {
  const std::size_t count = ms.size() / 2;
  double scale = 1.0;
  for (std::size_t i = 0; i < count; ++i)
    scale = std::max(scale, std::hypot(ms[2 * i], ms[2 * i + 1]));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      const double d = std::hypot(ms[2 * i] - ms[2 * j],
                                  ms[2 * i + 1] - ms[2 * j + 1]);
      if (d <= 1e-9 * scale) {
        ms[2 * i] -= eps;
        ms[2 * j] += eps;
      }
    }
}

// Default evaluation box for one-point scans, wide enough to hold all but
// ~1e-8 of the spectral density.
double box_factor(bool chiral, int n) {
  return (chiral ? 2.5 : 1.5) * std::sqrt(2.0 * n) + 3.0;
}

// ------------------------------------------------------------------
// skewpoly

struct SkewpolyOpts {
  EnsembleOpts e;
  int count = 4;
  bool general = false;
  int points = 0;
  double scale = 0.0;
  bool verify = false;
  double tolerance = 1e-6;
  std::string out;
  std::string config;
};

int run_skewpoly(SkewpolyOpts& o) {
  WeightHandle w = make_weight(o.e);
  BasisHandle b;
  double cond = 0.0;
  if (o.general)
    check(sympf_basis_general(w.p, o.count, o.points, o.scale, &cond, &b.p));
  else
    b = make_basis(o.e, o.count, false);

  char* text = nullptr;
  check(sympf_basis_to_json(b.p, &text));
  ojson basis = ojson::parse(text);
  sympf_string_free(text);

  ojson cfg = base_config("skewpoly", o.e, false);
  cfg["count"] = o.count;
  cfg["general"] = o.general;
  if (o.general) {
    cfg["points"] = o.points;
    cfg["scale"] = o.scale;
  }
  cfg["verify"] = o.verify;

  ojson doc;
  doc["version"] = sympf_version();
  doc["config"] = cfg;
  if (o.general) doc["condition_estimate"] = cond;
  doc["basis"] = basis;

  double residual = 0.0;
  if (o.verify) {
    check(sympf_skew_residual(b.p, w.p, o.points, &residual));
    doc["residual"] = residual;
    std::fprintf(stderr,
                 "max skew-orthogonality residual = %.3e (tolerance %.0e)\n",
                 residual, o.tolerance);
  }
  write_text(o.out, doc.dump(2) + "\n");
  return o.verify && residual > o.tolerance ? 1 : 0;
}

// ------------------------------------------------------------------
// correlator

struct CorrelatorOpts {
  EnsembleOpts e;
  int k = 1;
  std::string points;
  std::string masses;
  std::string grid;
  bool projected = false;
  int count = 0;
  double perturb = 0.0;
  std::string out;
  std::string config;
};

int run_correlator(CorrelatorOpts& o) {
  if (o.k < 1) invalid("--k must be at least 1");
  std::vector<double> masses = parse_complex_list(o.masses, "--masses");
  if (o.perturb > 0.0) perturb_masses(masses, o.perturb);
  const int n_masses = static_cast<int>(masses.size() / 2);
  if (o.projected) {
    for (std::size_t i = 1; i < masses.size(); i += 2)
      if (masses[i] != 0.0) invalid("--projected masses must be real");
  }

  WeightHandle w = make_weight(o.e);
  const int pairs = o.count > 0 ? o.count : o.e.n + n_masses / 2 + 1;
  BasisHandle b = make_basis(o.e, pairs, o.projected);

  ojson cfg = base_config("correlator", o.e, o.projected);
  cfg["k"] = o.k;
  cfg["projected"] = o.projected;
  cfg["masses"] = complex_array(masses);
  cfg["count"] = pairs;

  std::ostringstream csv;
  ojson diag;
  double max_cancel_num = 0.0, max_cancel_den = 0.0;
  long long evals = 0;

  auto eval_complex = [&](const double* pts, double& re, double& im) {
    sympf_correlator_diag d{};
    check(sympf_correlation(b.p, w.p, o.e.n, o.k, pts, masses.data(),
                            n_masses, &re, &im, &d));
    max_cancel_num = std::max(max_cancel_num, d.cancellation_numerator);
    max_cancel_den = std::max(max_cancel_den, d.cancellation_denominator);
    ++evals;
  };
  auto eval_projected = [&](const double* xs, double& val) {
    std::vector<double> real_masses(n_masses);
    for (int i = 0; i < n_masses; ++i) real_masses[i] = masses[2 * i];
    check(sympf_projected_correlation(b.p, w.p, o.e.n, o.k, xs,
                                      real_masses.data(), n_masses, &val));
    ++evals;
  };

  if (!o.points.empty()) {
    // Explicit evaluation points, one row per k-tuple.
    cfg["points"] = o.points;
    if (o.projected) {
      const auto xs = parse_real_list(o.points, "--points");
      if (xs.size() % o.k != 0)
        invalid("--points length must be a multiple of k");
      csv << "# sympf " << sympf_version() << "\n# config " << cfg.dump()
          << "\n";
      for (int c = 0; c < o.k; ++c) csv << "x" << c + 1 << ",";
      csv << "value\n";
      for (std::size_t r = 0; r < xs.size(); r += o.k) {
        double val = 0.0;
        eval_projected(&xs[r], val);
        for (int c = 0; c < o.k; ++c) csv << fmt17(xs[r + c]) << ",";
        csv << fmt17(val) << "\n";
      }
    } else {
      const auto pts = parse_complex_list(o.points, "--points");
      const std::size_t per_row = 2 * static_cast<std::size_t>(o.k);
      if (pts.size() % per_row != 0)
        invalid("--points length must be a multiple of k");
      csv << "# sympf " << sympf_version() << "\n# config " << cfg.dump()
          << "\n";
      for (int c = 0; c < o.k; ++c) csv << "x" << c + 1 << ",y" << c + 1 << ",";
      csv << "re,im\n";
      for (std::size_t r = 0; r < pts.size(); r += per_row) {
        double re = 0.0, im = 0.0;
        eval_complex(&pts[r], re, im);
        for (std::size_t c = 0; c < per_row; ++c) csv << fmt17(pts[r + c]) << ",";
        csv << fmt17(re) << "," << fmt17(im) << "\n";
      }
    }
  } else {
    // Midpoint scan of the one-point function over a grid.
    if (o.k != 1) invalid("grid scans support k = 1 only; pass --points");
    GridSpec g;
    if (!o.grid.empty()) {
      g = parse_grid(o.grid);
    } else if (o.projected) {
      const double sigma = o.e.family == "gse" ? 1.0 / std::sqrt(o.e.n)
                                               : 1.0 / std::sqrt(2.0 * o.e.n);
      const double h = sigma * box_factor(is_chiral(o.e), o.e.n);
      g.x = {-h, h, 60};
    } else {
      double sx = 0, sy = 0;
      check(sympf_weight_scales(w.p, &sx, &sy));
      const double f = box_factor(is_chiral(o.e), o.e.n);
      g.x = {-sx * f, sx * f, 60};
      g.y = {-sy * f, sy * f, 60};
      g.has_y = true;
    }
    double integral = 0.0;
    if (o.projected) {
      if (g.has_y) invalid("--projected grids are one-dimensional");
      cfg["grid"] = fmt17(g.x.lo) + ":" + fmt17(g.x.hi) + ":" +
                    std::to_string(g.x.n);
      csv << "# sympf " << sympf_version() << "\n# config " << cfg.dump()
          << "\nx,value\n";
      const double dx = (g.x.hi - g.x.lo) / g.x.n;
      for (int i = 0; i < g.x.n; ++i) {
        const double x = g.x.lo + (i + 0.5) * dx;
        double val = 0.0;
        eval_projected(&x, val);
        integral += val * dx;
        csv << fmt17(x) << "," << fmt17(val) << "\n";
      }
    } else {
      if (!o.grid.empty() && !g.has_y)
        invalid("complex-plane grids need both axes");
      cfg["grid"] = fmt17(g.x.lo) + ":" + fmt17(g.x.hi) + ":" +
                    std::to_string(g.x.n) + "," + fmt17(g.y.lo) + ":" +
                    fmt17(g.y.hi) + ":" + std::to_string(g.y.n);
      csv << "# sympf " << sympf_version() << "\n# config " << cfg.dump()
          << "\nx,y,re,im\n";
      const double dx = (g.x.hi - g.x.lo) / g.x.n;
      const double dy = (g.y.hi - g.y.lo) / g.y.n;
      for (int i = 0; i < g.x.n; ++i) {
        for (int j = 0; j < g.y.n; ++j) {
          const double pt[2] = {g.x.lo + (i + 0.5) * dx,
                                g.y.lo + (j + 0.5) * dy};
          double re = 0.0, im = 0.0;
          eval_complex(pt, re, im);
          integral += re * dx * dy;
          csv << fmt17(pt[0]) << "," << fmt17(pt[1]) << "," << fmt17(re) << ","
              << fmt17(im) << "\n";
        }
      }
    }
    diag["integral_estimate"] = integral;
  }

  diag["evaluations"] = evals;
  if (!o.projected) {
    diag["max_cancellation_numerator"] = max_cancel_num;
    diag["max_cancellation_denominator"] = max_cancel_den;
  }
  csv << "# diagnostics " << diag.dump() << "\n";
  write_text(o.out, csv.str());
  if (!o.out.empty()) {
    ojson side;
    side["version"] = sympf_version();
    side["config"] = cfg;
    side["diagnostics"] = diag;
    write_text(o.out + ".json", side.dump(2) + "\n");
  }
  return 0;
}

// ------------------------------------------------------------------
// charpoly and partition

struct CharpolyOpts {
  EnsembleOpts e;
  std::string masses;
  int count = 0;
  double perturb = 0.0;
  std::string out;
  std::string config;
};

int run_charpoly(CharpolyOpts& o) {
  std::vector<double> masses = parse_complex_list(o.masses, "--masses");
  if (masses.empty()) invalid("charpoly needs at least one mass");
  if (o.perturb > 0.0) perturb_masses(masses, o.perturb);
  const int n_masses = static_cast<int>(masses.size() / 2);
  const int pairs = o.count > 0 ? o.count : o.e.n + n_masses / 2 + 1;
  BasisHandle b = make_basis(o.e, pairs, false);
  double re = 0.0, im = 0.0;
  check(sympf_char_expectation(b.p, o.e.n, masses.data(), n_masses, &re, &im));

  ojson cfg = base_config("charpoly", o.e, false);
  cfg["masses"] = complex_array(masses);
  cfg["count"] = pairs;
  ojson doc;
  doc["version"] = sympf_version();
  doc["config"] = cfg;
  doc["value"] = {re, im};
  doc["value_str"] = complex_str(re, im);
  write_text(o.out, doc.dump(2) + "\n");
  return 0;
}

struct PartitionOpts {
  EnsembleOpts e;
  std::string masses;
  int count = 0;
  double perturb = 0.0;
  bool brute = false;
  int points_per_axis = 0;
  int threads = 1;
  std::string grid;
  std::string out;
  std::string config;
};

int run_partition(PartitionOpts& o) {
  std::vector<double> masses = parse_complex_list(o.masses, "--masses");
  if (o.perturb > 0.0) perturb_masses(masses, o.perturb);
  const int n_masses = static_cast<int>(masses.size() / 2);
  const int pairs = o.count > 0 ? o.count : o.e.n + n_masses / 2 + 1;
  BasisHandle b = make_basis(o.e, pairs, false);
  double re = 0.0, im = 0.0;
  check(sympf_partition(b.p, o.e.n, masses.data(), n_masses, &re, &im));

  ojson cfg = base_config("partition", o.e, false);
  cfg["masses"] = complex_array(masses);
  cfg["count"] = pairs;
  cfg["brute"] = o.brute;
  ojson doc;
  doc["version"] = sympf_version();
  doc["value"] = {re, im};
  doc["value_str"] = complex_str(re, im);

  if (o.brute) {
    WeightHandle w = make_weight(o.e);
    double bx[4] = {0, 0, 0, 0};
    int nx = 0, ny = 0;
    if (!o.grid.empty()) {
      const GridSpec g = parse_grid(o.grid);
      if (!g.has_y) invalid("brute-force grids need both axes");
      bx[0] = g.x.lo;
      bx[1] = g.x.hi;
      bx[2] = g.y.lo;
      bx[3] = g.y.hi;
      nx = g.x.n;
      ny = g.y.n;
      cfg["grid"] = o.grid;
    }
    cfg["points_per_axis"] = o.points_per_axis;
    cfg["threads"] = o.threads;
    double bre = 0.0, bim = 0.0;
    check(sympf_brute_partition(w.p, o.e.n, masses.data(), n_masses,
                                o.points_per_axis, o.threads, bx[0], bx[1], nx,
                                bx[2], bx[3], ny, &bre, &bim));
    doc["brute"] = {bre, bim};
    const double den = std::max(std::hypot(bre, bim), 1e-300);
    doc["rel_difference"] = std::hypot(re - bre, im - bim) / den;
  }
  doc["config"] = cfg;
  write_text(o.out, doc.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------
// verify

struct VerifyOpts {
  std::string suite;
  long long steps = 1000000;
  unsigned long long seed = 0;
  int threads = 1;
  std::string config;
};

int run_verify(VerifyOpts& o) {
  unsigned long long seed = o.seed;
  if (seed == 0) seed = o.suite == "mcmc" ? 20240901ULL : 12345ULL;
  char* table = nullptr;
  const sympf_status st =
      sympf_verify(o.suite.c_str(), o.steps, seed, o.threads, &table);
  if (table) {
    std::fputs(table, stdout);
    sympf_string_free(table);
  }
  if (st == SYMPF_OK) return 0;
  if (st == SYMPF_VERIFY_FAILED) return 1;
  throw CliError{static_cast<int>(st), sympf_last_error()};
}

// ------------------------------------------------------------------
// sample

struct SampleOpts {
  EnsembleOpts e;
  long long steps = 10000;
  long long burn_in = 0;
  unsigned long long seed = 1;
  int thin = 1;
  std::string masses;
  std::string out;
  std::string config;
};

int run_sample(SampleOpts& o) {
  const std::vector<double> masses = parse_real_list(o.masses, "--masses");
  WeightHandle w = make_weight(o.e);

  ojson cfg = base_config("sample", o.e, false);
  cfg["steps"] = o.steps;
  cfg["burn_in"] = o.burn_in;
  cfg["seed"] = o.seed;
  cfg["thin"] = o.thin;
  {
    ojson ma = ojson::array();
    for (double m : masses) ma.push_back(m);
    cfg["masses"] = ma;
  }

  std::ostringstream csv;
  csv << "# sympf " << sympf_version() << "\n# config " << cfg.dump()
      << "\nstep,site,x,y\n";
  struct SinkCtx {
    std::ostringstream* out;
    long long step = 0;
  } ctx{&csv, 0};
  auto sink = [](void* raw, const double* pts, int n) {
    auto* c = static_cast<SinkCtx*>(raw);
    for (int i = 0; i < n; ++i)
      *c->out << c->step << "," << i << "," << fmt17(pts[2 * i]) << ","
              << fmt17(pts[2 * i + 1]) << "\n";
    ++c->step;
  };
  sympf_chain_stats stats{};
  check(sympf_sample(w.p, o.e.n, o.steps, o.burn_in, o.seed, o.thin,
                     masses.data(), static_cast<int>(masses.size()), sink,
                     &ctx, &stats));
  ojson st;
  st["retained_sweeps"] = stats.steps;
  st["burn_in"] = stats.burn_in;
  st["acceptance_rate"] = stats.acceptance_rate;
  st["seed"] = stats.seed;
  st["effective_samples"] = stats.effective_samples;
  st["proposal_scale"] = stats.proposal_scale;
  csv << "# stats " << st.dump() << "\n";
  write_text(o.out, csv.str());
  if (!o.out.empty()) {
    ojson side;
    side["version"] = sympf_version();
    side["config"] = cfg;
    side["stats"] = st;
    write_text(o.out + ".json", side.dump(2) + "\n");
  }
  return 0;
}

// ------------------------------------------------------------------
// sweep

struct SweepOpts {
  std::string family = "gse";
  int n = 1;
  int nu = 0;
  std::string params;
  std::string out;
  std::string config;
};

int run_sweep(SweepOpts& o) {
  std::vector<double> params = parse_real_list(o.params, "--params");
  if (params.empty())
    params = o.family == "gse" ? std::vector<double>{0.9, 0.99, 0.999}
                               : std::vector<double>{0.3, 0.1, 0.03};
  const int n_params = static_cast<int>(params.size());
  std::vector<double> sup(n_params), rel(n_params);
  int monotone = 0;
  double final_rel = 0.0;
  check(sympf_hermitean_sweep(o.family.c_str(), o.n, o.nu, params.data(),
                              n_params, sup.data(), rel.data(), &monotone,
                              &final_rel));

  ojson cfg;
  cfg["command"] = "sweep";
  cfg["family"] = o.family;
  cfg["n"] = o.n;
  if (o.family == "chgse") cfg["nu"] = o.nu;
  {
    ojson pa = ojson::array();
    for (double p : params) pa.push_back(p);
    cfg["params"] = pa;
  }

  std::ostringstream csv;
  csv << "# sympf " << sympf_version() << "\n# config " << cfg.dump()
      << "\nparam,sup_deviation,rel_to_peak\n";
  for (int i = 0; i < n_params; ++i)
    csv << fmt17(params[i]) << "," << fmt17(sup[i]) << "," << fmt17(rel[i])
        << "\n";
  ojson res;
  res["monotone"] = monotone != 0;
  res["final_rel_deviation"] = final_rel;
  csv << "# result " << res.dump() << "\n";
  write_text(o.out, csv.str());
  if (!o.out.empty()) {
    ojson side;
    side["version"] = sympf_version();
    side["config"] = cfg;
    side["result"] = res;
    write_text(o.out + ".json", side.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Pfaffian partition functions and complex-eigenvalue correlators of "
      "the symplectic and chiral symplectic non-Hermitean ensembles"};
  app.set_version_flag("--version", std::string(sympf_version()));
  app.require_subcommand(1);

  SkewpolyOpts sp;
  ConfigBinder sp_cfg;
  auto* sp_cmd = app.add_subcommand(
      "skewpoly", "construct a skew-orthogonal basis and write it as JSON");
  add_ensemble_flags(sp_cmd, sp.e, sp_cfg);
  sp_cmd->add_option("--count", sp.count, "polynomial pairs to construct")
      ->capture_default_str();
  sp_cmd->add_flag("--general", sp.general,
                   "use the numerical Gram-Schmidt construction instead of "
                   "the closed forms");
  sp_cmd->add_option("--points", sp.points,
                     "quadrature points per axis (0 = default)");
  sp_cmd->add_option("--scale", sp.scale,
                     "variable rescaling for --general (0 = none)");
  sp_cmd->add_flag("--verify", sp.verify,
                   "also measure the max skew-orthogonality residual");
  sp_cmd->add_option("--tol", sp.tolerance,
                     "residual tolerance for --verify")
      ->capture_default_str();
  sp_cmd->add_option("--out", sp.out, "output path (default stdout)");
  sp_cmd->add_option("--config", sp.config,
                     "JSON config file; keys override flags");
  sp_cfg.bind("count", sp.count);
  sp_cfg.bind("general", sp.general);
  sp_cfg.bind("points", sp.points);
  sp_cfg.bind("scale", sp.scale);
  sp_cfg.bind("verify", sp.verify);
  sp_cfg.bind("tolerance", sp.tolerance);
  sp_cfg.bind("out", sp.out);

  CorrelatorOpts co;
  ConfigBinder co_cfg;
  auto* co_cmd = app.add_subcommand(
      "correlator", "evaluate k-point correlation functions");
  add_ensemble_flags(co_cmd, co.e, co_cfg);
  co_cmd->add_option("--k", co.k, "number of fixed eigenvalues")
      ->capture_default_str();
  co_cmd->add_option("--points", co.points,
                     "comma-separated a+bi evaluation points (row-major "
                     "k-tuples)");
  co_cmd->add_option("--masses", co.masses, "comma-separated a+bi masses");
  co_cmd->add_option("--grid", co.grid,
                     "scan grid xmin:xmax:nx[,ymin:ymax:ny] (midpoints)");
  co_cmd->add_flag("--projected", co.projected,
                   "Hermitean-limit correlator on the real line");
  co_cmd->add_option("--count", co.count,
                     "basis pairs (0 = smallest sufficient)");
  co_cmd->add_option("--perturb-masses", co.perturb,
                     "symmetrically split near-coincident masses by epsilon");
  co_cmd->add_option("--out", co.out,
                     "CSV output path; also writes <out>.json (default "
                     "stdout)");
  co_cmd->add_option("--config", co.config,
                     "JSON config file; keys override flags");
  co_cfg.bind("k", co.k);
  co_cfg.bind("points", co.points);
  co_cfg.bind("masses", co.masses);
  co_cfg.bind("grid", co.grid);
  co_cfg.bind("projected", co.projected);
  co_cfg.bind("count", co.count);
  co_cfg.bind("perturb_masses", co.perturb);
  co_cfg.bind("out", co.out);

  CharpolyOpts ch;
  ConfigBinder ch_cfg;
  auto* ch_cmd = app.add_subcommand(
      "charpoly", "expectation of characteristic-polynomial products");
  add_ensemble_flags(ch_cmd, ch.e, ch_cfg);
  ch_cmd->add_option("--masses", ch.masses, "comma-separated a+bi masses")
      ->required();
  ch_cmd->add_option("--count", ch.count,
                     "basis pairs (0 = smallest sufficient)");
  ch_cmd->add_option("--perturb-masses", ch.perturb,
                     "symmetrically split near-coincident masses by epsilon");
  ch_cmd->add_option("--out", ch.out, "output path (default stdout)");
  ch_cmd->add_option("--config", ch.config,
                     "JSON config file; keys override flags");
  ch_cfg.bind("masses", ch.masses);
  ch_cfg.bind("count", ch.count);
  ch_cfg.bind("perturb_masses", ch.perturb);
  ch_cfg.bind("out", ch.out);

  PartitionOpts pa;
  ConfigBinder pa_cfg;
  auto* pa_cmd =
      app.add_subcommand("partition", "massive partition function Z_N^(M)");
  add_ensemble_flags(pa_cmd, pa.e, pa_cfg);
  pa_cmd->add_option("--masses", pa.masses, "comma-separated a+bi masses");
  pa_cmd->add_option("--count", pa.count,
                     "basis pairs (0 = smallest sufficient)");
  pa_cmd->add_option("--perturb-masses", pa.perturb,
                     "symmetrically split near-coincident masses by epsilon");
  pa_cmd->add_flag("--brute", pa.brute,
                   "also integrate the eigenvalue representation directly "
                   "(N <= 2)");
  pa_cmd->add_option("--points-per-axis", pa.points_per_axis,
                     "brute-force quadrature points per axis (0 = default)");
  pa_cmd->add_option("--threads", pa.threads, "brute-force worker threads")
      ->capture_default_str();
  pa_cmd->add_option("--grid", pa.grid,
                     "brute-force box xmin:xmax:nx,ymin:ymax:ny");
  pa_cmd->add_option("--out", pa.out, "output path (default stdout)");
  pa_cmd->add_option("--config", pa.config,
                     "JSON config file; keys override flags");
  pa_cfg.bind("masses", pa.masses);
  pa_cfg.bind("count", pa.count);
  pa_cfg.bind("perturb_masses", pa.perturb);
  pa_cfg.bind("brute", pa.brute);
  pa_cfg.bind("points_per_axis", pa.points_per_axis);
  pa_cfg.bind("threads", pa.threads);
  pa_cfg.bind("grid", pa.grid);
  pa_cfg.bind("out", pa.out);

  VerifyOpts ve;
  ConfigBinder ve_cfg;
  auto* ve_cmd = app.add_subcommand("verify", "run a verification suite");
  ve_cmd
      ->add_option("suite", ve.suite,
                   "one of theorem1, theorem2, identities, mcmc")
      ->required()
      ->check(CLI::IsMember({"theorem1", "theorem2", "identities", "mcmc"}));
  ve_cmd->add_option("--steps", ve.steps, "chain sweeps for the mcmc suite")
      ->capture_default_str();
  ve_cmd->add_option("--seed", ve.seed,
                     "RNG seed for identities/mcmc (0 = suite default)");
  ve_cmd->add_option("--threads", ve.threads,
                     "worker threads for brute-force quadrature")
      ->capture_default_str();
  ve_cmd->add_option("--config", ve.config,
                     "JSON config file; keys override flags");
  ve_cfg.bind("suite", ve.suite);
  ve_cfg.bind("steps", ve.steps);
  ve_cfg.bind("seed", ve.seed);
  ve_cfg.bind("threads", ve.threads);

  SampleOpts sa;
  ConfigBinder sa_cfg;
  auto* sa_cmd = app.add_subcommand(
      "sample", "Metropolis samples of the joint eigenvalue density");
  add_ensemble_flags(sa_cmd, sa.e, sa_cfg);
  sa_cmd->add_option("--steps", sa.steps, "post-burn-in sweeps to retain")
      ->capture_default_str();
  sa_cmd->add_option("--burn-in", sa.burn_in,
                     "burn-in sweeps (0 = steps/10, clamped)");
  sa_cmd->add_option("--seed", sa.seed, "RNG seed")->capture_default_str();
  sa_cmd->add_option("--thin", sa.thin, "keep every thin-th sweep")
      ->capture_default_str();
  sa_cmd->add_option("--masses", sa.masses, "comma-separated real masses");
  sa_cmd->add_option("--out", sa.out,
                     "CSV output path; also writes <out>.json (default "
                     "stdout)");
  sa_cmd->add_option("--config", sa.config,
                     "JSON config file; keys override flags");
  sa_cfg.bind("steps", sa.steps);
  sa_cfg.bind("burn_in", sa.burn_in);
  sa_cfg.bind("seed", sa.seed);
  sa_cfg.bind("thin", sa.thin);
  sa_cfg.bind("masses", sa.masses);
  sa_cfg.bind("out", sa.out);

  SweepOpts sw;
  ConfigBinder sw_cfg;
  auto* sw_cmd = app.add_subcommand(
      "sweep", "Hermitean-limit convergence of the one-point density");
  sw_cmd->add_option("--family", sw.family, "ensemble family")
      ->check(CLI::IsMember({"gse", "chgse"}))
      ->capture_default_str();
  sw_cmd->add_option("--n", sw.n, "number of eigenvalues N")
      ->capture_default_str();
  sw_cmd->add_option("--nu", sw.nu, "chgse topological index")
      ->capture_default_str();
  sw_cmd->add_option("--params", sw.params,
                     "comma-separated non-Hermiticity parameters "
                     "(default family sequence)");
  sw_cmd->add_option("--out", sw.out,
                     "CSV output path; also writes <out>.json (default "
                     "stdout)");
  sw_cmd->add_option("--config", sw.config,
                     "JSON config file; keys override flags");
  sw_cfg.bind("family", sw.family);
  sw_cfg.bind("n", sw.n);
  sw_cfg.bind("nu", sw.nu);
  sw_cfg.bind("params", sw.params);
  sw_cfg.bind("out", sw.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sp_cmd->parsed()) {
      sp_cfg.apply(sp.config);
      return run_skewpoly(sp);
    }
    if (co_cmd->parsed()) {
      co_cfg.apply(co.config);
      return run_correlator(co);
    }
    if (ch_cmd->parsed()) {
      ch_cfg.apply(ch.config);
      return run_charpoly(ch);
    }
    if (pa_cmd->parsed()) {
      pa_cfg.apply(pa.config);
      return run_partition(pa);
    }
    if (ve_cmd->parsed()) {
      ve_cfg.apply(ve.config);
      return run_verify(ve);
    }
    if (sa_cmd->parsed()) {
      sa_cfg.apply(sa.config);
      return run_sample(sa);
    }
    if (sw_cmd->parsed()) {
      sw_cfg.apply(sw.config);
      return run_sweep(sw);
    }
  } catch (const CliError& err) {
    std::cerr << "error: " << err.message << "\n";
    return err.code;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return 0;
}
