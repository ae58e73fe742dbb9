// Complex polynomial algebra, Gauss-Legendre quadrature over a truncated
// box in the complex plane, and Pfaffian evaluation with sign tracking.
#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sympf {

using cd = std::complex<double>;

// Error taxonomy shared by the whole library; codes mirror the C API /
// CLI exit codes.
enum class errc {
  verify_failed = 1,
  invalid = 2,   // domain / validation problems
  numeric = 3,   // NaN, non-convergence, accuracy failures
  singular = 4,  // near-singular denominators, degenerate weights
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw error(c, msg); }

// ----------------------------------------------------------------------
// Polynomials: real coefficients in ascending degree. The skew-orthogonal
// bases of this library are real-coefficient by construction; complex
// inputs are validated and narrowed at the API boundary.
using poly = std::vector<double>;

cd poly_eval(const poly& p, cd z);
double poly_eval(const poly& p, double x);
poly poly_derivative(const poly& p);

// Narrow a complex coefficient vector to a real one; imaginary parts
// above 1e-12 (relative to the largest coefficient) are a validation error.
poly poly_from_complex(const std::vector<cd>& coeffs);

// ----------------------------------------------------------------------
// Pfaffian of a dense antisymmetric matrix.
struct pfaffian_result {
  cd value = 0.0;
  // max over elimination steps of |running pivot product| / |Pf|; large
  // values flag catastrophic cancellation in the final value.
  double cancellation = 1.0;
};

// Parlett-Reid style skew-symmetric elimination with partial pivoting and
// explicit swap-sign tracking, O(n^3). Convention Pf([[0,a],[-a,0]]) = a,
// Pf of the empty matrix = 1, odd dimension -> 0.
// Antisymmetry is enforced on entry (tolerance 1e-12 on the symmetrized
// residual, relative to the largest entry); NaN/Inf entries are a numeric
// error.
pfaffian_result pfaffian(const Eigen::MatrixXcd& a);

// Antisymmetry validation used by pfaffian and by matrix assembly tests.
void check_antisymmetric(const Eigen::MatrixXcd& a, double tol = 1e-12);

// ----------------------------------------------------------------------
// Gauss-Legendre rules and tensor grids.

// n-point Gauss-Legendre nodes/weights on [a, b] (Newton iteration on the
// Legendre recurrence; accurate to ~1e-15).
void gauss_legendre(double a, double b, int n, std::vector<double>& x,
                    std::vector<double>& w);

// Half-width of a truncation box for a Gaussian scale sigma such that the
// neglected tail of x^degmax * exp(-x^2/(2 sigma^2)) is below 1e-14 of the
// integral; never less than 8 sigma.
double box_halfwidth(double sigma, int degmax);

// Symmetric axis on [-h, h] through the substitution x = +-exp(t) with a
// Gauss-Legendre rule in t per half-axis. Integrands that are analytic
// for x != 0 but merely continuous at the origin (the chiral weights)
// become analytic in t with exponentially decaying tails, so this
// converges spectrally. n is the total per-axis node budget.
void exp_graded_axis(double h, int n, std::vector<double>& x, std::vector<double>& w);

// Tensor-product quadrature grid over a truncated rectangle.
struct QuadratureGrid {
  std::vector<double> nodes_x, weights_x;
  std::vector<double> nodes_y, weights_y;
  double x_max = 0.0, y_max = 0.0;

  void validate() const;  // positive weights, strictly increasing nodes
};

// Tensor-product sum of f(x, y) over the grid. Deterministic summation
// order (row-major over nodes). NaN at a node is a numeric error naming
// the node.
cd quad2d(const std::function<cd(double, double)>& f, const QuadratureGrid& grid);

}  // namespace sympf
