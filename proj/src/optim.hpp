#pragma once

#include <Eigen/Dense>
#include <functional>

#include "likelihood.hpp"

namespace probitar {

struct OptimOptions {
  int max_iters = 0;  // <= 0: 2000 * dim
  double f_tol = 1e-9;
  double x_tol = 1e-7;
  double simplex_init_step = 0.25;
  int restarts = 1;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  bool converged = false;
};

// Nelder-Mead simplex ascent (descent on -f). Terminates once the simplex
// f-spread < f_tol and its diameter < x_tol, or at max_iters. Ties
// in f are broken toward the lexicographically smaller vertex so runs are
// reproducible; iterates are invariant under adding a constant to f.
OptimResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                        const Eigen::VectorXd& x0, const OptimOptions& opts = {});

// Golden-section / parabolic maximization on [lo, hi]; never evaluates
// outside the interval. Endpoints are compared too, so a monotone objective
// returns the boundary exactly.
struct BrentResult {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
};
BrentResult brent_max(const std::function<double(double)>& objective,
                      double lo, double hi, double tol = 1e-8);

// Bound keeping every strictly-lower Cholesky row inside the admissible ball:
// row norms are squashed to at most kCorrBound (0.9987^2 ~ 0.9974 < 0.9975).
inline constexpr double kCorrBound = 0.9987;

// Spherical reparameterization of the correlation matrix: u (one block of
// i-1 unbounded reals per row i) maps to strictly-lower Cholesky rows with
// direction u/|u| and norm kCorrBound * tanh(|u|); L(i,i) fills the diagonal.
// Total on finite u; always yields a valid correlation matrix.
CorrParam corr_transform(const Eigen::VectorXd& u, int k);
// Inverse on the interior; throws std::invalid_argument when a Cholesky row
// of the given correlation matrix has norm >= kCorrBound (boundary case).
Eigen::VectorXd corr_untransform(const CorrParam& corr);

}  // namespace probitar
