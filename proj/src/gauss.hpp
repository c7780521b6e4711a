#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace probitar {

// Univariate standard normal kernels.
double std_normal_cdf(double x);
double std_normal_pdf(double x);
// Inverse CDF, Wichura's AS241 (double precision throughout the open interval).
double std_normal_quantile(double p);

// P(Y = s) for a single probit coordinate with predictor lam:
// s = 1 -> Phi(lam), s = 0 -> Phi(-lam).
inline double outcome_marginal(double lam, int s) {
  return std_normal_cdf(s ? lam : -lam);
}

// Bivariate outcome probability
//   P(Y_i = s_i, Y_j = s_j) = int_{I_{s_i}-lam_i} Phi((2 s_j - 1)
//                             (lam_j + r x) / sqrt(1-r^2)) phi(x) dx
// with I_1 = (0,inf), I_0 = (-inf,0].
struct Rect2Spec {
  double lam_i = 0.0;
  double lam_j = 0.0;
  double r = 0.0;  // |r| < 1
  int s_i = 0;
  int s_j = 0;
};

// Adaptive Gauss-Legendre evaluation of the rectangle probability.
// Domain truncated to |x| <= 8.5; result floored at 1e-300.
double rect2(const Rect2Spec& spec);

// d rect2 / d r in closed form: (2 s_i - 1)(2 s_j - 1) times the standard
// bivariate normal density at (-lam_i, -lam_j) with correlation r.
double rect2_dr(const Rect2Spec& spec);

// k-dimensional rectangle probability P(Y = s) for eps ~ N(0, R).
struct RectKSpec {
  Eigen::VectorXd lam;
  Eigen::MatrixXd corr;
  std::vector<int> s;
};

struct GhkResult {
  double prob = 0.0;
  double std_err = 0.0;
};

// Sequential-conditioning GHK estimator with truncated-normal inverse-CDF
// draws. Exact (zero std_err) for k = 1. Deterministic given seed.
GhkResult rect_k_ghk(const RectKSpec& spec, int n_draws, std::uint64_t seed);

// Same estimator on caller-supplied uniforms (n_draws x k, row-major), so a
// likelihood evaluation can share one set of common random numbers across
// observations and optimizer iterations.
GhkResult rect_k_ghk_with(const RectKSpec& spec,
                          const Eigen::MatrixXd& uniforms);

}  // namespace probitar
