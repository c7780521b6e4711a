#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "model.hpp"

namespace probitar {

// gamma flattens C, A_1..A_p, B by columns:
//   [C(1..k) | A_1 col-major | ... | A_p col-major | B col-major]
// so equation i owns the entries (C(i), A_l(i,:), B(i,:)) scattered with
// stride k. Length k(1 + p k + d).
struct GammaDims {
  int k = 1;
  int p = 1;
  int d = 0;
  int length() const { return k * (1 + p * k + d); }
  int row_length() const { return 1 + p * k + d; }
};

Eigen::VectorXd pack_gamma(const ModelParams& params);
// Fills A, B, C of `out` (k, p, d must be set beforehand).
void unpack_gamma(const Eigen::VectorXd& gamma, ModelParams& out);

// The per-equation slice of gamma in row order (C_i, A_1(i,:), .., B(i,:)).
Eigen::VectorXd gather_equation(const Eigen::VectorXd& gamma,
                                const GammaDims& dims, int eq);
void scatter_equation(const Eigen::VectorXd& row, const GammaDims& dims,
                      int eq, Eigen::VectorXd& gamma);

// Validated pairwise-correlation parameterization of R in the order
// r = (R(1,2),...,R(1,k),R(2,3),...,R(k-1,k)).
struct CorrParam {
  int k = 1;
  Eigen::VectorXd r;

  static CorrParam identity(int k);
  static CorrParam from_matrix(const Eigen::MatrixXd& R);
  static int pair_index(int i, int j, int k);  // 0-based, i < j

  int n_pairs() const { return k * (k - 1) / 2; }
  double pair(int i, int j) const { return r[pair_index(i, j, k)]; }
  void set_pair(int i, int j, double v) { r[pair_index(i, j, k)] = v; }
  Eigen::MatrixXd matrix() const;
  // Reconstructed R must be a valid correlation matrix (PD, unit diagonal).
  void validate() const;
};

// Per-observation design rows shared by every equation:
//   design_t = (1, Y_{t-1}, ..., Y_{t-p}, X_{t-1}),   t = p+1..T per path.
// lambda_{i,t} = design_t . equation_row_i(gamma).
struct DesignMatrix {
  Eigen::MatrixXd design;                                     // rows x (1+pk+d)
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> y;  // rows x k
  GammaDims dims;
  Eigen::Index rows_per_path = 0;  // T - p (paths are contiguous row blocks)

  static DesignMatrix build(const PanelData& panel, int p);
  Eigen::Index rows() const { return design.rows(); }
  // lambda column for one equation
  Eigen::VectorXd lambda(const Eigen::VectorXd& equation_row) const {
    return design * equation_row;
  }
};

// Sums per-path partial sums in a canonical (sorted) order, so objectives
// are exactly invariant under path reordering in a panel.
double reduce_path_sums(std::vector<double> partials);

struct LikelihoodDiag {
  long clamp_events = 0;
};

// h_y(s) = y log Phi(s) + (1-y) log Phi(-s), with the Phi argument of the
// log clamped below at 1e-300 (clamps are counted, never fatal).
double marginal_pl(const Eigen::VectorXd& gamma, const PanelData& panel, int p,
                   LikelihoodDiag* diag = nullptr);
Eigen::VectorXd marginal_pl_grad(const Eigen::VectorXd& gamma,
                                 const PanelData& panel, int p);

// Pairwise objective for coordinates i < j (0-based) at correlation
// corr.pair(i,j): sum_t log rect2(lambda_i, lambda_j, r_ij, Y_i, Y_j).
double pairwise_ll(const Eigen::VectorXd& gamma, const CorrParam& corr, int i,
                   int j, const PanelData& panel, int p,
                   LikelihoodDiag* diag = nullptr);
double pairwise_ll_dr(const Eigen::VectorXd& gamma, const CorrParam& corr,
                      int i, int j, const PanelData& panel, int p);

// Central finite differences in gamma for the pairwise objective; the
// 2-step procedure only needs the r-derivative, this is diagnostic only.
Eigen::VectorXd pairwise_ll_grad_gamma_fd(const Eigen::VectorXd& gamma,
                                          const CorrParam& corr, int i, int j,
                                          const PanelData& panel, int p,
                                          double h = 1e-6);

// Full pseudo log-likelihood. k = 1 coincides with marginal_pl; k = 2 uses
// the exact rect2 quadrature; k >= 3 uses GHK with common random numbers
// fixed by seed, so the objective is deterministic and optimizable.
double full_pl(const Eigen::VectorXd& gamma, const CorrParam& corr,
               const PanelData& panel, int p, int ghk_draws,
               std::uint64_t seed, LikelihoodDiag* diag = nullptr);

inline constexpr int kDefaultGhkDraws = 2000;

// Single-path convenience wrappers.
PanelData as_panel(const PathData& path);

// Precomputed (lambda_i, lambda_j, outcomes) for one pair so a 1-D search
// over r does not redo the regression part.
struct PairObjective {
  Eigen::VectorXd lam_i, lam_j;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 2> y;
  Eigen::Index rows_per_path = 0;

  static PairObjective build(const DesignMatrix& dm,
                             const Eigen::VectorXd& gamma, int i, int j);
  double value(double r, LikelihoodDiag* diag = nullptr) const;
  double deriv(double r) const;
};

}  // namespace probitar
