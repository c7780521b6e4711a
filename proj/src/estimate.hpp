#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "likelihood.hpp"
#include "model.hpp"
#include "optim.hpp"

namespace probitar {

struct PairDiag {
  int i = 0, j = 0;          // 0-based coordinates
  double r_hat = 0.0;
  int evaluations = 0;
  bool at_boundary = false;  // |r_hat| within 1e-3 of kCorrBound
};

struct BootstrapSummary {
  double level = 0.0;
  Eigen::VectorXd lo, hi;            // per parameter, gamma then r
  Eigen::MatrixXd replicates;        // B_ok x n_params
  int requested = 0;
  int failed = 0;
};

struct EstimationResult {
  GammaDims dims;
  Eigen::VectorXd gamma_hat;
  CorrParam r_hat;
  std::string method;                // "two_step" or "one_step"
  double objective_value = 0.0;      // the method's own objective at the optimum
  std::vector<OptimResult> equation_diag;  // two_step step 1 / one_step NM
  std::vector<PairDiag> pair_diag;
  bool pd_repaired = false;
  double pd_shrink_alpha = 1.0;
  long clamp_events = 0;
  std::unique_ptr<BootstrapSummary> bootstrap;

  EstimationResult() = default;
  EstimationResult(const EstimationResult& other);
  EstimationResult& operator=(const EstimationResult& other);
  EstimationResult(EstimationResult&&) = default;
  EstimationResult& operator=(EstimationResult&&) = default;

  bool any_boundary() const;
  ModelParams params() const;  // assembled (gamma_hat, R) as ModelParams
  // Flattened (gamma, r) vector used for tables and bootstrap.
  Eigen::VectorXd theta() const;
  int n_params() const { return dims.length() + dims.k * (dims.k - 1) / 2; }
};

struct EstimateOptions {
  int lag_order = 1;
  OptimOptions optim;
  int threads = 0;          // <= 0: PROBIT_AR_THREADS env, else hardware
  int ghk_draws = kDefaultGhkDraws;  // one_step, k >= 3 only
  std::uint64_t seed = 0;            // one_step GHK common random numbers
  bool warm_start_one_step_from_two_step = true;
};

int resolve_threads(int requested);

// Shrinks a non-PD pairwise correlation matrix toward the identity,
// R <- alpha R + (1-alpha) I, in alpha steps of 0.01 until the Cholesky
// succeeds. Returns the applied alpha (1.0 when no repair was needed).
double repair_correlation(CorrParam& corr);

// Initialization heuristics pooled over paths and time.
Eigen::VectorXd init_gamma(const PanelData& panel, int p);
CorrParam init_r(const PanelData& panel);

// Step 1: k independent Nelder-Mead ascents of the marginal objective
// (equation by equation), warm-started at init_gamma. Step 2: Brent on
// each pairwise correlation over [-kCorrBound, kCorrBound]. A non-PD
// assembled R is shrunk toward the identity in alpha steps of 0.01 and
// flagged. Deterministic given (panel, opts).
EstimationResult two_step(const PanelData& panel, const EstimateOptions& opts);

// Nelder-Mead ascent of full_pl over (gamma, u) with u = corr_untransform
// coordinates, warm-started from two_step (or init_gamma/init_r).
EstimationResult one_step(const PanelData& panel, const EstimateOptions& opts);

EstimationResult two_step(const PathData& path, const EstimateOptions& opts);
EstimationResult one_step(const PathData& path, const EstimateOptions& opts);

// Parametric bootstrap: simulate B panels of the template's shape from the
// fitted parameters, re-estimate each with two_step on an independent RNG
// stream, and return basic-bootstrap (pivot) intervals 2 theta_hat - q.
// Covariates are regenerated from `cov` when given, otherwise whole observed
// covariate paths from the template are resampled. Replicates that fail to
// estimate are skipped; more than 10% failures is an error.
BootstrapSummary bootstrap_ci(const EstimationResult& fit,
                              const PanelData& template_panel,
                              const CovariateSource* cov, int B, double level,
                              std::uint64_t seed, int threads = 0,
                              int burn_in = kDefaultBurnIn);

// Monte-Carlo replication study (simulate -> estimate, S times in parallel).
struct ReplicationRow {
  std::string name;
  double truth = 0.0;
  double mean = 0.0;
  double mse = 0.0;
  double bias = 0.0;
  double variance = 0.0;
};

std::vector<ReplicationRow> replicate_study(
    const ModelParams& truth, const CovariateSource& cov, int n_paths,
    int horizon, int burn_in, int n_sims, const std::string& method,
    const EstimateOptions& opts, std::uint64_t seed);

// Human-readable parameter names in table order: A row-major, B row-major,
// C, then R pairs (the layout every report table uses).
std::vector<std::string> parameter_names(const GammaDims& dims);
// Maps table order onto indices into EstimationResult::theta().
std::vector<int> table_order(const GammaDims& dims);

}  // namespace probitar
