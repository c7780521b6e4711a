#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace probitar {

// theta = (gamma, r): lag matrices A_1..A_p, covariate loadings B, intercept
// C and the noise correlation matrix R.
struct ModelParams {
  int p = 1;  // lag order
  int k = 1;  // response dimension
  int d = 0;  // covariate dimension
  std::vector<Eigen::MatrixXd> A;  // p matrices, k x k
  Eigen::MatrixXd B;               // k x d
  Eigen::VectorXd C;               // k
  Eigen::MatrixXd R;               // k x k correlation

  static ModelParams zeros(int k, int p, int d);

  // Throws std::invalid_argument when a dimension or invariant is violated
  // (R must be symmetric with unit diagonal, off-diagonals in (-1,1) and
  // smallest eigenvalue > 0; all entries finite).
  void validate() const;

  Eigen::MatrixXd chol_r() const;  // lower factor of R
};

// One observed or simulated trajectory. X.row(t) is the covariate determined
// at time t, consumed by the predictor for time t+1.
struct PathData {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> Y;  // T x k
  Eigen::MatrixXd X;                                              // T x d

  int horizon() const { return static_cast<int>(Y.rows()); }
  int k() const { return static_cast<int>(Y.cols()); }
  int d() const { return static_cast<int>(X.cols()); }
  void validate() const;
};

struct PanelData {
  std::vector<PathData> paths;

  int n() const { return static_cast<int>(paths.size()); }
  int horizon() const { return paths.empty() ? 0 : paths[0].horizon(); }
  int k() const { return paths.empty() ? 0 : paths[0].k(); }
  int d() const { return paths.empty() ? 0 : paths[0].d(); }
  void validate() const;  // nonempty, shared (T, k, d)
};

// The last p responses, newest first: state[0] = Y_{t-1}, ..., state[p-1] = Y_{t-p}.
struct LagState {
  std::vector<Eigen::VectorXd> lags;

  static LagState zeros(int k, int p);
  int p() const { return static_cast<int>(lags.size()); }

  // Bit encoding used by the perfect sampler: bit (l*k + i) holds
  // coordinate i of lag l. Requires k*p <= 16.
  std::uint32_t encode() const;
  static LagState decode(std::uint32_t bits, int k, int p);
};

// lambda = C + sum_l A_l * state[l-1] + B * x_prev
Eigen::VectorXd linear_predictor(const ModelParams& params,
                                 const LagState& state,
                                 const Eigen::VectorXd& x_prev);

// y_i = 1 iff lambda_i + eps_i > 0 (the boundary 0 maps to 0, I_0 = (-inf,0]).
Eigen::VectorXd step(const ModelParams& params, const LagState& state,
                     const Eigen::VectorXd& x_prev,
                     const Eigen::VectorXd& eps);

// Generates a fresh covariate block per path; implementations must be
// deterministic functions of the supplied rng state.
class CovariateSource {
 public:
  virtual ~CovariateSource() = default;
  virtual int dim() const = 0;
  // length x dim matrix of covariates for one path
  virtual Eigen::MatrixXd generate(int length, Rng& rng) const = 0;
  virtual std::unique_ptr<CovariateSource> clone() const = 0;
};

// d independent scalar ARMA processes, each centered and standardized over
// the generated stretch. Rejects non-stationary AR polynomials.
class ArmaCovariates final : public CovariateSource {
 public:
  ArmaCovariates(std::vector<double> ar, std::vector<double> ma,
                 double innovation_sd, int dim = 1);
  int dim() const override { return dim_; }
  Eigen::MatrixXd generate(int length, Rng& rng) const override;
  std::unique_ptr<CovariateSource> clone() const override {
    return std::make_unique<ArmaCovariates>(*this);
  }
  const std::vector<double>& ar() const { return ar_; }
  const std::vector<double>& ma() const { return ma_; }
  double innovation_sd() const { return sd_; }

 private:
  std::vector<double> ar_, ma_;
  double sd_;
  int dim_;
};

// No covariates (d = 0).
class NoCovariates final : public CovariateSource {
 public:
  int dim() const override { return 0; }
  Eigen::MatrixXd generate(int length, Rng&) const override {
    return Eigen::MatrixXd(length, 0);
  }
  std::unique_ptr<CovariateSource> clone() const override {
    return std::make_unique<NoCovariates>();
  }
};

// Resamples whole observed covariate paths (with replacement). Also the
// vehicle for user-supplied per-path constants: supply them as columns.
class FixedCovariates final : public CovariateSource {
 public:
  explicit FixedCovariates(std::vector<Eigen::MatrixXd> paths);
  int dim() const override { return dim_; }
  Eigen::MatrixXd generate(int length, Rng& rng) const override;
  std::unique_ptr<CovariateSource> clone() const override {
    return std::make_unique<FixedCovariates>(*this);
  }

 private:
  std::vector<Eigen::MatrixXd> paths_;
  int dim_;
};

// Everything needed to replay a simulated window through step() bit-for-bit.
struct SimulationTrace {
  LagState initial_state;   // lags just before the first returned step
  Eigen::MatrixXd x_prev;   // T x d, covariate consumed at each step
  Eigen::MatrixXd eps;      // T x k
};

// Simulates burn_in + T steps from the all-zeros lag state; returns the last
// T. eps_t = chol(R) * z_t with z iid standard normal. Deterministic given
// (seed, path_id); distinct path ids give independent streams.
PathData simulate_path(const ModelParams& params, const CovariateSource& cov,
                       int horizon, int burn_in, std::uint64_t seed,
                       std::uint64_t path_id = 0,
                       SimulationTrace* trace = nullptr);

PanelData simulate_panel(const ModelParams& params, const CovariateSource& cov,
                         int n_paths, int horizon, int burn_in,
                         std::uint64_t seed);

inline constexpr int kDefaultBurnIn = 500;

// Coupling from the past on the finite state space ({0,1}^k)^p with doubling
// lookback m = p, 2p, 4p, ... reusing earlier draws. Returns the coalesced
// state at time 0 (an exact draw from the stationary law) or nullopt when
// max_lookback is exhausted. Requires k*p <= 16.
std::optional<LagState> perfect_sample(const ModelParams& params,
                                       const CovariateSource& cov,
                                       int max_lookback, std::uint64_t seed,
                                       std::uint64_t draw_id = 0);

}  // namespace probitar
