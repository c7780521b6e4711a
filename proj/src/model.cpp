#include "model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace probitar {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::VectorXd threshold(const Eigen::VectorXd& latent) {
  Eigen::VectorXd y(latent.size());
  for (Eigen::Index i = 0; i < latent.size(); ++i)
    y[i] = latent[i] > 0.0 ? 1.0 : 0.0;
  return y;
}

}  // namespace

ModelParams ModelParams::zeros(int k, int p, int d) {
  ModelParams m;
  m.k = k;
  m.p = p;
  m.d = d;
  m.A.assign(p, Eigen::MatrixXd::Zero(k, k));
  m.B = Eigen::MatrixXd::Zero(k, d);
  m.C = Eigen::VectorXd::Zero(k);
  m.R = Eigen::MatrixXd::Identity(k, k);
  return m;
}

void ModelParams::validate() const {
  require(k >= 1 && p >= 1 && d >= 0, "ModelParams: bad dimensions");
  require(static_cast<int>(A.size()) == p, "ModelParams: need p lag matrices");
  for (const auto& a : A) {
    require(a.rows() == k && a.cols() == k, "ModelParams: A must be k x k");
    require(a.allFinite(), "ModelParams: non-finite entry in A");
  }
  require(B.rows() == k && B.cols() == d, "ModelParams: B must be k x d");
  require(B.allFinite(), "ModelParams: non-finite entry in B");
  require(C.size() == k, "ModelParams: C must have length k");
  require(C.allFinite(), "ModelParams: non-finite entry in C");
  require(R.rows() == k && R.cols() == k, "ModelParams: R must be k x k");
  require(R.allFinite(), "ModelParams: non-finite entry in R");
  for (int i = 0; i < k; ++i) {
    require(std::abs(R(i, i) - 1.0) < 1e-12, "ModelParams: R diagonal must be 1");
    for (int j = 0; j < i; ++j) {
      require(std::abs(R(i, j) - R(j, i)) < 1e-12, "ModelParams: R not symmetric");
      require(std::abs(R(i, j)) < 1.0, "ModelParams: |R(i,j)| must be < 1");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  require(es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0,
          "ModelParams: R not positive definite");
}

Eigen::MatrixXd ModelParams::chol_r() const {
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("ModelParams: R not positive definite");
  return llt.matrixL();
}

void PathData::validate() const {
  require(horizon() >= 1, "PathData: empty path");
  require(X.rows() == Y.rows(), "PathData: Y/X length mismatch");
  for (Eigen::Index t = 0; t < Y.rows(); ++t)
    for (Eigen::Index i = 0; i < Y.cols(); ++i)
      require(Y(t, i) == 0 || Y(t, i) == 1, "PathData: responses must be 0/1");
  require(X.allFinite(), "PathData: non-finite covariate");
}

void PanelData::validate() const {
  require(!paths.empty(), "PanelData: need at least one path");
  for (const auto& path : paths) {
    path.validate();
    require(path.horizon() == horizon() && path.k() == k() && path.d() == d(),
            "PanelData: paths must share (T, k, d)");
  }
}

LagState LagState::zeros(int k, int p) {
  LagState s;
  s.lags.assign(p, Eigen::VectorXd::Zero(k));
  return s;
}

std::uint32_t LagState::encode() const {
  std::uint32_t bits = 0;
  int pos = 0;
  for (const auto& lag : lags)
    for (Eigen::Index i = 0; i < lag.size(); ++i, ++pos)
      if (lag[i] != 0.0) bits |= (1u << pos);
  return bits;
}

LagState LagState::decode(std::uint32_t bits, int k, int p) {
  LagState s = zeros(k, p);
  int pos = 0;
  for (auto& lag : s.lags)
    for (int i = 0; i < k; ++i, ++pos)
      lag[i] = (bits >> pos) & 1u ? 1.0 : 0.0;
  return s;
}

Eigen::VectorXd linear_predictor(const ModelParams& params,
                                 const LagState& state,
                                 const Eigen::VectorXd& x_prev) {
  require(state.p() == params.p, "linear_predictor: lag state has wrong length");
  require(x_prev.size() == params.d, "linear_predictor: covariate has wrong length");
  Eigen::VectorXd lam = params.C;
  for (int l = 0; l < params.p; ++l) {
    require(state.lags[l].size() == params.k,
            "linear_predictor: lag vector has wrong length");
    lam.noalias() += params.A[l] * state.lags[l];
  }
  if (params.d > 0) lam.noalias() += params.B * x_prev;
  return lam;
}

Eigen::VectorXd step(const ModelParams& params, const LagState& state,
                     const Eigen::VectorXd& x_prev,
                     const Eigen::VectorXd& eps) {
  require(eps.size() == params.k && eps.allFinite(), "step: bad noise vector");
  return threshold(linear_predictor(params, state, x_prev) + eps);
}

ArmaCovariates::ArmaCovariates(std::vector<double> ar, std::vector<double> ma,
                               double innovation_sd, int dim)
    : ar_(std::move(ar)), ma_(std::move(ma)), sd_(innovation_sd), dim_(dim) {
  require(dim_ >= 1, "arma_covariates: dim must be >= 1");
  require(sd_ > 0.0 && std::isfinite(sd_), "arma_covariates: bad innovation sd");
  for (double c : ar_) require(std::isfinite(c), "arma_covariates: non-finite AR coefficient");
  for (double c : ma_) require(std::isfinite(c), "arma_covariates: non-finite MA coefficient");
  if (!ar_.empty()) {
    // Companion-matrix spectral radius < 1 <=> AR roots outside unit circle.
    const int q = static_cast<int>(ar_.size());
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(q, q);
    for (int j = 0; j < q; ++j) comp(0, j) = ar_[j];
    for (int i = 1; i < q; ++i) comp(i, i - 1) = 1.0;
    const auto eig = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
    double rho = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i)
      rho = std::max(rho, std::abs(eig[i]));
    require(rho < 1.0 - 1e-10, "arma_covariates: AR polynomial is not stationary");
  }
}

Eigen::MatrixXd ArmaCovariates::generate(int length, Rng& rng) const {
  require(length >= 2, "arma_covariates: stretch too short to standardize");
  const int np = static_cast<int>(ar_.size());
  const int nq = static_cast<int>(ma_.size());
  const int warmup = std::max(100, 10 * (np + nq));
  Eigen::MatrixXd out(length, dim_);
  std::vector<double> e(nq + 1, 0.0);
  std::vector<double> x(std::max(np, 1), 0.0);
  for (int c = 0; c < dim_; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    std::fill(x.begin(), x.end(), 0.0);
    for (int t = -warmup; t < length; ++t) {
      for (int j = nq; j > 0; --j) e[j] = e[j - 1];
      e[0] = sd_ * rng.normal();
      double v = e[0];
      for (int j = 0; j < nq; ++j) v += ma_[j] * e[j + 1];
      for (int j = 0; j < np; ++j) v += ar_[j] * x[j];
      for (int j = np - 1; j > 0; --j) x[j] = x[j - 1];
      if (np > 0) x[0] = v;
      if (t >= 0) out(t, c) = v;
    }
    const double mean = out.col(c).mean();
    out.col(c).array() -= mean;
    const double sd = std::sqrt(out.col(c).squaredNorm() / (length - 1));
    require(sd > 0.0, "arma_covariates: degenerate stretch");
    out.col(c) /= sd;
  }
  return out;
}

FixedCovariates::FixedCovariates(std::vector<Eigen::MatrixXd> paths)
    : paths_(std::move(paths)) {
  require(!paths_.empty(), "FixedCovariates: need at least one path");
  dim_ = static_cast<int>(paths_[0].cols());
  for (const auto& p : paths_) {
    require(p.cols() == dim_, "FixedCovariates: inconsistent dimension");
    require(p.allFinite(), "FixedCovariates: non-finite covariate");
  }
}

Eigen::MatrixXd FixedCovariates::generate(int length, Rng& rng) const {
  const auto& src = paths_[static_cast<std::size_t>(
      rng.next_u64() % paths_.size())];
  require(src.rows() >= 1, "FixedCovariates: empty path");
  Eigen::MatrixXd out(length, dim_);
  // Cycle the observed path when a longer stretch (burn-in) is requested.
  for (int t = 0; t < length; ++t)
    out.row(t) = src.row(t % src.rows());
  return out;
}

PathData simulate_path(const ModelParams& params, const CovariateSource& cov,
                       int horizon, int burn_in, std::uint64_t seed,
                       std::uint64_t path_id, SimulationTrace* trace) {
  params.validate();
  require(horizon >= 1, "simulate_path: horizon must be >= 1");
  require(burn_in >= 0, "simulate_path: burn_in must be >= 0");
  require(cov.dim() == params.d, "simulate_path: covariate dimension mismatch");

  const int total = burn_in + horizon;
  Rng rng_cov = Rng::derive(seed, path_id, 1);
  Rng rng_eps = Rng::derive(seed, path_id, 2);

  // xs.row(t) holds X_t for t = 0..total; step t+1 consumes X_t.
  const Eigen::MatrixXd xs = cov.generate(total + 1, rng_cov);
  const Eigen::MatrixXd chol = params.chol_r();

  PathData path;
  path.Y.resize(horizon, params.k);
  path.X.resize(horizon, params.d);
  if (trace) {
    trace->x_prev.resize(horizon, params.d);
    trace->eps.resize(horizon, params.k);
  }

  LagState state = LagState::zeros(params.k, params.p);
  Eigen::VectorXd z(params.k);
  for (int t = 1; t <= total; ++t) {
    const Eigen::VectorXd x_prev = xs.row(t - 1).transpose();
    for (int i = 0; i < params.k; ++i) z[i] = rng_eps.normal();
    const Eigen::VectorXd eps = chol * z;
    if (t == burn_in + 1 && trace) trace->initial_state = state;
    const Eigen::VectorXd y = step(params, state, x_prev, eps);
    if (t > burn_in) {
      const int row = t - burn_in - 1;
      for (int i = 0; i < params.k; ++i)
        path.Y(row, i) = static_cast<std::uint8_t>(y[i]);
      path.X.row(row) = xs.row(t);
      if (trace) {
        trace->x_prev.row(row) = x_prev.transpose();
        trace->eps.row(row) = eps.transpose();
      }
    }
    for (int l = params.p - 1; l > 0; --l) state.lags[l] = state.lags[l - 1];
    state.lags[0] = y;
  }
  return path;
}

PanelData simulate_panel(const ModelParams& params, const CovariateSource& cov,
                         int n_paths, int horizon, int burn_in,
                         std::uint64_t seed) {
  require(n_paths >= 1, "simulate_panel: need at least one path");
  PanelData panel;
  panel.paths.reserve(n_paths);
  for (int j = 0; j < n_paths; ++j)
    panel.paths.push_back(
        simulate_path(params, cov, horizon, burn_in, seed, j));
  return panel;
}

std::optional<LagState> perfect_sample(const ModelParams& params,
                                       const CovariateSource& cov,
                                       int max_lookback, std::uint64_t seed,
                                       std::uint64_t draw_id) {
  params.validate();
  const int kp = params.k * params.p;
  if (kp > 16)
    throw std::invalid_argument("perfect_sample: k*p > 16 unsupported");
  require(max_lookback >= params.p, "perfect_sample: max_lookback must be >= p");
  require(cov.dim() == params.d, "perfect_sample: covariate dimension mismatch");

  // Pre-draw the whole backward history once so every doubling reuses the
  // same (x, eps) pairs, the coupling-from-the-past discipline. Generated
  // forward and read with index t = -max_lookback+1..0 mapped to rows.
  Rng rng_cov = Rng::derive(seed, draw_id, 11);
  Rng rng_eps = Rng::derive(seed, draw_id, 12);
  const Eigen::MatrixXd xs = cov.generate(max_lookback + 1, rng_cov);
  const Eigen::MatrixXd chol = params.chol_r();
  Eigen::MatrixXd eps(max_lookback, params.k);
  Eigen::VectorXd z(params.k);
  for (int t = 0; t < max_lookback; ++t) {
    for (int i = 0; i < params.k; ++i) z[i] = rng_eps.normal();
    eps.row(t) = (chol * z).transpose();
  }

  const std::uint32_t n_states = 1u << kp;
  std::vector<std::uint32_t> image(n_states);
  std::vector<bool> seen(n_states);

  const int row0 = max_lookback - 1;  // row of time 0
  for (int m = params.p; m <= max_lookback; m = std::min(2 * m, max_lookback)) {
    // Map every state at time -m+1 forward to time 0.
    for (std::uint32_t s = 0; s < n_states; ++s) image[s] = s;
    for (int t = -m + 1; t <= 0; ++t) {
      const int row = row0 + t;
      const Eigen::VectorXd x_prev = xs.row(row).transpose();
      const Eigen::VectorXd e = eps.row(row).transpose();
      // One-step map applied to each distinct current image.
      std::fill(seen.begin(), seen.end(), false);
      std::vector<std::uint32_t> next(n_states);
      for (std::uint32_t s = 0; s < n_states; ++s) {
        const std::uint32_t cur = image[s];
        if (!seen[cur]) {
          seen[cur] = true;
          const LagState st = LagState::decode(cur, params.k, params.p);
          const Eigen::VectorXd y = step(params, st, x_prev, e);
          std::uint32_t bits = 0;
          for (int i = 0; i < params.k; ++i)
            if (y[i] != 0.0) bits |= (1u << i);
          // shift lags: new state = (y, old lags 0..p-2)
          const std::uint32_t mask = (params.p > 1)
              ? ((cur << params.k) & ((1u << kp) - 1u))
              : 0u;
          next[cur] = bits | mask;
        }
        image[s] = next[cur];
      }
    }
    bool coalesced = true;
    for (std::uint32_t s = 1; s < n_states && coalesced; ++s)
      coalesced = (image[s] == image[0]);
    if (coalesced)
      return LagState::decode(image[0], params.k, params.p);
    if (m == max_lookback) break;
  }
  return std::nullopt;
}

}  // namespace probitar
