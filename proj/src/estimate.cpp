#include "estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "gauss.hpp"
#include "parallel.hpp"

namespace probitar {

namespace {

constexpr double kBoundaryTol = 1e-3;
constexpr double kInitCorrClip = 0.95;

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;  // constant column
  return sab / std::sqrt(saa * sbb);
}

// Sample quantile with linear interpolation (type 7).
double quantile7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

// Warm start for the transform-based search: shrink toward identity until
// the Cholesky rows are comfortably inside the tanh bound.
Eigen::VectorXd untransform_for_start(CorrParam corr) {
  for (double alpha = 1.0; alpha > 0.0; alpha -= 0.05) {
    CorrParam scaled = corr;
    scaled.r *= alpha;
    try {
      scaled.validate();
      Eigen::LLT<Eigen::MatrixXd> llt(scaled.matrix());
      const Eigen::MatrixXd L = llt.matrixL();
      bool ok = true;
      for (int i = 1; i < scaled.k && ok; ++i)
        ok = L.row(i).head(i).norm() < 0.98 * kCorrBound;
      if (ok) return corr_untransform(scaled);
    } catch (const std::invalid_argument&) {
    }
  }
  return Eigen::VectorXd::Zero(corr.n_pairs());
}

}  // namespace

EstimationResult::EstimationResult(const EstimationResult& other)
    : dims(other.dims),
      gamma_hat(other.gamma_hat),
      r_hat(other.r_hat),
      method(other.method),
      objective_value(other.objective_value),
      equation_diag(other.equation_diag),
      pair_diag(other.pair_diag),
      pd_repaired(other.pd_repaired),
      pd_shrink_alpha(other.pd_shrink_alpha),
      clamp_events(other.clamp_events),
      bootstrap(other.bootstrap
                    ? std::make_unique<BootstrapSummary>(*other.bootstrap)
                    : nullptr) {}

EstimationResult& EstimationResult::operator=(const EstimationResult& other) {
  if (this == &other) return *this;
  *this = EstimationResult(other);
  return *this;
}

bool EstimationResult::any_boundary() const {
  for (const auto& pd : pair_diag)
    if (pd.at_boundary) return true;
  return false;
}

ModelParams EstimationResult::params() const {
  ModelParams m = ModelParams::zeros(dims.k, dims.p, dims.d);
  unpack_gamma(gamma_hat, m);
  m.R = r_hat.matrix();
  return m;
}

Eigen::VectorXd EstimationResult::theta() const {
  Eigen::VectorXd out(n_params());
  out.head(dims.length()) = gamma_hat;
  out.tail(r_hat.r.size()) = r_hat.r;
  return out;
}

double repair_correlation(CorrParam& corr) {
  Eigen::LLT<Eigen::MatrixXd> llt(corr.matrix());
  if (llt.info() == Eigen::Success) return 1.0;
  const Eigen::VectorXd original = corr.r;
  double alpha = 1.0;
  do {
    alpha -= 0.01;
    corr.r = alpha * original;
    llt.compute(corr.matrix());
  } while (llt.info() != Eigen::Success && alpha > 0.005);
  return alpha;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PROBIT_AR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Eigen::VectorXd init_gamma(const PanelData& panel, int p) {
  panel.validate();
  const GammaDims dims{panel.k(), p, panel.d()};
  const int k = dims.k, d = dims.d, T = panel.horizon();
  ModelParams m = ModelParams::zeros(k, p, d);

  // C(i) = 2 p_i - 1 with p_i the pooled presence proportion.
  Eigen::VectorXd presence = Eigen::VectorXd::Zero(k);
  for (const auto& path : panel.paths)
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < k; ++i) presence[i] += path.Y(t, i);
  presence /= static_cast<double>(panel.n()) * T;
  m.C = 2.0 * presence.array() - 1.0;

  // Signed lag-1 co-occurrence: transitions where presence of j is followed
  // by presence of i count +1, every other transition counts -1.
  if (T > 1) {
    const double n_trans = static_cast<double>(panel.n()) * (T - 1);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        double both = 0.0;
        for (const auto& path : panel.paths)
          for (int t = 0; t + 1 < T; ++t)
            if (path.Y(t, j) && path.Y(t + 1, i)) both += 1.0;
        m.A[0](i, j) = (2.0 * both - n_trans) / n_trans;
      }
  }

  // B(i,m): pooled correlation between Y_{i,t} and X_{m,t-1}.
  if (d > 0 && T > 1) {
    std::vector<double> ys, xs;
    ys.reserve(static_cast<std::size_t>(panel.n()) * (T - 1));
    xs.reserve(ys.capacity());
    for (int i = 0; i < k; ++i)
      for (int mcol = 0; mcol < d; ++mcol) {
        ys.clear();
        xs.clear();
        for (const auto& path : panel.paths)
          for (int t = 1; t < T; ++t) {
            ys.push_back(static_cast<double>(path.Y(t, i)));
            xs.push_back(path.X(t - 1, mcol));
          }
        m.B(i, mcol) = pearson(ys, xs);
      }
  }
  return pack_gamma(m);
}

CorrParam init_r(const PanelData& panel) {
  panel.validate();
  const int k = panel.k();
  CorrParam corr = CorrParam::identity(k);
  std::vector<double> a, b;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      a.clear();
      b.clear();
      for (const auto& path : panel.paths)
        for (int t = 0; t < panel.horizon(); ++t) {
          a.push_back(static_cast<double>(path.Y(t, i)));
          b.push_back(static_cast<double>(path.Y(t, j)));
        }
      corr.set_pair(i, j, std::clamp(pearson(a, b), -kInitCorrClip, kInitCorrClip));
    }
  return corr;
}

EstimationResult two_step(const PanelData& panel, const EstimateOptions& opts) {
  const DesignMatrix dm = DesignMatrix::build(panel, opts.lag_order);
  const GammaDims dims = dm.dims;
  const int k = dims.k;
  const int threads = resolve_threads(opts.threads);

  EstimationResult res;
  res.dims = dims;
  res.method = "two_step";
  res.gamma_hat = init_gamma(panel, opts.lag_order);
  res.equation_diag.resize(k);

  // Step 1: the marginal objective separates into one block per equation.
  {
    std::vector<Eigen::VectorXd> rows(k);
    parallel_for(k, threads, [&](int i) {
      const auto objective = [&dm, i](const Eigen::VectorXd& row) {
        const Eigen::VectorXd lam = dm.lambda(row);
        double total = 0.0;
        for (Eigen::Index t = 0; t < dm.rows(); ++t) {
          const double v = std_normal_cdf(dm.y(t, i) ? lam[t] : -lam[t]);
          total += std::log(std::max(v, 1e-300));
        }
        return total;
      };
      const Eigen::VectorXd start = gather_equation(res.gamma_hat, dims, i);
      rows[i] = start;
      OptimResult opt = nelder_mead(objective, start, opts.optim);
      rows[i] = opt.x;
      res.equation_diag[i] = std::move(opt);
    });
    for (int i = 0; i < k; ++i)
      scatter_equation(rows[i], dims, i, res.gamma_hat);
  }

  // Step 2: scalar pairwise searches with gamma_hat plugged in.
  res.r_hat = CorrParam::identity(k);
  const int n_pairs = k * (k - 1) / 2;
  if (n_pairs > 0) {
    std::vector<PairDiag> diags(n_pairs);
    parallel_for(n_pairs, threads, [&](int idx) {
      int i = 0, j = 1;
      for (int a = 0, c = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b, ++c)
          if (c == idx) {
            i = a;
            j = b;
          }
      const PairObjective po = PairObjective::build(dm, res.gamma_hat, i, j);
      const BrentResult br = brent_max(
          [&po](double r) { return po.value(r); }, -kCorrBound, kCorrBound,
          opts.optim.x_tol);
      PairDiag pd;
      pd.i = i;
      pd.j = j;
      pd.r_hat = br.x;
      pd.evaluations = br.evaluations;
      pd.at_boundary = std::abs(std::abs(br.x) - kCorrBound) < kBoundaryTol;
      diags[idx] = pd;
    });
    for (const auto& pd : diags) res.r_hat.set_pair(pd.i, pd.j, pd.r_hat);
    res.pair_diag = std::move(diags);

    // The pairwise matrix need not be jointly PD; repair by shrinkage.
    const double alpha = repair_correlation(res.r_hat);
    if (alpha < 1.0) {
      res.pd_repaired = true;
      res.pd_shrink_alpha = alpha;
    }
  }

  LikelihoodDiag diag;
  double objective = marginal_pl(res.gamma_hat, panel, opts.lag_order, &diag);
  for (const auto& pd : res.pair_diag)
    objective +=
        pairwise_ll(res.gamma_hat, res.r_hat, pd.i, pd.j, panel,
                    opts.lag_order, &diag);
  res.objective_value = objective;
  res.clamp_events = diag.clamp_events;
  return res;
}

EstimationResult one_step(const PanelData& panel, const EstimateOptions& opts) {
  const DesignMatrix dm = DesignMatrix::build(panel, opts.lag_order);
  const GammaDims dims = dm.dims;
  const int k = dims.k;
  const int n_gamma = dims.length();
  const int n_pairs = k * (k - 1) / 2;

  Eigen::VectorXd gamma0;
  CorrParam corr0 = CorrParam::identity(k);
  EstimationResult res;
  if (opts.warm_start_one_step_from_two_step) {
    res = two_step(panel, opts);
    gamma0 = res.gamma_hat;
    corr0 = res.r_hat;
  } else {
    gamma0 = init_gamma(panel, opts.lag_order);
    corr0 = init_r(panel);
  }
  res.dims = dims;
  res.method = "one_step";

  Eigen::VectorXd z0(n_gamma + n_pairs);
  z0.head(n_gamma) = gamma0;
  if (n_pairs > 0) z0.tail(n_pairs) = untransform_for_start(corr0);

  const int p = opts.lag_order;
  const int ghk_draws = opts.ghk_draws > 0 ? opts.ghk_draws : kDefaultGhkDraws;
  const auto objective = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd gamma = z.head(n_gamma);
    const CorrParam corr =
        n_pairs > 0 ? corr_transform(z.tail(n_pairs), k) : CorrParam::identity(k);
    return full_pl(gamma, corr, panel, p, ghk_draws, opts.seed);
  };

  OptimOptions nm = opts.optim;
  if (opts.warm_start_one_step_from_two_step && nm.simplex_init_step > 0.1)
    nm.simplex_init_step = 0.1;  // the start is already near the optimum
  OptimResult opt = nelder_mead(objective, z0, nm);

  res.gamma_hat = opt.x.head(n_gamma);
  res.r_hat = n_pairs > 0 ? corr_transform(opt.x.tail(n_pairs), k)
                          : CorrParam::identity(k);
  res.objective_value = opt.f;
  res.equation_diag.assign(1, opt);
  res.pair_diag.clear();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      PairDiag pd;
      pd.i = i;
      pd.j = j;
      pd.r_hat = res.r_hat.pair(i, j);
      pd.at_boundary =
          std::abs(std::abs(pd.r_hat) - kCorrBound) < kBoundaryTol;
      res.pair_diag.push_back(pd);
    }
  LikelihoodDiag diag;
  full_pl(res.gamma_hat, res.r_hat, panel, p, ghk_draws, opts.seed, &diag);
  res.clamp_events = diag.clamp_events;
  res.pd_repaired = false;
  res.pd_shrink_alpha = 1.0;
  return res;
}

EstimationResult two_step(const PathData& path, const EstimateOptions& opts) {
  return two_step(as_panel(path), opts);
}

EstimationResult one_step(const PathData& path, const EstimateOptions& opts) {
  return one_step(as_panel(path), opts);
}

BootstrapSummary bootstrap_ci(const EstimationResult& fit,
                              const PanelData& template_panel,
                              const CovariateSource* cov, int B, double level,
                              std::uint64_t seed, int threads, int burn_in) {
  if (B < 100) throw std::invalid_argument("bootstrap_ci: B must be >= 100");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level must be in (0,1)");
  template_panel.validate();

  const ModelParams truth = fit.params();
  truth.validate();
  if (template_panel.k() != truth.k || template_panel.d() != truth.d)
    throw std::invalid_argument("bootstrap_ci: template does not match fit");

  std::unique_ptr<CovariateSource> owned;
  if (cov == nullptr) {
    if (truth.d == 0) {
      owned = std::make_unique<NoCovariates>();
    } else {
      // Resample whole observed covariate paths.
      std::vector<Eigen::MatrixXd> xs;
      xs.reserve(template_panel.n());
      for (const auto& path : template_panel.paths) xs.push_back(path.X);
      owned = std::make_unique<FixedCovariates>(std::move(xs));
    }
    cov = owned.get();
  }
  if (cov->dim() != truth.d)
    throw std::invalid_argument("bootstrap_ci: covariate dimension mismatch");

  EstimateOptions reopts;
  reopts.lag_order = fit.dims.p;
  reopts.threads = 1;
  // Optimizer noise at these tolerances is far below replicate noise.
  reopts.optim.f_tol = 1e-7;
  reopts.optim.x_tol = 1e-6;

  const int n_params = fit.n_params();
  Eigen::MatrixXd draws(B, n_params);
  std::vector<char> ok(B, 0);
  const int n = template_panel.n();
  const int horizon = template_panel.horizon();

  parallel_for(B, resolve_threads(threads), [&](int b) {
    const std::uint64_t seed_b = Rng::mix_seed(seed, static_cast<std::uint64_t>(b), 71);
    try {
      const PanelData replicate =
          simulate_panel(truth, *cov, n, horizon, burn_in, seed_b);
      const EstimationResult refit = two_step(replicate, reopts);
      draws.row(b) = refit.theta().transpose();
      ok[b] = 1;
    } catch (const std::exception&) {
      ok[b] = 0;
    }
  });

  BootstrapSummary summary;
  summary.level = level;
  summary.requested = B;
  int n_ok = 0;
  for (int b = 0; b < B; ++b) n_ok += ok[b];
  summary.failed = B - n_ok;
  if (summary.failed > B / 10)
    throw std::runtime_error("bootstrap_ci: more than 10% of replicates failed");

  summary.replicates.resize(n_ok, n_params);
  for (int b = 0, row = 0; b < B; ++b)
    if (ok[b]) summary.replicates.row(row++) = draws.row(b);

  const Eigen::VectorXd theta_hat = fit.theta();
  summary.lo.resize(n_params);
  summary.hi.resize(n_params);
  const double alpha = 1.0 - level;
  std::vector<double> column(n_ok);
  for (int pidx = 0; pidx < n_params; ++pidx) {
    for (int row = 0; row < n_ok; ++row) column[row] = summary.replicates(row, pidx);
    const double q_lo = quantile7(column, alpha / 2.0);
    const double q_hi = quantile7(column, 1.0 - alpha / 2.0);
    summary.lo[pidx] = 2.0 * theta_hat[pidx] - q_hi;
    summary.hi[pidx] = 2.0 * theta_hat[pidx] - q_lo;
  }
  return summary;
}

std::vector<std::string> parameter_names(const GammaDims& dims) {
  std::vector<std::string> names;
  for (int l = 0; l < dims.p; ++l)
    for (int i = 0; i < dims.k; ++i)
      for (int j = 0; j < dims.k; ++j) {
        std::string base = dims.p == 1 ? "A" : "A" + std::to_string(l + 1);
        names.push_back(base + "(" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ")");
      }
  for (int i = 0; i < dims.k; ++i)
    for (int m = 0; m < dims.d; ++m) {
      if (dims.d == 1)
        names.push_back("B(" + std::to_string(i + 1) + ")");
      else
        names.push_back("B(" + std::to_string(i + 1) + "," +
                        std::to_string(m + 1) + ")");
    }
  for (int i = 0; i < dims.k; ++i)
    names.push_back("C(" + std::to_string(i + 1) + ")");
  for (int i = 0; i < dims.k; ++i)
    for (int j = i + 1; j < dims.k; ++j)
      names.push_back("R(" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + ")");
  return names;
}

std::vector<int> table_order(const GammaDims& dims) {
  std::vector<int> order;
  const int k = dims.k;
  const int a0 = k;
  for (int l = 0; l < dims.p; ++l)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        order.push_back(a0 + l * k * k + j * k + i);
  const int b0 = k + dims.p * k * k;
  for (int i = 0; i < k; ++i)
    for (int m = 0; m < dims.d; ++m) order.push_back(b0 + m * k + i);
  for (int i = 0; i < k; ++i) order.push_back(i);
  const int r0 = dims.length();
  for (int idx = 0; idx < k * (k - 1) / 2; ++idx) order.push_back(r0 + idx);
  return order;
}

std::vector<ReplicationRow> replicate_study(
    const ModelParams& truth, const CovariateSource& cov, int n_paths,
    int horizon, int burn_in, int n_sims, const std::string& method,
    const EstimateOptions& opts, std::uint64_t seed) {
  truth.validate();
  if (n_sims < 1) throw std::invalid_argument("replicate_study: n_sims must be >= 1");
  if (method != "two_step" && method != "one_step")
    throw std::invalid_argument("replicate_study: unknown method");

  const GammaDims dims{truth.k, truth.p, truth.d};
  const int n_params = dims.length() + truth.k * (truth.k - 1) / 2;
  Eigen::MatrixXd draws(n_sims, n_params);

  EstimateOptions fit_opts = opts;
  fit_opts.threads = 1;
  parallel_for(n_sims, resolve_threads(opts.threads), [&](int s) {
    const std::uint64_t seed_s = Rng::mix_seed(seed, static_cast<std::uint64_t>(s), 17);
    const PanelData panel =
        simulate_panel(truth, cov, n_paths, horizon, burn_in, seed_s);
    const EstimationResult fit = method == "two_step"
                                     ? two_step(panel, fit_opts)
                                     : one_step(panel, fit_opts);
    draws.row(s) = fit.theta().transpose();
  });

  Eigen::VectorXd theta_true(n_params);
  theta_true.head(dims.length()) = pack_gamma(truth);
  theta_true.tail(n_params - dims.length()) = CorrParam::from_matrix(truth.R).r;

  const std::vector<std::string> names = parameter_names(dims);
  const std::vector<int> order = table_order(dims);
  std::vector<ReplicationRow> rows;
  rows.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int idx = order[pos];
    ReplicationRow row;
    row.name = names[pos];
    row.truth = theta_true[idx];
    const Eigen::VectorXd col = draws.col(idx);
    row.mean = col.mean();
    row.bias = row.mean - row.truth;
    row.mse = (col.array() - row.truth).square().mean();
    row.variance = n_sims > 1
                       ? (col.array() - row.mean).square().sum() / (n_sims - 1)
                       : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace probitar
