#include "probitar.h"

#include <algorithm>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "estimate.hpp"
#include "gauss.hpp"
#include "model.hpp"
#include "panel_io.hpp"
#include "report.hpp"

using namespace probitar;

struct par_params {
  ModelParams m;
};
struct par_covspec {
  std::unique_ptr<CovariateSource> src;
};
struct par_panel {
  PanelData panel;
};
struct par_raw {
  RawPanel raw;
};
struct par_fit {
  EstimationResult fit;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

int classify(const std::exception& e) {
  const std::string what = e.what();
  if (what.rfind("json:", 0) == 0 || what.find("csv") != std::string::npos ||
      what.rfind("load_", 0) == 0 || what.find("trace:") != std::string::npos ||
      what.find("malformed") != std::string::npos)
    return PAR_EPARSE;
  if (what.find("cannot open") != std::string::npos ||
      what.find("write failed") != std::string::npos)
    return PAR_EIO;
  if (what.find("unsupported") != std::string::npos) return PAR_EUNSUPPORTED;
  return PAR_EINVAL;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return classify(e);
  } catch (const std::runtime_error& e) {
    set_error(e.what());
    return PAR_ENUMERIC;
  } catch (const std::bad_alloc&) {
    set_error("out of memory");
    return PAR_ENUMERIC;
  } catch (const std::exception& e) {
    set_error(e.what());
    return PAR_EINVAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int require_arg(bool ok, const char* msg) {
  if (!ok) {
    set_error(msg);
    return PAR_EINVAL;
  }
  return PAR_OK;
}

EstimateOptions to_options(const par_fit_options* opts) {
  EstimateOptions out;
  if (!opts) return out;
  if (opts->lag_order >= 1) out.lag_order = opts->lag_order;
  out.threads = opts->threads;
  if (opts->ghk_draws > 0) out.ghk_draws = opts->ghk_draws;
  out.seed = opts->seed;
  if (opts->max_iters > 0) out.optim.max_iters = opts->max_iters;
  if (opts->f_tol > 0.0) out.optim.f_tol = opts->f_tol;
  if (opts->x_tol > 0.0) out.optim.x_tol = opts->x_tol;
  return out;
}

}  // namespace

extern "C" {

const char* par_last_error(void) { return g_last_error.c_str(); }

void par_string_free(char* s) { delete[] s; }

double par_std_normal_cdf(double x) { return std_normal_cdf(x); }

double par_std_normal_quantile(double p) {
  try {
    return std_normal_quantile(p);
  } catch (const std::exception& e) {
    set_error(e.what());
    return std::numeric_limits<double>::quiet_NaN();
  }
}

int par_rect2(double lam_i, double lam_j, double r, int s_i, int s_j,
              double* prob) {
  if (int rc = require_arg(prob != nullptr, "par_rect2: prob is NULL")) return rc;
  return guarded([&] {
    *prob = rect2({lam_i, lam_j, r, s_i, s_j});
    return PAR_OK;
  });
}

int par_rect2_dr(double lam_i, double lam_j, double r, int s_i, int s_j,
                 double* deriv) {
  if (int rc = require_arg(deriv != nullptr, "par_rect2_dr: deriv is NULL"))
    return rc;
  return guarded([&] {
    *deriv = rect2_dr({lam_i, lam_j, r, s_i, s_j});
    return PAR_OK;
  });
}

int par_rect_ghk(int k, const double* lam, const double* corr, const int* s,
                 int n_draws, uint64_t seed, double* prob, double* std_err) {
  if (int rc = require_arg(k >= 1 && lam && corr && s && prob,
                           "par_rect_ghk: bad arguments"))
    return rc;
  return guarded([&] {
    RectKSpec spec;
    spec.lam = Eigen::Map<const Eigen::VectorXd>(lam, k);
    spec.corr = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                               Eigen::Dynamic, Eigen::RowMajor>>(
        corr, k, k);
    spec.s.assign(s, s + k);
    const GhkResult res = rect_k_ghk(spec, n_draws, seed);
    *prob = res.prob;
    if (std_err) *std_err = res.std_err;
    return PAR_OK;
  });
}

int par_params_create(int k, int p, int d, par_params** out) {
  if (int rc = require_arg(out != nullptr, "par_params_create: out is NULL"))
    return rc;
  return guarded([&] {
    if (k < 1 || p < 1 || d < 0)
      throw std::invalid_argument("par_params_create: bad dimensions");
    *out = new par_params{ModelParams::zeros(k, p, d)};
    return PAR_OK;
  });
}

int par_params_from_json(const char* text, par_params** out) {
  if (int rc = require_arg(text && out, "par_params_from_json: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_params{params_from_json(text)};
    return PAR_OK;
  });
}

int par_params_to_json(const par_params* params, char** out) {
  if (int rc = require_arg(params && out, "par_params_to_json: bad arguments"))
    return rc;
  return guarded([&] {
    *out = dup_string(params_to_json(params->m));
    return PAR_OK;
  });
}

int par_params_set_a(par_params* params, int lag, const double* a) {
  if (int rc = require_arg(params && a, "par_params_set_a: bad arguments"))
    return rc;
  return guarded([&] {
    if (lag < 1 || lag > params->m.p)
      throw std::invalid_argument("par_params_set_a: lag out of range");
    const int k = params->m.k;
    params->m.A[lag - 1] = Eigen::Map<const Eigen::Matrix<
        double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a, k, k);
    return PAR_OK;
  });
}

int par_params_set_b(par_params* params, const double* b) {
  if (int rc = require_arg(params != nullptr, "par_params_set_b: params is NULL"))
    return rc;
  return guarded([&] {
    if (params->m.d > 0 && !b)
      throw std::invalid_argument("par_params_set_b: b is NULL");
    if (params->m.d > 0)
      params->m.B = Eigen::Map<const Eigen::Matrix<
          double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          b, params->m.k, params->m.d);
    return PAR_OK;
  });
}

int par_params_set_c(par_params* params, const double* c) {
  if (int rc = require_arg(params && c, "par_params_set_c: bad arguments"))
    return rc;
  return guarded([&] {
    params->m.C = Eigen::Map<const Eigen::VectorXd>(c, params->m.k);
    return PAR_OK;
  });
}

int par_params_set_r(par_params* params, const double* r) {
  if (int rc = require_arg(params && r, "par_params_set_r: bad arguments"))
    return rc;
  return guarded([&] {
    const int k = params->m.k;
    params->m.R = Eigen::Map<const Eigen::Matrix<
        double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(r, k, k);
    return PAR_OK;
  });
}

int par_params_dims(const par_params* params, int* k, int* p, int* d) {
  if (int rc = require_arg(params != nullptr, "par_params_dims: params is NULL"))
    return rc;
  if (k) *k = params->m.k;
  if (p) *p = params->m.p;
  if (d) *d = params->m.d;
  return PAR_OK;
}

int par_params_validate(const par_params* params) {
  if (int rc = require_arg(params != nullptr, "par_params_validate: params is NULL"))
    return rc;
  return guarded([&] {
    params->m.validate();
    return PAR_OK;
  });
}

void par_params_free(par_params* params) { delete params; }

int par_covspec_arma(int d, const double* ar, int n_ar, const double* ma,
                     int n_ma, double innovation_sd, par_covspec** out) {
  if (int rc = require_arg(out != nullptr, "par_covspec_arma: out is NULL"))
    return rc;
  return guarded([&] {
    if (d < 1) throw std::invalid_argument("par_covspec_arma: d must be >= 1");
    if ((n_ar > 0 && !ar) || (n_ma > 0 && !ma))
      throw std::invalid_argument("par_covspec_arma: NULL coefficient array");
    std::vector<double> arv(ar, ar + std::max(n_ar, 0));
    std::vector<double> mav(ma, ma + std::max(n_ma, 0));
    *out = new par_covspec{
        std::make_unique<ArmaCovariates>(arv, mav, innovation_sd, d)};
    return PAR_OK;
  });
}

int par_covspec_none(par_covspec** out) {
  if (int rc = require_arg(out != nullptr, "par_covspec_none: out is NULL"))
    return rc;
  *out = new par_covspec{std::make_unique<NoCovariates>()};
  return PAR_OK;
}

void par_covspec_free(par_covspec* cov) { delete cov; }

int par_simulate_panel(const par_params* params, const par_covspec* cov,
                       int n_paths, int horizon, int burn_in, uint64_t seed,
                       par_panel** out) {
  if (int rc = require_arg(params && cov && out,
                           "par_simulate_panel: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_panel{simulate_panel(params->m, *cov->src, n_paths,
                                        horizon, burn_in, seed)};
    return PAR_OK;
  });
}

int par_perfect_sample(const par_params* params, const par_covspec* cov,
                       int max_lookback, uint64_t seed, uint64_t draw_id,
                       int* state_bits) {
  if (int rc = require_arg(params && cov && state_bits,
                           "par_perfect_sample: bad arguments"))
    return rc;
  return guarded([&] {
    const auto state =
        perfect_sample(params->m, *cov->src, max_lookback, seed, draw_id);
    *state_bits = state ? static_cast<int>(state->encode()) : -1;
    return PAR_OK;
  });
}

int par_panel_dims(const par_panel* panel, int* n, int* horizon, int* k,
                   int* d) {
  if (int rc = require_arg(panel != nullptr, "par_panel_dims: panel is NULL"))
    return rc;
  if (n) *n = panel->panel.n();
  if (horizon) *horizon = panel->panel.horizon();
  if (k) *k = panel->panel.k();
  if (d) *d = panel->panel.d();
  return PAR_OK;
}

int par_panel_response(const par_panel* panel, int path, int* y) {
  if (int rc = require_arg(panel && y, "par_panel_response: bad arguments"))
    return rc;
  return guarded([&] {
    if (path < 0 || path >= panel->panel.n())
      throw std::invalid_argument("par_panel_response: path out of range");
    const auto& p = panel->panel.paths[path];
    for (int t = 0; t < p.horizon(); ++t)
      for (int i = 0; i < p.k(); ++i) y[t * p.k() + i] = p.Y(t, i);
    return PAR_OK;
  });
}

int par_panel_covariate(const par_panel* panel, int path, double* x) {
  if (int rc = require_arg(panel != nullptr, "par_panel_covariate: panel is NULL"))
    return rc;
  return guarded([&] {
    if (path < 0 || path >= panel->panel.n())
      throw std::invalid_argument("par_panel_covariate: path out of range");
    const auto& p = panel->panel.paths[path];
    if (p.d() > 0 && !x)
      throw std::invalid_argument("par_panel_covariate: x is NULL");
    for (int t = 0; t < p.horizon(); ++t)
      for (int m = 0; m < p.d(); ++m) x[t * p.d() + m] = p.X(t, m);
    return PAR_OK;
  });
}

int par_panel_save_csv(const par_panel* panel, const char* path) {
  if (int rc = require_arg(panel && path, "par_panel_save_csv: bad arguments"))
    return rc;
  return guarded([&] {
    save_panel_csv(panel->panel, path);
    return PAR_OK;
  });
}

int par_panel_load_csv(const char* path, par_panel** out) {
  if (int rc = require_arg(path && out, "par_panel_load_csv: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_panel{load_panel_csv(path)};
    return PAR_OK;
  });
}

int par_panel_save_trace(const par_panel* panel, int lag_order,
                         const char* path) {
  if (int rc = require_arg(panel && path, "par_panel_save_trace: bad arguments"))
    return rc;
  return guarded([&] {
    save_trace(panel->panel, lag_order, path);
    return PAR_OK;
  });
}

int par_panel_load_trace(const char* path, par_panel** out, int* lag_order) {
  if (int rc = require_arg(path && out, "par_panel_load_trace: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_panel{load_trace(path, lag_order)};
    return PAR_OK;
  });
}

void par_panel_free(par_panel* panel) { delete panel; }

int par_raw_load_csv(const char* path, par_raw** out) {
  if (int rc = require_arg(path && out, "par_raw_load_csv: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_raw{load_csv(path)};
    return PAR_OK;
  });
}

int par_raw_save_csv(const par_raw* raw, const char* path) {
  if (int rc = require_arg(raw && path, "par_raw_save_csv: bad arguments"))
    return rc;
  return guarded([&] {
    save_csv(raw->raw, path);
    return PAR_OK;
  });
}

int par_raw_binarize(const par_raw* raw, double quantile, par_raw** out) {
  if (int rc = require_arg(raw && out, "par_raw_binarize: bad arguments"))
    return rc;
  return guarded([&] {
    BinarizeSpec spec;
    spec.quantile = quantile;
    *out = new par_raw{binarize(raw->raw, spec)};
    return PAR_OK;
  });
}

int par_raw_impute(const par_raw* raw, uint64_t seed, par_raw** out,
                   par_raw** mask) {
  if (int rc = require_arg(raw && out, "par_raw_impute: bad arguments"))
    return rc;
  return guarded([&] {
    ImputeResult res = impute(raw->raw, seed);
    *out = new par_raw{std::move(res.panel)};
    if (mask) *mask = new par_raw{std::move(res.mask)};
    return PAR_OK;
  });
}

int par_raw_assemble(const par_raw* raw, const char* const* responses,
                     int n_responses, const char* const* covariates,
                     int n_covariates, par_panel** out) {
  if (int rc = require_arg(raw && out && responses && n_responses >= 1 &&
                               (n_covariates == 0 || covariates),
                           "par_raw_assemble: bad arguments"))
    return rc;
  return guarded([&] {
    std::vector<std::string> resp(responses, responses + n_responses);
    std::vector<std::string> covs;
    for (int i = 0; i < n_covariates; ++i) covs.emplace_back(covariates[i]);
    *out = new par_panel{assemble(raw->raw, resp, covs).panel};
    return PAR_OK;
  });
}

void par_raw_free(par_raw* raw) { delete raw; }

void par_fit_options_defaults(par_fit_options* opts) {
  if (!opts) return;
  opts->lag_order = 1;
  opts->threads = 0;
  opts->ghk_draws = 0;
  opts->seed = 0;
  opts->max_iters = 0;
  opts->f_tol = 0.0;
  opts->x_tol = 0.0;
}

int par_fit_two_step(const par_panel* panel, const par_fit_options* opts,
                     par_fit** out) {
  if (int rc = require_arg(panel && out, "par_fit_two_step: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_fit{two_step(panel->panel, to_options(opts))};
    return PAR_OK;
  });
}

int par_fit_one_step(const par_panel* panel, const par_fit_options* opts,
                     par_fit** out) {
  if (int rc = require_arg(panel && out, "par_fit_one_step: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_fit{one_step(panel->panel, to_options(opts))};
    return PAR_OK;
  });
}

int par_fit_dims(const par_fit* fit, int* k, int* p, int* d) {
  if (int rc = require_arg(fit != nullptr, "par_fit_dims: fit is NULL")) return rc;
  if (k) *k = fit->fit.dims.k;
  if (p) *p = fit->fit.dims.p;
  if (d) *d = fit->fit.dims.d;
  return PAR_OK;
}

int par_fit_gamma(const par_fit* fit, double* gamma) {
  if (int rc = require_arg(fit && gamma, "par_fit_gamma: bad arguments"))
    return rc;
  Eigen::Map<Eigen::VectorXd>(gamma, fit->fit.gamma_hat.size()) =
      fit->fit.gamma_hat;
  return PAR_OK;
}

int par_fit_corr(const par_fit* fit, double* r) {
  if (int rc = require_arg(fit != nullptr, "par_fit_corr: fit is NULL")) return rc;
  if (fit->fit.r_hat.r.size() > 0) {
    if (int rc = require_arg(r != nullptr, "par_fit_corr: r is NULL")) return rc;
    Eigen::Map<Eigen::VectorXd>(r, fit->fit.r_hat.r.size()) = fit->fit.r_hat.r;
  }
  return PAR_OK;
}

int par_fit_objective(const par_fit* fit, double* value) {
  if (int rc = require_arg(fit && value, "par_fit_objective: bad arguments"))
    return rc;
  *value = fit->fit.objective_value;
  return PAR_OK;
}

int par_fit_flags(const par_fit* fit, int* pd_repaired, int* any_boundary) {
  if (int rc = require_arg(fit != nullptr, "par_fit_flags: fit is NULL")) return rc;
  if (pd_repaired) *pd_repaired = fit->fit.pd_repaired ? 1 : 0;
  if (any_boundary) *any_boundary = fit->fit.any_boundary() ? 1 : 0;
  return PAR_OK;
}

int par_fit_params(const par_fit* fit, par_params** out) {
  if (int rc = require_arg(fit && out, "par_fit_params: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_params{fit->fit.params()};
    return PAR_OK;
  });
}

int par_fit_to_json(const par_fit* fit, char** out) {
  if (int rc = require_arg(fit && out, "par_fit_to_json: bad arguments"))
    return rc;
  return guarded([&] {
    *out = dup_string(fit_to_json(fit->fit));
    return PAR_OK;
  });
}

int par_fit_from_json(const char* text, par_fit** out) {
  if (int rc = require_arg(text && out, "par_fit_from_json: bad arguments"))
    return rc;
  return guarded([&] {
    *out = new par_fit{fit_from_json(text)};
    return PAR_OK;
  });
}

int par_fit_format_table(const par_fit* fit, char** out) {
  if (int rc = require_arg(fit && out, "par_fit_format_table: bad arguments"))
    return rc;
  return guarded([&] {
    *out = dup_string(format_fit_table(fit->fit));
    return PAR_OK;
  });
}

int par_fit_format_intervals(const par_fit* fit, char** out) {
  if (int rc = require_arg(fit && out, "par_fit_format_intervals: bad arguments"))
    return rc;
  return guarded([&] {
    *out = dup_string(format_interval_table(fit->fit));
    return PAR_OK;
  });
}

void par_fit_free(par_fit* fit) { delete fit; }

int par_bootstrap_ci(const par_fit* fit, const par_panel* template_panel,
                     const par_covspec* cov, int b_replicates, double level,
                     uint64_t seed, int threads, par_fit** out) {
  if (int rc = require_arg(fit && template_panel && out,
                           "par_bootstrap_ci: bad arguments"))
    return rc;
  return guarded([&] {
    auto result = std::make_unique<par_fit>(*fit);
    BootstrapSummary summary = bootstrap_ci(
        fit->fit, template_panel->panel, cov ? cov->src.get() : nullptr,
        b_replicates, level, seed, threads);
    result->fit.bootstrap = std::make_unique<BootstrapSummary>(std::move(summary));
    *out = result.release();
    return PAR_OK;
  });
}

int par_fit_intervals(const par_fit* fit, double* lo, double* hi,
                      double* level) {
  if (int rc = require_arg(fit && lo && hi, "par_fit_intervals: bad arguments"))
    return rc;
  if (!fit->fit.bootstrap) {
    set_error("par_fit_intervals: fit has no bootstrap block");
    return PAR_EINVAL;
  }
  const auto& b = *fit->fit.bootstrap;
  Eigen::Map<Eigen::VectorXd>(lo, b.lo.size()) = b.lo;
  Eigen::Map<Eigen::VectorXd>(hi, b.hi.size()) = b.hi;
  if (level) *level = b.level;
  return PAR_OK;
}

int par_replicate(const par_params* truth, const par_covspec* cov,
                  int n_paths, int horizon, int burn_in, int n_sims,
                  int method, const par_fit_options* opts, uint64_t seed,
                  double* truth_out, double* mean, double* mse, double* bias,
                  double* variance, char** names) {
  if (int rc = require_arg(truth && cov && mean && mse && bias && variance,
                           "par_replicate: bad arguments"))
    return rc;
  return guarded([&] {
    const std::vector<ReplicationRow> rows = replicate_study(
        truth->m, *cov->src, n_paths, horizon, burn_in, n_sims,
        method == 1 ? "one_step" : "two_step", to_options(opts), seed);
    std::string joined;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (truth_out) truth_out[i] = rows[i].truth;
      mean[i] = rows[i].mean;
      mse[i] = rows[i].mse;
      bias[i] = rows[i].bias;
      variance[i] = rows[i].variance;
      if (!joined.empty()) joined += '\n';
      joined += rows[i].name;
    }
    if (names) *names = dup_string(joined);
    return PAR_OK;
  });
}

}  // extern "C"
