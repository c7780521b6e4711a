// Acceptance suite: one numbered criterion per invocation, one PASS/FAIL
// line each. Usage: probitar_acceptance <n> [--cli <path>] [--threads N]

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "estimate.hpp"
#include "gauss.hpp"
#include "panel_io.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "../support/fixtures.hpp"
#include "../support/stats.hpp"

using namespace probitar;
namespace fs = std::filesystem;

namespace {

int g_threads = 0;
std::string g_cli;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---- criterion 1: replication of the two-step study table ---------------

Outcome criterion1() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  EstimateOptions opts;
  opts.threads = g_threads;
  const auto rows =
      replicate_study(truth, cov, 50, 100, 500, 200, "two_step", opts, 101);

  const double target_mean[9] = {0.298, -0.503, 0.200, 0.700, -0.400,
                                 0.600, 0.203,  0.401, -0.199};
  const double target_var[9] = {0.002, 0.003, 0.002, 0.003, 0.001,
                                0.001, 0.003, 0.003, 0.001};
  bool pass = true;
  double worst_mean = 0.0, worst_var_ratio = 0.0;
  std::ostringstream detail;
  for (int i = 0; i < 9; ++i) {
    const double dm = std::abs(rows[i].mean - target_mean[i]);
    const double vr = rows[i].variance / target_var[i];
    worst_mean = std::max(worst_mean, dm);
    worst_var_ratio = std::max(worst_var_ratio, vr);
    if (dm > 0.03 || vr > 2.0) {
      pass = false;
      detail << " [" << rows[i].name << " mean " << fmt(rows[i].mean)
             << " vs " << fmt(target_mean[i]) << ", var "
             << fmt(rows[i].variance) << "]";
    }
  }
  detail << " max |mean-target| = " << fmt(worst_mean)
         << ", max var ratio = " << fmt(worst_var_ratio);
  return {pass, detail.str()};
}

// ---- criterion 2: one-step ascent from the two-step point ---------------

Outcome criterion2() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  const PanelData panel = simulate_panel(truth, cov, 50, 100, 500, 202);
  EstimateOptions opts;
  opts.threads = g_threads;
  const EstimationResult ts = two_step(panel, opts);
  const EstimationResult os = one_step(panel, opts);

  const double pl_ts = full_pl(ts.gamma_hat, ts.r_hat, panel, 1, 0, 0);
  const double pl_os = full_pl(os.gamma_hat, os.r_hat, panel, 1, 0, 0);

  Eigen::VectorXd theta_true(9);
  theta_true.head(8) = pack_gamma(truth);
  theta_true[8] = -0.2;
  const double err =
      (os.theta() - theta_true).lpNorm<Eigen::Infinity>();

  const bool pass = pl_os >= pl_ts - 1e-9 && err <= 0.1;
  return {pass, "full_pl " + fmt(pl_ts, 10) + " -> " + fmt(pl_os, 10) +
                    ", sup-norm error " + fmt(err)};
}

// ---- criterion 3: probability kernels ------------------------------------

Outcome criterion3() {
  Rng rng(33);
  double worst_norm = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Rect2Spec s;
    s.lam_i = 6.0 * rng.uniform() - 3.0;
    s.lam_j = 6.0 * rng.uniform() - 3.0;
    s.r = 1.9 * rng.uniform() - 0.95;
    double total = 0.0;
    for (int si = 0; si < 2; ++si)
      for (int sj = 0; sj < 2; ++sj) {
        s.s_i = si;
        s.s_j = sj;
        total += rect2(s);
      }
    worst_norm = std::max(worst_norm, std::abs(total - 1.0));
  }

  // 50 specs against a 1e7-draw Monte-Carlo oracle
  const long n_mc = 10'000'000;
  std::vector<Rect2Spec> specs(50);
  {
    Rng gen(34);
    for (auto& s : specs) {
      s.lam_i = 6.0 * gen.uniform() - 3.0;
      s.lam_j = 6.0 * gen.uniform() - 3.0;
      s.r = 1.9 * gen.uniform() - 0.95;
      s.s_i = gen.uniform() < 0.5 ? 0 : 1;
      s.s_j = gen.uniform() < 0.5 ? 0 : 1;
    }
  }
  std::vector<double> z_mc(specs.size(), 0.0);
  parallel_for(static_cast<int>(specs.size()), g_threads, [&](int idx) {
    const Rect2Spec& s = specs[idx];
    Rng mc(Rng::mix_seed(35, idx));
    const double c = std::sqrt(1.0 - s.r * s.r);
    long hits = 0;
    for (long m = 0; m < n_mc; ++m) {
      const double z1 = mc.normal();
      const double z2 = s.r * z1 + c * mc.normal();
      if ((s.lam_i + z1 > 0.0 ? 1 : 0) == s.s_i &&
          (s.lam_j + z2 > 0.0 ? 1 : 0) == s.s_j)
        ++hits;
    }
    const double v = rect2(s);
    const double phat = static_cast<double>(hits) / n_mc;
    const double var = std::max({phat * (1.0 - phat), v * (1.0 - v), 1e-12});
    z_mc[idx] = std::abs(v - phat) / std::sqrt(var / n_mc);
  });
  const double worst_mc = *std::max_element(z_mc.begin(), z_mc.end());

  // GHK (k = 2) against the quadrature on 50 specs
  double worst_ghk = 0.0;
  Rng gen(36);
  for (int i = 0; i < 50; ++i) {
    Rect2Spec s;
    s.lam_i = 6.0 * gen.uniform() - 3.0;
    s.lam_j = 6.0 * gen.uniform() - 3.0;
    s.r = 1.9 * gen.uniform() - 0.95;
    s.s_i = gen.uniform() < 0.5 ? 0 : 1;
    s.s_j = gen.uniform() < 0.5 ? 0 : 1;
    RectKSpec spec;
    spec.lam = Eigen::Vector2d(s.lam_i, s.lam_j);
    spec.corr = Eigen::Matrix2d::Identity();
    spec.corr(0, 1) = spec.corr(1, 0) = s.r;
    spec.s = {s.s_i, s.s_j};
    const GhkResult est = rect_k_ghk(spec, 100'000, 37 + i);
    const double z =
        std::abs(est.prob - rect2(s)) / std::max(est.std_err, 1e-12);
    worst_ghk = std::max(worst_ghk, z);
  }

  const bool pass = worst_norm <= 1e-9 && worst_mc <= 4.0 && worst_ghk <= 4.0;
  return {pass, "max |sum-1| = " + fmt(worst_norm, 3) +
                    ", MC max z = " + fmt(worst_mc, 3) +
                    ", GHK max z = " + fmt(worst_ghk, 3)};
}

// ---- criterion 4: gradient suite -----------------------------------------

double rel_err(double an, double fd) {
  return std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1.0});
}

Outcome criterion4() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  const PanelData panel = simulate_panel(truth, cov, 5, 60, 300, 404);
  const GammaDims dims{2, 1, 1};
  Rng rng(44);

  double worst_marginal = 0.0;
  {
    const double h = 1e-6;
    for (int pt = 0; pt < 100; ++pt) {
      Eigen::VectorXd gamma(dims.length());
      for (Eigen::Index i = 0; i < gamma.size(); ++i)
        gamma[i] = 1.6 * rng.uniform() - 0.8;
      const Eigen::VectorXd grad = marginal_pl_grad(gamma, panel, 1);
      const Eigen::Index idx =
          static_cast<Eigen::Index>(rng.next_u64() % gamma.size());
      Eigen::VectorXd up = gamma, dn = gamma;
      up[idx] += h;
      dn[idx] -= h;
      const double fd =
          (marginal_pl(up, panel, 1) - marginal_pl(dn, panel, 1)) / (2.0 * h);
      worst_marginal = std::max(worst_marginal, rel_err(grad[idx], fd));
    }
  }

  double worst_rect = 0.0;
  {
    const double h = 1e-5;
    for (int pt = 0; pt < 100; ++pt) {
      Rect2Spec s;
      s.lam_i = 6.0 * rng.uniform() - 3.0;
      s.lam_j = 6.0 * rng.uniform() - 3.0;
      s.r = 1.8 * rng.uniform() - 0.9;
      s.s_i = rng.uniform() < 0.5 ? 0 : 1;
      s.s_j = rng.uniform() < 0.5 ? 0 : 1;
      Rect2Spec up = s, dn = s;
      up.r += h;
      dn.r -= h;
      const double fd = (rect2(up) - rect2(dn)) / (2.0 * h);
      worst_rect = std::max(worst_rect, rel_err(rect2_dr(s), fd));
    }
  }

  double worst_pair = 0.0;
  {
    const double h = 1e-5;
    for (int pt = 0; pt < 100; ++pt) {
      Eigen::VectorXd gamma(dims.length());
      for (Eigen::Index i = 0; i < gamma.size(); ++i)
        gamma[i] = 1.6 * rng.uniform() - 0.8;
      CorrParam corr = CorrParam::identity(2);
      corr.r[0] = 1.8 * rng.uniform() - 0.9;
      CorrParam up = corr, dn = corr;
      up.r[0] += h;
      dn.r[0] -= h;
      const double fd = (pairwise_ll(gamma, up, 0, 1, panel, 1) -
                         pairwise_ll(gamma, dn, 0, 1, panel, 1)) /
                        (2.0 * h);
      const double an = pairwise_ll_dr(gamma, corr, 0, 1, panel, 1);
      worst_pair = std::max(worst_pair, rel_err(an, fd));
    }
  }

  const bool pass =
      worst_marginal <= 1e-6 && worst_rect <= 1e-6 && worst_pair <= 1e-6;
  return {pass, "max rel err: marginal " + fmt(worst_marginal, 3) +
                    ", rect2_dr " + fmt(worst_rect, 3) + ", pairwise " +
                    fmt(worst_pair, 3)};
}

// ---- criterion 5: monotonicity of the (0,0) rectangle in r ---------------

Outcome criterion5() {
  double worst = 1e300;
  for (int a = 0; a < 50; ++a)
    for (int b = 0; b < 50; ++b)
      for (int c = 0; c < 19; ++c) {
        const double li = -3.0 + 6.0 * a / 49.0;
        const double lj = -3.0 + 6.0 * b / 49.0;
        const double r = -0.9 + 1.8 * c / 18.0;
        worst = std::min(worst, rect2_dr({li, lj, r, 0, 0}));
      }
  return {worst > 0.0, "min derivative on the grid = " + fmt(worst, 3)};
}

// ---- criterion 6: score mean zero at the truth ----------------------------

Outcome criterion6() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  // n T = 1e5 observations
  const PanelData panel = simulate_panel(truth, cov, 50, 2001, 500, 606);
  const DesignMatrix dm = DesignMatrix::build(panel, 1);
  const Eigen::VectorXd gamma = pack_gamma(truth);
  const double n_obs = static_cast<double>(dm.rows());

  // per-observation marginal scores, component-wise mean and sd
  double worst_marginal = 0.0;
  for (int eq = 0; eq < 2; ++eq) {
    const Eigen::VectorXd lam = dm.lambda(gather_equation(gamma, dm.dims, eq));
    for (int comp = 0; comp < dm.dims.row_length(); ++comp) {
      double s1 = 0.0, s2 = 0.0;
      for (Eigen::Index t = 0; t < dm.rows(); ++t) {
        const double phi = std_normal_pdf(lam[t]);
        const double denom = std::max(
            std_normal_cdf(dm.y(t, eq) ? lam[t] : -lam[t]), 1e-300);
        const double score =
            (dm.y(t, eq) ? 1.0 : -1.0) * phi / denom * dm.design(t, comp);
        s1 += score;
        s2 += score * score;
      }
      const double mean = s1 / n_obs;
      const double sd = std::sqrt(std::max(s2 / n_obs - mean * mean, 1e-300));
      worst_marginal =
          std::max(worst_marginal, std::abs(mean) / (sd / std::sqrt(n_obs)));
    }
  }

  // pairwise score in r at (gamma_0, r_0)
  const Eigen::VectorXd lam_i = dm.lambda(gather_equation(gamma, dm.dims, 0));
  const Eigen::VectorXd lam_j = dm.lambda(gather_equation(gamma, dm.dims, 1));
  double s1 = 0.0, s2 = 0.0;
  for (Eigen::Index t = 0; t < dm.rows(); ++t) {
    const Rect2Spec spec{lam_i[t], lam_j[t], -0.2, dm.y(t, 0), dm.y(t, 1)};
    const double score = rect2_dr(spec) / rect2(spec);
    s1 += score;
    s2 += score * score;
  }
  const double mean = s1 / n_obs;
  const double sd = std::sqrt(std::max(s2 / n_obs - mean * mean, 1e-300));
  const double z_pair = std::abs(mean) / (sd / std::sqrt(n_obs));

  const bool pass = worst_marginal <= 4.0 && z_pair <= 4.0;
  return {pass, "marginal max |z| = " + fmt(worst_marginal, 3) +
                    ", pairwise |z| = " + fmt(z_pair, 3)};
}

// ---- criterion 7: perfect sampling vs burn-in forward simulation ---------

Outcome criterion7() {
  struct SetSpec {
    std::string name;
    ModelParams params;
    std::unique_ptr<CovariateSource> cov;
  };
  std::vector<SetSpec> sets;
  {
    SetSpec a;
    a.name = "two-species";
    a.params = fixtures::sec5_params();
    a.cov = std::make_unique<ArmaCovariates>(fixtures::sec5_covariates());
    sets.push_back(std::move(a));

    SetSpec b;
    b.name = "k1p2";
    b.params = ModelParams::zeros(1, 2, 0);
    b.params.A[0](0, 0) = 0.8;
    b.params.A[1](0, 0) = -0.6;
    b.params.C[0] = 0.1;
    b.cov = std::make_unique<NoCovariates>();
    sets.push_back(std::move(b));

    SetSpec c;
    c.name = "k2-positive";
    c.params = ModelParams::zeros(2, 1, 0);
    c.params.A[0] << 0.5, 0.3, -0.2, 0.6;
    c.params.C << -0.4, 0.3;
    c.params.R << 1.0, 0.5, 0.5, 1.0;
    c.cov = std::make_unique<NoCovariates>();
    sets.push_back(std::move(c));
  }

  const int n_draws = 10'000;
  bool pass = true;
  std::ostringstream detail;
  for (const auto& set : sets) {
    const int kp = set.params.k * set.params.p;
    const int n_states = 1 << kp;
    std::vector<double> freq_perfect(n_states, 0.0), freq_forward(n_states, 0.0);
    std::vector<int> perfect_states(n_draws), forward_states(n_draws);
    parallel_for(n_draws, g_threads, [&](int i) {
      const auto s = perfect_sample(set.params, *set.cov, 4096, 707, i);
      perfect_states[i] = s ? static_cast<int>(s->encode()) : -1;
      const PathData path = simulate_path(set.params, *set.cov,
                                          set.params.p, 1000, 708, i);
      int bits = 0, pos = 0;
      // lag state after the path: newest first
      for (int l = 1; l <= set.params.p; ++l)
        for (int ii = 0; ii < set.params.k; ++ii, ++pos)
          if (path.Y(set.params.p - l, ii)) bits |= 1 << pos;
      forward_states[i] = bits;
    });
    for (int i = 0; i < n_draws; ++i) {
      if (perfect_states[i] < 0) {
        pass = false;
        detail << " [" << set.name << ": not coalesced]";
        break;
      }
      freq_perfect[perfect_states[i]] += 1.0;
      freq_forward[forward_states[i]] += 1.0;
    }
    const double p =
        teststat::two_sample_chisq_pvalue(freq_perfect, freq_forward);
    detail << " " << set.name << " p = " << fmt(p, 3);
    if (!(p > 0.01)) pass = false;
  }
  return {pass, detail.str()};
}

// ---- criterion 8: panel law of large numbers ------------------------------

Outcome criterion8() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  const int scales[3][2] = {{10, 10}, {30, 30}, {100, 100}};

  const auto mean_y1y2 = [&](int n, int T, std::uint64_t seed) {
    const PanelData panel = simulate_panel(truth, cov, n, T, 500, seed);
    double acc = 0.0;
    for (const auto& path : panel.paths)
      for (int t = 0; t < T; ++t)
        acc += static_cast<double>(path.Y(t, 0)) * path.Y(t, 1);
    return acc / (static_cast<double>(n) * T);
  };

  std::vector<std::vector<double>> devs(3);
  for (int rep = 0; rep < 10; ++rep) {
    const double ref = mean_y1y2(300, 300, Rng::mix_seed(808, rep, 99));
    for (int s = 0; s < 3; ++s)
      devs[s].push_back(std::abs(
          mean_y1y2(scales[s][0], scales[s][1], Rng::mix_seed(808, rep, s)) -
          ref));
  }
  const double m0 = teststat::median(devs[0]);
  const double m1 = teststat::median(devs[1]);
  const double m2 = teststat::median(devs[2]);
  const bool pass = m0 > m1 && m1 > m2;
  return {pass, "median deviations " + fmt(m0, 4) + " > " + fmt(m1, 4) +
                    " > " + fmt(m2, 4)};
}

// ---- criterion 9: consistency rate of the two-step estimator --------------

Outcome criterion9() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  Eigen::VectorXd theta_true(9);
  theta_true.head(8) = pack_gamma(truth);
  theta_true[8] = -0.2;

  const int scales[3][2] = {{10, 101}, {10, 1001}, {100, 1001}};  // nT = 1e3..1e5
  std::vector<std::vector<double>> errs(3, std::vector<double>(20));
  for (int s = 0; s < 3; ++s) {
    parallel_for(20, g_threads, [&](int rep) {
      const PanelData panel =
          simulate_panel(truth, cov, scales[s][0], scales[s][1], 500,
                         Rng::mix_seed(909, rep, s));
      EstimateOptions opts;
      opts.threads = 1;
      const EstimationResult fit = two_step(panel, opts);
      errs[s][rep] = (fit.theta() - theta_true).lpNorm<Eigen::Infinity>();
    });
  }
  const double m0 = teststat::median(errs[0]);
  const double m1 = teststat::median(errs[1]);
  const double m2 = teststat::median(errs[2]);
  const bool pass = m0 > m1 && m1 > m2 && m0 >= 2.0 * m2;
  return {pass, "median sup-norm errors " + fmt(m0, 4) + " > " + fmt(m1, 4) +
                    " > " + fmt(m2, 4) + " (ratio " + fmt(m0 / m2, 3) + ")"};
}

// ---- criterion 10: bootstrap calibration ----------------------------------

Outcome criterion10() {
  const ModelParams truth = fixtures::sec5_params();
  const ArmaCovariates cov = fixtures::sec5_covariates();
  Eigen::VectorXd theta_true(9);
  theta_true.head(8) = pack_gamma(truth);
  theta_true[8] = -0.2;

  const int metas = 50;
  Eigen::MatrixXi covered = Eigen::MatrixXi::Zero(metas, 9);
  for (int meta = 0; meta < metas; ++meta) {
    const std::uint64_t seed = Rng::mix_seed(1010, meta);
    const PanelData panel = simulate_panel(truth, cov, 36, 50, 500, seed);
    EstimateOptions opts;
    opts.threads = g_threads;
    const EstimationResult fit = two_step(panel, opts);
    const BootstrapSummary ci = bootstrap_ci(
        fit, panel, &cov, 500, 0.95, Rng::mix_seed(seed, 5), g_threads);
    for (int i = 0; i < 9; ++i)
      covered(meta, i) =
          ci.lo[i] <= theta_true[i] && theta_true[i] <= ci.hi[i];
  }
  bool pass = true;
  double worst = 1.0;
  for (int i = 0; i < 9; ++i) {
    const double rate = covered.col(i).cast<double>().mean();
    worst = std::min(worst, rate);
    if (rate < 0.88) pass = false;
  }
  return {pass, "min per-parameter coverage = " + fmt(worst, 3) +
                    " (target >= 0.88 at level 0.95, B = 500)"};
}

// ---- criterion 11: CLI determinism ----------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

Outcome criterion11() {
  if (g_cli.empty()) return {false, "no --cli path given"};
  const fs::path work =
      fs::temp_directory_path() / ("probitar_accept_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string cli = g_cli;
  const std::string wd = work.string();

  // synthetic raw data for prep
  {
    std::ofstream raw(work / "raw.csv");
    raw << "path_id,time,series,value\n";
    Rng rng(1111);
    for (int j = 0; j < 4; ++j)
      for (int t = 0; t < 30; ++t)
        for (const char* s : {"a", "b", "c"}) {
          raw << "p" << j << ',' << t << ',' << s << ',';
          if (rng.uniform() < 0.05)
            raw << "\n";
          else
            raw << fmt(4.0 * rng.uniform() - 2.0, 17) << "\n";
        }
  }

  struct Step {
    std::string cmd;        // with {out} placeholder
    std::vector<std::string> files;
  };
  const std::vector<Step> steps = {
      {cli + " simulate --preset paper-sec5 --n 6 --T 30 --seed 9 --out-dir {out}",
       {"panel.csv", "truth.json"}},
      {cli + " estimate --panel " + wd + "/a0/panel.csv --threads 2 --out-dir {out}",
       {"estimate.json", "estimate.txt"}},
      {cli + " replicate --preset paper-sec5 --n 5 --T 30 --sims 2 --seed 4 "
             "--threads 2 --out-dir {out}",
       {"replicate.csv", "replicate.txt"}},
      {cli + " bootstrap --panel " + wd + "/a0/panel.csv --fit " + wd +
           "/a1/estimate.json --B 100 --level 0.9 --seed 12 --threads 2 "
           "--covariate 'arma:ar=0.4,-0.2,0.1;ma=0.3;sd=1' --out-dir {out}",
       {"bootstrap.json", "bootstrap.txt"}},
      {cli + " prep --in " + wd + "/raw.csv --responses a,b --covariates c "
             "--seed 3 --out-dir {out}",
       {"panel.csv", "mask.csv"}},
  };

  bool pass = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const fs::path out_a = work / ("a" + std::to_string(i));
    const fs::path out_b = work / ("b" + std::to_string(i));
    std::string cmd_a = steps[i].cmd, cmd_b = steps[i].cmd;
    cmd_a.replace(cmd_a.find("{out}"), 5, out_a.string());
    cmd_b.replace(cmd_b.find("{out}"), 5, out_b.string());
    if (run(cmd_a + " > /dev/null") != 0 || run(cmd_b + " > /dev/null") != 0) {
      pass = false;
      detail << " [step " << i << " failed to run]";
      continue;
    }
    for (const auto& f : steps[i].files)
      if (!same_bytes(out_a / f, out_b / f)) {
        pass = false;
        detail << " [" << f << " differs in step " << i << "]";
      }
  }
  if (pass) detail << " all command outputs byte-identical across reruns";
  fs::remove_all(work);
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: probitar_acceptance <1..11> [--cli path] [--threads n]\n";
    return 2;
  }
  const int criterion = std::atoi(argv[1]);
  for (int i = 2; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    if (key == "--cli") g_cli = argv[i + 1];
    if (key == "--threads") g_threads = std::atoi(argv[i + 1]);
  }
  if (g_threads <= 0) g_threads = resolve_threads(0);

  static const char* kNames[] = {
      "",
      "two-step replication study (means and variances)",
      "one-step ascent from the two-step start",
      "probability kernels (normalization, MC oracle, GHK)",
      "gradient suite vs central finite differences",
      "monotonicity of the (0,0) rectangle probability in r",
      "score mean zero at the true parameters",
      "perfect sampling matches burn-in simulation",
      "panel law of large numbers",
      "two-step consistency rate",
      "bootstrap interval calibration",
      "CLI determinism (byte-identical reruns)",
  };

  Outcome out{false, "unknown criterion"};
  switch (criterion) {
    case 1: out = criterion1(); break;
    case 2: out = criterion2(); break;
    case 3: out = criterion3(); break;
    case 4: out = criterion4(); break;
    case 5: out = criterion5(); break;
    case 6: out = criterion6(); break;
    case 7: out = criterion7(); break;
    case 8: out = criterion8(); break;
    case 9: out = criterion9(); break;
    case 10: out = criterion10(); break;
    case 11: out = criterion11(); break;
    default:
      std::cerr << "unknown criterion " << criterion << "\n";
      return 2;
  }
  std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << criterion
            << ": " << kNames[criterion] << " |" << out.detail << "\n";
  return out.pass ? 0 : 1;
}
