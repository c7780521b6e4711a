#include "likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gauss.hpp"

namespace probitar {

namespace {

constexpr double kLogClamp = 1e-300;

inline double clamped_log(double v, LikelihoodDiag* diag) {
  if (v < kLogClamp) {
    v = kLogClamp;
    if (diag) ++diag->clamp_events;
  }
  return std::log(v);
}

GammaDims dims_of(const PanelData& panel, int p) {
  if (p < 1) throw std::invalid_argument("likelihood: lag order must be >= 1");
  if (panel.horizon() <= p)
    throw std::invalid_argument("likelihood: need T > p");
  return GammaDims{panel.k(), p, panel.d()};
}

void check_gamma(const Eigen::VectorXd& gamma, const GammaDims& dims) {
  if (gamma.size() != dims.length())
    throw std::invalid_argument("likelihood: gamma has wrong length");
  if (!gamma.allFinite())
    throw std::invalid_argument("likelihood: non-finite gamma");
}

}  // namespace

Eigen::VectorXd pack_gamma(const ModelParams& params) {
  const GammaDims dims{params.k, params.p, params.d};
  Eigen::VectorXd gamma(dims.length());
  int pos = 0;
  for (int i = 0; i < params.k; ++i) gamma[pos++] = params.C[i];
  for (const auto& a : params.A)
    for (int j = 0; j < params.k; ++j)
      for (int i = 0; i < params.k; ++i) gamma[pos++] = a(i, j);
  for (int m = 0; m < params.d; ++m)
    for (int i = 0; i < params.k; ++i) gamma[pos++] = params.B(i, m);
  return gamma;
}

void unpack_gamma(const Eigen::VectorXd& gamma, ModelParams& out) {
  const GammaDims dims{out.k, out.p, out.d};
  if (gamma.size() != dims.length())
    throw std::invalid_argument("unpack_gamma: wrong length");
  out.A.assign(out.p, Eigen::MatrixXd(out.k, out.k));
  out.B.resize(out.k, out.d);
  out.C.resize(out.k);
  int pos = 0;
  for (int i = 0; i < out.k; ++i) out.C[i] = gamma[pos++];
  for (int l = 0; l < out.p; ++l)
    for (int j = 0; j < out.k; ++j)
      for (int i = 0; i < out.k; ++i) out.A[l](i, j) = gamma[pos++];
  for (int m = 0; m < out.d; ++m)
    for (int i = 0; i < out.k; ++i) out.B(i, m) = gamma[pos++];
}

Eigen::VectorXd gather_equation(const Eigen::VectorXd& gamma,
                                const GammaDims& dims, int eq) {
  Eigen::VectorXd row(dims.row_length());
  row[0] = gamma[eq];
  int pos = 1;
  const int a0 = dims.k;
  for (int l = 0; l < dims.p; ++l)
    for (int j = 0; j < dims.k; ++j)
      row[pos++] = gamma[a0 + l * dims.k * dims.k + j * dims.k + eq];
  const int b0 = dims.k + dims.p * dims.k * dims.k;
  for (int m = 0; m < dims.d; ++m)
    row[pos++] = gamma[b0 + m * dims.k + eq];
  return row;
}

void scatter_equation(const Eigen::VectorXd& row, const GammaDims& dims,
                      int eq, Eigen::VectorXd& gamma) {
  gamma[eq] = row[0];
  int pos = 1;
  const int a0 = dims.k;
  for (int l = 0; l < dims.p; ++l)
    for (int j = 0; j < dims.k; ++j)
      gamma[a0 + l * dims.k * dims.k + j * dims.k + eq] = row[pos++];
  const int b0 = dims.k + dims.p * dims.k * dims.k;
  for (int m = 0; m < dims.d; ++m)
    gamma[b0 + m * dims.k + eq] = row[pos++];
}

CorrParam CorrParam::identity(int k) {
  CorrParam c;
  c.k = k;
  c.r = Eigen::VectorXd::Zero(k * (k - 1) / 2);
  return c;
}

CorrParam CorrParam::from_matrix(const Eigen::MatrixXd& R) {
  CorrParam c = identity(static_cast<int>(R.rows()));
  for (int i = 0; i < c.k; ++i)
    for (int j = i + 1; j < c.k; ++j) c.set_pair(i, j, R(i, j));
  c.validate();
  return c;
}

int CorrParam::pair_index(int i, int j, int k) {
  if (!(0 <= i && i < j && j < k))
    throw std::invalid_argument("CorrParam: need 0 <= i < j < k");
  return i * k - i * (i + 1) / 2 + (j - i - 1);
}

Eigen::MatrixXd CorrParam::matrix() const {
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) R(i, j) = R(j, i) = pair(i, j);
  return R;
}

void CorrParam::validate() const {
  if (r.size() != n_pairs())
    throw std::invalid_argument("CorrParam: wrong length");
  for (Eigen::Index idx = 0; idx < r.size(); ++idx)
    if (!(std::abs(r[idx]) < 1.0))
      throw std::invalid_argument("CorrParam: |r| must be < 1");
  Eigen::LLT<Eigen::MatrixXd> llt(matrix());
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("CorrParam: matrix not positive definite");
}

double reduce_path_sums(std::vector<double> partials) {
  std::sort(partials.begin(), partials.end());
  double total = 0.0;
  for (double v : partials) total += v;
  return total;
}

DesignMatrix DesignMatrix::build(const PanelData& panel, int p) {
  panel.validate();
  DesignMatrix dm;
  dm.dims = dims_of(panel, p);
  const int k = dm.dims.k, d = dm.dims.d;
  const int per_path = panel.horizon() - p;
  dm.rows_per_path = per_path;
  const Eigen::Index rows =
      static_cast<Eigen::Index>(per_path) * panel.n();
  dm.design.resize(rows, dm.dims.row_length());
  dm.y.resize(rows, k);
  Eigen::Index row = 0;
  for (const auto& path : panel.paths) {
    for (int t = p; t < panel.horizon(); ++t, ++row) {
      dm.design(row, 0) = 1.0;
      int pos = 1;
      for (int l = 1; l <= p; ++l)
        for (int j = 0; j < k; ++j)
          dm.design(row, pos++) = static_cast<double>(path.Y(t - l, j));
      for (int m = 0; m < d; ++m)
        dm.design(row, pos++) = path.X(t - 1, m);
      for (int i = 0; i < k; ++i) dm.y(row, i) = path.Y(t, i);
    }
  }
  return dm;
}

double marginal_pl(const Eigen::VectorXd& gamma, const PanelData& panel, int p,
                   LikelihoodDiag* diag) {
  const DesignMatrix dm = DesignMatrix::build(panel, p);
  check_gamma(gamma, dm.dims);
  std::vector<double> partials(panel.n(), 0.0);
  for (int i = 0; i < dm.dims.k; ++i) {
    const Eigen::VectorXd lam = dm.lambda(gather_equation(gamma, dm.dims, i));
    for (Eigen::Index t = 0; t < dm.rows(); ++t) {
      const double v = std_normal_cdf(dm.y(t, i) ? lam[t] : -lam[t]);
      partials[t / dm.rows_per_path] += clamped_log(v, diag);
    }
  }
  return reduce_path_sums(std::move(partials));
}

Eigen::VectorXd marginal_pl_grad(const Eigen::VectorXd& gamma,
                                 const PanelData& panel, int p) {
  const DesignMatrix dm = DesignMatrix::build(panel, p);
  check_gamma(gamma, dm.dims);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(gamma.size());
  Eigen::VectorXd row_grad(dm.dims.row_length());
  for (int i = 0; i < dm.dims.k; ++i) {
    const Eigen::VectorXd lam = dm.lambda(gather_equation(gamma, dm.dims, i));
    row_grad.setZero();
    for (Eigen::Index t = 0; t < dm.rows(); ++t) {
      // hdot_y(s) = y phi(s)/Phi(s) - (1-y) phi(s)/Phi(-s)
      const double s = lam[t];
      const double phi = std_normal_pdf(s);
      const double denom =
          std::max(std_normal_cdf(dm.y(t, i) ? s : -s), kLogClamp);
      const double hdot = (dm.y(t, i) ? 1.0 : -1.0) * phi / denom;
      row_grad.noalias() += hdot * dm.design.row(t).transpose();
    }
    scatter_equation(row_grad, dm.dims, i, grad);
  }
  return grad;
}

PairObjective PairObjective::build(const DesignMatrix& dm,
                                   const Eigen::VectorXd& gamma, int i,
                                   int j) {
  check_gamma(gamma, dm.dims);
  PairObjective po;
  po.rows_per_path = dm.rows_per_path;
  po.lam_i = dm.lambda(gather_equation(gamma, dm.dims, i));
  po.lam_j = dm.lambda(gather_equation(gamma, dm.dims, j));
  po.y.resize(dm.rows(), 2);
  for (Eigen::Index t = 0; t < dm.rows(); ++t) {
    po.y(t, 0) = dm.y(t, i);
    po.y(t, 1) = dm.y(t, j);
  }
  return po;
}

double PairObjective::value(double r, LikelihoodDiag* diag) const {
  std::vector<double> partials(lam_i.size() / rows_per_path, 0.0);
  for (Eigen::Index t = 0; t < lam_i.size(); ++t) {
    const double v = rect2({lam_i[t], lam_j[t], r, y(t, 0), y(t, 1)});
    partials[t / rows_per_path] += clamped_log(v, diag);
  }
  return reduce_path_sums(std::move(partials));
}

double PairObjective::deriv(double r) const {
  std::vector<double> partials(lam_i.size() / rows_per_path, 0.0);
  for (Eigen::Index t = 0; t < lam_i.size(); ++t) {
    const Rect2Spec spec{lam_i[t], lam_j[t], r, y(t, 0), y(t, 1)};
    partials[t / rows_per_path] += rect2_dr(spec) / rect2(spec);
  }
  return reduce_path_sums(std::move(partials));
}

double pairwise_ll(const Eigen::VectorXd& gamma, const CorrParam& corr, int i,
                   int j, const PanelData& panel, int p,
                   LikelihoodDiag* diag) {
  const DesignMatrix dm = DesignMatrix::build(panel, p);
  const double r = corr.pair(i, j);
  if (!(std::abs(r) < 1.0))
    throw std::invalid_argument("pairwise_ll: |r| must be < 1");
  return PairObjective::build(dm, gamma, i, j).value(r, diag);
}

double pairwise_ll_dr(const Eigen::VectorXd& gamma, const CorrParam& corr,
                      int i, int j, const PanelData& panel, int p) {
  const DesignMatrix dm = DesignMatrix::build(panel, p);
  const double r = corr.pair(i, j);
  if (!(std::abs(r) < 1.0))
    throw std::invalid_argument("pairwise_ll_dr: |r| must be < 1");
  return PairObjective::build(dm, gamma, i, j).deriv(r);
}

Eigen::VectorXd pairwise_ll_grad_gamma_fd(const Eigen::VectorXd& gamma,
                                          const CorrParam& corr, int i, int j,
                                          const PanelData& panel, int p,
                                          double h) {
  const DesignMatrix dm = DesignMatrix::build(panel, p);
  const double r = corr.pair(i, j);
  Eigen::VectorXd grad(gamma.size());
  Eigen::VectorXd point = gamma;
  for (Eigen::Index idx = 0; idx < gamma.size(); ++idx) {
    point[idx] = gamma[idx] + h;
    const double up = PairObjective::build(dm, point, i, j).value(r);
    point[idx] = gamma[idx] - h;
    const double dn = PairObjective::build(dm, point, i, j).value(r);
    point[idx] = gamma[idx];
    grad[idx] = (up - dn) / (2.0 * h);
  }
  return grad;
}

double full_pl(const Eigen::VectorXd& gamma, const CorrParam& corr,
               const PanelData& panel, int p, int ghk_draws,
               std::uint64_t seed, LikelihoodDiag* diag) {
  const DesignMatrix dm = DesignMatrix::build(panel, p);
  check_gamma(gamma, dm.dims);
  const int k = dm.dims.k;
  if (corr.k != k) throw std::invalid_argument("full_pl: corr dimension mismatch");

  if (k == 1) return marginal_pl(gamma, panel, p, diag);

  if (k == 2) {
    const double r = corr.pair(0, 1);
    if (!(std::abs(r) < 1.0))
      throw std::invalid_argument("full_pl: |r| must be < 1");
    return PairObjective::build(dm, gamma, 0, 1).value(r, diag);
  }

  corr.validate();
  const Eigen::MatrixXd R = corr.matrix();
  if (ghk_draws <= 0) ghk_draws = kDefaultGhkDraws;
  // One block of common random numbers shared by every observation.
  Rng rng(seed);
  Eigen::MatrixXd u(ghk_draws, k);
  for (int m = 0; m < ghk_draws; ++m)
    for (int i = 0; i < k; ++i) u(m, i) = rng.uniform();

  std::vector<Eigen::VectorXd> lam(k);
  for (int i = 0; i < k; ++i)
    lam[i] = dm.lambda(gather_equation(gamma, dm.dims, i));

  RectKSpec spec;
  spec.lam.resize(k);
  spec.corr = R;
  spec.s.resize(k);
  std::vector<double> partials(panel.n(), 0.0);
  for (Eigen::Index t = 0; t < dm.rows(); ++t) {
    for (int i = 0; i < k; ++i) {
      spec.lam[i] = lam[i][t];
      spec.s[i] = dm.y(t, i);
    }
    partials[t / dm.rows_per_path] += clamped_log(rect_k_ghk_with(spec, u).prob, diag);
  }
  return reduce_path_sums(std::move(partials));
}

PanelData as_panel(const PathData& path) {
  PanelData panel;
  panel.paths.push_back(path);
  return panel;
}

}  // namespace probitar
