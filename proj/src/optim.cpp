#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace probitar {

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;  // stored as -objective (we minimize)

  void sort() {
    std::vector<int> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      if (f[a] != f[b]) return f[a] < f[b];
      return lex_less(x[a], x[b]);
    });
    std::vector<Eigen::VectorXd> xs(x.size());
    std::vector<double> fs(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs[i] = x[idx[i]];
      fs[i] = f[idx[i]];
    }
    x.swap(xs);
    f.swap(fs);
  }

  double spread() const { return f.back() - f.front(); }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
      d = std::max(d, (x[i] - x[0]).lpNorm<Eigen::Infinity>());
    return d;
  }
};

}  // namespace

OptimResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& x0, const OptimOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");
  if (!(opts.f_tol > 0.0) || !(opts.x_tol > 0.0))
    throw std::invalid_argument("nelder_mead: tolerances must be > 0");

  OptimResult res;
  const auto neg = [&](const Eigen::VectorXd& v) {
    ++res.evaluations;
    return -objective(v);
  };

  const double f0 = neg(x0);
  if (!std::isfinite(f0))
    throw std::invalid_argument("nelder_mead: objective not finite at x0");

  const int max_iters = opts.max_iters > 0 ? opts.max_iters : 2000 * n;
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  Eigen::VectorXd center = x0;
  double fcenter = f0;
  double init_step = opts.simplex_init_step;

  for (int round = 0; round <= std::max(opts.restarts, 0); ++round) {
    Simplex s;
    s.x.assign(n + 1, center);
    s.f.assign(n + 1, fcenter);
    for (int i = 0; i < n; ++i) {
      s.x[i + 1][i] += init_step;
      s.f[i + 1] = neg(s.x[i + 1]);
    }
    s.sort();

    while (res.iterations < max_iters) {
      if (s.spread() < opts.f_tol && s.diameter() < opts.x_tol) {
        res.converged = true;
        break;
      }
      ++res.iterations;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) centroid += s.x[i];
      centroid /= n;

      const Eigen::VectorXd xr = centroid + kReflect * (centroid - s.x[n]);
      const double fr = neg(xr);
      if (fr < s.f[0]) {
        const Eigen::VectorXd xe = centroid + kExpand * (xr - centroid);
        const double fe = neg(xe);
        if (fe < fr) {
          s.x[n] = xe;
          s.f[n] = fe;
        } else {
          s.x[n] = xr;
          s.f[n] = fr;
        }
      } else if (fr < s.f[n - 1]) {
        s.x[n] = xr;
        s.f[n] = fr;
      } else {
        const bool outside = fr < s.f[n];
        const Eigen::VectorXd xc =
            outside ? centroid + kContract * (xr - centroid)
                    : centroid + kContract * (s.x[n] - centroid);
        const double fc = neg(xc);
        if (fc < (outside ? fr : s.f[n])) {
          s.x[n] = xc;
          s.f[n] = fc;
        } else {
          for (int i = 1; i <= n; ++i) {
            s.x[i] = s.x[0] + kShrink * (s.x[i] - s.x[0]);
            s.f[i] = neg(s.x[i]);
          }
        }
      }
      s.sort();
    }

    const bool improved = s.f[0] < fcenter;
    if (improved) {
      center = s.x[0];
      fcenter = s.f[0];
    }
    if (round < std::max(opts.restarts, 0)) {
      if (round > 0 && !improved) break;
      ++res.restarts_used;
      init_step = std::max(opts.simplex_init_step * 0.1, 10.0 * opts.x_tol);
    }
  }

  res.x = center;
  res.f = -fcenter;
  return res;
}

BrentResult brent_max(const std::function<double(double)>& objective,
                      double lo, double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("brent_max: need lo < hi");
  BrentResult res;
  const auto neg = [&](double v) {
    ++res.evaluations;
    return -objective(v);
  };

  // Brent's localmin on -f (Numerical Recipes form); every probe stays in
  // [lo, hi] by construction.
  const double golden = 0.3819660112501051;
  const double eps_scale = 1e-11;
  double a = lo, b = hi;
  double x = a + golden * (b - a), w = x, v = x;
  double fx = neg(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  for (int iter = 0; iter < 200; ++iter) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + eps_scale;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool use_golden = true;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm >= x) ? tol1 : -tol1;
        use_golden = false;
      }
    }
    if (use_golden) {
      e = (x >= xm) ? a - x : b - x;
      d = golden * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d
                                           : x + ((d >= 0.0) ? tol1 : -tol1);
    const double fu = neg(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; w = x; x = u;
      fv = fw; fw = fx; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; w = u; fv = fw; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  // Monotone objectives should land exactly on the boundary.
  const double flo = neg(lo), fhi = neg(hi);
  if (flo <= fx && flo <= fhi) {
    res.x = lo;
    res.f = -flo;
  } else if (fhi <= fx) {
    res.x = hi;
    res.f = -fhi;
  } else {
    res.x = x;
    res.f = -fx;
  }
  return res;
}

CorrParam corr_transform(const Eigen::VectorXd& u, int k) {
  if (u.size() != static_cast<Eigen::Index>(k) * (k - 1) / 2)
    throw std::invalid_argument("corr_transform: wrong length");
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  L(0, 0) = 1.0;
  int pos = 0;
  for (int i = 1; i < k; ++i) {
    const Eigen::VectorXd block = u.segment(pos, i);
    pos += i;
    const double norm = block.norm();
    // kCorrBound * tanh(|u|)/|u|, continuous through |u| = 0
    const double factor =
        norm < 1e-8 ? kCorrBound * (1.0 - norm * norm / 3.0)
                    : kCorrBound * std::tanh(norm) / norm;
    double ss = 0.0;
    for (int l = 0; l < i; ++l) {
      L(i, l) = factor * block[l];
      ss += L(i, l) * L(i, l);
    }
    L(i, i) = std::sqrt(std::max(1.0 - ss, 0.0));
  }
  const Eigen::MatrixXd R = L * L.transpose();
  CorrParam corr = CorrParam::identity(k);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) corr.set_pair(i, j, R(i, j));
  return corr;
}

Eigen::VectorXd corr_untransform(const CorrParam& corr) {
  corr.validate();
  const int k = corr.k;
  Eigen::LLT<Eigen::MatrixXd> llt(corr.matrix());
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("corr_untransform: matrix not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::VectorXd u(corr.n_pairs());
  int pos = 0;
  for (int i = 1; i < k; ++i) {
    const Eigen::VectorXd row = L.row(i).head(i).transpose();
    const double norm = row.norm();
    if (norm >= kCorrBound)
      throw std::invalid_argument("corr_untransform: boundary-degenerate R");
    double scale;
    if (norm < 1e-8 * kCorrBound) {
      scale = 1.0 / kCorrBound;  // tanh^-1(x)/x -> 1 as x -> 0
    } else {
      scale = std::atanh(norm / kCorrBound) / norm;
    }
    u.segment(pos, i) = scale * row;
    pos += i;
  }
  return u;
}

}  // namespace probitar
