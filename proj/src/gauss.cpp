#include "gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rng.hpp"

namespace probitar {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kTailCut = 8.5;     // phi mass beyond is < 1e-16
constexpr double kProbFloor = 1e-300;

struct GlPoint {
  double x;
  double w;
};

constexpr GlPoint kGl20[] = {
    {-9.93128599185094885e-01, 1.76140071391532732e-02},
    {-9.63971927277913809e-01, 4.06014298003862170e-02},
    {-9.12234428251325835e-01, 6.26720483341094425e-02},
    {-8.39116971822218782e-01, 8.32767415767046715e-02},
    {-7.46331906460150796e-01, 1.01930119817240261e-01},
    {-6.36053680726515025e-01, 1.18194531961518245e-01},
    {-5.10867001950827126e-01, 1.31688638449176526e-01},
    {-3.73706088715419549e-01, 1.42096109318381875e-01},
    {-2.27785851141645096e-01, 1.49172986472603658e-01},
    {-7.65265211334973383e-02, 1.52753387130725782e-01},
    {+7.65265211334973383e-02, 1.52753387130725782e-01},
    {+2.27785851141645096e-01, 1.49172986472603658e-01},
    {+3.73706088715419549e-01, 1.42096109318381875e-01},
    {+5.10867001950827126e-01, 1.31688638449176526e-01},
    {+6.36053680726515025e-01, 1.18194531961518245e-01},
    {+7.46331906460150796e-01, 1.01930119817240261e-01},
    {+8.39116971822218782e-01, 8.32767415767046715e-02},
    {+9.12234428251325835e-01, 6.26720483341094425e-02},
    {+9.63971927277913809e-01, 4.06014298003862170e-02},
    {+9.93128599185094885e-01, 1.76140071391532732e-02},
};

struct Rect2Integrand {
  double sign_j;  // 2 s_j - 1
  double lam_j;
  double r;
  double inv_c;  // 1 / sqrt(1 - r^2)

  double operator()(double x) const {
    return std_normal_cdf(sign_j * (lam_j + r * x) * inv_c) *
           std_normal_pdf(x);
  }
};

double gl20(const Rect2Integrand& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (const auto& p : kGl20) acc += p.w * f(mid + half * p.x);
  return acc * half;
}

// Bisect until the panel estimate and the sum of its halves agree; the
// refinements-agree criterion is the spec'd stopping rule.
double adaptive_gl(const Rect2Integrand& f, double a, double b, double whole,
                   double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl20(f, a, mid);
  const double right = gl20(f, mid, b);
  const double refined = left + right;
  if (std::abs(refined - whole) < tol || depth >= 24) return refined;
  return adaptive_gl(f, a, mid, left, 0.5 * tol, depth + 1) +
         adaptive_gl(f, mid, b, right, 0.5 * tol, depth + 1);
}

void validate(const Rect2Spec& spec) {
  if (!(std::abs(spec.r) < 1.0))
    throw std::invalid_argument("rect2: |r| must be < 1");
  if (!std::isfinite(spec.lam_i) || !std::isfinite(spec.lam_j))
    throw std::invalid_argument("rect2: non-finite predictor");
  if ((spec.s_i != 0 && spec.s_i != 1) || (spec.s_j != 0 && spec.s_j != 1))
    throw std::invalid_argument("rect2: outcomes must be 0 or 1");
}

}  // namespace

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double std_normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// AS241 algorithm PPND16 (Wichura, 1988).
double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("std_normal_quantile: p outside [0,1]");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -value : value;
}

double rect2(const Rect2Spec& spec) {
  validate(spec);
  // Independent factorization; also the exact shortcut used at r = 0.
  if (spec.r == 0.0) {
    const double v = outcome_marginal(spec.lam_i, spec.s_i) *
                     outcome_marginal(spec.lam_j, spec.s_j);
    return std::max(v, kProbFloor);
  }
  double a, b;
  if (spec.s_i == 0) {
    a = -kTailCut;
    b = std::min(-spec.lam_i, kTailCut);
  } else {
    a = std::max(-spec.lam_i, -kTailCut);
    b = kTailCut;
  }
  if (!(a < b)) return kProbFloor;

  const double inv_c = 1.0 / std::sqrt((1.0 - spec.r) * (1.0 + spec.r));
  const Rect2Integrand f{static_cast<double>(2 * spec.s_j - 1), spec.lam_j,
                         spec.r, inv_c};

  // Break at the mode of phi and at the transition point of the Phi factor.
  double cuts[4] = {a, b, b, b};
  int ncut = 1;
  const double xstar = -spec.lam_j / spec.r;
  if (a < 0.0 && 0.0 < b) cuts[ncut++] = 0.0;
  if (a < xstar && xstar < b) cuts[ncut++] = xstar;
  cuts[ncut++] = b;
  std::sort(cuts, cuts + ncut);

  double coarse = 0.0;
  double pieces[3];
  int npiece = 0;
  for (int i = 0; i + 1 < ncut; ++i) {
    if (cuts[i] == cuts[i + 1]) continue;
    pieces[npiece] = gl20(f, cuts[i], cuts[i + 1]);
    coarse += pieces[npiece];
    ++npiece;
  }
  const double tol = std::max(1e-15, 1e-13 * std::abs(coarse));

  double value = 0.0;
  int j = 0;
  for (int i = 0; i + 1 < ncut; ++i) {
    if (cuts[i] == cuts[i + 1]) continue;
    value += adaptive_gl(f, cuts[i], cuts[i + 1], pieces[j], tol, 0);
    ++j;
  }
  return std::min(std::max(value, kProbFloor), 1.0);
}

double rect2_dr(const Rect2Spec& spec) {
  validate(spec);
  const double c2 = (1.0 - spec.r) * (1.0 + spec.r);
  const double c = std::sqrt(c2);
  const double wi = -spec.lam_i;
  const double wj = -spec.lam_j;
  // phi_2(wi, wj; r): the bivariate normal density at the rectangle corner.
  const double dens =
      std_normal_pdf(wi) * std_normal_pdf((wj - spec.r * wi) / c) / c;
  const double sign = (2 * spec.s_i - 1) * (2 * spec.s_j - 1);
  return sign * dens;
}

GhkResult rect_k_ghk_with(const RectKSpec& spec,
                          const Eigen::MatrixXd& uniforms) {
  const int k = static_cast<int>(spec.lam.size());
  if (k < 1) throw std::invalid_argument("rect_k_ghk: k must be >= 1");
  if (spec.corr.rows() != k || spec.corr.cols() != k ||
      static_cast<int>(spec.s.size()) != k)
    throw std::invalid_argument("rect_k_ghk: dimension mismatch");

  // Bounds of I_s - lam per coordinate.
  Eigen::VectorXd lo(k), hi(k);
  for (int i = 0; i < k; ++i) {
    if (spec.s[i]) {
      lo[i] = -spec.lam[i];
      hi[i] = std::numeric_limits<double>::infinity();
    } else {
      lo[i] = -std::numeric_limits<double>::infinity();
      hi[i] = -spec.lam[i];
    }
  }

  if (k == 1) {
    const double p = outcome_marginal(spec.lam[0], spec.s[0]);
    return {p, 0.0};
  }

  Eigen::LLT<Eigen::MatrixXd> llt(spec.corr);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("rect_k_ghk: correlation matrix not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  const int n = static_cast<int>(uniforms.rows());
  if (n < 1 || uniforms.cols() != k)
    throw std::invalid_argument("rect_k_ghk: bad uniform draw matrix");

  double sum = 0.0, sumsq = 0.0;
  Eigen::VectorXd eta(k);
  for (int m = 0; m < n; ++m) {
    double w = 1.0;
    for (int i = 0; i < k; ++i) {
      double mu = 0.0;
      for (int j = 0; j < i; ++j) mu += L(i, j) * eta[j];
      const double li = (lo[i] - mu) / L(i, i);
      const double ui = (hi[i] - mu) / L(i, i);
      const double plo = std::isinf(li) ? 0.0 : std_normal_cdf(li);
      const double phi_ = std::isinf(ui) ? 1.0 : std_normal_cdf(ui);
      const double pi = std::max(phi_ - plo, 0.0);
      w *= pi;
      if (i + 1 < k) {
        double t = plo + uniforms(m, i) * (phi_ - plo);
        t = std::clamp(t, 1e-300, 1.0 - 1e-16);
        eta[i] = std_normal_quantile(t);
      }
    }
    sum += w;
    sumsq += w * w;
  }
  const double mean = sum / n;
  double se = 0.0;
  if (n > 1) {
    const double var = std::max(sumsq - n * mean * mean, 0.0) / (n - 1);
    se = std::sqrt(var / n);
  }
  return {mean, se};
}

GhkResult rect_k_ghk(const RectKSpec& spec, int n_draws, std::uint64_t seed) {
  const int k = static_cast<int>(spec.lam.size());
  if (n_draws < 100) throw std::invalid_argument("rect_k_ghk: n_draws must be >= 100");
  if (k == 1) return rect_k_ghk_with(spec, Eigen::MatrixXd::Zero(1, 1));
  Rng rng(seed);
  Eigen::MatrixXd u(n_draws, k);
  for (int m = 0; m < n_draws; ++m)
    for (int i = 0; i < k; ++i) u(m, i) = rng.uniform();
  return rect_k_ghk_with(spec, u);
}

}  // namespace probitar
