#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

// Shared statistical helpers for the test and acceptance suites. These are
// independent of the library's own numerics on purpose: they act as oracles.
namespace teststat {

// Regularized lower incomplete gamma P(a, x) via series / continued fraction.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad args");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, dd = 1.0 / b, h = dd;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    dd = an * dd + b;
    if (std::abs(dd) < 1e-300) dd = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    dd = 1.0 / dd;
    const double del = dd * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chisq_cdf(double x, double df) { return gamma_p(df / 2.0, x / 2.0); }
inline double chisq_sf(double x, double df) { return 1.0 - chisq_cdf(x, df); }

// Two-sample homogeneity chi-square p-value over shared cells.
inline double two_sample_chisq_pvalue(const std::vector<double>& count_a,
                                      const std::vector<double>& count_b) {
  if (count_a.size() != count_b.size())
    throw std::invalid_argument("two_sample_chisq: size mismatch");
  double na = 0.0, nb = 0.0;
  for (std::size_t c = 0; c < count_a.size(); ++c) {
    na += count_a[c];
    nb += count_b[c];
  }
  double stat = 0.0;
  int used = 0;
  for (std::size_t c = 0; c < count_a.size(); ++c) {
    const double total = count_a[c] + count_b[c];
    if (total == 0.0) continue;
    ++used;
    const double ea = total * na / (na + nb);
    const double eb = total * nb / (na + nb);
    stat += (count_a[c] - ea) * (count_a[c] - ea) / ea +
            (count_b[c] - eb) * (count_b[c] - eb) / eb;
  }
  const double df = static_cast<double>(used - 1);
  if (df < 1.0) return 1.0;
  return chisq_sf(stat, df);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// High-precision erf by Taylor series (|z| <= ~3 converges quickly); used to
// cross-check the library's Phi and quantile against an independent route.
inline double erf_series(double z) {
  const double two_over_sqrt_pi = 1.1283791670955125739;
  double term = z, sum = z;
  for (int n = 1; n < 200; ++n) {
    term *= -z * z / n;
    sum += term / (2 * n + 1);
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return two_over_sqrt_pi * sum;
}

inline double phi_series(double x) { return 0.5 * (1.0 + erf_series(x / std::sqrt(2.0))); }

// Invert phi_series by bisection: an independent quantile oracle.
inline double phi_series_inverse(double p) {
  double lo = -6.0, hi = 6.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi_series(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace teststat
