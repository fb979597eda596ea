#include "xsts/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xsts/errors.hpp"

namespace xsts {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Acklam's inverse normal CDF approximation.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double q, r;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
            a[5]) *
           q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
           c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw domain_error("normal_quantile: p must lie in (0,1)");
  }
  double x = acklam(p);
  // One Halley refinement step.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double ks_statistic(const std::vector<double>& sample,
                    const std::function<double(double)>& reference_cdf) {
  if (sample.empty()) throw domain_error("ks_statistic: empty sample");
  std::vector<double> s(sample);
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = reference_cdf(s[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

double ks_statistic(const std::vector<double>& sample_a,
                    const std::vector<double>& sample_b) {
  if (sample_a.empty() || sample_b.empty()) {
    throw domain_error("ks_statistic: empty sample");
  }
  std::vector<double> a(sample_a), b(sample_b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    const double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(ia / na - ib / nb));
  }
  return d;
}

double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw domain_error("empirical_quantile: empty sample");
  if (p < 0.0 || p > 1.0) throw domain_error("empirical_quantile: bad p");
  std::sort(sample.begin(), sample.end());
  const auto n = sample.size();
  auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (k > 0) --k;
  if (k >= n) k = n - 1;
  return sample[k];
}

CoverageResult coverage(const std::vector<double>& lo,
                        const std::vector<double>& hi, double true_value) {
  if (lo.size() != hi.size()) throw dimension_error("coverage: size mismatch");
  if (lo.empty()) return {0.0, 0.0};
  std::size_t hits = 0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] <= true_value && true_value <= hi[i]) ++hits;
  }
  const double n = static_cast<double>(lo.size());
  const double rate = static_cast<double>(hits) / n;
  return {rate, std::sqrt(rate * (1.0 - rate) / n)};
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
}

}  // namespace xsts
