#ifndef XSTS_STATS_HPP_
#define XSTS_STATS_HPP_

#include <functional>
#include <vector>

namespace xsts {

double normal_cdf(double x);

// Inverse standard normal CDF (Acklam's rational approximation refined by one
// Halley step; absolute error below 1e-13 on (0,1)).
double normal_quantile(double p);

// One-sample Kolmogorov-Smirnov distance against a reference CDF.
double ks_statistic(const std::vector<double>& sample,
                    const std::function<double(double)>& reference_cdf);

// Two-sample Kolmogorov-Smirnov distance.
double ks_statistic(const std::vector<double>& sample_a,
                    const std::vector<double>& sample_b);

// Empirical quantile of a sample (order statistic at ceil(p*n), clamped);
// monotone in p by construction.
double empirical_quantile(std::vector<double> sample, double p);

// Coverage rate of a set of intervals for a scalar truth, with the binomial
// Monte Carlo standard deviation sqrt(rate*(1-rate)/n).
struct CoverageResult {
  double rate;
  double mc_sd;
};
CoverageResult coverage(const std::vector<double>& lo,
                        const std::vector<double>& hi, double true_value);

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace xsts

#endif  // XSTS_STATS_HPP_
