#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "infavg/parallel.hpp"

namespace infavg {

/// moments[0] is the mean; moments[k−1] for k ≥ 2 is the k-th central moment.
struct MomentReport {
  std::size_t n = 0;
  std::vector<double> moments;
  std::vector<double> se;  ///< jackknife standard errors
};

MomentReport empirical_moments(std::span<const double> s, int up_to);

double mean(std::span<const double> s);
/// Unbiased sample variance.
double variance(std::span<const double> s);
/// Standard error of the mean.
double mean_se(std::span<const double> s);

/// sup |F_a − F_b| over the pooled sample. Needs ≥ 30 values on each side.
double ks_distance(std::span<const double> a, std::span<const double> b);
double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf);

/// Asymptotic two-sample critical value c(α) √((n+m)/(nm)).
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.05);
/// Kolmogorov tail P(K > λ).
double kolmogorov_tail(double lambda);

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap; deterministic per seed.
Interval bootstrap_ci(std::span<const double> s, const std::function<double(std::span<const double>)>& stat,
                      int n_resamples, double level, std::uint64_t seed, Exec exec = Exec::Serial);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  Interval slope_ci;
};

/// Least squares of log y on log x, with a pairs-bootstrap interval for the slope.
ScalingFit scaling_regression(const std::vector<std::pair<double, double>>& pairs,
                              int n_resamples = 1000, double level = 0.95, std::uint64_t seed = 1);

/// Gaussian CDF with mean mu and standard deviation sd.
double normal_cdf(double x, double mu = 0.0, double sd = 1.0);

}  // namespace infavg
