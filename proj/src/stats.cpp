#include "infavg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "infavg/ensemble.hpp"
#include "infavg/errors.hpp"
#include "infavg/rng.hpp"

namespace infavg {

namespace {

void require_finite(std::span<const double> s, const char* who) {
  if (s.empty()) throw ContractViolation(std::string(who) + ": empty sample");
  for (double v : s)
    if (!std::isfinite(v)) throw NonFiniteState(std::string(who) + ": non-finite sample");
}

// Central moments 2..N from raw moments r_j = E[y^j] of shifted data.
void central_from_raw(const std::vector<double>& r, int up_to, std::vector<double>& out, double shift) {
  out.assign(static_cast<std::size_t>(up_to), 0.0);
  const double m1 = r[1];
  out[0] = m1 + shift;
  for (int k = 2; k <= up_to; ++k) {
    double s = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      s += binom * r[j] * std::pow(-m1, k - j);
      binom = binom * (k - j) / (j + 1);
    }
    out[k - 1] = s;
  }
}

}  // namespace

MomentReport empirical_moments(std::span<const double> s, int up_to) {
  if (up_to < 1) throw ContractViolation("empirical_moments: order must be >= 1");
  require_finite(s, "empirical_moments");
  const std::size_t n = s.size();
  const double c = mean(s);
  std::vector<double> sums(static_cast<std::size_t>(up_to) + 1, 0.0);
  for (double x : s) {
    double p = 1.0;
    const double y = x - c;
    for (int j = 0; j <= up_to; ++j) {
      sums[j] += p;
      p *= y;
    }
  }
  MomentReport rep;
  rep.n = n;
  std::vector<double> raw(sums.size());
  for (std::size_t j = 0; j < sums.size(); ++j) raw[j] = sums[j] / static_cast<double>(n);
  central_from_raw(raw, up_to, rep.moments, c);
  rep.se.assign(static_cast<std::size_t>(up_to), 0.0);
  if (n < 2) return rep;

  // Delete-one jackknife through the power sums.
  std::vector<double> acc(static_cast<std::size_t>(up_to), 0.0), acc2(acc.size(), 0.0), loo;
  const double m = static_cast<double>(n - 1);
  for (double x : s) {
    const double y = x - c;
    double p = 1.0;
    for (int j = 0; j <= up_to; ++j) {
      raw[j] = (sums[j] - p) / m;
      p *= y;
    }
    central_from_raw(raw, up_to, loo, c);
    for (int k = 0; k < up_to; ++k) {
      acc[k] += loo[k];
      acc2[k] += loo[k] * loo[k];
    }
  }
  const double nn = static_cast<double>(n);
  for (int k = 0; k < up_to; ++k) {
    const double mu = acc[k] / nn;
    const double ss = std::max(0.0, acc2[k] - nn * mu * mu);
    rep.se[k] = std::sqrt((nn - 1.0) / nn * ss);
  }
  return rep;
}

double mean(std::span<const double> s) {
  if (s.empty()) throw ContractViolation("mean: empty sample");
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

double variance(std::span<const double> s) {
  if (s.size() < 2) throw ContractViolation("variance: need at least two samples");
  const double mu = mean(s);
  double ss = 0.0;
  for (double x : s) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(s.size() - 1);
}

double mean_se(std::span<const double> s) { return std::sqrt(variance(s) / static_cast<double>(s.size())); }

double ks_distance(std::span<const double> a, std::span<const double> b) {
  require_finite(a, "ks_distance");
  require_finite(b, "ks_distance");
  if (a.size() < 30 || b.size() < 30) throw ContractViolation("ks_distance: need at least 30 samples each");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf) {
  require_finite(a, "ks_distance");
  if (a.size() < 30) throw ContractViolation("ks_distance: need at least 30 samples");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    const double v = x[i];
    const double below = static_cast<double>(i) / n;
    while (i < x.size() && x[i] == v) ++i;
    const double f = cdf(v);
    d = std::max({d, std::fabs(f - below), std::fabs(static_cast<double>(i) / n - f)});
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  if (n == 0 || m == 0 || !(alpha > 0.0 && alpha < 1.0))
    throw ContractViolation("ks_critical_value: invalid arguments");
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

Interval bootstrap_ci(std::span<const double> s, const std::function<double(std::span<const double>)>& stat,
                      int n_resamples, double level, std::uint64_t seed, Exec exec) {
  require_finite(s, "bootstrap_ci");
  if (n_resamples < 200) throw ContractViolation("bootstrap_ci: need at least 200 resamples");
  if (!(level > 0.0 && level < 1.0)) throw ContractViolation("bootstrap_ci: level must be in (0,1)");
  std::vector<double> reps(static_cast<std::size_t>(n_resamples));
  const std::size_t n = s.size();
  for_each_task(reps.size(), exec, [&](std::size_t r) {
    CounterRng rng = task_stream(seed, kStreamBootstrap, r);
    std::vector<double> draw(n);
    for (auto& v : draw) v = s[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))];
    reps[r] = stat(draw);
  });
  std::sort(reps.begin(), reps.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(reps.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, reps.size() - 1);
    return reps[lo] + (pos - static_cast<double>(lo)) * (reps[hi] - reps[lo]);
  };
  return {stat(s), quantile(0.5 * (1.0 - level)), quantile(0.5 * (1.0 + level))};
}

namespace {

bool fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& icpt) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) return false;
  slope = sxy / sxx;
  icpt = my - slope * mx;
  return true;
}

}  // namespace

ScalingFit scaling_regression(const std::vector<std::pair<double, double>>& pairs, int n_resamples,
                              double level, std::uint64_t seed) {
  if (pairs.size() < 3) throw ContractViolation("scaling_regression: need at least 3 scales");
  std::vector<double> lx, ly;
  for (const auto& [x, y] : pairs) {
    if (!(x > 0.0) || !(y > 0.0)) throw ContractViolation("scaling_regression: inputs must be positive");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  ScalingFit fit;
  if (!fit_line(lx, ly, fit.slope, fit.intercept))
    throw ContractViolation("scaling_regression: all scales are equal");
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(n_resamples));
  const std::size_t n = pairs.size();
  for (int r = 0; r < n_resamples; ++r) {
    CounterRng rng = task_stream(seed, kStreamBootstrap, static_cast<std::uint64_t>(r) + 0x10000);
    std::vector<double> bx(n), by(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
      bx[i] = lx[k];
      by[i] = ly[k];
    }
    double s = 0.0, c = 0.0;
    if (fit_line(bx, by, s, c)) slopes.push_back(s);
  }
  fit.slope_ci.estimate = fit.slope;
  if (slopes.empty()) {
    fit.slope_ci.lo = fit.slope_ci.hi = fit.slope;
    return fit;
  }
  std::sort(slopes.begin(), slopes.end());
  auto at = [&](double q) {
    return slopes[std::min(slopes.size() - 1, static_cast<std::size_t>(q * static_cast<double>(slopes.size())))];
  };
  fit.slope_ci.lo = at(0.5 * (1.0 - level));
  fit.slope_ci.hi = at(0.5 * (1.0 + level));
  return fit;
}

double normal_cdf(double x, double mu, double sd) { return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0))); }

}  // namespace infavg
