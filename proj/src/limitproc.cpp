#include "infavg/limitproc.hpp"

#include <boost/random/normal_distribution.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "infavg/greenkubo.hpp"

namespace infavg {

std::size_t grid_steps(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw ContractViolation("grid_steps: need dt > 0 and T >= 0");
  const double r = t_end / dt;
  const double n = std::round(r);
  if (std::fabs(r - n) > 1e-9 * std::max(1.0, r)) throw GridMismatch("T is not a multiple of dt");
  return static_cast<std::size_t>(n);
}

BrownianPath simulate_bm(double sigma, double t_end, double dt, CounterRng& rng) {
  if (!(sigma >= 0.0)) throw ContractViolation("simulate_bm: variance must be >= 0");
  const std::size_t n = grid_steps(t_end, dt);
  BrownianPath out{dt, sigma, std::vector<double>(n + 1, 0.0)};
  if (sigma == 0.0) return out;
  boost::random::normal_distribution<double> normal(0.0, std::sqrt(sigma * dt));
  double b = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    b += normal(rng);
    out.values[k] = b;
  }
  return out;
}

LocalTimePath local_time_occupation(const BrownianPath& path, double delta) {
  if (!(delta > 0.0)) throw ContractViolation("local_time_occupation: delta must be positive");
  LocalTimePath out;
  out.dt = path.dt;
  out.delta = delta;
  out.below_resolution = delta < std::sqrt(path.sigma * path.dt);
  out.values.resize(path.values.size());
  const double unit = path.dt / (2.0 * delta);
  double l = 0.0;
  out.values[0] = 0.0;
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    if (std::fabs(path.values[k - 1]) <= delta) l += unit;
    out.values[k] = l;
  }
  return out;
}

TimeChangedPath time_changed_bm(const LocalTimePath& local_time, int dim, CounterRng& rng,
                                double clock_scale) {
  if (dim < 1) throw ContractViolation("time_changed_bm: dim must be positive");
  if (!(clock_scale >= 0.0)) throw ContractViolation("time_changed_bm: clock scale must be >= 0");
  const auto& l = local_time.values;
  TimeChangedPath out;
  out.dt = local_time.dt;
  out.dim = dim;
  out.values.assign(l.size() * static_cast<std::size_t>(dim), 0.0);
  boost::random::normal_distribution<double> normal;
  for (std::size_t k = 1; k < l.size(); ++k) {
    const double dl = l[k] - l[k - 1];
    if (dl < 0.0) throw ContractViolation("local time must be nondecreasing");
    double* prev = out.values.data() + (k - 1) * dim;
    double* cur = out.values.data() + k * dim;
    if (dl == 0.0 || clock_scale == 0.0) {
      std::copy(prev, prev + dim, cur);
      continue;
    }
    const double sd = std::sqrt(clock_scale * dl);
    for (int i = 0; i < dim; ++i) cur[i] = prev[i] + sd * normal(rng);
  }
  return out;
}

TrajectoryGrid ito_sqrt_a_integral(const std::vector<Matrix>& sqrt_a, const TimeChangedPath& b) {
  const std::size_t n = b.steps();
  if (sqrt_a.size() != n && sqrt_a.size() != 1) throw GridMismatch("sqrt(a) is not aligned with B");
  TrajectoryGrid out(b.dim);
  out.reserve(n + 1);
  Vector m = Vector::Zero(b.dim);
  out.push(0.0, m);
  for (std::size_t k = 0; k < n; ++k) {
    const Matrix& s = sqrt_a.size() == 1 ? sqrt_a.front() : sqrt_a[k];
    m.noalias() += s * (b.at(k + 1) - b.at(k));
    out.push(static_cast<double>(k + 1) * b.dt, m);
  }
  return out;
}

LimitCoefficients limit_coefficients(const Drift& drift, const std::function<Matrix(const Vector&)>& a_of_x,
                                     const Vector& x0, double t_end, double dt) {
  if (!drift.jacobian) throw ContractViolation("limit process needs the drift Jacobian");
  const std::size_t n = grid_steps(t_end, dt);
  LimitCoefficients c;
  c.dt = dt;
  c.dim = drift.dim;
  c.w = solve_averaged(x0, drift, t_end, dt);
  if (c.w.size() != n + 1) throw GridMismatch("averaged path does not match the dt grid");
  c.sqrt_a.reserve(n);
  c.jac.reserve(n);
  c.step_exp.reserve(n);
  Matrix j(drift.dim, drift.dim);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector w = c.w.state(k);
    c.sqrt_a.push_back(psd_sqrt(a_of_x(w)));
    drift.jacobian(w, j);
    c.jac.push_back(j);
    c.step_exp.push_back((j * dt).exp());
  }
  return c;
}

LimitPath limit_y(const LimitCoefficients& coef, const TimeChangedPath& b) {
  const std::size_t n = b.steps();
  if (n != coef.jac.size() || b.dim != coef.dim || std::fabs(b.dt - coef.dt) > 1e-15)
    throw GridMismatch("limit_y: B_{L'} and the coefficients are on different grids");
  const int d = coef.dim;
  LimitPath out{TrajectoryGrid(d), TrajectoryGrid(d)};
  out.euler.reserve(n + 1);
  out.closed.reserve(n + 1);
  Vector y = Vector::Zero(d), m = Vector::Zero(d), drift_part = Vector::Zero(d), db(d);
  out.euler.push(0.0, y);
  out.closed.push(0.0, m);
  for (std::size_t k = 0; k < n; ++k) {
    db = b.at(k + 1) - b.at(k);
    const Vector dy_noise = coef.sqrt_a[k] * db;
    y += coef.jac[k] * y * coef.dt + dy_noise;
    drift_part = coef.step_exp[k] * (drift_part + coef.jac[k] * m * coef.dt);
    m += dy_noise;
    if (!y.allFinite() || !drift_part.allFinite()) throw NonFiniteState("limit_y diverged");
    const double t = static_cast<double>(k + 1) * coef.dt;
    out.euler.push(t, y);
    out.closed.push(t, m + drift_part);
  }
  return out;
}

Vector limit_y_endpoint(const LimitCoefficients& coef, const TimeChangedPath& b) {
  const std::size_t n = b.steps();
  if (n != coef.jac.size() || b.dim != coef.dim) throw GridMismatch("limit_y: grid mismatch");
  Vector y = Vector::Zero(coef.dim);
  for (std::size_t k = 0; k < n; ++k) {
    const Vector db = b.at(k + 1) - b.at(k);
    y += coef.jac[k] * y * coef.dt + coef.sqrt_a[k] * db;
  }
  if (!y.allFinite()) throw NonFiniteState("limit_y diverged");
  return y;
}

LimitDraw draw_limit(const LimitCoefficients& coef, double sigma, double t_end, CounterRng& rng,
                     double delta) {
  const double dt = coef.dt;
  const BrownianPath bm = simulate_bm(sigma, t_end, dt, rng);
  const LocalTimePath lt = local_time_occupation(bm, delta > 0.0 ? delta : 2.0 * std::sqrt(sigma * dt));
  const TimeChangedPath b = time_changed_bm(lt, coef.dim, rng);
  LimitDraw out;
  out.local_time = lt.values.back();
  out.b_end = b.at(b.steps());
  out.y_end = limit_y_endpoint(coef, b);
  return out;
}

}  // namespace infavg
