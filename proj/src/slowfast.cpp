#include "infavg/slowfast.hpp"

namespace infavg {

SegmentPlan::SegmentPlan(double eps_, double t_end_) : eps(eps_), t_end(t_end_) {
  if (!(eps > 0.0)) throw ContractViolation("segment length must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ContractViolation("horizon must be finite and >= 0");
  full = static_cast<std::int64_t>(std::floor(t_end / eps + 1e-9));
  remainder = t_end - static_cast<double>(full) * eps;
  if (remainder <= 1e-9 * eps) remainder = 0.0;
}

namespace {

TrajectoryGrid integrate_plan(const Vector& x0, const Drift& drift, const SegmentPlan& plan,
                              int substeps, int record_stride) {
  if (substeps < 1 || record_stride < 1) throw ContractViolation("substeps and stride must be >= 1");
  if (x0.size() != drift.dim) throw ContractViolation("initial state dimension mismatch");
  Rk4Workspace ws(drift.dim);
  auto rhs = [&](const ConstVecRef& x, VecRef out) { drift.f(x, out); };
  TrajectoryGrid grid(drift.dim);
  grid.reserve(static_cast<std::size_t>(plan.count() / record_stride + 2));
  Vector x = x0;
  grid.push(0.0, x);
  const std::int64_t n = plan.count();
  for (std::int64_t k = 0; k < n; ++k) {
    rk4_steps(x, plan.length(k) / substeps, substeps, rhs, ws);
    if (!x.allFinite()) throw NonFiniteState("averaged solution left the finite range");
    if ((k + 1) % record_stride == 0 || k + 1 == n) grid.push(plan.end(k), x);
  }
  return grid;
}

}  // namespace

TrajectoryGrid solve_averaged(const Vector& x0, const Drift& drift, double t_end, double dt,
                              int record_stride) {
  if (!(dt > 0.0)) throw ContractViolation("solve_averaged: dt must be positive");
  return integrate_plan(x0, drift, SegmentPlan(dt, t_end), 1, record_stride);
}

TrajectoryGrid averaged_on_segments(const Vector& x0, const Drift& drift, double eps, double t_end,
                                    int substeps, int record_stride) {
  return integrate_plan(x0, drift, SegmentPlan(eps, t_end), substeps, record_stride);
}

TrajectoryGrid averaged_for_birkhoff(const Vector& x0, const Drift& drift, double eps, double t_end,
                                     int substeps) {
  return integrate_plan(x0, drift, SegmentPlan(0.5 * eps, t_end), std::max(1, substeps / 2), 1);
}

TrajectoryGrid error_process(const TrajectoryGrid& perturbed, const TrajectoryGrid& averaged) {
  if (perturbed.dim() != averaged.dim() || perturbed.size() != averaged.size())
    throw GridMismatch("error_process: grids differ in size or dimension");
  TrajectoryGrid e(perturbed.dim());
  e.reserve(perturbed.size());
  for (std::size_t k = 0; k < perturbed.size(); ++k) {
    const double t = perturbed.time(k);
    if (std::fabs(t - averaged.time(k)) > 1e-12 * std::max(1.0, std::fabs(t)))
      throw GridMismatch("error_process: grid times differ");
    e.push(t, perturbed.state(k) - averaged.state(k));
  }
  return e;
}

}  // namespace infavg
