#include "infavg/field.hpp"

#include <algorithm>

namespace infavg {

Drift Drift::zero(int dim) {
  Drift d;
  d.dim = dim;
  d.f = [](const ConstVecRef&, VecRef out) { out.setZero(); };
  d.jacobian = [](const ConstVecRef&, Eigen::Ref<Matrix> out) { out.setZero(); };
  return d;
}

Drift Drift::linear(const Matrix& a) {
  if (a.rows() != a.cols()) throw ContractViolation("linear drift needs a square matrix");
  Drift d;
  d.dim = static_cast<int>(a.rows());
  d.f = [a](const ConstVecRef& x, VecRef out) { out.noalias() = a * x; };
  d.jacobian = [a](const ConstVecRef&, Eigen::Ref<Matrix> out) { out = a; };
  return d;
}

Drift Drift::neg_sin(int dim, double c) {
  Drift d;
  d.dim = dim;
  d.f = [c](const ConstVecRef& x, VecRef out) { out = -c * x.array().sin(); };
  d.jacobian = [c](const ConstVecRef& x, Eigen::Ref<Matrix> out) {
    out.setZero();
    out.diagonal() = -c * x.array().cos();
  };
  return d;
}

LevelWeights::LevelWeights(const std::map<std::int64_t, double>& w) {
  std::map<std::int64_t, double> nz;
  for (const auto& [a, x] : w)
    if (x != 0.0) nz.emplace(a, x);
  if (nz.empty()) return;
  lo_ = nz.begin()->first;
  w_.assign(static_cast<std::size_t>(nz.rbegin()->first - lo_ + 1), 0.0);
  for (const auto& [a, x] : nz) w_[static_cast<std::size_t>(a - lo_)] = x;
}

LevelWeights LevelWeights::delta(std::int64_t level, double weight) {
  return LevelWeights(std::map<std::int64_t, double>{{level, weight}});
}

double LevelWeights::total() const {
  double s = 0.0;
  for (double x : w_) s += x;
  return s;
}

double LevelWeights::abs_max() const {
  double s = 0.0;
  for (double x : w_) s = std::max(s, std::fabs(x));
  return s;
}

double LevelWeights::mass_outside(std::int64_t A) const {
  double s = 0.0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    const std::int64_t a = lo_ + static_cast<std::int64_t>(k);
    if (a < -A || a > A) s += std::fabs(w_[k]);
  }
  return s;
}

double LevelWeights::decay_weight(double e0) const {
  double s = 0.0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    const double a = static_cast<double>(lo_ + static_cast<std::int64_t>(k));
    s += std::pow(std::fabs(1.0 + a), 2.0 * (1.0 + e0)) * std::fabs(w_[k]);
  }
  return s;
}

VecFn constant_g(const Vector& v) {
  return [v](const ConstVecRef&, VecRef out) { out = v; };
}

VecFn sin_modulated_g(const Vector& v, double s) {
  return [v, s](const ConstVecRef& x, VecRef out) {
    out = v.array() * (1.0 + s * x.array().sin());
  };
}

}  // namespace infavg
