#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "infavg/errors.hpp"

namespace infavg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VecRef = Eigen::Ref<Vector>;
using ConstVecRef = Eigen::Ref<const Vector>;

/// x ↦ out, dimension d → d. Must not allocate: it sits in the RK4 loop.
using VecFn = std::function<void(const ConstVecRef& x, VecRef out)>;
/// x ↦ Jacobian (d × d).
using JacFn = std::function<void(const ConstVecRef& x, Eigen::Ref<Matrix> out)>;

/// The averaged drift F̄ with its Jacobian DF̄.
struct Drift {
  int dim = 1;
  VecFn f;
  JacFn jacobian;  ///< optional; required by the limit process

  static Drift zero(int dim);
  /// F̄(x) = A x.
  static Drift linear(const Matrix& a);
  /// F̄_i(x) = −c sin(x_i): bounded, C², bounded derivative.
  static Drift neg_sin(int dim, double c);
};

/// ψ(a): finitely supported weights over cell levels.
class LevelWeights {
 public:
  LevelWeights() = default;
  explicit LevelWeights(const std::map<std::int64_t, double>& w);
  static LevelWeights delta(std::int64_t level, double weight = 1.0);

  double operator()(std::int64_t a) const {
    const std::int64_t k = a - lo_;
    return (k < 0 || k >= static_cast<std::int64_t>(w_.size())) ? 0.0 : w_[static_cast<std::size_t>(k)];
  }
  std::int64_t min_level() const { return lo_; }
  std::int64_t max_level() const { return lo_ + static_cast<std::int64_t>(w_.size()) - 1; }
  bool empty() const { return w_.empty(); }
  double total() const;
  double abs_max() const;
  /// Σ_{a ∉ [−A, A]} |ψ(a)|.
  double mass_outside(std::int64_t A) const;
  /// Σ_a |1 + a|^{2(1+e0)} |ψ(a)|, the decay weight in the hypotheses.
  double decay_weight(double e0) const;

 private:
  std::int64_t lo_ = 0;
  std::vector<double> w_;
};

/// One term g(x) · h(ω̄) · ψ(a) of a driven field.
template <class Point>
struct ProductTerm {
  VecFn g;
  double g_sup = 1.0;        ///< sup ‖g‖
  double g_lipschitz = 0.0;  ///< Lipschitz bound of g
  std::function<double(const Point&)> h;
  double h_sup = 1.0;             ///< sup |h|
  std::optional<double> h_mean;  ///< E_μ̄[h], when known
  LevelWeights psi;
  std::string label;
};

/// F(x, ω̄, a) = Σ_p g_p(x) h_p(ω̄) ψ_p(a) together with the drift F̄.
/// Construction enforces the centering Σ_a ψ_p(a) E_μ̄[h_p] = 0 per term.
template <class Point>
class DrivenVectorField {
 public:
  DrivenVectorField(int dim, std::vector<ProductTerm<Point>> terms, Drift drift)
      : dim_(dim), terms_(std::move(terms)), drift_(std::move(drift)) {
    if (dim_ < 1) throw ContractViolation("field dimension must be positive");
    if (drift_.dim != dim_ || !drift_.f) throw ContractViolation("drift dimension mismatch");
    for (const auto& t : terms_) {
      if (!t.g || !t.h) throw ContractViolation("product term needs g and h");
      const double level_sum = t.psi.total();
      if (std::fabs(level_sum) <= 1e-14) continue;
      if (!t.h_mean) {
        throw ContractViolation("term '" + t.label +
                                "': psi does not sum to zero and E[h] is undeclared; "
                                "cannot certify the field is centered");
      }
      if (std::fabs(level_sum * *t.h_mean) > 1e-12)
        throw ContractViolation("term '" + t.label + "' is not centered");
    }
  }

  int dim() const { return dim_; }
  std::size_t term_count() const { return terms_.size(); }
  const ProductTerm<Point>& term(std::size_t p) const { return terms_[p]; }
  const std::vector<ProductTerm<Point>>& terms() const { return terms_; }
  const Drift& drift() const { return drift_; }

  /// c_p = h_p(ω̄) ψ_p(a). Returns false if every coefficient is zero.
  bool coefficients(const Point& base, std::int64_t level, std::vector<double>& c) const {
    c.resize(terms_.size());
    bool any = false;
    for (std::size_t p = 0; p < terms_.size(); ++p) {
      const double w = terms_[p].psi(level);
      c[p] = w == 0.0 ? 0.0 : w * terms_[p].h(base);
      any = any || c[p] != 0.0;
    }
    return any;
  }

  /// out = Σ_p c_p g_p(x); `scratch` has size dim.
  void centered_from_coefficients(const ConstVecRef& x, const std::vector<double>& c, VecRef out,
                                  VecRef scratch) const {
    out.setZero();
    for (std::size_t p = 0; p < terms_.size(); ++p) {
      if (c[p] == 0.0) continue;
      terms_[p].g(x, scratch);
      out += c[p] * scratch;
    }
  }

  /// F(x, ω̄, a).
  Vector centered(const ConstVecRef& x, const Point& base, std::int64_t level) const {
    std::vector<double> c;
    Vector out(dim_), scratch(dim_);
    coefficients(base, level, c);
    centered_from_coefficients(x, c, out, scratch);
    return out;
  }

  /// sup ‖F‖ over all arguments.
  double sup_bound() const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.g_sup * t.h_sup * t.psi.abs_max();
    return s;
  }
  /// Lipschitz constant of F(·, ω̄, a), uniform in (ω̄, a).
  double lipschitz_bound() const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.g_lipschitz * t.h_sup * t.psi.abs_max();
    return s;
  }
  /// max over levels A beyond which weight is dropped: the level support.
  std::int64_t level_support() const {
    std::int64_t a = 0;
    for (const auto& t : terms_) {
      if (t.psi.empty()) continue;
      a = std::max({a, std::abs(t.psi.min_level()), std::abs(t.psi.max_level())});
    }
    return a;
  }

 private:
  int dim_;
  std::vector<ProductTerm<Point>> terms_;
  Drift drift_;
};

/// g(x) = v, constant.
VecFn constant_g(const Vector& v);
/// g_i(x) = v_i (1 + s sin x_i). sup = max|v_i|(1+|s|), Lipschitz max|v_i s|.
VecFn sin_modulated_g(const Vector& v, double s);

}  // namespace infavg
