#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infavg/ensemble.hpp"
#include "infavg/field.hpp"
#include "infavg/rng.hpp"
#include "infavg/zext.hpp"

namespace infavg {

/// Symmetric, PSD up to estimation noise. `asymmetry` is the largest
/// |m_ij − m_ji| seen before symmetrization.
struct VarianceMatrix {
  Matrix m;
  double asymmetry = 0.0;
  Matrix se;  ///< Monte Carlo standard error per entry (empty if exact)
};

/// Unique symmetric PSD root after clipping negative eigenvalues.
/// Throws ContractViolation if |m − mᵀ| exceeds `asym_tol` anywhere.
Matrix psd_sqrt(const Matrix& m, double asym_tol = 1e-10);

/// Which Green–Kubo series to report.
enum class GkForm {
  /// ½ Σ_{|l|≤L} (C(|l|) + C(|l|)ᵀ), forward lags only.
  Symmetrized,
  /// Σ_{|l|≤L} C(l), negative lags by backward iteration.
  Invertible,
};

struct GkOptions {
  int l_max = 50;
  std::int64_t n_samples = 100000;
  std::int64_t level_truncation = -1;  ///< A; −1 uses the field's level support
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
  bool backward = false;  ///< also estimate negative lags (invertible systems)
};

/// Term-level correlations for a product field F = Σ_p g_p h_p ψ_p:
///   K_pq(l) = E_μ̄[h_p(ω̄) h_q(T̄^l ω̄) Ψ_pq(S_l φ(ω̄))],  Ψ_pq(s) = Σ_{|a|≤A} ψ_p(a) ψ_q(a+s),
/// so that C(l) = G(x) K(l) G(x)ᵀ with G the d × P matrix of columns g_p(x).
struct GreenKuboModel {
  int l_max = 0;
  std::int64_t n_samples = 0;
  std::vector<Matrix> forward;   ///< K(0..l_max)
  std::vector<Matrix> backward;  ///< K(0), K(−1), ..., K(−l_max); empty unless requested
  Matrix sym_terms;              ///< sym K(0) + Σ_{l≥1} (K(l) + K(l)ᵀ)
  Matrix inv_terms;              ///< Σ_{|l|≤L} K(l)
  Matrix sym_cov;                ///< covariance of the per-sample vec(sym_terms) / n
  Matrix inv_cov;
  double tail_ratio = 0.0;       ///< ‖K(l_max)‖ / ‖K(0)‖
  bool tail_warning = false;     ///< tail_ratio > 1e-3

  /// a(x) = G(x) A G(x)ᵀ for the chosen series.
  VarianceMatrix a(const Matrix& g, GkForm form = GkForm::Symmetrized) const;
  /// C(l) at x; negative l needs the backward lags.
  Matrix correlation(const Matrix& g, int l) const;
};

/// The d × P matrix whose columns are g_p(x).
template <class Point>
Matrix term_matrix(const DrivenVectorField<Point>& field, const ConstVecRef& x) {
  Matrix g(field.dim(), static_cast<Eigen::Index>(field.term_count()));
  Vector col(field.dim());
  for (std::size_t p = 0; p < field.term_count(); ++p) {
    field.term(p).g(x, col);
    g.col(static_cast<Eigen::Index>(p)) = col;
  }
  return g;
}

namespace detail {

/// Ψ_pq(s) tabulated for s in [lo, hi].
struct LevelConvolution {
  std::int64_t lo = 0, hi = -1;
  std::vector<Matrix> table;  ///< P × P per s
  const Matrix* at(std::int64_t s) const {
    return (s < lo || s > hi) ? nullptr : &table[static_cast<std::size_t>(s - lo)];
  }
};

LevelConvolution level_convolution(const std::vector<LevelWeights>& psi, std::int64_t A);

struct GkAccumulator {
  std::vector<Matrix> fwd, bwd;
  Vector sym_sum, inv_sum;  // vec of the per-sample series
  Matrix sym_sq, inv_sq;    // Σ vec vecᵀ
  void init(int P, int l_max, bool backward);
  void merge(const GkAccumulator& o);
};

void finalize_model(GreenKuboModel& model, std::vector<GkAccumulator>& shards, int P);

}  // namespace detail

/// K(l) for l = 0..l_max (and −l_max..0 with opts.backward) by sampling ω̄ ~ μ̄.
/// Throws TruncationTooSmall if ψ carries more than 1e-6 of weight outside [−A, A].
template <BaseSystem S>
GreenKuboModel green_kubo_model(const S& sys, const DrivenVectorField<typename S::Point>& field,
                                const GkOptions& opts) {
  using Point = typename S::Point;
  if (opts.l_max < 0) throw ContractViolation("green_kubo_model: l_max must be >= 0");
  if (opts.n_samples < 2) throw ContractViolation("green_kubo_model: need at least 2 samples");
  if constexpr (!InvertibleBaseSystem<S>) {
    if (opts.backward) throw ContractViolation("backward lags need an invertible base system");
  }
  const std::int64_t A = opts.level_truncation < 0 ? field.level_support() : opts.level_truncation;
  std::vector<LevelWeights> psi;
  for (const auto& t : field.terms()) {
    if (t.psi.mass_outside(A) > 1e-6)
      throw TruncationTooSmall("term '" + t.label + "' has level weight outside [-A, A]");
    psi.push_back(t.psi);
  }
  const int P = static_cast<int>(field.term_count());
  const auto conv = detail::level_convolution(psi, A);
  const int L = opts.l_max;
  const ShardPlan plan{static_cast<std::size_t>(opts.n_samples), 512};
  std::vector<detail::GkAccumulator> shards(plan.count());

  for_each_task(plan.count(), opts.exec, [&](std::size_t s) {
    auto& acc = shards[s];
    acc.init(P, L, opts.backward);
    Vector h0(P), hl(P);
    Matrix sym_i(P, P), inv_i(P, P), k(P, P);
    for (std::size_t i = plan.begin(s); i < plan.end(s); ++i) {
      CounterRng rng = task_stream(opts.seed, kStreamGreenKubo, i);
      // Fresh draw per attempt; every lag of one sample comes from one orbit.
      auto run = [&]() {
        std::vector<Matrix> fwd(static_cast<std::size_t>(L) + 1, Matrix::Zero(P, P));
        std::vector<Matrix> bwd;
        Point start = sys.sample_invariant(rng);
        for (int p = 0; p < P; ++p) h0(p) = field.term(p).h(start);
        Point cur = start;
        std::int64_t level = 0;
        for (int l = 0; l <= L; ++l) {
          if (l > 0) level += sys.advance(cur);
          if (const Matrix* psi_pq = conv.at(level)) {
            for (int q = 0; q < P; ++q) hl(q) = field.term(q).h(cur);
            fwd[l] = (h0 * hl.transpose()).cwiseProduct(*psi_pq);
          }
        }
        if constexpr (InvertibleBaseSystem<S>) {
          if (opts.backward) {
            bwd.assign(static_cast<std::size_t>(L) + 1, Matrix::Zero(P, P));
            bwd[0] = fwd[0];
            cur = start;
            level = 0;
            for (int l = 1; l <= L; ++l) {
              level -= sys.retreat(cur);
              if (const Matrix* psi_pq = conv.at(level)) {
                for (int q = 0; q < P; ++q) hl(q) = field.term(q).h(cur);
                bwd[l] = (h0 * hl.transpose()).cwiseProduct(*psi_pq);
              }
            }
          }
        }
        return std::make_pair(std::move(fwd), std::move(bwd));
      };
      auto [fwd, bwd] = retry_grazing(run);
      sym_i = 0.5 * (fwd[0] + fwd[0].transpose());
      for (int l = 1; l <= L; ++l) sym_i += fwd[l] + fwd[l].transpose();
      for (int l = 0; l <= L; ++l) acc.fwd[l] += fwd[l];
      const Eigen::Map<const Vector> vs(sym_i.data(), P * P);
      acc.sym_sum += vs;
      acc.sym_sq.noalias() += vs * vs.transpose();
      if (opts.backward) {
        inv_i = fwd[0];
        for (int l = 1; l <= L; ++l) inv_i += fwd[l] + bwd[l];
        for (int l = 0; l <= L; ++l) acc.bwd[l] += bwd[l];
        const Eigen::Map<const Vector> vi(inv_i.data(), P * P);
        acc.inv_sum += vi;
        acc.inv_sq.noalias() += vi * vi.transpose();
      }
    }
  });

  GreenKuboModel model;
  model.l_max = L;
  model.n_samples = opts.n_samples;
  detail::finalize_model(model, shards, P);
  return model;
}

/// Estimate of I_μ(F_i(x,·) F_j(x, T^l ·)) for a single lag l ≥ 0.
template <BaseSystem S>
Matrix correlation_term(const S& sys, const DrivenVectorField<typename S::Point>& field,
                        const ConstVecRef& x, int lag, const GkOptions& opts) {
  if (lag < 0) throw ContractViolation("correlation_term: lag must be >= 0");
  GkOptions o = opts;
  o.l_max = lag;
  o.backward = false;
  return green_kubo_model(sys, field, o).correlation(term_matrix(field, x), lag);
}

/// a(x) by the chosen Green–Kubo series.
template <BaseSystem S>
VarianceMatrix estimate_a(const S& sys, const DrivenVectorField<typename S::Point>& field,
                          const ConstVecRef& x, const GkOptions& opts,
                          GkForm form = GkForm::Symmetrized) {
  GkOptions o = opts;
  o.backward = form == GkForm::Invertible;
  return green_kubo_model(sys, field, o).a(term_matrix(field, x), form);
}

struct SigmaEstimate {
  double value = 0.0;
  double se = 0.0;
  std::vector<double> lag_means;  ///< E[φ φ∘T̄^k], k = 0..k_max
  std::int64_t grazing_discarded = 0;
};

struct SigmaOptions {
  int k_max = 20;
  std::int64_t n_samples = 100000;
  int window = 1;  ///< start points averaged per sampled orbit
  std::uint64_t seed = 1;
  Exec exec = Exec::Parallel;
  SigmaConvention convention = SigmaConvention::TwoSided;
};

/// Σ = E[φ²] + 2 Σ_{k=1}^{k_max} E[φ · φ∘T̄^k] (or the one-sided series) under μ̄.
template <BaseSystem S>
SigmaEstimate estimate_sigma(const S& sys, const SigmaOptions& opts) {
  if (opts.k_max < 0 || opts.window < 1 || opts.n_samples < 2)
    throw ContractViolation("estimate_sigma: invalid options");
  const int K = opts.k_max;
  const int W = opts.window;
  const double weight = opts.convention == SigmaConvention::TwoSided ? 2.0 : 1.0;
  const ShardPlan plan{static_cast<std::size_t>(opts.n_samples), 1024};
  struct Part {
    std::vector<double> lag;
    double sum = 0.0, sq = 0.0;
    std::int64_t discarded = 0;
  };
  std::vector<Part> parts(plan.count());
  for_each_task(plan.count(), opts.exec, [&](std::size_t s) {
    Part& part = parts[s];
    part.lag.assign(static_cast<std::size_t>(K) + 1, 0.0);
    std::vector<double> phi(static_cast<std::size_t>(W + K));
    std::vector<double> lag(static_cast<std::size_t>(K) + 1);
    for (std::size_t i = plan.begin(s); i < plan.end(s); ++i) {
      CounterRng rng = task_stream(opts.seed, kStreamSigma, i);
      retry_grazing(
          [&]() {
            auto p = sys.sample_invariant(rng);
            for (auto& f : phi) f = static_cast<double>(sys.advance(p));
            return 0;
          },
          64, &part.discarded);
      double total = 0.0;
      for (int k = 0; k <= K; ++k) {
        double c = 0.0;
        for (int j = 0; j < W; ++j) c += phi[j] * phi[j + k];
        lag[k] = c / W;
        total += (k == 0 ? 1.0 : weight) * lag[k];
      }
      for (int k = 0; k <= K; ++k) part.lag[k] += lag[k];
      part.sum += total;
      part.sq += total * total;
    }
  });
  SigmaEstimate out;
  out.lag_means.assign(static_cast<std::size_t>(K) + 1, 0.0);
  double sum = 0.0, sq = 0.0;
  for (const auto& part : parts) {
    for (int k = 0; k <= K; ++k) out.lag_means[k] += part.lag[k];
    sum += part.sum;
    sq += part.sq;
    out.grazing_discarded += part.discarded;
  }
  const double n = static_cast<double>(opts.n_samples);
  for (auto& m : out.lag_means) m /= n;
  out.value = sum / n;
  out.se = std::sqrt(std::max(0.0, (sq / n - out.value * out.value) / (n - 1.0)));
  return out;
}

}  // namespace infavg
