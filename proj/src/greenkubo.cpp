#include "infavg/greenkubo.hpp"

#include <Eigen/Eigenvalues>

namespace infavg {

Matrix psd_sqrt(const Matrix& m, double asym_tol) {
  if (m.rows() != m.cols()) throw ContractViolation("psd_sqrt: matrix must be square");
  if (!m.allFinite()) throw NonFiniteState("psd_sqrt: non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > asym_tol)
    throw ContractViolation("psd_sqrt: matrix is not symmetric");
  if (m.rows() == 1) return Matrix::Constant(1, 1, std::sqrt(std::max(0.0, m(0, 0))));
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix r = eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

namespace detail {

LevelConvolution level_convolution(const std::vector<LevelWeights>& psi, std::int64_t A) {
  LevelConvolution out;
  const int P = static_cast<int>(psi.size());
  std::int64_t lo = 0, hi = -1;
  bool any = false;
  for (const auto& a : psi) {
    if (a.empty()) continue;
    for (const auto& b : psi) {
      if (b.empty()) continue;
      const std::int64_t l = b.min_level() - std::min(a.max_level(), A);
      const std::int64_t h = b.max_level() - std::max(a.min_level(), -A);
      lo = any ? std::min(lo, l) : l;
      hi = any ? std::max(hi, h) : h;
      any = true;
    }
  }
  if (!any) return out;
  out.lo = lo;
  out.hi = hi;
  out.table.assign(static_cast<std::size_t>(hi - lo + 1), Matrix::Zero(P, P));
  for (std::int64_t s = lo; s <= hi; ++s) {
    Matrix& t = out.table[static_cast<std::size_t>(s - lo)];
    for (int p = 0; p < P; ++p) {
      if (psi[p].empty()) continue;
      for (int q = 0; q < P; ++q) {
        double v = 0.0;
        const std::int64_t a_lo = std::max(psi[p].min_level(), -A);
        const std::int64_t a_hi = std::min(psi[p].max_level(), A);
        for (std::int64_t a = a_lo; a <= a_hi; ++a) v += psi[p](a) * psi[q](a + s);
        t(p, q) = v;
      }
    }
  }
  return out;
}

void GkAccumulator::init(int P, int l_max, bool backward) {
  fwd.assign(static_cast<std::size_t>(l_max) + 1, Matrix::Zero(P, P));
  bwd.assign(backward ? static_cast<std::size_t>(l_max) + 1 : 0, Matrix::Zero(P, P));
  sym_sum = Vector::Zero(P * P);
  sym_sq = Matrix::Zero(P * P, P * P);
  inv_sum = Vector::Zero(P * P);
  inv_sq = Matrix::Zero(P * P, P * P);
}

void GkAccumulator::merge(const GkAccumulator& o) {
  for (std::size_t l = 0; l < fwd.size(); ++l) fwd[l] += o.fwd[l];
  for (std::size_t l = 0; l < bwd.size(); ++l) bwd[l] += o.bwd[l];
  sym_sum += o.sym_sum;
  sym_sq += o.sym_sq;
  inv_sum += o.inv_sum;
  inv_sq += o.inv_sq;
}

void finalize_model(GreenKuboModel& model, std::vector<GkAccumulator>& shards, int P) {
  GkAccumulator total = shards.front();
  for (std::size_t s = 1; s < shards.size(); ++s) total.merge(shards[s]);
  const double n = static_cast<double>(model.n_samples);
  for (auto& k : total.fwd) k /= n;
  for (auto& k : total.bwd) k /= n;
  model.forward = std::move(total.fwd);
  model.backward = std::move(total.bwd);

  auto moments = [&](const Vector& sum, const Matrix& sq, Matrix& mean, Matrix& cov) {
    const Vector mu = sum / n;
    mean = Eigen::Map<const Matrix>(mu.data(), P, P);
    cov = (sq / n - mu * mu.transpose()) / (n - 1.0);
  };
  moments(total.sym_sum, total.sym_sq, model.sym_terms, model.sym_cov);
  if (!model.backward.empty()) {
    moments(total.inv_sum, total.inv_sq, model.inv_terms, model.inv_cov);
  }
  const double c0 = model.forward.front().norm();
  const double cl = model.forward.back().norm();
  model.tail_ratio = c0 > 0.0 ? cl / c0 : 0.0;
  model.tail_warning = model.l_max > 0 && model.tail_ratio > 1e-3;
}

}  // namespace detail

VarianceMatrix GreenKuboModel::a(const Matrix& g, GkForm form) const {
  const bool inv = form == GkForm::Invertible;
  if (inv && backward.empty()) throw ContractViolation("invertible series needs backward lags");
  const Matrix& terms = inv ? inv_terms : sym_terms;
  const Matrix& cov = inv ? inv_cov : sym_cov;
  if (g.cols() != terms.rows()) throw ContractViolation("term matrix has the wrong width");
  VarianceMatrix out;
  const Matrix raw = g * terms * g.transpose();
  out.asymmetry = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  out.m = 0.5 * (raw + raw.transpose());
  // a_ij is linear in vec(terms): a_ij = Σ_{pq} g_ip g_jq A_pq.
  const Eigen::Index d = g.rows(), P = g.cols();
  out.se = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      Vector w(P * P);
      for (Eigen::Index q = 0; q < P; ++q)
        for (Eigen::Index p = 0; p < P; ++p) w(q * P + p) = 0.5 * (g(i, p) * g(j, q) + g(j, p) * g(i, q));
      out.se(i, j) = std::sqrt(std::max(0.0, w.dot(cov * w)));
    }
  }
  return out;
}

Matrix GreenKuboModel::correlation(const Matrix& g, int l) const {
  if (l >= 0) {
    if (l > l_max) throw ContractViolation("lag beyond l_max");
    return g * forward[static_cast<std::size_t>(l)] * g.transpose();
  }
  if (backward.empty() || -l > l_max) throw ContractViolation("negative lag not estimated");
  return g * backward[static_cast<std::size_t>(-l)] * g.transpose();
}

}  // namespace infavg
