#pragma once

#include <concepts>
#include <cstdint>
#include <utility>
#include <vector>

#include "infavg/errors.hpp"
#include "infavg/rng.hpp"

namespace infavg {

/// A probability-preserving base map (M̄, T̄, μ̄) with an integer step
/// function φ. The base point is opaque to everything in this header.
///
///   advance(p)          replaces p by T̄p and returns φ of the old point
///   phi(p)              φ(p) without moving
///   sample_invariant(r) a draw from μ̄
///   phi_bound()         declared bound on |φ|
template <class S>
concept BaseSystem = requires(const S& sys, typename S::Point& p, const typename S::Point& cp,
                              CounterRng& rng) {
  typename S::Point;
  { sys.advance(p) } -> std::same_as<std::int64_t>;
  { sys.phi(cp) } -> std::same_as<std::int64_t>;
  { sys.sample_invariant(rng) } -> std::same_as<typename S::Point>;
  { sys.phi_bound() } -> std::convertible_to<std::int64_t>;
};

/// Base systems that can also step backwards: retreat(p) replaces p by
/// T̄⁻¹p and returns φ of the new (earlier) point.
template <class S>
concept InvertibleBaseSystem = BaseSystem<S> && requires(const S& sys, typename S::Point& p) {
  { sys.retreat(p) } -> std::same_as<std::int64_t>;
};

enum class SigmaConvention {
  /// E[f²] + 2 Σ_{k≥1} E[f · f∘T̄^k], the CLT variance.
  TwoSided,
  /// Σ_{k≥0} E[f · f∘T̄^k], the series written with the spectral expansion.
  OneSided,
};

/// Point of the Z-extension M̄ × Z.
template <class Point>
struct ZPoint {
  Point base;
  std::int64_t level = 0;
};

namespace detail {
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error("cell level overflow");
  return out;
}
}  // namespace detail

/// T(ω, m) = (T̄ω, m + φ(ω)).
template <BaseSystem S>
void step_z_inplace(const S& sys, ZPoint<typename S::Point>& p) {
  const std::int64_t phi = sys.advance(p.base);
  p.level = detail::checked_add(p.level, phi);
}

template <BaseSystem S>
ZPoint<typename S::Point> step_z(const S& sys, ZPoint<typename S::Point> p) {
  step_z_inplace(sys, p);
  return p;
}

/// S_nφ(ω) = Σ_{k<n} φ(T̄^k ω).
template <BaseSystem S>
std::int64_t birkhoff_phi(const S& sys, typename S::Point base, std::int64_t n) {
  if (n < 0) throw ContractViolation("birkhoff_phi: n must be non-negative");
  std::int64_t sum = 0;
  for (std::int64_t k = 0; k < n; ++k) sum = detail::checked_add(sum, sys.advance(base));
  return sum;
}

/// n + 1 points starting at (base, 0).
template <BaseSystem S>
std::vector<ZPoint<typename S::Point>> orbit(const S& sys, typename S::Point base, std::int64_t n) {
  if (n < 0) throw ContractViolation("orbit: n must be non-negative");
  std::vector<ZPoint<typename S::Point>> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.push_back({std::move(base), 0});
  for (std::int64_t k = 0; k < n; ++k) out.push_back(step_z(sys, out.back()));
  return out;
}

}  // namespace infavg
