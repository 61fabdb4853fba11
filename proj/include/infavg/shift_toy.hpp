#pragma once

#include <cstdint>
#include <functional>

#include "infavg/field.hpp"
#include "infavg/parallel.hpp"
#include "infavg/rng.hpp"
#include "infavg/zext.hpp"

namespace infavg {

/// A point of the doubling map held as its binary expansion, most
/// significant bit first. Bits past the first 128 are drawn lazily from an
/// owned stream, so shifting is exact and orbits have no length limit.
class BitStreamPoint {
 public:
  BitStreamPoint() = default;
  explicit BitStreamPoint(CounterRng rng);

  /// First 64 bits are `head`, the next 64 are `tail`, the rest random.
  static BitStreamPoint from_prefix(std::uint64_t head, std::uint64_t tail, CounterRng rng);

  /// The first 64 bits, MSB first.
  std::uint64_t head() const { return head_; }
  bool leading_bit() const { return (head_ >> 63) != 0; }
  /// First `k` bits (1 ≤ k ≤ 64) as an integer in [0, 2^k).
  std::uint64_t prefix(int k) const { return head_ >> (64 - k); }
  /// Σ_i b_i 2^{-i-1} over the first 64 bits; exact in 80-bit long double.
  long double value() const;

  /// Drops the leading bit: the doubling map x ↦ 2x mod 1.
  void shift() {
    head_ = (head_ << 1) | (tail_ >> 63);
    tail_ <<= 1;
    if (--tail_left_ == 0) {
      tail_ = rng_();
      tail_left_ = 64;
    }
  }

 private:
  std::uint64_t head_ = 0;
  std::uint64_t tail_ = 0;
  int tail_left_ = 64;
  CounterRng rng_;
};

/// Doubling map with φ = +1 on the leading bit 0 and −1 on 1.
class ShiftToy {
 public:
  using Point = BitStreamPoint;

  std::int64_t phi(const Point& p) const { return p.leading_bit() ? -1 : 1; }
  std::int64_t advance(Point& p) const {
    const std::int64_t f = phi(p);
    p.shift();
    return f;
  }
  Point sample_invariant(CounterRng& rng) const { return Point(rng.split()); }
  std::int64_t phi_bound() const { return 1; }
};

static_assert(BaseSystem<ShiftToy>);

BitStreamPoint toy_step(BitStreamPoint p);
std::int64_t toy_phi(const BitStreamPoint& p);

/// Observable on the toy base that depends only on the first `depth` bits.
/// The function receives the 64-bit head; bits past `depth` are zero when
/// called from the enumeration routines.
struct CylinderObservable {
  std::function<double(std::uint64_t head)> fn;
  int depth = 1;
};

/// Exact mean over the 2^depth cylinders of depth `depth`, each of mass
/// 2^-depth. `fn` sees the cylinder word left-aligned in a 64-bit head.
/// Throws DepthOverflow above depth 30.
double cylinder_mean(const std::function<double(std::uint64_t head)>& fn, int depth,
                     Exec exec = Exec::Serial);

/// E_μ̄[f · g∘T̄^lag], enumerated over cylinders of depth k + lag.
double exact_cylinder_expectation(const CylinderObservable& f, const CylinderObservable& g,
                                  int lag, Exec exec = Exec::Serial);

/// Σ for a cylinder observable by exact enumeration, correlation series cut at `k_max`.
double toy_sigma(const CylinderObservable& f, int k_max,
                 SigmaConvention convention = SigmaConvention::TwoSided);

/// Σ for toy_phi itself.
double toy_sigma();

/// toy_phi as a depth-1 cylinder observable.
CylinderObservable toy_phi_observable();

/// U_k − E[U_k], U_k the value of the first k bits. Centered, depth k.
CylinderObservable centered_bits_observable(int k);

/// Exact K(l) = E_μ̄[h(ω̄) h(T̄^l ω̄) Ψ(S_l φ(ω̄))] for one toy term h·ψ,
/// Ψ(s) = Σ_a ψ(a) ψ(a+s), by enumerating cylinders of depth max(k, l + k).
double toy_exact_term_correlation(const CylinderObservable& h, const LevelWeights& psi, int lag,
                                  Exec exec = Exec::Serial);

/// K(0) + 2 Σ_{l=1}^{l_max} K(l): the exact a for g ≡ 1.
double toy_exact_green_kubo(const CylinderObservable& h, const LevelWeights& psi, int l_max,
                            Exec exec = Exec::Serial);

}  // namespace infavg
