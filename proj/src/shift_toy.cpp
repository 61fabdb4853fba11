#include "infavg/shift_toy.hpp"

#include <bit>
#include <cmath>
#include <vector>

#include "infavg/errors.hpp"

namespace infavg {

BitStreamPoint::BitStreamPoint(CounterRng rng) : rng_(rng) {
  head_ = rng_();
  tail_ = rng_();
}

BitStreamPoint BitStreamPoint::from_prefix(std::uint64_t head, std::uint64_t tail, CounterRng rng) {
  BitStreamPoint p;
  p.head_ = head;
  p.tail_ = tail;
  p.tail_left_ = 64;
  p.rng_ = rng;
  return p;
}

long double BitStreamPoint::value() const {
  return std::ldexp(static_cast<long double>(head_), -64);
}

BitStreamPoint toy_step(BitStreamPoint p) {
  p.shift();
  return p;
}

std::int64_t toy_phi(const BitStreamPoint& p) { return ShiftToy{}.phi(p); }

double cylinder_mean(const std::function<double(std::uint64_t)>& fn, int depth, Exec exec) {
  if (depth < 0 || depth > 30) throw DepthOverflow("cylinder enumeration depth must be in [0, 30]");
  const std::uint64_t count = std::uint64_t{1} << depth;
  // Fixed chunking keeps the summation order independent of the schedule.
  constexpr std::uint64_t kChunk = 1 << 12;
  const std::uint64_t n_chunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
  for_each_task(n_chunks, exec, [&](std::size_t c) {
    double s = 0.0;
    const std::uint64_t lo = c * kChunk;
    const std::uint64_t hi = std::min(count, lo + kChunk);
    for (std::uint64_t w = lo; w < hi; ++w) {
      const std::uint64_t head = depth == 0 ? 0 : w << (64 - depth);
      s += fn(head);
    }
    partial[c] = s;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return std::ldexp(total, -depth);
}

double exact_cylinder_expectation(const CylinderObservable& f, const CylinderObservable& g,
                                  int lag, Exec exec) {
  if (lag < 0) throw ContractViolation("exact_cylinder_expectation: lag must be non-negative");
  const int depth = std::max(f.depth, g.depth + lag);
  if (depth > 30) throw DepthOverflow("exact_cylinder_expectation: depth + lag exceeds 30");
  return cylinder_mean([&](std::uint64_t head) { return f.fn(head) * g.fn(head << lag); }, depth,
                       exec);
}

double toy_sigma(const CylinderObservable& f, int k_max, SigmaConvention convention) {
  double sigma = exact_cylinder_expectation(f, f, 0);
  const double weight = convention == SigmaConvention::TwoSided ? 2.0 : 1.0;
  for (int k = 1; k <= k_max; ++k) sigma += weight * exact_cylinder_expectation(f, f, k);
  return sigma;
}

CylinderObservable toy_phi_observable() {
  return {[](std::uint64_t head) { return (head >> 63) != 0 ? -1.0 : 1.0; }, 1};
}

double toy_sigma() { return toy_sigma(toy_phi_observable(), 20); }

CylinderObservable centered_bits_observable(int k) {
  if (k < 1 || k > 52) throw ContractViolation("centered_bits_observable: depth must be in [1, 52]");
  const double scale = std::ldexp(1.0, -k);
  const double mean = 0.5 * (1.0 - scale);
  return {[k, scale, mean](std::uint64_t head) {
            return static_cast<double>(head >> (64 - k)) * scale - mean;
          },
          k};
}

}  // namespace infavg

namespace infavg {

double toy_exact_term_correlation(const CylinderObservable& h, const LevelWeights& psi, int lag,
                                  Exec exec) {
  if (lag < 0) throw ContractViolation("toy_exact_term_correlation: lag must be >= 0");
  const int depth = std::max(h.depth, lag + h.depth);
  if (depth > 30) throw DepthOverflow("toy_exact_term_correlation: depth above 30");
  if (psi.empty()) return 0.0;
  auto conv = [&psi](std::int64_t s) {
    double v = 0.0;
    for (std::int64_t a = psi.min_level(); a <= psi.max_level(); ++a) v += psi(a) * psi(a + s);
    return v;
  };
  std::vector<double> table(static_cast<std::size_t>(2 * lag + 1));
  for (int s = -lag; s <= lag; ++s) table[static_cast<std::size_t>(s + lag)] = conv(s);
  return cylinder_mean(
      [&](std::uint64_t head) {
        const int ones = lag == 0 ? 0 : std::popcount(head >> (64 - lag));
        const double w = table[static_cast<std::size_t>(lag - 2 * ones + lag)];
        if (w == 0.0) return 0.0;
        return h.fn(head) * h.fn(lag == 64 ? 0 : head << lag) * w;
      },
      depth, exec);
}

double toy_exact_green_kubo(const CylinderObservable& h, const LevelWeights& psi, int l_max, Exec exec) {
  double a = toy_exact_term_correlation(h, psi, 0, exec);
  for (int l = 1; l <= l_max; ++l) a += 2.0 * toy_exact_term_correlation(h, psi, l, exec);
  return a;
}

}  // namespace infavg
