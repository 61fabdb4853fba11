#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "infavg/config.hpp"
#include "infavg/field.hpp"
#include "infavg/shift_toy.hpp"

namespace infavg::test {

/// A base whose cocycle vanishes: levels never move.
struct FrozenLevels {
  using Point = std::int64_t;
  std::int64_t advance(Point& p) const {
    ++p;
    return 0;
  }
  std::int64_t phi(const Point&) const { return 0; }
  Point sample_invariant(CounterRng& rng) const { return static_cast<Point>(rng() >> 40); }
  std::int64_t phi_bound() const { return 0; }
};

/// Toy with φ' = φ + φ∘T̄ as its cocycle.
struct PairToy {
  using Point = BitStreamPoint;
  std::int64_t phi(const Point& p) const { return (p.head() >> 63 ? -1 : 1) + ((p.head() >> 62) & 1 ? -1 : 1); }
  std::int64_t advance(Point& p) const {
    const std::int64_t f = phi(p);
    p.shift();
    return f;
  }
  Point sample_invariant(CounterRng& rng) const { return Point(rng.split()); }
  std::int64_t phi_bound() const { return 2; }
};

inline FieldSpec toy_spec(const std::string& h = "phi", std::map<std::int64_t, double> psi = {{0, 1.0}},
                          GSpec g = {}) {
  FieldSpec f;
  f.terms.front().h.kind = h;
  f.terms.front().psi = std::move(psi);
  f.terms.front().g = std::move(g);
  return f;
}

inline FieldSpec zero_spec() { return toy_spec("phi", {}); }

inline Vector vec1(double x) { return Vector::Constant(1, x); }

inline std::vector<double> first(const std::vector<Vector>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x(0));
  return out;
}

}  // namespace infavg::test
