#pragma once

// Hand-rolled random generators for property tests. Everything is driven by
// one std::mt19937_64 so a failing case is reproducible from its seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mvt/measure.hpp"

namespace mvt::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Point point(const Domain& dom, double spread = 2.0) {
    Point p;
    for (int i = 0; i < dom.dim; ++i)
      p[i] = dom.kind == DomainKind::torus ? uniform(0.0, 1.0) : uniform(-spread, spread);
    return p;
  }

  /// Signed (or positive) measure with 1..max_atoms atoms; weights in (-1, 1).
  DiscreteSignedMeasure measure(const Domain& dom, int max_atoms, bool positive = false,
                                double spread = 2.0) {
    std::vector<Atom> atoms(static_cast<std::size_t>(integer(1, max_atoms)));
    for (auto& a : atoms) {
      a.point = point(dom, spread);
      a.weight = positive ? uniform(0.01, 1.0) : uniform(-1.0, 1.0);
    }
    return DiscreteSignedMeasure(dom, std::move(atoms));
  }

  /// g(x) = a + b sin(k . x + phase) with exact sup and Lipschitz bounds.
  BoundedLipschitzFunction bl_function(const Domain& dom) {
    const double a = uniform(-1.0, 1.0);
    const double b = uniform(-2.0, 2.0);
    Point k;
    double knorm2 = 0.0;
    for (int i = 0; i < dom.dim; ++i) {
      // integer multiples of 2 pi keep g periodic on the torus
      k[i] = dom.kind == DomainKind::torus ? 2.0 * std::numbers::pi * integer(-2, 2) : uniform(-3.0, 3.0);
      knorm2 += k[i] * k[i];
    }
    const double phase = uniform(0.0, 6.0);
    const int d = dom.dim;
    return {[=](const Point& x) {
              double s = phase;
              for (int i = 0; i < d; ++i) s += k[i] * x[i];
              return a + b * std::sin(s);
            },
            std::abs(a) + std::abs(b), std::abs(b) * std::sqrt(knorm2)};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Domain line() { return make_domain(DomainKind::euclidean, 1); }
inline Domain plane() { return make_domain(DomainKind::euclidean, 2); }

inline DiscreteSignedMeasure atoms1d(std::initializer_list<std::pair<double, double>> xs) {
  std::vector<Atom> atoms;
  for (auto [x, w] : xs) {
    Atom a;
    a.point[0] = x;
    a.weight = w;
    atoms.push_back(a);
  }
  return DiscreteSignedMeasure(line(), std::move(atoms));
}

}  // namespace mvt::testing
