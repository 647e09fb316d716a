#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mvt {

enum class DomainKind { euclidean, torus };

/// Spatial domain: R^d or the flat torus [0,1)^d, 1 <= d <= 3.
struct Domain {
  DomainKind kind = DomainKind::euclidean;
  int dim = 1;

  friend bool operator==(const Domain&, const Domain&) = default;
};

Domain make_domain(DomainKind kind, int dim);

/// A point of the domain. Coordinates beyond `dim` are kept at zero.
struct Point {
  std::array<double, 3> x{};

  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Point&, const Point&) = default;
};

/// Wraps torus coordinates into [0,1); identity on R^d.
Point canonicalize(const Domain& domain, Point p);

/// Euclidean distance, or the quotient metric on the torus
/// (per-coordinate min(|dx|, 1-|dx|), then the Euclidean norm).
double distance(const Domain& domain, const Point& a, const Point& b);

/// Minimal-image displacement b - a (componentwise).
Point displacement(const Domain& domain, const Point& a, const Point& b);

struct Atom {
  Point point;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

inline constexpr double kCoalesceEps = 1e-12;
inline constexpr double kWeightEps = 1e-15;

/// Finite signed measure with finitely many atoms.
///
/// Values are always stored coalesced: atoms are pairwise farther apart
/// than the coalescing radius, carry |weight| >= kWeightEps, and are sorted
/// lexicographically by coordinate so equal measures compare equal.
class DiscreteSignedMeasure {
 public:
  DiscreteSignedMeasure() = default;
  explicit DiscreteSignedMeasure(Domain domain) : domain_(domain) {}
  DiscreteSignedMeasure(Domain domain, std::vector<Atom> atoms,
                        double coalesce_eps = kCoalesceEps);

  static DiscreteSignedMeasure dirac(Domain domain, Point at, double weight = 1.0);

  const Domain& domain() const noexcept { return domain_; }
  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  /// Signed total mass mu(Omega).
  double mass() const noexcept;
  double integrate(const std::function<double(const Point&)>& g) const;
  bool is_positive() const noexcept;

  friend bool operator==(const DiscreteSignedMeasure&,
                         const DiscreteSignedMeasure&) = default;

 private:
  Domain domain_{};
  std::vector<Atom> atoms_;
};

/// Bounded Lipschitz test/rate function with declared bounds.
struct BoundedLipschitzFunction {
  std::function<double(const Point&)> evaluate;
  double sup_bound = 0.0;
  double lip_bound = 0.0;

  double operator()(const Point& p) const { return evaluate(p); }
  /// max(||g||_inf, |g|_L)
  double fm_norm() const noexcept;

  static BoundedLipschitzFunction constant(double value);
};

double tv_norm(const DiscreteSignedMeasure& mu) noexcept;

/// a*mu + b*nu. Throws DomainMismatch for different domains.
DiscreteSignedMeasure linear_combine(double a, const DiscreteSignedMeasure& mu,
                                     double b, const DiscreteSignedMeasure& nu);

DiscreteSignedMeasure scale(double a, const DiscreteSignedMeasure& mu);

/// Pointwise product g*mu. Throws NumericalFailure if g is not finite at an atom.
DiscreteSignedMeasure multiply_by_function(const BoundedLipschitzFunction& g,
                                           const DiscreteSignedMeasure& mu);

/// (mu^+, mu^-), both positive with disjoint supports.
std::pair<DiscreteSignedMeasure, DiscreteSignedMeasure> jordan_decomposition(
    const DiscreteSignedMeasure& mu);

/// Merge atoms closer than `coalesce_eps` (weights summed, location the
/// |weight|-weighted mean) and prune atoms with |weight| < kWeightEps.
DiscreteSignedMeasure coalesce(const DiscreteSignedMeasure& mu, double coalesce_eps);

/// Same as coalesce, starting from a raw atom list.
std::vector<Atom> coalesce_atoms(const Domain& domain, std::vector<Atom> atoms,
                                 double coalesce_eps);

}  // namespace mvt
