#include "mvt/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvt/errors.hpp"

namespace mvt {

namespace {

bool lex_less(const Point& a, const Point& b) { return a.x < b.x; }

// Union-find over atom indices; only used inside coalesce_atoms.
struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Lower index stays root so the anchor of a cluster is its lexicographic minimum.
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

Domain make_domain(DomainKind kind, int dim) {
  if (dim < 1 || dim > 3) throw ConfigError("domain dimension must be 1, 2 or 3");
  return Domain{kind, dim};
}

Point canonicalize(const Domain& domain, Point p) {
  if (domain.kind == DomainKind::torus) {
    for (int i = 0; i < domain.dim; ++i) {
      double c = p[i] - std::floor(p[i]);
      if (c >= 1.0) c = 0.0;  // floor rounding for tiny negatives
      p[i] = c;
    }
  }
  for (int i = domain.dim; i < 3; ++i) p[i] = 0.0;
  return p;
}

Point displacement(const Domain& domain, const Point& a, const Point& b) {
  Point d;
  for (int i = 0; i < domain.dim; ++i) {
    double dx = b[i] - a[i];
    if (domain.kind == DomainKind::torus) dx -= std::round(dx);
    d[i] = dx;
  }
  return d;
}

double distance(const Domain& domain, const Point& a, const Point& b) {
  double sum = 0.0;
  for (int i = 0; i < domain.dim; ++i) {
    double dx = std::abs(b[i] - a[i]);
    if (domain.kind == DomainKind::torus) {
      dx = std::fmod(dx, 1.0);
      dx = std::min(dx, 1.0 - dx);
    }
    sum += dx * dx;
  }
  return std::sqrt(sum);
}

std::vector<Atom> coalesce_atoms(const Domain& domain, std::vector<Atom> atoms,
                                 double coalesce_eps) {
  for (auto& a : atoms) a.point = canonicalize(domain, a.point);
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return lex_less(a.point, b.point); });

  const std::size_t n = atoms.size();
  DisjointSets sets(n);
  bool any_merge = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (atoms[j].point[0] - atoms[i].point[0] > coalesce_eps) break;
      if (distance(domain, atoms[i].point, atoms[j].point) <= coalesce_eps) {
        sets.unite(i, j);
        any_merge = true;
      }
    }
  }
  if (domain.kind == DomainKind::torus && coalesce_eps > 0.0) {
    // Atoms straddling the periodic seam of the first coordinate.
    for (std::size_t i = 0; i < n && atoms[i].point[0] <= coalesce_eps; ++i) {
      for (std::size_t j = n; j-- > i + 1;) {
        if (atoms[j].point[0] < 1.0 - coalesce_eps) break;
        if (distance(domain, atoms[i].point, atoms[j].point) <= coalesce_eps) {
          sets.unite(i, j);
          any_merge = true;
        }
      }
    }
  }

  std::vector<Atom> out;
  out.reserve(n);
  if (!any_merge) {
    for (const auto& a : atoms)
      if (std::abs(a.weight) >= kWeightEps) out.push_back(a);
    return out;
  }

  // Cluster members are visited in sorted order, so the root (lowest index)
  // is seen first and acts as the anchor for the minimal-image mean.
  std::vector<std::size_t> slot(n, n);
  struct Cluster {
    Point anchor;
    Point offset_sum;
    double abs_sum = 0.0;
    double weight = 0.0;
  };
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = sets.find(i);
    if (slot[r] == n) {
      slot[r] = clusters.size();
      clusters.push_back(Cluster{atoms[i].point, Point{}, 0.0, 0.0});
    }
    Cluster& c = clusters[slot[r]];
    const double w = atoms[i].weight;
    const Point off = displacement(domain, c.anchor, atoms[i].point);
    for (int k = 0; k < domain.dim; ++k) c.offset_sum[k] += std::abs(w) * off[k];
    c.abs_sum += std::abs(w);
    c.weight += w;
  }
  for (const auto& c : clusters) {
    if (std::abs(c.weight) < kWeightEps) continue;
    Point p = c.anchor;
    if (c.abs_sum > 0.0) {
      for (int k = 0; k < domain.dim; ++k) {
        if (c.offset_sum[k] != 0.0) p[k] += c.offset_sum[k] / c.abs_sum;
      }
    }
    out.push_back(Atom{canonicalize(domain, p), c.weight});
  }
  std::sort(out.begin(), out.end(),
            [](const Atom& a, const Atom& b) { return lex_less(a.point, b.point); });
  return out;
}

DiscreteSignedMeasure::DiscreteSignedMeasure(Domain domain, std::vector<Atom> atoms,
                                             double coalesce_eps)
    : domain_(domain), atoms_(coalesce_atoms(domain, std::move(atoms), coalesce_eps)) {
  for (const auto& a : atoms_) {
    for (int i = 0; i < domain_.dim; ++i) {
      if (!std::isfinite(a.point[i])) throw NumericalFailure("non-finite atom coordinate");
    }
    if (!std::isfinite(a.weight)) throw NumericalFailure("non-finite atom weight");
  }
}

DiscreteSignedMeasure DiscreteSignedMeasure::dirac(Domain domain, Point at, double weight) {
  return DiscreteSignedMeasure(domain, {Atom{at, weight}});
}

double DiscreteSignedMeasure::mass() const noexcept {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  return m;
}

double DiscreteSignedMeasure::integrate(const std::function<double(const Point&)>& g) const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.weight * g(a.point);
  return s;
}

bool DiscreteSignedMeasure::is_positive() const noexcept {
  return std::all_of(atoms_.begin(), atoms_.end(),
                     [](const Atom& a) { return a.weight >= 0.0; });
}

double BoundedLipschitzFunction::fm_norm() const noexcept {
  return std::max(sup_bound, lip_bound);
}

BoundedLipschitzFunction BoundedLipschitzFunction::constant(double value) {
  return {[value](const Point&) { return value; }, std::abs(value), 0.0};
}

double tv_norm(const DiscreteSignedMeasure& mu) noexcept {
  // Summed as mu^+(Omega) + mu^-(Omega) so the Jordan identity holds bit for bit.
  double pos = 0.0;
  double neg = 0.0;
  for (const auto& a : mu.atoms()) (a.weight > 0.0 ? pos : neg) += std::abs(a.weight);
  return pos + neg;
}

DiscreteSignedMeasure linear_combine(double a, const DiscreteSignedMeasure& mu, double b,
                                     const DiscreteSignedMeasure& nu) {
  if (mu.domain() != nu.domain()) throw DomainMismatch("linear_combine: domain mismatch");
  std::vector<Atom> atoms;
  atoms.reserve(mu.size() + nu.size());
  if (a != 0.0)
    for (const auto& x : mu.atoms()) atoms.push_back({x.point, a * x.weight});
  if (b != 0.0)
    for (const auto& x : nu.atoms()) atoms.push_back({x.point, b * x.weight});
  return DiscreteSignedMeasure(mu.domain(), std::move(atoms));
}

DiscreteSignedMeasure scale(double a, const DiscreteSignedMeasure& mu) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const auto& x : mu.atoms()) atoms.push_back({x.point, a * x.weight});
  return DiscreteSignedMeasure(mu.domain(), std::move(atoms));
}

DiscreteSignedMeasure multiply_by_function(const BoundedLipschitzFunction& g,
                                           const DiscreteSignedMeasure& mu) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.size());
  for (const auto& x : mu.atoms()) {
    const double gx = g(x.point);
    if (!std::isfinite(gx)) throw NumericalFailure("multiply_by_function: non-finite value");
    atoms.push_back({x.point, gx * x.weight});
  }
  return DiscreteSignedMeasure(mu.domain(), std::move(atoms));
}

std::pair<DiscreteSignedMeasure, DiscreteSignedMeasure> jordan_decomposition(
    const DiscreteSignedMeasure& mu) {
  std::vector<Atom> pos;
  std::vector<Atom> neg;
  for (const auto& a : mu.atoms()) {
    if (a.weight > 0.0)
      pos.push_back(a);
    else if (a.weight < 0.0)
      neg.push_back({a.point, -a.weight});
  }
  return {DiscreteSignedMeasure(mu.domain(), std::move(pos)),
          DiscreteSignedMeasure(mu.domain(), std::move(neg))};
}

DiscreteSignedMeasure coalesce(const DiscreteSignedMeasure& mu, double coalesce_eps) {
  std::vector<Atom> atoms(mu.atoms().begin(), mu.atoms().end());
  return DiscreteSignedMeasure(mu.domain(), std::move(atoms), coalesce_eps);
}

}  // namespace mvt
