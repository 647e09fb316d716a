#include "mvt/reaction.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mvt/errors.hpp"
#include "mvt/flat_metric.hpp"
#include "mvt/flow.hpp"

namespace mvt {

namespace {

double sphere_area(int dim) {
  switch (dim) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    default:
      return 4.0 * std::numbers::pi;
  }
}

// int_0^1 (1 - s^2)^e s^(d-1) ds
double radial_moment(int dim, double e) {
  return simpson([&](double s) { return std::pow(1.0 - s * s, e) * std::pow(s, dim - 1); }, 0.0,
                 1.0, 4000);
}

double bump_normalizer(int dim, double width) {
  // radial_moment(dim, 2) in closed form
  constexpr double kMoment[] = {8.0 / 15.0, 1.0 / 6.0, 8.0 / 105.0};
  return std::pow(width, dim) * sphere_area(dim) * kMoment[dim - 1];
}

void expect_arity(const std::string& name, const std::vector<double>& params, std::size_t lo,
                  std::size_t hi) {
  if (params.size() < lo || params.size() > hi) {
    throw ConfigError(fmt::format("reaction '{}': expected {} parameter(s), got {}", name,
                                  lo == hi ? fmt::format("{}", lo) : fmt::format("{}..{}", lo, hi),
                                  params.size()));
  }
}

double holder_exponent(double p) { return std::isinf(p) ? 1.0 : 1.0 - 1.0 / p; }

ReactionSpec rate_only(std::string name, const Domain& domain,
                       std::function<BoundedLipschitzFunction(double, const DiscreteSignedMeasure&)> rate) {
  ReactionSpec s;
  s.name = std::move(name);
  s.domain = domain;
  s.rate = std::move(rate);
  return s;
}

std::vector<Atom> bump_atoms(const Domain& domain, const Point& x0, double width, double sigma,
                             int k) {
  const int d = domain.dim;
  const int m = std::max(1, static_cast<int>(std::lround(std::pow(k, 1.0 / d))));
  int total = 1;
  for (int i = 0; i < d; ++i) total *= m;
  std::vector<Atom> atoms;
  double sum = 0.0;
  for (int flat = 0; flat < total; ++flat) {
    Point p = x0;
    int rest = flat;
    for (int axis = d - 1; axis >= 0; --axis) {
      const int idx = rest % m;
      rest /= m;
      p[axis] = x0[axis] - width + (idx + 0.5) * (2.0 * width / m);
    }
    const double w = bump_density(domain, x0, width, p);
    if (w > 0.0) {
      atoms.push_back({p, w});
      sum += w;
    }
  }
  for (auto& a : atoms) a.weight *= sigma / sum;
  return atoms;
}

}  // namespace

double bump_density(const Domain& domain, const Point& x0, double width, const Point& x) {
  const double r = distance(domain, x0, x) / width;
  if (r >= 1.0) return 0.0;
  const double b = 1.0 - r * r;
  return b * b / bump_normalizer(domain.dim, width);
}

double bump_lp_norm(int dim, double width, double p) {
  const double z = bump_normalizer(dim, width);
  if (std::isinf(p)) return 1.0 / z;
  const double integral = std::pow(width, dim) * sphere_area(dim) * radial_moment(dim, 2.0 * p);
  return std::pow(integral, 1.0 / p) / z;
}

DiscreteSignedMeasure eval_reaction(const ReactionSpec& spec, double t,
                                    const DiscreteSignedMeasure& mu) {
  DiscreteSignedMeasure out(mu.domain());
  if (spec.rate) out = multiply_by_function(spec.rate(t, mu), mu);
  if (spec.production) {
    const DiscreteSignedMeasure p = spec.production(t, mu);
    if (!p.is_positive())
      throw ContractViolation(fmt::format("reaction '{}': production term is not positive", spec.name));
    out = linear_combine(1.0, p, 1.0, out);
  }
  return out;
}

ReactionSpec builtin_reaction(const std::string& name, const std::vector<double>& params,
                              const ReactionContext& ctx) {
  const Domain& domain = ctx.domain;
  const auto d = static_cast<std::size_t>(domain.dim);

  if (name == "zero") {
    expect_arity(name, params, 0, 0);
    ReactionSpec s;
    s.name = name;
    s.domain = domain;
    s.c_f = [](double) { return 0.0; };
    s.l_f = [](double) { return 0.0; };
    s.c_pos = [](double, double) { return 0.0; };
    s.lp_bound = [](double, double, double, double) { return 0.0; };
    s.density_action = [](double, const GridDensity& u) {
      return with_values(u, std::vector<double>(u.values.size(), 0.0));
    };
    return s;
  }

  if (name == "linear_rate" || name == "death_rate") {
    expect_arity(name, params, 1, 1);
    const double c = name == "linear_rate" ? params[0] : -params[0];
    const double a = std::abs(c);
    auto s = rate_only(name, domain, [c](double, const DiscreteSignedMeasure&) {
      return BoundedLipschitzFunction::constant(c);
    });
    s.c_f = [a](double r) { return a * r; };
    s.l_f = [a](double) { return a; };
    s.c_pos = [a](double, double) { return a; };
    if (name == "linear_rate") {
      s.lp_bound = [a](double, double r, double, double) { return a * r; };
      s.density_action = [c](double, const GridDensity& u) { return combine(c, u, 0.0, u); };
    }
    return s;
  }

  if (name == "logistic") {
    expect_arity(name, params, 2, 2);
    const double r = params[0];
    const double k = params[1];
    if (!(k > 0.0)) throw ConfigError("reaction 'logistic': carrying capacity must be positive");
    const double a = std::abs(r);
    auto s = rate_only(name, domain, [r, k](double, const DiscreteSignedMeasure& mu) {
      return BoundedLipschitzFunction::constant(r * (1.0 - mu.mass() / k));
    });
    s.c_f = [a, k](double R) { return a * (1.0 + R / k) * R; };
    s.l_f = [a, k](double R) { return a * (1.0 + 2.0 * R / k); };
    s.c_pos = [a, k](double R, double) { return a * (1.0 + R / k); };
    const double vol = ctx.box_volume;
    // |mass| <= vol^(1/q) ||phi||_p by Hoelder on the box.
    s.lp_bound = [a, k, vol](double p, double rad, double, double) {
      const double m = std::pow(vol, holder_exponent(p)) * rad;
      return a * (1.0 + m / k) * rad;
    };
    s.density_action = [r, k](double, const GridDensity& u) {
      return combine(r * (1.0 - u.mass() / k), u, 0.0, u);
    };
    return s;
  }

  if (name == "mass_feedback") {
    expect_arity(name, params, 1, 1);
    const double k = params[0];
    const double a = std::abs(k);
    auto s = rate_only(name, domain, [k](double, const DiscreteSignedMeasure& mu) {
      return BoundedLipschitzFunction::constant(k * mu.mass());
    });
    s.c_f = [a](double R) { return a * R * R; };
    s.l_f = [a](double R) { return 2.0 * a * R; };
    s.c_pos = [a](double R, double) { return a * R; };
    return s;
  }

  if (name == "dirac_source") {
    expect_arity(name, params, 1 + d, 1 + d);
    const double sigma = params[0];
    if (sigma < 0.0) throw ConfigError("reaction 'dirac_source': sigma must be >= 0");
    Point x0;
    for (std::size_t i = 0; i < d; ++i) x0[static_cast<int>(i)] = params[1 + i];
    const auto src = DiscreteSignedMeasure::dirac(domain, x0, sigma);
    ReactionSpec s;
    s.name = name;
    s.domain = domain;
    s.production = [src](double, const DiscreteSignedMeasure&) { return src; };
    s.c_f = [sigma](double) { return sigma; };
    s.l_f = [](double) { return 0.0; };
    s.c_pos = [](double, double) { return 0.0; };
    return s;
  }

  if (name == "smoothed_source") {
    expect_arity(name, params, 2 + d, 3 + d);
    const double sigma = params[0];
    const double width = params[1];
    if (sigma < 0.0) throw ConfigError("reaction 'smoothed_source': sigma must be >= 0");
    if (!(width > 0.0)) throw ConfigError("reaction 'smoothed_source': width must be positive");
    Point x0;
    for (std::size_t i = 0; i < d; ++i) x0[static_cast<int>(i)] = params[2 + i];
    const double kd = params.size() == 3 + d ? params[2 + d] : 32.0;
    if (kd < 1.0 || kd != std::floor(kd))
      throw ConfigError("reaction 'smoothed_source': atom count must be a positive integer");
    const DiscreteSignedMeasure src(domain, bump_atoms(domain, x0, width, sigma, static_cast<int>(kd)));
    ReactionSpec s;
    s.name = name;
    s.domain = domain;
    s.production = [src](double, const DiscreteSignedMeasure&) { return src; };
    s.c_f = [sigma](double) { return sigma; };
    s.l_f = [](double) { return 0.0; };
    s.c_pos = [](double, double) { return 0.0; };
    const int dim = domain.dim;
    s.lp_bound = [sigma, width, dim](double p, double, double, double) {
      return sigma * bump_lp_norm(dim, width, p);
    };
    s.density_action = [sigma, width, x0, domain](double, const GridDensity& u) {
      std::vector<double> vals(u.values.size());
      for (std::size_t k = 0; k < vals.size(); ++k)
        vals[k] = sigma * bump_density(domain, x0, width, u.cell_center(k));
      return with_values(u, std::move(vals));
    };
    return s;
  }

  throw ConfigError(fmt::format("unknown reaction '{}'", name));
}

namespace {

DiscreteSignedMeasure random_measure(const Domain& domain, std::mt19937_64& rng, double tv,
                                     bool positive) {
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> coord(domain.kind == DomainKind::torus ? 0.0 : -1.0, 1.0);
  std::uniform_real_distribution<double> weight(positive ? 0.05 : -1.0, 1.0);
  std::vector<Atom> atoms(static_cast<std::size_t>(count(rng)));
  double sum = 0.0;
  for (auto& a : atoms) {
    for (int i = 0; i < domain.dim; ++i) a.point[i] = coord(rng);
    a.weight = weight(rng);
    sum += std::abs(a.weight);
  }
  if (sum == 0.0) atoms[0].weight = sum = 1.0;
  for (auto& a : atoms) a.weight *= tv / sum;
  return DiscreteSignedMeasure(domain, std::move(atoms));
}

DiscreteSignedMeasure perturb(const DiscreteSignedMeasure& mu, std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::vector<Atom> atoms(mu.atoms().begin(), mu.atoms().end());
  for (auto& a : atoms) {
    for (int i = 0; i < mu.domain().dim; ++i) a.point[i] += jitter(rng);
    a.weight *= 1.0 + jitter(rng);
  }
  DiscreteSignedMeasure out(mu.domain(), std::move(atoms));
  const double tv = tv_norm(out);
  return tv > radius ? scale(radius / tv, out) : out;
}

}  // namespace

AssumptionReport verify_assumptions(const ReactionSpec& spec, std::size_t samples, double radius,
                                    std::uint64_t seed, double horizon) {
  AssumptionReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Domain& dom = spec.domain;
  const double lf = spec.l_f(radius);
  const double cf = spec.c_f(radius);
  auto note = [&](std::string msg) {
    if (rep.violations.size() < 20) rep.violations.push_back(std::move(msg));
  };

  for (std::size_t n = 0; n < samples; ++n) {
    const double t = horizon * unit(rng);
    const auto mu1 = random_measure(dom, rng, radius * (0.05 + 0.95 * unit(rng)), false);
    const auto mu2 = n % 2 == 0 ? perturb(mu1, rng, radius)
                                : random_measure(dom, rng, radius * (0.05 + 0.95 * unit(rng)), false);

    const auto f1 = eval_reaction(spec, t, mu1);
    const auto f2 = eval_reaction(spec, t, mu2);
    const double dist = fm_distance(mu1, mu2);
    if (dist > 1e-12) {
      const double df = fm_distance(f1, f2);
      const double ratio = df / dist;
      rep.worst_lipschitz_ratio = std::max(rep.worst_lipschitz_ratio, lf > 0.0 ? ratio / lf : ratio);
      if (df > lf * dist * (1.0 + 1e-9) + 1e-12)
        note(fmt::format("sample {}: flat Lipschitz ratio {:.6g} exceeds l_f(R) = {:.6g}", n, ratio, lf));
    }

    const double tv = tv_norm(f1);
    rep.worst_tv_ratio = std::max(rep.worst_tv_ratio, cf > 0.0 ? tv / cf : tv);
    if (tv > cf * (1.0 + 1e-9) + 1e-12)
      note(fmt::format("sample {}: ||f(mu)||_TV = {:.6g} exceeds c_f(R) = {:.6g}", n, tv, cf));

    if (spec.c_pos && spec.rate) {
      const auto pos = random_measure(dom, rng, radius * (0.05 + 0.95 * unit(rng)), true);
      const auto g = spec.rate(t, pos);
      const double bound = spec.c_pos(radius, horizon);
      double worst = 0.0;
      for (const auto& a : pos.atoms()) worst = std::max(worst, std::abs(g(a.point)));
      rep.worst_rate_ratio = std::max(rep.worst_rate_ratio, bound > 0.0 ? worst / bound : worst);
      if (worst > bound * (1.0 + 1e-9) + 1e-12)
        note(fmt::format("sample {}: ||F(mu)||_inf = {:.6g} exceeds c_pos = {:.6g}", n, worst, bound));
    }
  }
  return rep;
}

}  // namespace mvt
