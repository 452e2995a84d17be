#include "magdwell/potential.hpp"

#include <cmath>
#include <stdexcept>

#include "magdwell/quadrature.hpp"

namespace magdwell {

namespace {

// Unit bump w(s) = -exp(1 - 1/(1-s^2)) on s<1, 0 outside; w(0) = -1.
inline double unit_bump(double s) {
  const double s2 = s * s;
  if (s2 >= 1.0) return 0.0;
  return -std::exp(1.0 - 1.0 / (1.0 - s2));
}

}  // namespace

double eval_planet(const RadialProfile& prof, Point2 x) {
  return prof.depth * unit_bump(norm(x) / prof.support_radius);
}

double eval_sophon(const SophonProfile& prof, Point2 x) {
  return unit_bump(norm(x) / prof.radius);
}

double eval_single_well(const PotentialSpec& spec, Point2 x) {
  const double l2 = spec.params.lambda * spec.params.lambda;
  double v = l2 * eval_planet(spec.planet, x);
  for (auto z : spec.derived.centers)
    v += spec.derived.tau * eval_sophon(spec.sophon, x - z);
  return v;
}

double eval_double_well(const PotentialSpec& spec, Point2 x) {
  const Point2 d = spec.derived.d();
  return eval_single_well(spec, x + d) + eval_single_well(spec, -x + d);
}

double eval_potential(const PotentialSpec& spec, Point2 x) {
  const Point2 d = spec.derived.d();
  switch (spec.kind) {
    case WellKind::single_centered:
      return eval_single_well(spec, x);
    case WellKind::left:
      return eval_single_well(spec, x + d);
    case WellKind::right:
      return eval_single_well(spec, -x + d);
    case WellKind::double_well:
      return eval_double_well(spec, x);
  }
  throw std::logic_error("eval_potential: bad kind");
}

double sophon_mean_of(double radius, const std::function<double(double)>& w_of_s) {
  // c = (1/(pi R^2)) ∫_{B_R} |w|, in polar coordinates. The angular integral
  // is exact for a radial profile; the radial factor 2 ∫_0^1 s |w(s)| ds is
  // scale invariant in R and evaluated adaptively.
  (void)radius;
  return 2.0 * adaptive_integrate(
                   [&](double s) { return s * std::abs(w_of_s(s)); }, 0.0, 1.0,
                   1e-11, 0.0);
}

double sophon_mean(const SophonProfile& prof) {
  return sophon_mean_of(prof.radius, [](double s) { return unit_bump(s); });
}

PotentialSpec make_potential(const ModelParams& p, const DerivedParams& dp,
                             WellKind kind) {
  PotentialSpec spec;
  spec.params = p;
  spec.derived = dp;
  spec.planet = RadialProfile{1.0, p.r0, ProfileShape::smooth_bump};
  spec.sophon.radius = dp.delta;
  spec.sophon.shape = ProfileShape::smooth_bump;
  spec.sophon.mean_abs = sophon_mean(spec.sophon);
  spec.kind = kind;
  return spec;
}

std::vector<Disc> sophon_discs(const PotentialSpec& spec) {
  std::vector<Disc> out;
  const double r = spec.sophon.radius;
  const Point2 d = spec.derived.d();
  switch (spec.kind) {
    case WellKind::single_centered:
      for (auto z : spec.derived.centers) out.push_back({z, r});
      break;
    case WellKind::left:
      for (auto z : spec.derived.centers) out.push_back({z - d, r});
      break;
    case WellKind::right:
      for (auto z : spec.derived.centers) out.push_back({-(z - d), r});
      break;
    case WellKind::double_well:
      for (auto z : spec.derived.centers) out.push_back({z - d, r});
      for (auto z : spec.derived.centers) out.push_back({-(z - d), r});
      break;
  }
  return out;
}

std::vector<Disc> planet_discs(const PotentialSpec& spec) {
  const double r = spec.planet.support_radius;
  const Point2 d = spec.derived.d();
  switch (spec.kind) {
    case WellKind::single_centered:
      return {{Point2{0, 0}, r}};
    case WellKind::left:
      return {{-d, r}};
    case WellKind::right:
      return {{d, r}};
    case WellKind::double_well:
      return {{-d, r}, {d, r}};
  }
  return {};
}

}  // namespace magdwell
