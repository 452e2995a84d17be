#pragma once

#include <functional>
#include <vector>

#include "magdwell/geometry.hpp"
#include "magdwell/params.hpp"

namespace magdwell {

enum class ProfileShape { smooth_bump };

/// Planet profile v°: radial, -depth <= v° <= 0, supported in B_{support_radius}.
struct RadialProfile {
  double depth = 1.0;
  double support_radius = 1.0;
  ProfileShape shape = ProfileShape::smooth_bump;
};

/// Sophon profile W0: radial bump of depth 1 scaled to the given radius,
/// -1 <= W0 <= 0, supp W0 ⊂ B_radius(0); mean_abs is the area-average c > 0
/// with ⨏_{B_radius} W0 = -c.
struct SophonProfile {
  double radius = 0.05;
  ProfileShape shape = ProfileShape::smooth_bump;
  double mean_abs = 0.0;
};

enum class WellKind { single_centered, left, right, double_well };

struct PotentialSpec {
  ModelParams params;
  DerivedParams derived;
  RadialProfile planet;
  SophonProfile sophon;
  WellKind kind = WellKind::single_centered;
};

/// v°(x): the standard smooth bump -depth*exp(1 - 1/(1 - r^2)) for
/// r = |x|/support_radius < 1, zero outside.
double eval_planet(const RadialProfile& prof, Point2 x);

/// W0(x) for the scaled bump (depth 1).
double eval_sophon(const SophonProfile& prof, Point2 x);

/// lambda^2 v°(x) + tau * sum_nu W0(x - zeta_nu); requires kind single_centered.
double eval_single_well(const PotentialSpec& spec, Point2 x);

/// v(x+d) + v(-x+d); requires kind double_well. The two summands are the same
/// single-well evaluations with swapped arguments, so V(-x) = V(x) bit-exactly.
double eval_double_well(const PotentialSpec& spec, Point2 x);

/// Dispatch on spec.kind: single_centered -> v(x), left -> v(x+d),
/// right -> v(-x+d), double_well -> v(x+d) + v(-x+d).
double eval_potential(const PotentialSpec& spec, Point2 x);

/// Area-average c of |W0| over its support disc, by 2D (polar) quadrature,
/// relative error <= 1e-8. Scale invariant in the radius.
double sophon_mean(const SophonProfile& prof);

/// Same average for an arbitrary radial profile w(s), s = r/radius in [0,1]
/// (test hook for non-default profiles).
double sophon_mean_of(double radius, const std::function<double(double)>& w_of_s);

/// Build a PotentialSpec with the sophon profile sized to derived.delta and
/// its mean constant computed.
PotentialSpec make_potential(const ModelParams& p, const DerivedParams& dp,
                             WellKind kind);

/// Centers and radii of all sophon support discs of this spec, in the frame
/// of spec.kind (used for sub-grid-aware sampling and interaction quadrature).
struct Disc {
  Point2 center;
  double radius;
};
std::vector<Disc> sophon_discs(const PotentialSpec& spec);

/// Planet support discs in the frame of spec.kind.
std::vector<Disc> planet_discs(const PotentialSpec& spec);

}  // namespace magdwell
