#include "magdwell/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "magdwell/quadrature.hpp"

namespace magdwell {

namespace {

constexpr double kPi = 3.14159265358979323846;

// coth(s) for s > 0 without overflow or cancellation.
double coth(double s) {
  if (s > 20.0) return 1.0;  // coth(20) - 1 ~ 4e-18
  if (s < 1e-4) {
    const double s2 = s * s;
    return 1.0 / s + s / 3.0 - s * s2 / 45.0;
  }
  return std::cosh(s) / std::sinh(s);
}

// log(sinh(s)) for s > 0 without overflow.
double log_sinh(double s) {
  if (s > 20.0) return s - std::log(2.0) + std::log1p(-std::exp(-2.0 * s));
  return std::log(std::sinh(s));
}

void validate_query(const KernelQuery& q) {
  if (!(q.omega > 0.0)) throw std::invalid_argument("omega must be positive");
  if (!(q.z < q.omega))
    throw std::invalid_argument(
        "spectral parameter above ground Landau/SHO level (z >= omega)");
  if (norm2(q.x) == 0.0)
    throw std::invalid_argument("kernel diverges at zero displacement");
}

}  // namespace

double mehler_heat_kernel(double omega, double t, Point2 x, Point2 y) {
  if (!(t > 0.0)) throw std::invalid_argument("heat-kernel time must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  const double wt = omega * t;
  const double ls = log_sinh(wt);
  const double ch = (wt > 20.0) ? 1.0 : std::cosh(wt) / std::sinh(wt);  // coth
  // exponent: -(omega/(4 sinh wt)) (cosh wt (|x|^2+|y|^2) - 2 x.y)
  //         = -(omega/4) [coth(wt) (|x|^2+|y|^2) - 2 x.y / sinh(wt)]
  const double quad_form =
      ch * (norm2(x) + norm2(y)) - 2.0 * dot(x, y) * std::exp(-ls);
  const double log_val =
      std::log(omega / (4.0 * kPi)) - ls - 0.25 * omega * quad_form;
  return std::exp(log_val);
}

double sho_resolvent_kernel_log(const KernelQuery& q, const QuadratureSpec& quad) {
  validate_query(q);
  const double omega = q.omega;
  const double alpha = 0.25 * omega * norm2(q.x);  // (omega/4)|x|^2
  const double zw = q.z / omega;
  const double beta = 1.0 - zw;  // tail decay rate of the s-integral
  const double split = quad.split_point;

  // Part 1: s in (0, split].  Substitute u = 1/s:
  //   integral = Int_{1/split}^{inf} exp(g1(u)) du,
  //   g1(u) = -alpha coth(1/u) + zw/u - log sinh(1/u) - 2 log u.
  // For large u the exponent behaves like -alpha*u - log u, so truncate where
  // the decaying factor is ~70 e-folds below its start.
  const auto g1 = [&](double u) {
    const double s = 1.0 / u;
    return -alpha * coth(s) + zw * s - log_sinh(s) - 2.0 * std::log(u);
  };
  const double u_lo = 1.0 / split;
  const double u_hi = u_lo + 70.0 / std::max(alpha, 1e-12) + 10.0;
  const double log_part1 = adaptive_integrate_log(g1, u_lo, u_hi, quad.rel_tol);

  // Part 2: s in [split, inf).  Exponent ~ -alpha - beta*s - (s - log 2) for
  // large s; decay rate beta.
  const auto g2 = [&](double s) {
    return -alpha * coth(s) + zw * s - log_sinh(s);
  };
  const double s_hi = split + 70.0 / beta + 10.0;
  const double log_part2 = adaptive_integrate_log(g2, split, s_hi, quad.rel_tol);

  return -std::log(4.0 * kPi) + log_add(log_part1, log_part2);
}

double sho_resolvent_kernel(const KernelQuery& q, const QuadratureSpec& quad) {
  return std::exp(sho_resolvent_kernel_log(q, quad));
}

cplx landau_resolvent_kernel(double lambda, double z, Point2 x, Point2 y,
                             const QuadratureSpec& quad) {
  KernelQuery q{lambda, z, x - y};
  const double k = sho_resolvent_kernel(q, quad);
  const double theta = -0.5 * lambda * cross(x, y);
  return std::polar(k, theta);
}

KernelBounds kernel_bounds(const KernelQuery& q) {
  validate_query(q);
  const double omega = q.omega;
  const double r2 = norm2(q.x);
  const double wr2 = omega * r2;
  const double beta = 1.0 - q.z / omega;
  const double zp = std::max(0.0, q.z);

  KernelBounds b;
  b.log_lower = -std::log(2.0 * kPi) - 1.0 - std::log(beta) - 0.25 * wr2 -
                0.5 * beta * std::log1p(0.5 * wr2);
  const double bracket =
      1.0 / wr2 + (0.5 / (std::exp(1.0) - std::exp(-1.0))) * omega / (omega - q.z);
  b.log_upper = zp / omega - std::log(kPi) - 0.25 * wr2 + std::log(bracket);
  b.lower = std::exp(b.log_lower);
  b.upper = std::exp(b.log_upper);
  return b;
}

double sho_resolvent_series(double omega, double z, double r, int max_terms) {
  if (!(omega > 0.0) || !(z < omega))
    throw std::invalid_argument("series requires omega > 0 and z < omega");
  const double u = 0.5 * omega * r * r;
  const double zw = z / omega;
  // Partial sums of (1/2pi) e^{-u/2} Sum L_k(u)/(2k+1-zw); the raw tail
  // oscillates, so average the partial sums over the last half of the range
  // with a cos^2 window (a smoothed Cesaro mean), applied in the same pass.
  const int half = max_terms / 2;
  double lkm1 = 0.0, lk = 1.0;  // L_{-1}, L_0
  double sum = 0.0, wsum = 0.0, wtot = 0.0;
  for (int k = 0; k < max_terms; ++k) {
    sum += lk / (2.0 * k + 1.0 - zw);
    if (k >= half) {
      const double t = double(k - half) / double(max_terms - half);
      const double w = std::cos(0.5 * kPi * t);
      wsum += w * w * sum;
      wtot += w * w;
    }
    const double lkp1 = ((2.0 * k + 1.0 - u) * lk - k * lkm1) / (k + 1.0);
    lkm1 = lk;
    lk = lkp1;
  }
  return std::exp(-0.5 * u) / (2.0 * kPi) * (wsum / wtot);
}

GammaEstimate gamma_constant(const GridField& phi0, double omega, double z,
                             Point2 probe, const QuadratureSpec& quad,
                             double support_radius) {
  const double r = norm(probe);
  if (r <= support_radius)
    throw std::invalid_argument("gamma_constant: probe inside well support");
  GammaEstimate est;
  est.probe_radius = r;
  const double k = sho_resolvent_kernel(KernelQuery{omega, z, {r, 0.0}}, quad);

  const int n_ring = 16;
  double lo = 0.0, hi = 0.0, mean = 0.0;
  const double h = phi0.grid.spacing;
  for (int i = 0; i < n_ring; ++i) {
    const double th = 2.0 * kPi * i / n_ring;
    const Point2 p{r * std::cos(th), r * std::sin(th)};
    // off-lattice iff either coordinate is not an integer multiple of h
    const double fx = p.x / h, fy = p.y / h;
    if (std::abs(fx - std::round(fx)) > 1e-12 ||
        std::abs(fy - std::round(fy)) > 1e-12)
      est.interpolated = true;
    const double amp = std::abs(interpolate(phi0, p));
    const double g = amp / k;
    if (i == 0) {
      lo = hi = g;
    } else {
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    mean += g;
  }
  mean /= n_ring;
  est.value = mean;
  est.rel_spread = (mean > 0.0) ? (hi - lo) / mean : 0.0;
  return est;
}

}  // namespace magdwell
