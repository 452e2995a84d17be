#pragma once

#include <complex>

#include "magdwell/geometry.hpp"
#include "magdwell/grid.hpp"

namespace magdwell {

// Arguments of a resolvent-kernel evaluation: field strength / oscillator
// frequency omega, real spectral parameter z < omega, and the displacement x.
struct KernelQuery {
  double omega = 1.0;
  double z = 0.0;
  Point2 x{1.0, 0.0};
};

// Controls for the Laplace-representation quadrature.
struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-30;
  double split_point = 1.0;  // the integral over (0,inf) is split here
};

// Closed-form Gaussian bounds on the SHO resolvent kernel, returned both in
// linear and in log form (the linear values underflow at large omega*||x||^2).
struct KernelBounds {
  double lower = 0.0;
  double upper = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
};

// Heat kernel of the 2D harmonic oscillator (frequency omega) at time t:
//   (omega/(4 pi sinh(omega t))) *
//   exp(-(omega/(4 sinh(omega t))) (cosh(omega t)(|x|^2+|y|^2) - 2 x.y)).
double mehler_heat_kernel(double omega, double t, Point2 x, Point2 y);

// Green's function K_{omega,z}(x) of the 2D SHO at spectral parameter
// z < omega, via adaptive quadrature of the Laplace representation
//   K(x) = (1/4pi) Int_0^inf exp(-(omega/4)|x|^2 coth s + (z/omega) s)/sinh s ds,
// split at s = split_point; the s->0 part is mapped by u = 1/s.  The linear
// value may underflow to 0 for large omega|x|^2; the log form never does.
double sho_resolvent_kernel(const KernelQuery& q, const QuadratureSpec& quad = {});
double sho_resolvent_kernel_log(const KernelQuery& q, const QuadratureSpec& quad = {});

// Resolvent kernel of the Landau Hamiltonian at field strength lambda:
//   G(x,y) = exp(-i (lambda/2) x^y) K_{lambda,z}(x-y),  x^y = x1 y2 - x2 y1.
cplx landau_resolvent_kernel(double lambda, double z, Point2 x, Point2 y,
                             const QuadratureSpec& quad = {});

// Certified two-sided Gaussian bounds:
//   lower = (1/(2 pi e (1-z/omega))) e^{-omega|x|^2/4} (1+omega|x|^2/2)^{-(1-z/omega)/2}
//   upper = (e^{z_+/omega}/pi) e^{-omega|x|^2/4}
//           [ 1/(omega|x|^2) + (1/(2(e-1/e))) omega/(omega-z) ],  z_+ = max(0,z).
KernelBounds kernel_bounds(const KernelQuery& q);

// Eigenfunction-series evaluation of the same kernel:
//   K = (1/2pi) e^{-u/2} Sum_k L_k(u) / (2k+1 - z/omega),  u = omega|x|^2/2,
// with a cosine^2 taper over the last half of the partial sums to damp the
// oscillatory tail.  Converges slowly: the default term count gives relative
// accuracy ~5e-7 or better for u = omega*r^2/2 in [0.15, 8] and z/omega in
// [-1.5, 0.9); outside that window (u near 16 and beyond, or deeper z) the
// tail terms cancel against an exponentially small sum and accuracy degrades.
// Used as a cross-check oracle, never in production paths.
double sho_resolvent_series(double omega, double z, double r, int max_terms = 3200000);

// Amplitude ratio Gamma = phi0(probe) / K_{omega,z}(probe) between a computed
// single-well ground state and the resolvent kernel, valid outside the well
// support where phi0 solves the free (Landau) eigenequation.  The estimate
// averages |phi0| over a ring of probes at radius |probe| to damp grid noise.
struct GammaEstimate {
  double value = 0.0;       // ring-averaged Gamma
  double rel_spread = 0.0;  // (max-min)/mean over the ring, grid-noise gauge
  double probe_radius = 0.0;
  bool interpolated = false;  // true if any probe was off-lattice (bilinear)
};
// Throws if the probe lies inside the well support (radius support_radius).
GammaEstimate gamma_constant(const GridField& phi0, double omega, double z,
                             Point2 probe, const QuadratureSpec& quad = {},
                             double support_radius = 1.0);

}  // namespace magdwell
