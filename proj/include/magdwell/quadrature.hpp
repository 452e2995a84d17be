#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace magdwell {

/// Nodes/weights of an n-point Gauss-Legendre rule on [-1,1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Deterministic Newton construction; cached per n.
const GaussRule& gauss_legendre(int n);

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over [a,b].
/// Subdivides until the local error estimate meets
/// rel_tol*|integral| + abs_tol, spread over subintervals.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 0.0,
                          int max_depth = 48);

/// Adaptive G7,K15 integration of exp(g) over [a,b], carried in log-space:
/// returns log(integral). Intended for integrands spanning many hundreds of
/// e-folds where exp(g) under/overflows. The integrand must be positive
/// (g real-valued); rel_tol applies to the linear-scale integral.
double adaptive_integrate_log(const std::function<double(double)>& g, double a, double b,
                              double rel_tol = 1e-9, int max_depth = 48);

/// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

}  // namespace magdwell
