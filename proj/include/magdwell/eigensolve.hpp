#pragma once

// Low-lying spectrum of the magnetic well operators.
//
// The workhorse is a block iteration that expands the search space with
// Chebyshev-filtered copies of the unconverged Ritz vectors (a
// Chebyshev-Davidson scheme with a momentum block).  It only touches the
// operator through matvecs, so it scales to production grids, and the
// polynomial filter handles the highly degenerate lowest-level clusters of
// the free magnetic operator where diagonal preconditioning is useless.  A
// dense cross-check path assembles the full matrix on tiny grids and
// diagonalizes it directly.
//
// Parity sectors: when the operator commutes with the inversion x -> -x the
// solver can confine the whole iteration to the even or odd subspace.  The
// projector (f(x) +/- f(-x))/2 is applied to every candidate block, which in
// combination with the bitwise parity symmetry of the operator keeps iterates
// exactly in-sector.

#include <cstdint>
#include <vector>

#include "magdwell/grid.hpp"
#include "magdwell/operator.hpp"

namespace magdwell {

enum class ParitySector { none, even, odd };

struct EigensolveOptions {
  int k = 4;              // eigenpairs requested
  // Accept a pair when ||H x - theta x|| <= tol * max(1, |theta|).  The
  // achievable residual floor is roughly 1e-12 times the spectrum top
  // (filter noise), so pick tol such that the bar clears that floor.
  double tol = 1e-10;
  int max_iter = 600;     // outer iteration cap
  int guard = 2;          // extra block vectors carried beyond k
  int filter_degree = 20; // Chebyshev filter degree per outer step
  std::uint64_t seed = 0x6d61676477656cULL;  // deterministic start block
  ParitySector sector = ParitySector::none;
  // Optional initial guesses (checked against the operator grid, projected to
  // the requested sector, padded with seeded random vectors).
  std::vector<GridField> warm_start;
};

struct EigensolveResult {
  std::vector<double> values;      // ascending Rayleigh quotients
  std::vector<GridField> vectors;  // unit norm in the weighted grid norm
  std::vector<double> residuals;   // plain-l2 residuals of unit-l2 vectors
  int iterations = 0;
  bool converged = false;
};

// Iterative solve for the lowest eigenpairs.  Deterministic: the same
// operator, options, and warm start reproduce the result bit for bit.
EigensolveResult lowest_eigenpairs(const MagneticOperator& op,
                                   const EigensolveOptions& opt = {});

// Dense eigensolve from explicitly assembled matrix entries; grids up to
// 40 x 40 only.  Used as an independent reference for the iterative path.
EigensolveResult dense_reference(const MagneticOperator& op, int k);

}  // namespace magdwell
