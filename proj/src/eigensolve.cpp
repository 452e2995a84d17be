#include "magdwell/eigensolve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace magdwell {

namespace {

using Eigen::Index;
using Matrix = Eigen::MatrixXcd;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t& state) {
  return 2.0 * (static_cast<double>(splitmix64(state) >> 11) * 0x1p-53) - 1.0;
}

void fill_random(Matrix& block, Index col, std::uint64_t& state) {
  for (Index i = 0; i < block.rows(); ++i)
    block(i, col) = cplx(unit_double(state), unit_double(state));
}

// Inversion through the grid center reverses the flattened array; the
// pairwise form keeps projected columns bitwise (anti)symmetric.
void project_sector(Matrix& block, ParitySector sector) {
  if (sector == ParitySector::none) return;
  const Index n = block.rows();
  for (Index c = 0; c < block.cols(); ++c) {
    auto col = block.col(c);
    for (Index i = 0; 2 * i < n - 1; ++i) {
      const cplx a = col(i), b = col(n - 1 - i);
      if (sector == ParitySector::even) {
        col(i) = 0.5 * (a + b);
        col(n - 1 - i) = 0.5 * (b + a);
      } else {
        col(i) = 0.5 * (a - b);
        col(n - 1 - i) = 0.5 * (b - a);
      }
    }
    if (n % 2 == 1 && sector == ParitySector::odd) col((n - 1) / 2) = 0.0;
  }
}

// Orthonormalize V against the listed orthonormal bases, dropping directions
// that collapse.  Two projection passes, then a rank-revealing QR.
Matrix ortho_against(const std::vector<const Matrix*>& bases, Matrix v) {
  if (v.cols() == 0) return v;
  for (int pass = 0; pass < 2; ++pass)
    for (const Matrix* b : bases)
      if (b->cols() > 0) v -= (*b) * (b->adjoint() * v);
  Eigen::ColPivHouseholderQR<Matrix> qr(v);
  qr.setThreshold(1e-8);
  const Index rank = qr.rank();
  return qr.householderQ() * Matrix::Identity(v.rows(), rank);
}

void apply_columns(const MagneticOperator& op, const Matrix& in, Matrix& out) {
  out.resize(in.rows(), in.cols());
  for (Index c = 0; c < in.cols(); ++c)
    op.apply_raw(in.col(c).data(), out.col(c).data());
}

// Scaled Chebyshev filter on [a, b], normalized near theta0 < a: damps the
// spectrum above a while amplifying the wanted low end.  The three-term
// recurrence with running sigma factors keeps intermediate blocks bounded.
Matrix chebyshev_filter(const MagneticOperator& op, Matrix block, int degree,
                        double a, double b, double theta0) {
  const double e = 0.5 * (b - a);
  const double c0 = 0.5 * (b + a);
  if (!(e > 0.0) || degree < 1) return block;
  double denom = c0 - theta0;
  if (denom <= 0.0) denom = e;
  const double sigma1 = e / denom;
  double sigma = sigma1;

  Matrix prev = block;
  Matrix cur;
  apply_columns(op, block, cur);
  cur = (sigma1 / e) * (cur - c0 * block);
  Matrix tmp;
  for (int j = 2; j <= degree; ++j) {
    const double sigma_new = 1.0 / (2.0 / sigma1 - sigma);
    apply_columns(op, cur, tmp);
    Matrix next =
        (2.0 * sigma_new / e) * (tmp - c0 * cur) - (sigma * sigma_new) * prev;
    prev = std::move(cur);
    cur = std::move(next);
    sigma = sigma_new;
  }
  return cur;
}

EigensolveResult package(const MagneticOperator& op, const Matrix& x,
                         const Eigen::VectorXd& theta, int k, int iterations,
                         bool converged) {
  EigensolveResult res;
  res.iterations = iterations;
  res.converged = converged;
  Matrix hx;
  apply_columns(op, x, hx);
  for (int j = 0; j < k; ++j) {
    res.values.push_back(theta(j));
    res.residuals.push_back((hx.col(j) - theta(j) * x.col(j)).norm());
    GridField f(op.grid);
    for (Index i = 0; i < x.rows(); ++i) f.values[i] = x(i, j);
    const double nrm = norm(f);
    for (auto& v : f.values) v /= nrm;
    res.vectors.push_back(std::move(f));
  }
  return res;
}

}  // namespace

EigensolveResult lowest_eigenpairs(const MagneticOperator& op,
                                   const EigensolveOptions& opt) {
  const Index n = static_cast<Index>(op.grid.size());
  if (opt.k < 1 || static_cast<Index>(opt.k) > n)
    throw std::invalid_argument("eigensolve: k out of range for this grid");
  if (opt.sector != ParitySector::none && !op.parity_symmetric)
    throw std::invalid_argument(
        "eigensolve: sector solve requires an inversion-symmetric operator");
  const Index m =
      std::min<Index>(n, static_cast<Index>(opt.k + std::max(0, opt.guard)));

  // --- starting block: warm starts first, seeded random fill ---------------
  std::uint64_t rng = opt.seed;
  Matrix x(n, m);
  Index filled = 0;
  for (const GridField& w : opt.warm_start) {
    if (filled >= m) break;
    if (!w.grid.same_as(op.grid))
      throw std::invalid_argument("eigensolve: warm start grid mismatch");
    for (Index i = 0; i < n; ++i) x(i, filled) = w.values[i];
    ++filled;
  }
  for (; filled < m; ++filled) fill_random(x, filled, rng);
  project_sector(x, opt.sector);
  x = ortho_against({}, x);
  for (int attempt = 0; x.cols() < m; ++attempt) {
    // Degenerate start (e.g. warm starts outside the sector): top up once
    // with fresh random columns, then give up.
    if (attempt >= 2)
      throw std::runtime_error(
          "eigensolve: could not build a full-rank starting block");
    Matrix extra(n, m - x.cols());
    for (Index c = 0; c < extra.cols(); ++c) fill_random(extra, c, rng);
    project_sector(extra, opt.sector);
    const Matrix* base = &x;
    Matrix add = ortho_against({base}, extra);
    Matrix joined(n, x.cols() + add.cols());
    joined.leftCols(x.cols()) = x;
    if (add.cols() > 0) joined.rightCols(add.cols()) = add;
    x = joined;
  }

  Matrix p(n, 0);  // previous search directions
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m);
  const double spectrum_top = op.scale_estimate();  // Gershgorin upper bound
  int iter = 0;
  bool converged = false;
  // Stagnation guard: quasi-degenerate clusters (e.g. the lowest level of the
  // free magnetic operator) pin the residual at the intra-cluster spread even
  // though the Ritz values are fully converged.  Stop once the worst leading
  // residual has not improved materially for a stretch of outer steps.
  double best_worst = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (; iter < opt.max_iter; ++iter) {
    // Rayleigh-Ritz on the current block.
    {
      Eigen::HouseholderQR<Matrix> qr(x);
      x = qr.householderQ() * Matrix::Identity(n, m);
    }
    Matrix hx;
    apply_columns(op, x, hx);
    Matrix t = x.adjoint() * hx;
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(t);
    x = (x * small.eigenvectors()).eval();
    hx = (hx * small.eigenvectors()).eval();
    theta = small.eigenvalues();

    // Residuals and converged prefix.
    Matrix r = hx - x * theta.asDiagonal();
    Index locked = 0;
    while (locked < m &&
           r.col(locked).norm() <=
               opt.tol * std::max(1.0, std::abs(theta(locked))))
      ++locked;
    if (locked >= opt.k) {
      converged = true;
      break;
    }
    double worst = 0.0;
    for (Index j = 0; j < static_cast<Index>(opt.k); ++j)
      worst = std::max(worst, r.col(j).norm() /
                                  std::max(1.0, std::abs(theta(j))));
    if (worst < 0.7 * best_worst) {
      best_worst = worst;
      since_best = 0;
    } else if (++since_best >= 12) {
      break;
    }

    // Expansion directions: Chebyshev-filtered unconverged Ritz vectors.
    // The filter damps [block-top, spectrum-top]; if that window collapses
    // (block already spans the spectrum) fall back to raw residuals.
    const double cut = theta(m - 1);
    Matrix w;
    if (spectrum_top - cut > 1e-10 * std::max(1.0, spectrum_top)) {
      w = chebyshev_filter(op, x.rightCols(m - locked), opt.filter_degree,
                           cut, spectrum_top, theta(0));
    } else {
      w = r.rightCols(m - locked);
    }
    project_sector(w, opt.sector);
    // Equalize column scales so the rank-revealing QR drops only directions
    // that genuinely collapse, not merely small residuals.
    for (Index c = 0; c < w.cols(); ++c) {
      const double nc = w.col(c).norm();
      if (nc > 0.0) w.col(c) /= nc;
    }
    for (Index c = 0; c < p.cols(); ++c) {
      const double nc = p.col(c).norm();
      if (nc > 0.0) p.col(c) /= nc;
    }

    const Matrix* bx = &x;
    w = ortho_against({bx}, w);
    const Matrix* bw = &w;
    p = ortho_against({bx, bw}, p);

    // Expanded Rayleigh-Ritz over [x w p].
    Matrix s(n, x.cols() + w.cols() + p.cols());
    s.leftCols(x.cols()) = x;
    if (w.cols() > 0) s.middleCols(x.cols(), w.cols()) = w;
    if (p.cols() > 0) s.rightCols(p.cols()) = p;
    Matrix hs;
    apply_columns(op, s, hs);
    Matrix ts = s.adjoint() * hs;
    ts = 0.5 * (ts + ts.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> big(ts);
    const Matrix y = big.eigenvectors().leftCols(m);
    const Index tail = w.cols() + p.cols();
    p = s.rightCols(tail) * y.bottomRows(tail);
    x = s * y;
    project_sector(x, opt.sector);
    project_sector(p, opt.sector);
  }

  if (!converged) {
    // Align the reported values with the final block.
    Eigen::HouseholderQR<Matrix> qr(x);
    x = qr.householderQ() * Matrix::Identity(n, m);
    Matrix hx;
    apply_columns(op, x, hx);
    Matrix t = x.adjoint() * hx;
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> small(t);
    x = (x * small.eigenvectors()).eval();
    theta = small.eigenvalues();
  }

  return package(op, x.leftCols(opt.k), theta.head(opt.k), opt.k, iter,
                 converged);
}

EigensolveResult dense_reference(const MagneticOperator& op, int k) {
  if (op.grid.n > 40)
    throw std::invalid_argument("dense_reference: grid larger than 40 x 40");
  const Index n = static_cast<Index>(op.grid.size());
  if (k < 1 || static_cast<Index>(k) > n)
    throw std::invalid_argument("dense_reference: k out of range");
  Matrix h(n, n);
  std::vector<cplx> basis(n), image(n);
  for (Index c = 0; c < n; ++c) {
    std::fill(basis.begin(), basis.end(), cplx(0.0));
    basis[c] = 1.0;
    op.apply_raw(basis.data(), image.data());
    for (Index r = 0; r < n; ++r) h(r, c) = image[r];
  }
  const Matrix herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  return package(op, es.eigenvectors().leftCols(k), es.eigenvalues().head(k),
                 k, 0, true);
}

}  // namespace magdwell
