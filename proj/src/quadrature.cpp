#include "magdwell/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace magdwell {

namespace {

// QUADPACK qk15 constants: 15-point Kronrod extension of 7-point Gauss,
// positive abscissae only (rule is symmetric).
constexpr double kXK[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
// 7-point Gauss weights, aligned with the odd Kronrod abscissae (indices 1,3,5,7).
constexpr double kWG[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

struct PanelResult {
  double k15 = 0.0;   // Kronrod estimate
  double err = 0.0;   // |K15 - G7|
};

PanelResult eval_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fk[15];
  int m = 0;
  for (int i = 0; i < 8; ++i) {
    if (i < 7) {
      fk[m++] = f(c - h * kXK[i]);
      fk[m++] = f(c + h * kXK[i]);
    } else {
      fk[m++] = f(c);
    }
  }
  double k15 = 0.0, g7 = 0.0;
  m = 0;
  for (int i = 0; i < 8; ++i) {
    if (i < 7) {
      const double s = fk[m] + fk[m + 1];
      m += 2;
      k15 += kWK[i] * s;
      if (i % 2 == 1) g7 += kWG[i / 2] * s;
    } else {
      k15 += kWK[i] * fk[m];
      g7 += kWG[3] * fk[m];
      ++m;
    }
  }
  PanelResult r;
  r.k15 = h * k15;
  r.err = std::abs(h * (k15 - g7));
  return r;
}

// One subinterval in the worst-first refinement queue.  `value`/`error` hold
// the Kronrod estimate and |K15-G7| either directly (linear-space driver) or
// as logarithms (log-space driver).
struct Panel {
  double a = 0.0, b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

bool less_error(const Panel& x, const Panel& y) { return x.error < y.error; }

// Hard cap on queue size; generous for analytic integrands (QUADPACK-style
// global refinement typically needs tens of panels) while bounding the cost
// of adversarial integrands.
constexpr std::size_t kPanelCap = 4000;

// Log-space panel: returns (log K15, log err-magnitude).
struct LogPanel {
  double log_k15;
  double log_err;
};

LogPanel eval_panel_log(const std::function<double(double)>& g, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double gv[15];
  int m = 0;
  for (int i = 0; i < 8; ++i) {
    if (i < 7) {
      gv[m++] = g(c - h * kXK[i]);
      gv[m++] = g(c + h * kXK[i]);
    } else {
      gv[m++] = g(c);
    }
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : gv) peak = std::max(peak, v);
  if (!std::isfinite(peak)) {  // integrand vanished identically on this panel
    return {-std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  }
  double k15 = 0.0, g7 = 0.0;
  m = 0;
  for (int i = 0; i < 8; ++i) {
    if (i < 7) {
      const double s = std::exp(gv[m] - peak) + std::exp(gv[m + 1] - peak);
      m += 2;
      k15 += kWK[i] * s;
      if (i % 2 == 1) g7 += kWG[i / 2] * s;
    } else {
      const double s = std::exp(gv[m] - peak);
      k15 += kWK[i] * s;
      g7 += kWG[3] * s;
      ++m;
    }
  }
  LogPanel out;
  out.log_k15 = peak + std::log(h * k15);
  const double diff = std::abs(h * (k15 - g7));
  out.log_err = diff > 0.0 ? peak + std::log(diff)
                           : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 256) throw std::invalid_argument("gauss_legendre: n out of range");
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // enforce exact symmetry of the rule
  for (int i = 0; i < n / 2; ++i) {
    const double xm = 0.5 * (r.nodes[i] - r.nodes[n - 1 - i]);
    r.nodes[i] = xm;
    r.nodes[n - 1 - i] = -xm;
    const double wm = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.weights[i] = wm;
    r.weights[n - 1 - i] = wm;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  auto [pos, ok] = cache.emplace(n, std::move(r));
  (void)ok;
  return pos->second;
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol, int max_depth) {
  if (!(a < b)) return 0.0;
  std::vector<Panel> heap;
  heap.reserve(64);
  auto push = [&](double lo, double hi) {
    PanelResult r = eval_panel(f, lo, hi);
    heap.push_back(Panel{lo, hi, r.k15, r.err});
    std::push_heap(heap.begin(), heap.end(), less_error);
  };
  push(a, b);
  const double min_width = (b - a) * std::ldexp(1.0, -max_depth);
  const double eps_floor = 16.0 * std::numeric_limits<double>::epsilon();
  for (;;) {
    double val = 0.0, err = 0.0;
    for (const Panel& p : heap) {
      val += p.value;
      err += p.error;
    }
    // Global budget: stop once the summed error estimate meets the requested
    // tolerance relative to the current total (or the rounding floor).
    const double tol = std::max({abs_tol, rel_tol * std::abs(val), eps_floor * std::abs(val)});
    if (err <= tol) break;
    if (heap.size() >= kPanelCap) break;
    if (heap.front().b - heap.front().a <= min_width) break;
    std::pop_heap(heap.begin(), heap.end(), less_error);
    const Panel w = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (w.a + w.b);
    push(w.a, mid);
    push(mid, w.b);
  }
  double val = 0.0;
  for (const Panel& p : heap) val += p.value;
  return val;
}

double adaptive_integrate_log(const std::function<double(double)>& g, double a, double b,
                              double rel_tol, int max_depth) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (!(a < b)) return neg_inf;
  std::vector<Panel> heap;
  heap.reserve(64);
  auto push = [&](double lo, double hi) {
    LogPanel r = eval_panel_log(g, lo, hi);
    heap.push_back(Panel{lo, hi, r.log_k15, r.log_err});
    std::push_heap(heap.begin(), heap.end(), less_error);
  };
  push(a, b);
  const double min_width = (b - a) * std::ldexp(1.0, -max_depth);
  const double log_rel = std::max(std::log(rel_tol),
                                  std::log(16.0 * std::numeric_limits<double>::epsilon()));
  for (;;) {
    double val = neg_inf, err = neg_inf;
    for (const Panel& p : heap) {
      val = log_add(val, p.value);
      err = log_add(err, p.error);
    }
    // Global budget in log space; -inf totals (identically zero integrand)
    // satisfy it immediately.
    if (err <= log_rel + val) break;
    if (heap.size() >= kPanelCap) break;
    if (heap.front().b - heap.front().a <= min_width) break;
    std::pop_heap(heap.begin(), heap.end(), less_error);
    const Panel w = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (w.a + w.b);
    push(w.a, mid);
    push(mid, w.b);
  }
  double val = neg_inf;
  for (const Panel& p : heap) val = log_add(val, p.value);
  return val;
}

}  // namespace magdwell
