#pragma once

#include <functional>
#include <vector>

namespace resdelta {

// Adaptive Gauss-Kronrod on [lo, hi].  max_depth bounds the bisection
// recursion; raise it for integrands with interior integrable singularities
// (fold-type 1/sqrt spikes need the containing panel driven very small).
double gk_integrate(const std::function<double(double)>& f, double lo, double hi,
                    double rel_tol = 1e-10, int max_depth = 15);

// Same, but the interval is first split at the given interior breakpoints
// (sorted, clipped to (lo, hi)); useful when the integrand has kinks or
// window edges at known locations.
double gk_integrate_with_breaks(const std::function<double(double)>& f, double lo, double hi,
                                std::vector<double> breaks, double rel_tol = 1e-10);

// Integral of g(s)/|s - t| over [lo, hi] minus the exclusion window
// (t - eta, t + eta).  g is expected smooth (a test-function factor).
double punctured_line_integral(const std::function<double(double)>& g, double t, double eta,
                               double lo, double hi, double rel_tol = 1e-10);

// Gauss-Legendre nodes and weights on [-1, 1], computed once per order by
// Newton iteration on the Legendre recurrence and cached.
struct GaussLegendre {
  std::vector<double> x, w;
  static const GaussLegendre& order(int n);
};

// Panels of [lo, hi] graded geometrically away from the edge point `edge`
// (must equal lo or hi): widths start at `first_width` and double until the
// interval is exhausted.  Used to resolve integrands that grow like 1/d
// toward an excluded window edge.
std::vector<std::pair<double, double>> graded_panels(double lo, double hi, double edge,
                                                     double first_width, int max_panels = 40);

}  // namespace resdelta
