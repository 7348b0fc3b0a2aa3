#include "resdelta/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace resdelta {

double gk_integrate(const std::function<double(double)>& f, double lo, double hi,
                    double rel_tol, int max_depth) {
  if (!(lo < hi)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, max_depth,
                                                                       rel_tol);
}

double gk_integrate_with_breaks(const std::function<double(double)>& f, double lo, double hi,
                                std::vector<double> breaks, double rel_tol) {
  if (!(lo < hi)) return 0.0;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double b) { return !(b > lo && b < hi); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double acc = 0.0;
  double a = lo;
  for (double b : breaks) {
    acc += gk_integrate(f, a, b, rel_tol);
    a = b;
  }
  acc += gk_integrate(f, a, hi, rel_tol);
  return acc;
}

double punctured_line_integral(const std::function<double(double)>& g, double t, double eta,
                               double lo, double hi, double rel_tol) {
  auto f = [&](double s) { return g(s) / std::abs(s - t); };
  double acc = 0.0;
  // Each side is clipped to the window; a breakpoint a few exclusion-widths
  // out lets the adaptive rule start on the steep piece next to the puncture.
  double le = std::min(t - eta, hi), re = std::max(t + eta, lo);
  if (le > lo) {
    std::vector<double> br;
    if (t - 9 * eta > lo && t - 9 * eta < le) br.push_back(t - 9 * eta);
    acc += gk_integrate_with_breaks(f, lo, le, br, rel_tol);
  }
  if (hi > re) {
    std::vector<double> br;
    if (t + 9 * eta < hi && t + 9 * eta > re) br.push_back(t + 9 * eta);
    acc += gk_integrate_with_breaks(f, re, hi, br, rel_tol);
  }
  return acc;
}

const GaussLegendre& GaussLegendre::order(int n) {
  static std::map<int, GaussLegendre> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev-like initial guess, polished by Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.x[i] = x;
    gl.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Nodes come out descending; store ascending.
  std::reverse(gl.x.begin(), gl.x.end());
  std::reverse(gl.w.begin(), gl.w.end());
  return cache.emplace(n, std::move(gl)).first->second;
}

std::vector<std::pair<double, double>> graded_panels(double lo, double hi, double edge,
                                                     double first_width, int max_panels) {
  std::vector<std::pair<double, double>> panels;
  if (!(lo < hi)) return panels;
  double len = hi - lo;
  double w = std::min(first_width, len);
  bool from_left = std::abs(edge - lo) <= std::abs(edge - hi);
  if (from_left) {  // grade away from the left edge
    double a = lo;
    for (int k = 0; k < max_panels && a < hi; ++k) {
      double b = std::min(hi, a + w);
      panels.emplace_back(a, b);
      a = b;
      w *= 2.0;
    }
    if (a < hi) panels.emplace_back(a, hi);
  } else {  // grade away from the right edge
    double b = hi;
    for (int k = 0; k < max_panels && b > lo; ++k) {
      double a = std::max(lo, b - w);
      panels.emplace_back(a, b);
      b = a;
      w *= 2.0;
    }
    if (b > lo) panels.emplace_back(lo, b);
    std::reverse(panels.begin(), panels.end());
  }
  return panels;
}

}  // namespace resdelta
