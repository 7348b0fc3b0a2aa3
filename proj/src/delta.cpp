#include "resdelta/delta.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "resdelta/errors.hpp"
#include "resdelta/quadrature.hpp"
#include "resdelta/rng.hpp"

namespace resdelta {

double AffineFunction::operator()(const std::vector<double>& y) const {
  double v = offset;
  for (int i = 0; i < dim(); ++i) v += gradient[i] * y[i];
  return v;
}

double AffineFunction::gradient_norm() const {
  double s = 0.0;
  for (double g : gradient) s += g * g;
  return std::sqrt(s);
}

AffineFactorization validate_factorization(std::vector<AffineFunction> factors) {
  if (factors.empty()) throw ConfigError("factorization: empty factor list");
  int n = factors.front().dim();
  for (const auto& f : factors) {
    if (f.dim() != n) throw ConfigError("factorization: mixed dimensions");
    if (f.gradient_norm() == 0.0) throw ZeroGradient("factorization: zero gradient");
  }
  // Pairwise non-proportionality of the augmented vectors (gradient, offset),
  // via 2x2 minors scaled by the vector norms.
  for (std::size_t i = 0; i < factors.size(); ++i) {
    for (std::size_t j = i + 1; j < factors.size(); ++j) {
      std::vector<double> ai = factors[i].gradient, aj = factors[j].gradient;
      ai.push_back(factors[i].offset);
      aj.push_back(factors[j].offset);
      double ni = 0, nj = 0;
      for (double x : ai) ni += x * x;
      for (double x : aj) nj += x * x;
      double scale = std::sqrt(ni * nj);
      double worst = 0.0;
      for (int p = 0; p <= n; ++p)
        for (int q = p + 1; q <= n; ++q)
          worst = std::max(worst, std::abs(ai[p] * aj[q] - ai[q] * aj[p]));
      if (worst <= 1e-12 * scale)
        throw ProportionalFactors(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return AffineFactorization{std::move(factors)};
}

HyperplaneChart HyperplaneChart::build(const AffineFunction& f, int factor_index,
                                       const std::vector<int>& axis_preference) {
  int n = f.dim();
  double gn = f.gradient_norm();
  if (gn == 0.0) throw ZeroGradient("chart: zero gradient");

  HyperplaneChart chart;
  chart.factor_index = factor_index;
  chart.density = 1.0 / gn;
  chart.base_point.resize(n);
  for (int i = 0; i < n; ++i) chart.base_point[i] = -f.offset * f.gradient[i] / (gn * gn);

  std::vector<int> order = axis_preference;
  if (order.empty()) {
    order.resize(n);
    for (int i = 0; i < n; ++i) order[i] = i;
  }
  std::vector<double> normal(n);
  for (int i = 0; i < n; ++i) normal[i] = f.gradient[i] / gn;

  // Gram-Schmidt against the normal and previously accepted vectors.
  for (int idx : order) {
    if (static_cast<int>(chart.basis.size()) == n - 1) break;
    std::vector<double> v(n, 0.0);
    v[idx] = 1.0;
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += v[i] * normal[i];
    for (int i = 0; i < n; ++i) v[i] -= d * normal[i];
    for (const auto& b : chart.basis) {
      double e = 0.0;
      for (int i = 0; i < n; ++i) e += v[i] * b[i];
      for (int i = 0; i < n; ++i) v[i] -= e * b[i];
    }
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    if (nv < 1e-8) continue;
    for (double& x : v) x /= nv;
    chart.basis.push_back(std::move(v));
  }
  return chart;
}

std::vector<double> HyperplaneChart::point(const std::vector<double>& s) const {
  std::vector<double> y = base_point;
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s[k] * basis[k][i];
  return y;
}

namespace {

constexpr double kTailSigmas = 10.0;

// Windows of the chart coordinates outside which phi is negligible: the
// projection of phi's center onto the chart, padded by the tail radius.
struct ChartWindows {
  std::vector<double> s_center;
  double radius = 0.0;
};

ChartWindows chart_windows(const HyperplaneChart& chart, const TestFunction& phi) {
  ChartWindows w;
  int n = static_cast<int>(chart.base_point.size());
  w.s_center.resize(chart.basis.size());
  for (std::size_t k = 0; k < chart.basis.size(); ++k) {
    double d = 0.0;
    for (int i = 0; i < n; ++i) d += (phi.center[i] - chart.base_point[i]) * chart.basis[k][i];
    w.s_center[k] = d;
  }
  if (phi.kind == TestFunctionKind::Gaussian)
    w.radius = kTailSigmas * phi.width;
  else
    w.radius = std::sqrt(static_cast<double>(n)) * phi.width;
  return w;
}

// Distance from phi's center to the hyperplane, along the unit normal.
double signed_center_distance(const AffineFunction& f, const TestFunction& phi) {
  return f(phi.center) / f.gradient_norm();
}

double gaussian_closed_form(const AffineFunction& f, const TestFunction& phi) {
  double d = signed_center_distance(f, phi);
  double s = phi.width;
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return (1.0 / f.gradient_norm()) * inv_sqrt_2pi / s * std::exp(-0.5 * d * d / (s * s));
}

// Value of an affine function restricted to a line y(t) = y0 + t*dir:
// c0 + c1 t.
struct LineForm {
  double c0 = 0.0, c1 = 0.0;
};

LineForm restrict_to_line(const AffineFunction& f, const std::vector<double>& y0,
                          const std::vector<double>& dir) {
  LineForm lf;
  lf.c0 = f(y0);
  lf.c1 = 0.0;
  for (int i = 0; i < f.dim(); ++i) lf.c1 += f.gradient[i] * dir[i];
  return lf;
}

struct Interval {
  double lo, hi;
};

// Segments of [lo, hi] remaining after removing each form's eta-exclusion
// window, plus helper breakpoints near the removed edges.
struct SegmentedDomain {
  std::vector<Interval> segments;
  std::vector<double> breaks;
  bool fully_excluded = false;
};

SegmentedDomain remove_exclusions(double lo, double hi, const std::vector<LineForm>& forms,
                                  double eta) {
  SegmentedDomain dom;
  std::vector<Interval> excluded;
  for (const auto& f : forms) {
    if (std::abs(f.c1) < 1e-14) {
      if (std::abs(f.c0) < eta) {
        dom.fully_excluded = true;  // factor below eta along the whole line
        return dom;
      }
      continue;
    }
    double t0 = (-eta - f.c0) / f.c1;
    double t1 = (eta - f.c0) / f.c1;
    if (t0 > t1) std::swap(t0, t1);
    if (t1 <= lo || t0 >= hi) continue;
    excluded.push_back({std::max(t0, lo), std::min(t1, hi)});
    double zero = -f.c0 / f.c1;
    double w = eta / std::abs(f.c1);
    dom.breaks.push_back(zero - 8 * w);
    dom.breaks.push_back(zero + 8 * w);
  }
  std::sort(excluded.begin(), excluded.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double cur = lo;
  for (const auto& ex : excluded) {
    if (ex.lo > cur) dom.segments.push_back({cur, ex.lo});
    cur = std::max(cur, ex.hi);
  }
  if (cur < hi) dom.segments.push_back({cur, hi});
  return dom;
}

// Integral over one chart of phi * prod(1/|w|) with the eta-window removed.
// Handles ambient dimensions 1..3 by nesting line integrals.
class ChartIntegrator {
 public:
  ChartIntegrator(const HyperplaneChart& chart, std::vector<AffineFunction> weights,
                  const TestFunction& phi, double eta, double rel_tol)
      : chart_(chart), weights_(std::move(weights)), phi_(phi), eta_(eta), rel_tol_(rel_tol) {}

  double run() const {
    int d = static_cast<int>(chart_.basis.size());
    ChartWindows w = chart_windows(chart_, phi_);
    if (d == 0) {
      double val = phi_.value(chart_.base_point);
      if (val == 0.0) return 0.0;
      for (const auto& f : weights_) {
        double fv = f(chart_.base_point);
        if (std::abs(fv) < eta_) return 0.0;
        val /= std::abs(fv);
      }
      return val * chart_.density;
    }
    if (d == 1) {
      return line_integral(chart_.base_point, chart_.basis[0], w.s_center[0] - w.radius,
                           w.s_center[0] + w.radius) *
             chart_.density;
    }
    if (d == 2) {
      auto outer = [&](double s1) {
        std::vector<double> y0 = chart_.base_point;
        for (std::size_t i = 0; i < y0.size(); ++i) y0[i] += s1 * chart_.basis[0][i];
        return line_integral(y0, chart_.basis[1], w.s_center[1] - w.radius,
                             w.s_center[1] + w.radius);
      };
      return gk_integrate(outer, w.s_center[0] - w.radius, w.s_center[0] + w.radius,
                          rel_tol_) *
             chart_.density;
    }
    throw ConfigError("quadrature supports ambient dimension <= 3");
  }

 private:
  double line_integral(const std::vector<double>& y0, const std::vector<double>& dir, double lo,
                       double hi) const {
    std::vector<LineForm> forms;
    forms.reserve(weights_.size());
    for (const auto& f : weights_) forms.push_back(restrict_to_line(f, y0, dir));
    SegmentedDomain dom = remove_exclusions(lo, hi, forms, eta_);
    if (dom.fully_excluded) return 0.0;
    auto integrand = [&, this](double t) {
      std::vector<double> yt = y0;
      for (std::size_t i = 0; i < yt.size(); ++i) yt[i] += t * dir[i];
      double val = phi_.value(yt);
      if (val == 0.0) return 0.0;
      for (const auto& lf : forms) {
        double fv = lf.c0 + lf.c1 * t;
        val /= std::abs(fv);
      }
      return val;
    };
    double acc = 0.0;
    for (const auto& seg : dom.segments)
      acc += gk_integrate_with_breaks(integrand, seg.lo, seg.hi, dom.breaks, rel_tol_);
    return acc;
  }

  const HyperplaneChart& chart_;
  std::vector<AffineFunction> weights_;
  const TestFunction& phi_;
  double eta_;
  double rel_tol_;
};

double chart_monte_carlo(const HyperplaneChart& chart, const std::vector<AffineFunction>& weights,
                         const TestFunction& phi, double eta, long samples, std::uint64_t seed) {
  ChartWindows w = chart_windows(chart, phi);
  int d = static_cast<int>(chart.basis.size());
  if (d == 0) {
    ChartIntegrator ci(chart, weights, phi, eta, 1e-9);
    return ci.run();
  }
  KahanSum acc;
  long chunk = 1 << 14;
  long done = 0;
  std::uint64_t chunk_index = 0;
  bool gauss = phi.kind == TestFunctionKind::Gaussian;
  double prop_sigma = 1.5 * phi.width;
  std::vector<double> s(d);
  while (done < samples) {
    long n = std::min(chunk, samples - done);
    Rng rng = Rng::substream(seed, chunk_index++);
    for (long it = 0; it < n; ++it) {
      double logq = 0.0;
      for (int k = 0; k < d; ++k) {
        if (gauss) {
          double z = rng.normal();
          s[k] = w.s_center[k] + prop_sigma * z;
          logq += -0.5 * z * z - std::log(prop_sigma * 2.5066282746310002);
        } else {
          s[k] = rng.uniform(w.s_center[k] - w.radius, w.s_center[k] + w.radius);
          logq += -std::log(2.0 * w.radius);
        }
      }
      std::vector<double> y = chart.point(s);
      double val = phi.value(y);
      if (val != 0.0) {
        bool excluded = false;
        for (const auto& f : weights) {
          double fv = f(y);
          if (std::abs(fv) < eta) {
            excluded = true;
            break;
          }
          val /= std::abs(fv);
        }
        if (!excluded) acc.add(val * std::exp(-logq));
      }
    }
    done += n;
  }
  return chart.density * acc.value() / static_cast<double>(samples);
}

}  // namespace

double delta_affine_integrate(const AffineFunction& f, const TestFunction& phi,
                              const IntegrationConfig& cfg) {
  if (f.gradient_norm() == 0.0) throw ZeroGradient("delta_affine_integrate");
  if (phi.kind == TestFunctionKind::Gaussian &&
      (cfg.method == IntegrationMethod::ExactClosedForm || f.dim() > 3))
    return gaussian_closed_form(f, phi);
  HyperplaneChart chart = HyperplaneChart::build(f);
  if (cfg.method == IntegrationMethod::MonteCarlo)
    return chart_monte_carlo(chart, {}, phi, 0.0, cfg.samples, cfg.seed);
  ChartIntegrator ci(chart, {}, phi, 0.0, cfg.rel_tol);
  return ci.run();
}

namespace {

// Core of the product integral: sum over charts of factor j, weighted by the
// remaining factors of `fac` plus the caller-supplied extra weights, with the
// eta-window removed around every weight singularity.
double weighted_product_value(const AffineFactorization& fac,
                              const std::vector<AffineFunction>& extra, const TestFunction& phi,
                              double eta, const IntegrationConfig& cfg) {
  double total = 0.0;
  for (std::size_t j = 0; j < fac.factors.size(); ++j) {
    std::vector<AffineFunction> weights;
    for (std::size_t i = 0; i < fac.factors.size(); ++i)
      if (i != j) weights.push_back(fac.factors[i]);
    weights.insert(weights.end(), extra.begin(), extra.end());
    HyperplaneChart chart = HyperplaneChart::build(fac.factors[j], static_cast<int>(j));
    if (cfg.method == IntegrationMethod::MonteCarlo && fac.dim() > 1) {
      total += chart_monte_carlo(chart, weights, phi, eta, cfg.samples,
                                 cfg.seed + 7919 * j);
    } else {
      ChartIntegrator ci(chart, std::move(weights), phi, eta, cfg.rel_tol);
      total += ci.run();
    }
  }
  return total;
}

IntegralResult weighted_product_integrate(const AffineFactorization& fac,
                                          const std::vector<AffineFunction>& extra,
                                          const TestFunction& phi, const IntegrationConfig& cfg,
                                          const DivergenceReport& probe) {
  if (probe.any_divergent()) {
    auto [i, j] = probe.first_divergent();
    return IntegralResult::divergent_at(i, j);
  }
  if (cfg.eta <= 0.0) {
    double v = weighted_product_value(fac, extra, phi, 0.0, cfg);
    return IntegralResult::finite(v, cfg.rel_tol * std::abs(v));
  }
  // Shrink the exclusion window (eta, eta/2, eta/4); a value that keeps
  // moving signals a non-integrable singularity the geometric probe did not
  // rule out.
  double i0 = weighted_product_value(fac, extra, phi, cfg.eta, cfg);
  double i1 = weighted_product_value(fac, extra, phi, cfg.eta / 2, cfg);
  double i2 = weighted_product_value(fac, extra, phi, cfg.eta / 4, cfg);
  double drift = std::abs(i2 - i1);
  double scale = std::max({std::abs(i0), std::abs(i1), std::abs(i2)});
  if (drift > std::max(1e-9, 1e-6 * scale)) {
    // Attribute the divergence to the closest intersecting pair.
    int bi = -1, bj = -1;
    for (const auto& p : probe.pairs)
      if (p.loci_intersect && bi < 0) {
        bi = p.i;
        bj = p.j;
      }
    return IntegralResult::divergent_at(bi, bj);
  }
  return IntegralResult::finite(i2, drift + cfg.rel_tol * std::abs(i2));
}

}  // namespace

DivergenceReport divergence_probe(const AffineFactorization& fac, const TestFunction& phi) {
  DivergenceReport report;
  int n = fac.dim();
  for (std::size_t i = 0; i < fac.factors.size(); ++i) {
    for (std::size_t j = i + 1; j < fac.factors.size(); ++j) {
      DivergenceReport::PairInfo info;
      info.i = static_cast<int>(i);
      info.j = static_cast<int>(j);
      const AffineFunction& fi = fac.factors[i];
      const AffineFunction& fj = fac.factors[j];
      // Parallel gradients: loci are disjoint parallel hyperplanes
      // (proportional factors were rejected at validation).
      double ni = fi.gradient_norm(), nj = fj.gradient_norm();
      double cross = 0.0;
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
          cross = std::max(cross, std::abs(fi.gradient[p] * fj.gradient[q] -
                                           fi.gradient[q] * fj.gradient[p]));
      if (cross <= 1e-12 * ni * nj || n < 2) {
        info.loci_intersect = false;
        info.divergent = false;
        info.reason = "parallel zero loci";
        report.pairs.push_back(std::move(info));
        continue;
      }
      info.loci_intersect = true;
      // Find the point of the intersection subspace closest to phi's
      // support, then ask whether phi is positive there.
      std::vector<double> y = phi.center;
      auto project_onto_L = [&](std::vector<double>& pt) {
        // Newton/KKT projection onto {f_i = 0, f_j = 0}.
        double a11 = 0, a12 = 0, a22 = 0;
        for (int k = 0; k < n; ++k) {
          a11 += fi.gradient[k] * fi.gradient[k];
          a12 += fi.gradient[k] * fj.gradient[k];
          a22 += fj.gradient[k] * fj.gradient[k];
        }
        double b1 = fi(pt), b2 = fj(pt);
        double det = a11 * a22 - a12 * a12;
        double l1 = (a22 * b1 - a12 * b2) / det;
        double l2 = (a11 * b2 - a12 * b1) / det;
        for (int k = 0; k < n; ++k) pt[k] -= l1 * fi.gradient[k] + l2 * fj.gradient[k];
      };
      project_onto_L(y);
      if (phi.kind == TestFunctionKind::CompactBump) {
        // Alternate between the support box and the subspace; converges to
        // nearest points of the two convex sets.
        for (int it = 0; it < 256; ++it) {
          for (int k = 0; k < n; ++k)
            y[k] = std::clamp(y[k], phi.center[k] - phi.width, phi.center[k] + phi.width);
          project_onto_L(y);
        }
      }
      info.divergent = phi.value(y) > 0.0;
      info.reason = info.divergent ? "test function positive near locus intersection"
                                   : "test function vanishes near locus intersection";
      report.pairs.push_back(std::move(info));
    }
  }
  return report;
}

IntegralResult delta_product_integrate(const AffineFactorization& fac, const TestFunction& phi,
                                       const IntegrationConfig& cfg) {
  DivergenceReport probe = divergence_probe(fac, phi);
  return weighted_product_integrate(fac, {}, phi, cfg, probe);
}

std::pair<IntegralResult, IntegralResult> product_rule_check(const AffineFactorization& f,
                                                             const AffineFactorization& g,
                                                             const TestFunction& phi,
                                                             const IntegrationConfig& cfg) {
  std::vector<AffineFunction> all = f.factors;
  all.insert(all.end(), g.factors.begin(), g.factors.end());
  AffineFactorization combined = validate_factorization(all);
  DivergenceReport probe = divergence_probe(combined, phi);
  IntegralResult lhs = weighted_product_integrate(combined, {}, phi, cfg, probe);
  if (lhs.divergent()) return {lhs, lhs};
  IntegralResult rg = weighted_product_integrate(g, f.factors, phi, cfg, probe);
  IntegralResult rf = weighted_product_integrate(f, g.factors, phi, cfg, probe);
  IntegralResult rhs = IntegralResult::finite(rg.value + rf.value,
                                              rg.error_estimate + rf.error_estimate);
  return {lhs, rhs};
}

IntegralResult delta_Px_integrate(const RootPoly& P, double x, const TestFunction& phi,
                                  const IntegrationConfig& cfg) {
  int m = P.degree();
  if (m < 1) throw DegreeMismatch("delta_Px_integrate: degree >= 1 required");
  if (phi.dim() != m) throw ConfigError("delta_Px_integrate: test function dimension mismatch");
  double inv_a = 1.0 / std::abs(P.leading);

  double total = 0.0;
  for (int alpha = 0; alpha < m; ++alpha) {
    double term = phi.factor(alpha, x);
    if (term == 0.0) continue;
    for (int other = 0; other < m && term != 0.0; ++other) {
      if (other == alpha) continue;
      auto [lo, hi] = phi.coordinate_window(other);
      if (cfg.eta <= 0.0 && phi.factor(other, x) > 0.0)
        return IntegralResult::divergent_at(alpha, other);
      double eta = std::max(cfg.eta, 1e-12);
      term *= punctured_line_integral([&](double s) { return phi.factor(other, s); }, x, eta,
                                      lo, hi, cfg.rel_tol);
    }
    total += term;
  }
  return IntegralResult::finite(total * inv_a, cfg.rel_tol * std::abs(total) * inv_a);
}

double delta_1d_integrate(const RootPoly& P, const std::function<double(double)>& phi) {
  double total = 0.0;
  for (int k = 0; k < P.degree(); ++k)
    total += phi(P.roots[k]) / std::abs(derivative_at_root(P, k));
  return total;
}

double delta_1d_integrate(const RootPoly& P, const TestFunction& phi) {
  return delta_1d_integrate(P, [&](double x) { return phi.factor(0, x); });
}

}  // namespace resdelta
