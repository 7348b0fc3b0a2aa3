#include "resdelta/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "resdelta/errors.hpp"
#include "resdelta/quadrature.hpp"
#include "resdelta/rng.hpp"

namespace resdelta {
namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (; k > 0; --k) r *= x;
  return r;
}

void check_dims(const RootPoly& P, const RootPoly& Q, const TestFunction& phi) {
  if (P.degree() < 1 || Q.degree() < 1)
    throw DegreeMismatch("verifier: degrees >= 1 required");
  if (phi.dim() != P.degree() + Q.degree())
    throw ConfigError("verifier: test function dimension must be degP + degQ");
}

// t-range over which the (alpha, beta) term can contribute: both of the
// pinned coordinates' factors must be non-negligible at t.
std::pair<double, double> term_window(const TestFunction& phi, int ca, int cb) {
  auto [la, ha] = phi.coordinate_window(ca);
  auto [lb, hb] = phi.coordinate_window(cb);
  return {std::max(la, lb), std::min(ha, hb)};
}

// eta = 0 requests the unrestricted integral.  All three routes share the
// same divergence geometry: a same-family coordinate pair (i, j) makes the
// integral infinite exactly when phi's factors i, j and some opposite-family
// factor are simultaneously positive on a set of positive measure.
std::optional<std::pair<int, int>> eta0_divergent_pair(const TestFunction& phi, int m, int n) {
  if (m + n <= 2) return std::nullopt;  // no reciprocal weights at all
  if (phi.strictly_positive()) {
    if (m >= 2) return std::make_pair(0, 1);
    return std::make_pair(m, m + 1);
  }
  auto overlap3 = [&](int i, int j, int g) {
    auto [li, hi_] = phi.coordinate_window(i);
    auto [lj, hj] = phi.coordinate_window(j);
    auto [lg, hg] = phi.coordinate_window(g);
    return std::max({li, lj, lg}) < std::min({hi_, hj, hg});
  };
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int g = m; g < m + n; ++g)
        if (overlap3(i, j, g)) return std::make_pair(i, j);
  for (int i = m; i < m + n; ++i)
    for (int j = i + 1; j < m + n; ++j)
      for (int g = 0; g < m; ++g)
        if (overlap3(i, j, g)) return std::make_pair(i, j);
  return std::nullopt;
}

double kernel_tol(const IntegrationConfig& cfg) {
  return std::max(cfg.rel_tol * 0.01, 1e-12);
}

double outer_tol(const IntegrationConfig& cfg) { return std::max(cfg.rel_tol, 1e-8); }

struct Node {
  double s, w;  // position and quadrature weight premultiplied by phi's factor
};

// Quadrature nodes for one free coordinate at fixed t: the coordinate's
// window minus the exclusion (t - eta, t + eta), panels graded geometrically
// away from the excluded edge to resolve the 1/|s - t| profile.
void build_inner_nodes(const TestFunction& phi, int coord, double t, double eta, int gl_order,
                       std::vector<Node>& out) {
  out.clear();
  auto [lo, hi] = phi.coordinate_window(coord);
  const GaussLegendre& gl = GaussLegendre::order(gl_order);
  auto add_segment = [&](double a, double b, double edge) {
    if (!(a < b)) return;
    for (auto [pa, pb] : graded_panels(a, b, edge, eta)) {
      double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
      for (std::size_t q = 0; q < gl.x.size(); ++q) {
        double s = mid + half * gl.x[q];
        double w = half * gl.w[q] * phi.factor(coord, s);
        if (w != 0.0) out.push_back({s, w});
      }
    }
  };
  double le = t - eta, re = t + eta;
  if (le > lo) add_segment(lo, std::min(le, hi), std::min(le, hi));
  if (re < hi) add_segment(std::max(re, lo), hi, std::max(re, lo));
}

struct TensorContext {
  std::vector<int> root_index;           // index into the owning family's roots
  std::vector<bool> is_u;
  std::vector<std::vector<Node>> nodes;  // per inner dimension
  RootPoly Pw, Qw;
  SupportHyperplane h;
  double a = 1.0, b = 1.0;
};

double tensor_sum(TensorContext& ctx, std::size_t d) {
  if (d == ctx.nodes.size()) {
    double J = j_multiplier(ctx.Pw, ctx.Qw);
    double Jab = j_ab(ctx.Pw.roots, ctx.Qw.roots, ctx.h, ctx.a, ctx.b);
    return std::abs(J) / std::abs(Jab);
  }
  double acc = 0.0;
  double& slot =
      ctx.is_u[d] ? ctx.Pw.roots[ctx.root_index[d]] : ctx.Qw.roots[ctx.root_index[d]];
  for (const Node& nd : ctx.nodes[d]) {
    slot = nd.s;
    acc += nd.w * tensor_sum(ctx, d + 1);
  }
  return acc;
}

}  // namespace

double j_ab(const std::vector<double>& u, const std::vector<double>& v,
            const SupportHyperplane& h, double a, double b) {
  double prod = ipow(a, static_cast<int>(v.size())) * ipow(b, static_cast<int>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (static_cast<int>(i) == h.alpha && static_cast<int>(j) == h.beta) continue;
      prod *= u[i] - v[j];
    }
  return prod;
}

std::pair<double, double> pointwise_ratio_check(const std::vector<double>& u,
                                                const std::vector<double>& v,
                                                const SupportHyperplane& h, double a, double b) {
  if (h.alpha < 0 || h.alpha >= static_cast<int>(u.size()) || h.beta < 0 ||
      h.beta >= static_cast<int>(v.size()))
    throw ConfigError("pointwise_ratio_check: hyperplane indices out of range");
  if (u[h.alpha] != v[h.beta]) throw OffSupport("pointwise_ratio_check: u_alpha != v_beta");
  RootPoly P{a, u, Family::A};
  RootPoly Q{b, v, Family::B};
  double lhs = std::abs(j_multiplier(P, Q)) / std::abs(j_ab(u, v, h, a, b));
  double rhs =
      1.0 / (std::abs(derivative_at_root(P, h.alpha)) * std::abs(derivative_at_root(Q, h.beta)));
  return {lhs, rhs};
}

IntegralResult lhs_localized(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                             const IntegrationConfig& cfg) {
  check_dims(P, Q, phi);
  int m = P.degree(), n = Q.degree();
  if (cfg.eta <= 0.0)
    if (auto pr = eta0_divergent_pair(phi, m, n))
      return IntegralResult::divergent_at(pr->first, pr->second);
  double eta = std::max(cfg.eta, 1e-12);
  double ktol = kernel_tol(cfg), otol = outer_tol(cfg);
  double scale = 1.0 / (std::abs(P.leading) * std::abs(Q.leading));
  KahanSum total;
  for (int alpha = 0; alpha < m; ++alpha) {
    for (int beta = 0; beta < n; ++beta) {
      auto [lo, hi] = term_window(phi, alpha, m + beta);
      if (!(lo < hi)) continue;
      auto integrand = [&](double t) {
        double w = phi.factor(alpha, t) * phi.factor(m + beta, t);
        if (w == 0.0) return 0.0;
        for (int g = 0; g < m + n && w != 0.0; ++g) {
          if (g == alpha || g == m + beta) continue;
          auto [klo, khi] = phi.coordinate_window(g);
          w *= punctured_line_integral([&phi, g](double s) { return phi.factor(g, s); }, t, eta,
                                       klo, khi, ktol);
        }
        return w;
      };
      total.add(gk_integrate(integrand, lo, hi, otol));
    }
  }
  double v = scale * total.value();
  return IntegralResult::finite(v, 10 * otol * std::abs(v));
}

IntegralResult lhs_direct(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                          const IntegrationConfig& cfg) {
  check_dims(P, Q, phi);
  int m = P.degree(), n = Q.degree();
  if (cfg.eta <= 0.0)
    if (auto pr = eta0_divergent_pair(phi, m, n))
      return IntegralResult::divergent_at(pr->first, pr->second);
  TestFunction phi_u{phi.kind, {phi.center.begin(), phi.center.begin() + m}, phi.width};
  TestFunction phi_v{phi.kind, {phi.center.begin() + m, phi.center.end()}, phi.width};
  double lo = phi.coordinate_window(0).first, hi = phi.coordinate_window(0).second;
  std::vector<double> breaks;
  for (int g = 0; g < m + n; ++g) {
    auto [wl, wh] = phi.coordinate_window(g);
    lo = std::min(lo, wl);
    hi = std::max(hi, wh);
    breaks.push_back(phi.center[g]);
  }
  bool bad = false;
  std::pair<int, int> bad_pair{-1, -1};
  auto integrand = [&](double x) {
    IntegralResult rp = delta_Px_integrate(P, x, phi_u, cfg);
    IntegralResult rq = delta_Px_integrate(Q, x, phi_v, cfg);
    if (rp.divergent() && rq.value != 0.0) {
      bad = true;
      bad_pair = rp.divergent_pair;
      return 0.0;
    }
    if (rq.divergent() && rp.value != 0.0) {
      bad = true;
      bad_pair = {rq.divergent_pair.first + m, rq.divergent_pair.second + m};
      return 0.0;
    }
    if (rp.divergent() || rq.divergent()) return 0.0;  // 0 * infinity convention
    return rp.value * rq.value;
  };
  double v = gk_integrate_with_breaks(integrand, lo, hi, breaks, outer_tol(cfg));
  if (bad) return IntegralResult::divergent_at(bad_pair.first, bad_pair.second);
  return IntegralResult::finite(v, 10 * outer_tol(cfg) * std::abs(v));
}

IntegralResult rhs_localized(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                             const IntegrationConfig& cfg) {
  check_dims(P, Q, phi);
  int m = P.degree(), n = Q.degree();
  if (cfg.eta <= 0.0)
    if (auto pr = eta0_divergent_pair(phi, m, n))
      return IntegralResult::divergent_at(pr->first, pr->second);
  double eta = std::max(cfg.eta, 1e-12);
  double otol = outer_tol(cfg);
  KahanSum total;
  TensorContext ctx;
  ctx.Pw = P;
  ctx.Qw = Q;
  ctx.a = P.leading;
  ctx.b = Q.leading;
  for (int alpha = 0; alpha < m; ++alpha) {
    for (int beta = 0; beta < n; ++beta) {
      ctx.h = SupportHyperplane{alpha, beta};
      ctx.root_index.clear();
      ctx.is_u.clear();
      std::vector<int> coords;
      for (int i = 0; i < m; ++i)
        if (i != alpha) {
          ctx.root_index.push_back(i);
          ctx.is_u.push_back(true);
          coords.push_back(i);
        }
      for (int j = 0; j < n; ++j)
        if (j != beta) {
          ctx.root_index.push_back(j);
          ctx.is_u.push_back(false);
          coords.push_back(m + j);
        }
      ctx.nodes.assign(coords.size(), {});
      auto [lo, hi] = term_window(phi, alpha, m + beta);
      if (!(lo < hi)) continue;
      auto integrand = [&](double t) {
        double w0 = phi.factor(alpha, t) * phi.factor(m + beta, t);
        if (w0 == 0.0) return 0.0;
        ctx.Pw.roots[alpha] = t;
        ctx.Qw.roots[beta] = t;
        for (std::size_t d = 0; d < coords.size(); ++d) {
          // Distinct Gauss orders per dimension keep nodes of different
          // coordinates from landing on each other exactly (the ratio is a
          // removable 0/0 across those loci).
          build_inner_nodes(phi, coords[d], t, eta, 6 + static_cast<int>(d), ctx.nodes[d]);
          if (ctx.nodes[d].empty()) return 0.0;
        }
        return w0 * tensor_sum(ctx, 0);
      };
      total.add(gk_integrate(integrand, lo, hi, otol));
    }
  }
  double v = total.value();
  return IntegralResult::finite(v, 10 * otol * std::abs(v));
}

MollifiedEstimate mollified_oracle(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                                   const MollifierSpec& spec, long sample_count,
                                   std::uint64_t seed) {
  check_dims(P, Q, phi);
  if (phi.kind != TestFunctionKind::Gaussian)
    throw ConfigError("mollified_oracle: Gaussian test function required");
  if (spec.epsilon <= 0.0) throw ConfigError("mollified_oracle: epsilon must be positive");
  int m = P.degree(), n = Q.degree();
  double eps = spec.epsilon;
  static const double inv_sqrt_2pi = 0.3989422804014327;

  KahanSum sum, sumsq;
  const long chunk = 65536;
  long done = 0;
  std::uint64_t chunk_index = 0;
  std::vector<double> u(m), v(n), centers(m + n + 1), sds(m + n + 1);
  while (done < sample_count) {
    long todo = std::min(chunk, sample_count - done);
    Rng rng = Rng::substream(seed, chunk_index++);
    for (long it = 0; it < todo; ++it) {
      for (int i = 0; i < m; ++i) u[i] = phi.center[i] + phi.width * rng.normal();
      for (int j = 0; j < n; ++j) v[j] = phi.center[m + j] + phi.width * rng.normal();

      // Proposal for x: mixture of normals at each root, with widths set by
      // where theta_eps(P_x) stays appreciable, plus one broad component.
      double lo = u[0], hi = u[0];
      for (int i = 0; i < m; ++i) {
        double slope = std::abs(P.leading);
        for (int i2 = 0; i2 < m; ++i2)
          if (i2 != i) slope *= std::abs(u[i] - u[i2]);
        centers[i] = u[i];
        sds[i] = slope > 0.0 ? std::clamp(eps / slope, 1e-4, 3.0) : 3.0;
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
      }
      for (int j = 0; j < n; ++j) {
        double slope = std::abs(Q.leading);
        for (int j2 = 0; j2 < n; ++j2)
          if (j2 != j) slope *= std::abs(v[j] - v[j2]);
        centers[m + j] = v[j];
        sds[m + j] = slope > 0.0 ? std::clamp(eps / slope, 1e-4, 3.0) : 3.0;
        lo = std::min(lo, v[j]);
        hi = std::max(hi, v[j]);
      }
      centers[m + n] = 0.5 * (lo + hi);
      sds[m + n] = 0.5 * (hi - lo) + 2.0;

      int k = m + n + 1;
      double w_broad = 0.2, w_each = 0.8 / (k - 1);
      double pick = rng.uniform01();
      int comp = (pick >= 0.8) ? k - 1 : std::min<int>(static_cast<int>(pick / w_each), k - 2);
      double x = centers[comp] + sds[comp] * rng.normal();

      double g = 0.0;
      for (int c = 0; c < k; ++c) {
        double z = (x - centers[c]) / sds[c];
        double wc = (c == k - 1) ? w_broad : w_each;
        g += wc * inv_sqrt_2pi / sds[c] * std::exp(-0.5 * z * z);
      }

      double Px = P.leading, Qx = Q.leading;
      for (int i = 0; i < m; ++i) Px *= x - u[i];
      for (int j = 0; j < n; ++j) Qx *= x - v[j];
      double zp = Px / eps, zq = Qx / eps;
      double theta2 = inv_sqrt_2pi / eps * std::exp(-0.5 * zp * zp) * inv_sqrt_2pi / eps *
                      std::exp(-0.5 * zq * zq);
      double val = theta2 / g;
      sum.add(val);
      sumsq.add(val * val);
    }
    done += todo;
  }
  double N = static_cast<double>(sample_count);
  double est = sum.value() / N;
  double var = std::max(0.0, sumsq.value() / N - est * est);
  return MollifiedEstimate{eps, est, std::sqrt(var / N)};
}

IdentityReport verify_identity(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                               const VerifyOptions& opts) {
  check_dims(P, Q, phi);
  int m = P.degree();
  IdentityReport report;

  if (phi.kind == TestFunctionKind::Gaussian) {
    auto gate = [&](const std::vector<double>& roots, int offset) {
      for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
          if (std::abs(roots[i] - roots[j]) < opts.min_separation) {
            report.divergent = true;
            auto r = IntegralResult::divergent_at(static_cast<int>(i) + offset,
                                                  static_cast<int>(j) + offset);
            report.lhs_localized = report.lhs_direct = report.rhs_localized = r;
            report.note = "same-family roots closer than min_separation; integral divergent";
          }
    };
    gate(P.roots, 0);
    gate(Q.roots, m);
    if (report.divergent) return report;
  }

  report.lhs_localized = lhs_localized(P, Q, phi, opts.integration);
  report.lhs_direct = lhs_direct(P, Q, phi, opts.integration);
  report.rhs_localized = rhs_localized(P, Q, phi, opts.integration);
  if (report.lhs_localized.divergent() || report.lhs_direct.divergent() ||
      report.rhs_localized.divergent()) {
    report.divergent = true;
    report.note = "divergent integral";
    return report;
  }

  double vals[3] = {report.lhs_localized.value, report.lhs_direct.value,
                    report.rhs_localized.value};
  double vmax = std::max({vals[0], vals[1], vals[2]});
  double vmin = std::min({vals[0], vals[1], vals[2]});
  double amax = std::max({std::abs(vals[0]), std::abs(vals[1]), std::abs(vals[2])});
  report.abs_discrepancy = vmax - vmin;
  report.rel_discrepancy = report.abs_discrepancy / std::max(amax, 1e-300);
  report.pass = report.rel_discrepancy <= opts.rel_tol;
  if (!report.pass) report.note = "cross-method relative discrepancy above tolerance";

  if (opts.run_mollified) {
    for (std::size_t e = 0; e < opts.epsilons.size(); ++e) {
      MollifiedEstimate est =
          mollified_oracle(P, Q, phi, MollifierSpec{opts.epsilons[e]}, opts.mollified_samples,
                           opts.integration.seed + 1000003 * (e + 1));
      report.mollified.push_back(est);
      double allowed = 3.0 * est.std_error + 0.05 * std::abs(report.lhs_localized.value);
      if (std::abs(est.value - report.lhs_localized.value) > allowed) {
        report.pass = false;
        report.note = "mollified estimate outside 3 sigma + bias allowance";
      }
    }
  }
  return report;
}

}  // namespace resdelta
