#include "resdelta/horn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "resdelta/errors.hpp"
#include "resdelta/quadrature.hpp"
#include "resdelta/rng.hpp"

namespace resdelta {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double ipow(double x, int k) {
  double r = 1.0;
  for (; k > 0; --k) r *= x;
  return r;
}

}  // namespace

void validate(const HornConfig& cfg) {
  double sa = cfg.alpha[0] + cfg.alpha[1] + cfg.alpha[2];
  double sb = cfg.beta[0] + cfg.beta[1] + cfg.beta[2];
  if (std::abs(sa) > 1e-12 || std::abs(sb) > 1e-12)
    throw ConfigError("horn: eigenvalue triples must sum to zero");
  if (cfg.bins < 1) throw ConfigError("horn: bins must be >= 1");
  if (cfg.samples < 1) throw ConfigError("horn: samples must be >= 1");
}

EulerAngles EulerAngles::from_c(double phi, double c, double psi) {
  double cc = std::clamp(c, -1.0, 1.0);
  return EulerAngles{std::acos(cc), phi, psi, cc};
}

Eigen::Matrix3d rotation_from_euler(const EulerAngles& a) {
  double c = a.c;
  double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  double cf = std::cos(a.phi), sf = std::sin(a.phi);
  double cp = std::cos(a.psi), sp = std::sin(a.psi);
  Eigen::Matrix3d Rzf, Rx, Rzp;
  Rzf << cf, -sf, 0, sf, cf, 0, 0, 0, 1;
  Rx << 1, 0, 0, 0, c, -s, 0, s, c;
  Rzp << cp, -sp, 0, sp, cp, 0, 0, 0, 1;
  return Rzf * Rx * Rzp;
}

std::pair<double, double> char_poly_pq(const std::array<double, 3>& alpha,
                                       const std::array<double, 3>& beta,
                                       const Eigen::Matrix3d& R) {
  Eigen::Matrix3d C =
      R * Eigen::Vector3d(beta[0], beta[1], beta[2]).asDiagonal() * R.transpose();
  C(0, 0) += alpha[0];
  C(1, 1) += alpha[1];
  C(2, 2) += alpha[2];
  double p = -0.5 * C.squaredNorm();
  double q = -C.determinant();
  return {p, q};
}

std::pair<CoeffPoly, CoeffPoly> pq_polynomials_in_c(const std::array<double, 3>& alpha,
                                                    const std::array<double, 3>& beta, double phi,
                                                    double psi) {
  static constexpr double kNodes[3] = {-0.8, -0.1, 0.6};
  static constexpr double kCert = 0.9;
  static const Eigen::Matrix3d Vinv = [] {
    Eigen::Matrix3d V;
    for (int i = 0; i < 3; ++i) V.row(i) << 1.0, kNodes[i], kNodes[i] * kNodes[i];
    return Eigen::Matrix3d(V.inverse());
  }();

  Eigen::Vector3d pv, qv;
  for (int i = 0; i < 3; ++i) {
    auto [p, q] = char_poly_pq(alpha, beta, rotation_from_euler(EulerAngles::from_c(phi, kNodes[i], psi)));
    pv[i] = p;
    qv[i] = q;
  }
  Eigen::Vector3d pc = Vinv * pv;
  Eigen::Vector3d qc = Vinv * qv;

  auto [p4, q4] =
      char_poly_pq(alpha, beta, rotation_from_euler(EulerAngles::from_c(phi, kCert, psi)));
  double scale = 1.0;
  for (int i = 0; i < 3; ++i) scale = std::max({scale, std::abs(pv[i]), std::abs(qv[i])});
  scale = std::max({scale, std::abs(p4), std::abs(q4)});
  double rp = std::abs(pc[0] + pc[1] * kCert + pc[2] * kCert * kCert - p4);
  double rq = std::abs(qc[0] + qc[1] * kCert + qc[2] * kCert * kCert - q4);
  if (rp > 1e-9 * scale || rq > 1e-9 * scale)
    throw DegreeCertificateFailure("pq_polynomials_in_c: quartic node off the fitted parabola");

  return {CoeffPoly{{pc[0], pc[1], pc[2]}}, CoeffPoly{{qc[0], qc[1], qc[2]}}};
}

std::pair<std::pair<double, double>, std::pair<double, double>> attainable_box(
    const std::array<double, 3>& alpha, const std::array<double, 3>& beta) {
  std::array<double, 3> a = alpha, b = beta;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double tr2 = 0.0;
  for (int i = 0; i < 3; ++i) tr2 += a[i] * a[i] + b[i] * b[i];
  double dot_up = 0.0, dot_down = 0.0;
  for (int i = 0; i < 3; ++i) {
    dot_up += a[i] * b[i];
    dot_down += a[i] * b[2 - i];
  }
  double p_min = -0.5 * (tr2 + 2.0 * dot_up);
  double p_max = -0.5 * (tr2 + 2.0 * dot_down);
  if (p_max - p_min < 1e-9) {
    p_min -= 0.5;
    p_max += 0.5;
  }
  double q_m = 2.0 * std::pow(std::max(0.0, -p_min), 1.5) / (3.0 * std::sqrt(3.0));
  if (q_m < 1e-9) q_m = 0.5;
  return {{p_min, p_max}, {-q_m, q_m}};
}

namespace {

std::pair<std::pair<double, double>, std::pair<double, double>> grid_ranges(
    const HornConfig& cfg) {
  if (cfg.p_lo < cfg.p_hi && cfg.q_lo < cfg.q_hi)
    return {{cfg.p_lo, cfg.p_hi}, {cfg.q_lo, cfg.q_hi}};
  return attainable_box(cfg.alpha, cfg.beta);
}

void init_grid(HornGrid& grid, const HornConfig& cfg) {
  auto [pr, qr] = grid_ranges(cfg);
  grid.bins = cfg.bins;
  grid.p_edges.resize(cfg.bins + 1);
  grid.q_edges.resize(cfg.bins + 1);
  for (int i = 0; i <= cfg.bins; ++i) {
    grid.p_edges[i] = pr.first + (pr.second - pr.first) * i / cfg.bins;
    grid.q_edges[i] = qr.first + (qr.second - qr.first) * i / cfg.bins;
  }
  grid.value.assign(cfg.bins * cfg.bins, 0.0);
  grid.std_error.assign(cfg.bins * cfg.bins, 0.0);
  grid.flag.assign(cfg.bins * cfg.bins, ' ');
}

}  // namespace

HornGrid mc_histogram(const HornConfig& cfg) {
  validate(cfg);
  HornGrid grid;
  init_grid(grid, cfg);
  grid.method = "mc";
  double plo = grid.p_edges.front(), phi_edge = grid.p_edges.back();
  double qlo = grid.q_edges.front(), qhi_edge = grid.q_edges.back();
  double dp = (phi_edge - plo) / cfg.bins, dq = (qhi_edge - qlo) / cfg.bins;

  std::vector<long> counts(cfg.bins * cfg.bins, 0);
  long inside = 0;
  const long chunk = 65536;
  long done = 0;
  std::uint64_t chunk_index = 0;
  while (done < cfg.samples) {
    long todo = std::min(chunk, cfg.samples - done);
    Rng rng = Rng::substream(cfg.seed, chunk_index++);
    for (long it = 0; it < todo; ++it) {
      double phi = rng.uniform(0.0, kPi);
      double psi = rng.uniform(0.0, kPi);
      double c = rng.uniform(-1.0, 1.0);
      auto [p, q] = char_poly_pq(cfg.alpha, cfg.beta, rotation_from_euler(EulerAngles::from_c(phi, c, psi)));
      double disc = -4.0 * p * p * p - 27.0 * q * q;
      if (disc < -1e-9 * (1.0 + std::abs(p * p * p) + q * q)) ++grid.discriminant_violations;
      if (p >= plo && p < phi_edge && q >= qlo && q < qhi_edge) {
        int ip = std::min(cfg.bins - 1, static_cast<int>((p - plo) / dp));
        int iq = std::min(cfg.bins - 1, static_cast<int>((q - qlo) / dq));
        ++counts[grid.idx(ip, iq)];
        ++inside;
      }
    }
    done += todo;
  }

  double N = static_cast<double>(cfg.samples);
  double area = dp * dq;
  for (int b = 0; b < cfg.bins * cfg.bins; ++b) {
    double k = static_cast<double>(counts[b]);
    grid.value[b] = k / (N * area);
    grid.std_error[b] = std::sqrt(k * (1.0 - k / N)) / (N * area);
  }
  grid.total_mass = static_cast<double>(inside) / N;
  return grid;
}

namespace {

// Degree of a (<= 2)-degree coefficient triple after discarding leading
// coefficients that are zero relative to the largest one.
int effective_degree(const double c[3]) {
  double s = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
  if (s == 0.0) return -1;
  for (int d = 2; d >= 0; --d)
    if (std::abs(c[d]) > 1e-13 * s) return d;
  return -1;
}

// Resultant in c of the two shifted coefficient triples at degrees fixed per
// scan row.  Deciding the degree pointwise would switch between resultant
// normalizations at isolated leading-coefficient collapses, leaving sign
// outliers that scramble the crossing scan; the fixed-degree form is smooth
// in phi.  Its extra zeros (collapsing leading coefficients rather than a
// common root) are rejected by the residual guards at the zero.  The generic
// quadratic-quadratic case uses the Bezout closed form, which equals the
// Sylvester determinant and avoids a 4x4 LU in the scan loop.
double resultant_of_triples(const double A[3], const double B[3], int da, int db) {
  if (da < 0 || db < 0) return 0.0;  // a zero polynomial: resultant vanishes
  if (da == 2 && db == 2) {
    double m02 = A[2] * B[0] - A[0] * B[2];
    double m12 = A[2] * B[1] - A[1] * B[2];
    double m01 = A[1] * B[0] - A[0] * B[1];
    return m02 * m02 - m12 * m01;
  }
  if (da == 0 && db == 0) return 1.0;
  if (da == 0) return ipow(A[0], db);
  if (db == 0) return ipow(B[0], da);
  static thread_local CoeffPoly PA, PB;
  PA.coeffs.assign(A, A + da + 1);
  PB.coeffs.assign(B, B + db + 1);
  return resultant_sylvester(PA, PB);
}

constexpr int kScan = 512;  // sign-change scan resolution in phi

class Localizer {
 public:
  explicit Localizer(const HornConfig& cfg) : alpha_(cfg.alpha), beta_(cfg.beta) {}

  double S_probe(double psi, double p, double q, bool& flagged) {
    return S_at(psi, p, q, flagged);
  }

  RhoValue rho(double p, double q) {
    bool flagged = false;
    auto f = [&](double psi) { return S_at(psi, p, q, flagged); };
    // Panel endpoints at the quarter-turn symmetry points of psi so the
    // tangential double zeros of R sitting exactly there are never sampled
    // (Kronrod nodes are interior).  Solution branches can appear or vanish
    // at fold points inside a panel, where the summand blows up like an
    // integrable 1/sqrt spike; the deep adaptive recursion shrinks the
    // straddling panel until its contribution is resolved.
    double integral = 0.0;
    for (int j = 0; j < 4; ++j)
      integral += gk_integrate(f, kPi * j / 4, kPi * (j + 1) / 4, 1e-4, 22);
    return RhoValue{integral / (2.0 * kPi * kPi), flagged};
  }

 private:
  static constexpr int kHarm = 7;   // stored trig degree in phi
  static constexpr int kVec = 2 * kHarm + 1;

  // One psi row of the coefficient tables.  At fixed psi each of the six
  // c-coefficients of p and q is a trig polynomial in phi (the phi rotation
  // enters C only by conjugation, so entries carry at most e^{2i phi};
  // products of two give p degree <= 4, of three give q degree <= 6).  The
  // row stores the harmonics recovered by a 16-point DFT, certified against
  // direct evaluation away from the sampling grid.
  struct FRow {
    double h[6][kVec];  // [series][1, cos k.phi, sin k.phi for k = 1..kHarm]

    void eval_vec(const double t[kVec], double out[6]) const {
      for (int s = 0; s < 6; ++s) {
        double acc = h[s][0];
        for (int i = 1; i < kVec; ++i) acc += h[s][i] * t[i];
        out[s] = acc;
      }
    }

    void eval_phi(double phi, double out[6]) const {
      double t[kVec];
      harmonics(std::cos(phi), std::sin(phi), t);
      eval_vec(t, out);
    }

    static void harmonics(double cf, double sf, double t[kVec]) {
      t[0] = 1.0;
      t[1] = cf;
      t[2] = sf;
      for (int k = 2; k <= kHarm; ++k) {
        t[2 * k - 1] = t[2 * k - 3] * cf - t[2 * k - 2] * sf;
        t[2 * k] = t[2 * k - 2] * cf + t[2 * k - 3] * sf;
      }
    }
  };

  static const std::vector<std::array<double, kVec>>& node_harmonics() {
    static const std::vector<std::array<double, kVec>> tab = [] {
      std::vector<std::array<double, kVec>> t(kScan + 1);
      for (int k = 0; k <= kScan; ++k)
        FRow::harmonics(std::cos(kPi * k / kScan), std::sin(kPi * k / kScan), t[k].data());
      return t;
    }();
    return tab;
  }

  void sample_pq(double phi, double psi, double out[6]) const {
    auto [pcp, qcp] = pq_polynomials_in_c(alpha_, beta_, phi, psi);
    for (int i = 0; i < 3; ++i) {
      out[i] = pcp.coeffs[i];
      out[3 + i] = qcp.coeffs[i];
    }
  }

  const FRow& row(double psi) {
    std::uint64_t key = std::bit_cast<std::uint64_t>(psi);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 32768) cache_.clear();

    constexpr int M = 16;
    static const std::vector<std::array<double, kVec>> dft = [] {
      std::vector<std::array<double, kVec>> t(M);
      for (int j = 0; j < M; ++j)
        FRow::harmonics(std::cos(2.0 * kPi * j / M), std::sin(2.0 * kPi * j / M), t[j].data());
      return t;
    }();

    double f[M][6];
    for (int j = 0; j < M; ++j) sample_pq(2.0 * kPi * j / M, psi, f[j]);
    FRow r;
    for (int s = 0; s < 6; ++s) {
      for (int i = 0; i < kVec; ++i) {
        double acc = 0.0;
        for (int j = 0; j < M; ++j) acc += f[j][s] * dft[j][i];
        r.h[s][i] = (i == 0 ? acc : 2.0 * acc) / M;
      }
    }
    for (double phi : {0.37, 2.51}) {  // off the DFT grid
      double direct[6], got[6];
      sample_pq(phi, psi, direct);
      r.eval_phi(phi, got);
      double scale = 1.0;
      for (double v : direct) scale = std::max(scale, std::abs(v));
      for (int s = 0; s < 6; ++s)
        if (std::abs(got[s] - direct[s]) > 1e-9 * scale)
          throw DegreeCertificateFailure("horn row: harmonics off the direct values");
    }
    return cache_.emplace(key, r).first->second;
  }

  static double R_at(const FRow& fr, double phi, double p, double q, int da, int db) {
    double v[6];
    fr.eval_phi(phi, v);
    double A[3] = {v[0] - p, v[1], v[2]};
    double B[3] = {v[3] - q, v[4], v[5]};
    return resultant_of_triples(A, B, da, db);
  }

  // Sum over transversal zeros of R(., psi) of |J| / |dR/dphi|, gated on the
  // common root c* lying in [-1, 1].
  double S_at(double psi, double p, double q, bool& flagged) {
    const FRow& fr = row(psi);
    const auto& nh = node_harmonics();
    double nd[kScan + 1][6];
    double vals[kScan + 1];
    double amax[3] = {0.0, 0.0, 0.0}, bmax[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k <= kScan; ++k) {
      fr.eval_vec(nh[k].data(), nd[k]);
      amax[0] = std::max(amax[0], std::abs(nd[k][0] - p));
      bmax[0] = std::max(bmax[0], std::abs(nd[k][3] - q));
      for (int i = 1; i < 3; ++i) {
        amax[i] = std::max(amax[i], std::abs(nd[k][i]));
        bmax[i] = std::max(bmax[i], std::abs(nd[k][3 + i]));
      }
    }
    auto row_degree = [](const double m[3]) {
      double s = std::max({m[0], m[1], m[2]});
      if (s == 0.0) return -1;
      for (int d = 2; d >= 0; --d)
        if (m[d] > 1e-13 * s) return d;
      return -1;
    };
    const int da = row_degree(amax), db = row_degree(bmax);
    double scale = 0.0;
    for (int k = 0; k <= kScan; ++k) {
      double A[3] = {nd[k][0] - p, nd[k][1], nd[k][2]};
      double B[3] = {nd[k][3] - q, nd[k][4], nd[k][5]};
      vals[k] = resultant_of_triples(A, B, da, db);
      scale = std::max(scale, std::abs(vals[k]));
    }
    if (scale == 0.0) {  // R identically ~0 along the scan: cannot localize
      flagged = true;
      return 0.0;
    }

    double sum = 0.0;
    auto handle_zero = [&](double lo, double hi, double flo, bool hit_node) {
      double phi_star;
      if (hit_node) {
        phi_star = lo;
      } else {
        while (hi - lo > 1e-12) {
          double mid = 0.5 * (lo + hi);
          double fm = R_at(fr, mid, p, q, da, db);
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        phi_star = 0.5 * (lo + hi);
      }

      auto [pcp, qcp] = pq_polynomials_in_c(alpha_, beta_, phi_star, psi);
      double A[3] = {pcp.coeffs[0] - p, pcp.coeffs[1], pcp.coeffs[2]};
      double B[3] = {qcp.coeffs[0] - q, qcp.coeffs[1], qcp.coeffs[2]};
      if (effective_degree(A) != 2 || effective_degree(B) != 2) {
        flagged = true;  // degenerate quadratic at the zero: no multiplier
        return;
      }
      // Common root of the two quadratics by eliminating c^2.
      double den = B[2] * A[1] - A[2] * B[1];
      double coeff_scale = 0.0;
      for (int i = 0; i < 3; ++i)
        coeff_scale = std::max({coeff_scale, std::abs(A[i]), std::abs(B[i])});
      if (std::abs(den) < 1e-14 * coeff_scale * coeff_scale) return;
      double c_star = (A[2] * B[0] - B[2] * A[0]) / den;
      if (std::abs(c_star) > 1.0 + 1e-12) return;
      // A genuine common root must annihilate both quadratics.  The fixed-
      // degree resultant also vanishes when the leading coefficients collapse
      // together, and the elimination then lands on a root of one polynomial
      // only.
      double resid_a = std::abs(A[0] + c_star * (A[1] + c_star * A[2]));
      if (resid_a > 1e-5 * (std::abs(A[0]) + std::abs(A[1]) + std::abs(A[2]))) return;
      double resid_b = std::abs(B[0] + c_star * (B[1] + c_star * B[2]));
      if (resid_b > 1e-5 * (std::abs(B[0]) + std::abs(B[1]) + std::abs(B[2]))) return;

      const double h = 1e-5;
      double deriv = (R_at(fr, phi_star + h, p, q, da, db) -
                      R_at(fr, phi_star - h, p, q, da, db)) /
                     (2.0 * h);
      if (std::abs(deriv) < 1e-6 * scale) {
        flagged = true;
        return;
      }
      static thread_local CoeffPoly PA, PB;
      PA.coeffs.assign(A, A + 3);
      PB.coeffs.assign(B, B + 3);
      sum += std::abs(j_degree2(PA, PB)) / std::abs(deriv);
    };

    bool crossed[kScan] = {};
    for (int k = 0; k < kScan; ++k) {
      bool hit_node = vals[k] == 0.0;
      if (!hit_node && !(vals[k] * vals[k + 1] < 0.0)) continue;
      crossed[k] = true;
      handle_zero(kPi * k / kScan, kPi * (k + 1) / kScan, vals[k], hit_node);
    }

    // A pair of zeros closer than the node spacing leaves no sign change,
    // only a one-node dip of |R|; rescan such dips finely.
    for (int k = 1; k < kScan; ++k) {
      if (vals[k] == 0.0 || std::abs(vals[k]) > 1e-4 * scale) continue;
      if (std::abs(vals[k]) >= std::abs(vals[k - 1]) ||
          std::abs(vals[k]) > std::abs(vals[k + 1]))
        continue;
      if (crossed[k - 1] || crossed[k]) continue;
      const int kSub = 256;
      double left = kPi * (k - 1) / kScan;
      double step = 2.0 * kPi / kScan / kSub;
      double prev = vals[k - 1];
      for (int j = 1; j <= kSub; ++j) {
        double cur = j == kSub ? vals[k + 1] : R_at(fr, left + j * step, p, q, da, db);
        if (prev * cur < 0.0)
          handle_zero(left + (j - 1) * step, left + j * step, prev, false);
        prev = cur;
      }
    }
    return sum;
  }

  std::array<double, 3> alpha_, beta_;
  std::map<std::uint64_t, FRow> cache_;
};

struct AvgRho {
  double value = 0.0;
  bool flagged = false;
};

// Largest |q| a real spectrum admits at this p (vanishing cubic
// discriminant); rho is supported inside this strip.
double attainable_q(double p) {
  return std::sqrt(std::max(0.0, -4.0 * p * p * p) / 27.0);
}

// Largest p whose admissible q window meets [qlo, qhi]; attainable_q
// decreases in p, so support exists only left of this.
double admissible_p_max(double qlo, double qhi) {
  double qmin_abs = qlo > 0.0 ? qlo : (qhi < 0.0 ? -qhi : 0.0);
  if (qmin_abs == 0.0) return 0.0;
  return -std::cbrt(27.0 * qmin_abs * qmin_abs / 4.0);
}

// Bin average of rho on a product Gauss grid.  Near the support boundary
// the admissible window is a thin sliver of the bin (in q toward p -> 0, in
// p where the bin only clips the boundary curve), so sampling the bin at
// fixed nodes would miss the support entirely; instead both node ranges are
// clipped to the admissible region and the average rescaled by the clipped
// p fraction.  The sin substitution keeps Gauss nodes accurate through the
// square-root vanishing of rho at the discriminant edge.
AvgRho cell_average_nodes(Localizer& loc, double plo, double phi_, double qlo, double qhi,
                          int pn, int qn) {
  const GaussLegendre& gp = GaussLegendre::order(pn);
  const GaussLegendre& gq = GaussLegendre::order(qn);
  AvgRho out;
  double pb = std::min(phi_, admissible_p_max(qlo, qhi));
  if (!(plo < pb)) return out;
  double pm = 0.5 * (plo + pb), ph = 0.5 * (pb - plo);
  double acc = 0.0;
  for (int i = 0; i < pn; ++i) {
    double p = pm + ph * gp.x[i];
    double qa = std::max(qlo, -attainable_q(p));
    double qb = std::min(qhi, attainable_q(p));
    if (!(qa < qb)) continue;
    double qm = 0.5 * (qa + qb), qh = 0.5 * (qb - qa);
    double line = 0.0;
    for (int j = 0; j < qn; ++j) {
      double t = 0.5 * kPi * gq.x[j];
      RhoValue r = loc.rho(p, qm + qh * std::sin(t));
      if (r.divergent) {  // cell is excluded anyway; skip the remaining nodes
        out.flagged = true;
        return out;
      }
      line += gq.w[j] * 0.5 * kPi * std::cos(t) * r.value;
    }
    acc += gp.w[i] * (qh / (qhi - qlo)) * line;
  }
  out.value = 0.5 * acc * (pb - plo) / (phi_ - plo);
  return out;
}

AvgRho average_rho(Localizer& loc, double plo, double phi_, double qlo, double qhi, double tol,
                   int depth) {
  // the widest admissible window over [plo, phi_] is at plo
  if (qlo >= attainable_q(plo) || qhi <= -attainable_q(plo)) return {};
  AvgRho fine = cell_average_nodes(loc, plo, phi_, qlo, qhi, 4, 4);
  if (fine.flagged) return fine;
  if (fine.value == 0.0) return fine;  // clipped nodes all landed on empty fibers
  AvgRho coarse = cell_average_nodes(loc, plo, phi_, qlo, qhi, 3, 3);
  if (coarse.flagged) return {fine.value, true};
  if (std::abs(fine.value - coarse.value) <= tol) return fine;
  // Refinement that still disagrees at the depth limit means the cell carries
  // structure the node grid cannot certify (a divergence ridge crossing the
  // cell without tripping a node flag); report it divergent rather than hand
  // back an uncontrolled average.
  if (depth >= 2) return {fine.value, true};
  double pm = 0.5 * (plo + phi_), qm = 0.5 * (qlo + qhi);
  double rects[4][4] = {{plo, pm, qlo, qm}, {pm, phi_, qlo, qm}, {plo, pm, qm, qhi},
                        {pm, phi_, qm, qhi}};
  AvgRho acc;
  for (int i = 0; i < 4; ++i) {
    AvgRho a = average_rho(loc, rects[i][0], rects[i][1], rects[i][2], rects[i][3], tol,
                           depth + 1);
    acc.value += 0.25 * a.value;
    if (a.flagged) return {acc.value, true};
  }
  return acc;
}

}  // namespace

RhoValue rho_localized(const HornConfig& cfg, double p, double q) {
  validate(cfg);
  Localizer loc(cfg);
  return loc.rho(p, q);
}

double horn_S_debug(const HornConfig& cfg, double psi, double p, double q, bool& flagged) {
  Localizer loc(cfg);
  return loc.S_probe(psi, p, q, flagged);
}

CompareReport compare_report(const HornConfig& cfg) {
  CompareReport rep;
  rep.mc = mc_histogram(cfg);
  rep.localized = rep.mc;
  rep.localized.method = "localized";
  rep.localized.discriminant_violations = 0;
  rep.localized.total_mass = 0.0;
  std::fill(rep.localized.value.begin(), rep.localized.value.end(), 0.0);
  std::fill(rep.localized.std_error.begin(), rep.localized.std_error.end(), 0.0);

  Localizer loc(cfg);
  double N = static_cast<double>(cfg.samples);
  int pass = 0;
  for (int ip = 0; ip < cfg.bins; ++ip) {
    for (int iq = 0; iq < cfg.bins; ++iq) {
      double plo = rep.mc.p_edges[ip], phi_ = rep.mc.p_edges[ip + 1];
      double qlo = rep.mc.q_edges[iq], qhi = rep.mc.q_edges[iq + 1];
      double area = (phi_ - plo) * (qhi - qlo);
      int b = rep.mc.idx(ip, iq);
      double sigma = std::max(rep.mc.std_error[b], std::sqrt(1.0 - 1.0 / N) / (N * area));
      AvgRho avg = average_rho(loc, plo, phi_, qlo, qhi, 0.5 * sigma, 0);
      rep.localized.value[b] = avg.value;
      rep.localized.flag[b] = avg.flagged ? 'D' : ' ';

      CompareRow rowv;
      rowv.ip = ip;
      rowv.iq = iq;
      rowv.mc = rep.mc.value[b];
      rowv.sigma = sigma;
      rowv.localized = avg.value;
      rowv.z = (avg.value - rep.mc.value[b]) / sigma;
      rowv.flag = avg.flagged ? 'D' : ' ';
      rep.rows.push_back(rowv);
      if (avg.flagged) {
        ++rep.flagged;
      } else {
        ++rep.unflagged;
        if (std::abs(rowv.z) <= 3.0) ++pass;
      }
    }
  }
  rep.unflagged_pass_fraction = rep.unflagged > 0 ? static_cast<double>(pass) / rep.unflagged : 1.0;
  for (int ip = 0; ip < cfg.bins; ++ip)
    for (int iq = 0; iq < cfg.bins; ++iq)
      rep.localized.total_mass += rep.localized.value[rep.localized.idx(ip, iq)] *
                                  (rep.mc.p_edges[ip + 1] - rep.mc.p_edges[ip]) *
                                  (rep.mc.q_edges[iq + 1] - rep.mc.q_edges[iq]);
  return rep;
}

}  // namespace resdelta
