#include "resdelta/poly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "resdelta/errors.hpp"
#include "resdelta/rng.hpp"

namespace resdelta {

double root_coincidence_tolerance(const std::vector<double>& roots) {
  double m = 0.0;
  for (double r : roots) m = std::max(m, std::abs(r));
  return 1e-12 * (1.0 + m);
}

namespace {

// Product of factors in ascending order, so the result does not depend on the
// order the caller stored the roots in.
double sorted_product(std::vector<double> factors) {
  std::sort(factors.begin(), factors.end());
  double p = 1.0;
  for (double f : factors) p *= f;
  return p;
}

void require_distinct(const std::vector<double>& roots, const char* what) {
  double tol = root_coincidence_tolerance(roots);
  std::vector<double> s = roots;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] - s[i - 1] < tol) throw RepeatedRoot(what);
}

}  // namespace

double eval(const RootPoly& p, double x) {
  std::vector<double> factors;
  factors.reserve(p.roots.size());
  for (double r : p.roots) factors.push_back(x - r);
  return p.leading * sorted_product(std::move(factors));
}

double eval(const CoeffPoly& p, double x) {
  double acc = 0.0;
  for (std::size_t i = p.coeffs.size(); i-- > 0;) acc = acc * x + p.coeffs[i];
  return acc;
}

double derivative_at_root(const RootPoly& p, int k) {
  require_distinct(p.roots, "derivative_at_root: coincident roots");
  std::vector<double> factors;
  for (int i = 0; i < p.degree(); ++i)
    if (i != k) factors.push_back(p.roots[k] - p.roots[i]);
  return p.leading * sorted_product(std::move(factors));
}

double resultant_roots(const RootPoly& P, const RootPoly& Q) {
  std::vector<double> factors;
  factors.reserve(P.roots.size() * Q.roots.size());
  for (double u : P.roots)
    for (double v : Q.roots) factors.push_back(u - v);
  double scale = std::pow(P.leading, Q.degree()) * std::pow(Q.leading, P.degree());
  return scale * sorted_product(std::move(factors));
}

namespace {

template <typename Matrix>
double sylvester_det(const CoeffPoly& P, const CoeffPoly& Q, int m, int n) {
  Matrix S = Matrix::Zero(m + n, m + n);
  // n rows of P's coefficients (descending), then m rows of Q's.
  for (int r = 0; r < n; ++r)
    for (int k = 0; k <= m; ++k) S(r, r + k) = P.coeffs[m - k];
  for (int r = 0; r < m; ++r)
    for (int k = 0; k <= n; ++k) S(n + r, r + k) = Q.coeffs[n - k];
  return Eigen::FullPivLU<Matrix>(S).determinant();
}

}  // namespace

double resultant_sylvester(const CoeffPoly& P, const CoeffPoly& Q) {
  int m = P.degree(), n = Q.degree();
  if (m < 1 || n < 1) throw DegreeMismatch("resultant_sylvester: degree >= 1 required");
  // Fixed-size paths keep the hot small cases off the heap.
  switch (m + n) {
    case 2:
      return sylvester_det<Eigen::Matrix2d>(P, Q, m, n);
    case 3:
      return sylvester_det<Eigen::Matrix3d>(P, Q, m, n);
    case 4:
      return sylvester_det<Eigen::Matrix4d>(P, Q, m, n);
    default:
      return sylvester_det<Eigen::MatrixXd>(P, Q, m, n);
  }
}

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (; k > 0; --k) r *= x;
  return r;
}

}  // namespace

double j_multiplier(const RootPoly& P, const RootPoly& Q) {
  int m = P.degree(), n = Q.degree();
  // Allocation-free paths for the small cases that dominate quadrature inner
  // loops; same formula, plain left-to-right products.
  if (n == 1) return ipow(Q.leading, m - 1);
  if (n == 2) {
    double v0 = Q.roots[0], v1 = Q.roots[1];
    if (std::abs(v0 - v1) < root_coincidence_tolerance(Q.roots))
      throw RepeatedRoot("j_multiplier: coincident roots in second family");
    double p0 = 1.0, p1 = 1.0;
    for (double ui : P.roots) {
      p0 *= v0 - ui;
      p1 *= v1 - ui;
    }
    return ipow(Q.leading, m - 1) * ipow(P.leading, n - 1) * ((p1 - p0) / (v0 - v1));
  }
  require_distinct(Q.roots, "j_multiplier: coincident roots in second family");
  const std::vector<double>& u = P.roots;
  const std::vector<double>& v = Q.roots;
  KahanSum sum;
  for (int j = 0; j < n; ++j) {
    std::vector<double> factors;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      for (double ui : u) factors.push_back(v[k] - ui);
      factors.push_back(1.0 / (v[j] - v[k]));
    }
    sum.add(sorted_product(std::move(factors)));
  }
  return std::pow(Q.leading, m - 1) * std::pow(P.leading, n - 1) * sum.value();
}

double j_tilde(const RootPoly& P, const RootPoly& Q) {
  require_distinct(P.roots, "j_tilde: coincident roots in first family");
  RootPoly Pswap{Q.leading, Q.roots, Family::A};
  RootPoly Qswap{P.leading, P.roots, Family::B};
  return j_multiplier(Pswap, Qswap);
}

double j_product_form(const RootPoly& P, const RootPoly& Q) {
  std::vector<double> all = P.roots;
  all.insert(all.end(), Q.roots.begin(), Q.roots.end());
  require_distinct(all, "j_product_form: repeated root in concatenated family");
  RootPoly S{P.leading * Q.leading, all, Family::A};
  KahanSum recip;
  int m = P.degree();
  for (int j = 0; j < Q.degree(); ++j)
    recip.add(1.0 / derivative_at_root(S, m + j));
  double prod = 1.0;
  for (double vj : Q.roots) prod *= eval(P, vj);
  return std::pow(Q.leading, m) * recip.value() * prod;
}

double j_degree2(const CoeffPoly& Pc, const CoeffPoly& Qc) {
  if (Qc.degree() != 2) throw DegreeMismatch("j_degree2: second polynomial must have degree 2");
  double b2 = Qc.coeffs[2];
  double e1 = -Qc.coeffs[1] / b2;  // v' + v''
  double e2 = Qc.coeffs[0] / b2;   // v' v''
  // Divided difference (P(v') - P(v''))/(v' - v'') = sum_k c_k h_{k-1}(v',v'')
  // with h_j the complete homogeneous symmetric polynomials:
  //   h_0 = 1, h_j = e1 h_{j-1} - e2 h_{j-2}.
  double h_prev = 0.0, h = 1.0;
  double dd = 0.0;
  int degP = Pc.degree();
  for (int k = 1; k <= degP; ++k) {
    dd += Pc.coeffs[k] * h;
    double h_next = e1 * h - e2 * h_prev;
    h_prev = h;
    h = h_next;
  }
  return -std::pow(b2, degP - 1) * dd;
}

double j_degree2(const RootPoly& P, const CoeffPoly& Qc) {
  return j_degree2(roots_to_coeffs(P), Qc);
}

double reciprocal_derivative_sum(const RootPoly& S) {
  if (S.degree() < 2) throw DegreeMismatch("reciprocal_derivative_sum: degree >= 2 required");
  // derivative_at_root rejects coincident roots.
  std::vector<int> order(S.roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return S.roots[a] < S.roots[b]; });
  KahanSum sum;
  for (int k : order) sum.add(1.0 / derivative_at_root(S, k));
  return sum.value();
}

CoeffPoly roots_to_coeffs(const RootPoly& p) {
  std::vector<double> roots = p.roots;
  std::sort(roots.begin(), roots.end());
  std::vector<double> c{p.leading};
  for (double r : roots) {
    c.push_back(0.0);
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] = c[k - 1] - r * c[k];
    c[0] = -r * c[0];
  }
  return CoeffPoly{std::move(c)};
}

std::optional<std::pair<double, double>> coeffs_to_roots_quadratic(const CoeffPoly& p) {
  if (p.degree() != 2) throw DegreeMismatch("coeffs_to_roots_quadratic: degree 2 required");
  double a = p.coeffs[2], b = p.coeffs[1], c = p.coeffs[0];
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  double s = std::sqrt(disc);
  double qf = -0.5 * (b + (b >= 0.0 ? s : -s));
  double r1, r2;
  if (qf == 0.0) {  // b == 0 and disc == 0, or c == 0 with b sign quirk
    r1 = 0.0;
    r2 = -b / a;
  } else {
    r1 = qf / a;
    r2 = c / qf;
  }
  if (r1 > r2) std::swap(r1, r2);
  return std::make_pair(r1, r2);
}

}  // namespace resdelta
