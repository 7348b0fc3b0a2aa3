#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace resdelta {

enum class Family { A, B };

// Real polynomial in root-factored form: leading * prod_i (x - roots[i]).
// The label tags which of the two families (A or B) the polynomial belongs
// to in the two-family identities.
struct RootPoly {
  double leading = 1.0;
  std::vector<double> roots;
  Family label = Family::A;

  int degree() const { return static_cast<int>(roots.size()); }
};

// Dense coefficient form, ascending degree; coeffs.back() != 0 for a
// well-formed value of stated degree.
struct CoeffPoly {
  std::vector<double> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Roots closer than this are treated as coincident.
double root_coincidence_tolerance(const std::vector<double>& roots);

double eval(const RootPoly& p, double x);
double eval(const CoeffPoly& p, double x);

// leading * prod_{i != k} (roots[k] - roots[i]).  Throws RepeatedRoot when two
// roots coincide.
double derivative_at_root(const RootPoly& p, int k);

// a^degQ * b^degP * prod_{i,j} (u_i - v_j); zero exactly when a root is shared.
double resultant_roots(const RootPoly& P, const RootPoly& Q);

// Determinant of the Sylvester matrix; matches resultant_roots on
// corresponding inputs (independent coefficient-space route).
double resultant_sylvester(const CoeffPoly& P, const CoeffPoly& Q);

// The multiplier J in its defining sum over Q's roots:
//   J = b^(degP-1) a^(degQ-1) sum_{j} prod_{k != j} P1(v_k) / (v_j - v_k)
// with P1 the monic part of P.  Requires Q's roots pairwise distinct.
double j_multiplier(const RootPoly& P, const RootPoly& Q);

// Same sum with the roles of P and Q interchanged; satisfies
// j_multiplier = (-1)^(degP*degQ - 1) * j_tilde.
double j_tilde(const RootPoly& P, const RootPoly& Q);

// J via the derivative of the concatenated-root polynomial S = P*Q:
//   J = b^degP * (sum_j 1/S'(v_j)) * prod_j P(v_j).
// Requires all roots of S pairwise distinct.
double j_product_form(const RootPoly& P, const RootPoly& Q);

// J for degree-2 Q as a divided difference of P, evaluated through the
// symmetric functions of Q's roots only (works when those roots are complex).
double j_degree2(const RootPoly& P, const CoeffPoly& Qc);
// Coefficient-form variant for callers that never materialize P's roots.
double j_degree2(const CoeffPoly& Pc, const CoeffPoly& Qc);

// sum_k 1 / derivative_at_root(S, k); identically zero for degree >= 2.
double reciprocal_derivative_sum(const RootPoly& S);

CoeffPoly roots_to_coeffs(const RootPoly& p);

// Real roots of a degree-2 CoeffPoly, ascending, or nullopt when the
// discriminant is negative.  Cancellation-safe (larger-magnitude root first).
std::optional<std::pair<double, double>> coeffs_to_roots_quadratic(const CoeffPoly& p);

}  // namespace resdelta
