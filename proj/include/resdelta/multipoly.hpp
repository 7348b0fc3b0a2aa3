#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <vector>

namespace resdelta {

// Sparse multivariate polynomial with exact rational coefficients.
// Variables are indexed 0..m-1 for u_1..u_m and m..m+n-1 for v_1..v_n.
// Terms with zero coefficient are never stored.
class MultiPoly {
 public:
  using Exponents = std::vector<int>;

  explicit MultiPoly(int nvars) : nvars_(nvars) {}

  static MultiPoly constant(int nvars, const mpq_class& c);
  static MultiPoly variable(int nvars, int index);

  int nvars() const { return nvars_; }
  const std::map<Exponents, mpq_class>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int total_degree() const;

  void add_term(const Exponents& e, const mpq_class& c);

  MultiPoly operator+(const MultiPoly& o) const;
  MultiPoly operator-(const MultiPoly& o) const;
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly scaled(const mpq_class& c) const;

  bool operator==(const MultiPoly& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }

  // Exact division by (x_i - x_j) for independent variables i != j.
  // Throws DivisibilityFailure when the remainder is nonzero.
  MultiPoly divide_by_variable_difference(int i, int j) const;

  mpq_class eval(const std::vector<mpq_class>& point) const;

  // Canonical rendering: graded lexicographic monomial order (total degree
  // first, then exponents with u-variables taking priority over v-variables),
  // highest first.  sizeA fixes how many leading variables print as u's.
  std::string to_string(int sizeA) const;

 private:
  int nvars_;
  std::map<Exponents, mpq_class> terms_;
};

// Exact expansion of the multiplier J for the given family sizes and leading
// coefficients: the defining sum is brought over the common denominator
// prod_{j<k} (v_j - v_k) and the numerator is divided out exactly, factor by
// factor.  The division succeeding is itself the point of the construction.
MultiPoly expand_j_symbolic(int sizeA, int sizeB, const mpq_class& a, const mpq_class& b);

// The defining sum of J evaluated in exact rational arithmetic at an explicit
// point; the independent oracle expand_j_symbolic is tested against.
mpq_class j_multiplier_exact(const std::vector<mpq_class>& u, const std::vector<mpq_class>& v,
                             const mpq_class& a, const mpq_class& b);

}  // namespace resdelta
