#include "resdelta/multipoly.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "resdelta/errors.hpp"

namespace resdelta {

MultiPoly MultiPoly::constant(int nvars, const mpq_class& c) {
  MultiPoly p(nvars);
  p.add_term(Exponents(nvars, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(int nvars, int index) {
  MultiPoly p(nvars);
  Exponents e(nvars, 0);
  e[index] = 1;
  p.add_term(e, 1);
  return p;
}

int MultiPoly::total_degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_)
    d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

void MultiPoly::add_term(const Exponents& e, const mpq_class& c) {
  if (c == 0) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

MultiPoly MultiPoly::operator+(const MultiPoly& o) const {
  MultiPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

MultiPoly MultiPoly::operator-(const MultiPoly& o) const {
  MultiPoly r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, -c);
  return r;
}

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  MultiPoly r(nvars_);
  Exponents e(nvars_);
  for (const auto& [e1, c1] : terms_) {
    for (const auto& [e2, c2] : o.terms_) {
      for (int k = 0; k < nvars_; ++k) e[k] = e1[k] + e2[k];
      r.add_term(e, c1 * c2);
    }
  }
  return r;
}

MultiPoly MultiPoly::scaled(const mpq_class& c) const {
  MultiPoly r(nvars_);
  if (c == 0) return r;
  for (const auto& [e, coeff] : terms_) r.terms_.emplace(e, coeff * c);
  return r;
}

MultiPoly MultiPoly::divide_by_variable_difference(int i, int j) const {
  // View the dividend as sum_k A_k(rest) * x_i^k and divide by (x_i - x_j)
  // synthetically: B_d = A_d, B_k = A_k + x_j * B_{k+1}; the remainder is the
  // dividend with x_i replaced by x_j.
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[i]);
  std::vector<MultiPoly> A(d + 1, MultiPoly(nvars_));
  for (const auto& [e, c] : terms_) {
    Exponents rest = e;
    int k = rest[i];
    rest[i] = 0;
    A[k].add_term(rest, c);
  }
  MultiPoly xj = MultiPoly::variable(nvars_, j);
  std::vector<MultiPoly> B(d + 1, MultiPoly(nvars_));
  for (int k = d; k >= 1; --k) {
    B[k] = (k == d) ? A[d] : A[k] + xj * B[k + 1];
  }
  MultiPoly remainder = A[0] + (d >= 1 ? xj * B[1] : MultiPoly(nvars_));
  if (!remainder.is_zero())
    throw DivisibilityFailure("nonzero remainder dividing by variable difference");
  MultiPoly q(nvars_);
  for (int k = 1; k <= d; ++k) {
    for (const auto& [e, c] : B[k].terms_) {
      Exponents full = e;
      full[i] += k - 1;
      q.add_term(full, c);
    }
  }
  return q;
}

mpq_class MultiPoly::eval(const std::vector<mpq_class>& point) const {
  mpq_class acc = 0;
  for (const auto& [e, c] : terms_) {
    mpq_class t = c;
    for (int k = 0; k < nvars_; ++k) {
      for (int r = 0; r < e[k]; ++r) t *= point[k];
    }
    acc += t;
  }
  return acc;
}

namespace {

// Graded lex, highest total degree first; ties broken by comparing exponent
// vectors left to right (u's come before v's by variable numbering).
bool monomial_before(const MultiPoly::Exponents& a, const MultiPoly::Exponents& b) {
  int da = std::accumulate(a.begin(), a.end(), 0);
  int db = std::accumulate(b.begin(), b.end(), 0);
  if (da != db) return da > db;
  return a > b;
}

std::string monomial_string(const MultiPoly::Exponents& e, int sizeA) {
  std::string s;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (e[k] == 0) continue;
    if (!s.empty()) s += "*";
    if (static_cast<int>(k) < sizeA)
      s += "u" + std::to_string(k + 1);
    else
      s += "v" + std::to_string(k - sizeA + 1);
    if (e[k] > 1) s += "^" + std::to_string(e[k]);
  }
  return s;
}

}  // namespace

std::string MultiPoly::to_string(int sizeA) const {
  if (terms_.empty()) return "0";
  std::vector<const std::pair<const Exponents, mpq_class>*> order;
  order.reserve(terms_.size());
  for (const auto& t : terms_) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](auto* x, auto* y) { return monomial_before(x->first, y->first); });
  std::ostringstream out;
  bool first = true;
  for (auto* t : order) {
    mpq_class c = t->second;
    bool neg = c < 0;
    if (neg) c = -c;
    if (first) {
      if (neg) out << "-";
      first = false;
    } else {
      out << (neg ? " - " : " + ");
    }
    std::string mono = monomial_string(t->first, sizeA);
    if (mono.empty()) {
      out << c.get_str();
    } else {
      if (c != 1) out << c.get_str() << "*";
      out << mono;
    }
  }
  return out.str();
}

namespace {

// prod over i<j within `indices` of (v_i - v_j), in the fixed index order.
MultiPoly ordered_difference_product(int nvars, const std::vector<int>& vars) {
  MultiPoly prod = MultiPoly::constant(nvars, 1);
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = i + 1; j < vars.size(); ++j)
      prod = prod * (MultiPoly::variable(nvars, vars[i]) - MultiPoly::variable(nvars, vars[j]));
  return prod;
}

}  // namespace

MultiPoly expand_j_symbolic(int sizeA, int sizeB, const mpq_class& a, const mpq_class& b) {
  int m = sizeA, n = sizeB;
  int nvars = m + n;
  // Monic part of P evaluated at variable v_k: prod_i (v_k - u_i).
  auto P1_at = [&](int k) {
    MultiPoly prod = MultiPoly::constant(nvars, 1);
    for (int i = 0; i < m; ++i)
      prod = prod * (MultiPoly::variable(nvars, m + k) - MultiPoly::variable(nvars, i));
    return prod;
  };

  // Numerator over the common denominator D = prod_{j<k} (v_j - v_k):
  // term j contributes (-1)^j * [prod_{k != j} P1(v_k)] * D(v without j).
  MultiPoly numerator(nvars);
  for (int j = 0; j < n; ++j) {
    MultiPoly term = MultiPoly::constant(nvars, (j % 2 == 0) ? 1 : -1);
    for (int k = 0; k < n; ++k)
      if (k != j) term = term * P1_at(k);
    std::vector<int> rest;
    for (int k = 0; k < n; ++k)
      if (k != j) rest.push_back(m + k);
    term = term * ordered_difference_product(nvars, rest);
    numerator = numerator + term;
  }

  MultiPoly quotient = numerator;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      quotient = quotient.divide_by_variable_difference(m + j, m + k);

  mpq_class scale = 1;
  for (int i = 0; i < m - 1; ++i) scale *= b;
  for (int i = 0; i < n - 1; ++i) scale *= a;
  return quotient.scaled(scale);
}

mpq_class j_multiplier_exact(const std::vector<mpq_class>& u, const std::vector<mpq_class>& v,
                             const mpq_class& a, const mpq_class& b) {
  int m = static_cast<int>(u.size()), n = static_cast<int>(v.size());
  mpq_class sum = 0;
  for (int j = 0; j < n; ++j) {
    mpq_class term = 1;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      for (int i = 0; i < m; ++i) term *= v[k] - u[i];
      term /= v[j] - v[k];
    }
    sum += term;
  }
  mpq_class scale = 1;
  for (int i = 0; i < m - 1; ++i) scale *= b;
  for (int i = 0; i < n - 1; ++i) scale *= a;
  return scale * sum;
}

}  // namespace resdelta
