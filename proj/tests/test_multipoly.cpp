#include <doctest.h>

#include <gmpxx.h>

#include "resdelta/errors.hpp"
#include "resdelta/multipoly.hpp"
#include "resdelta/poly.hpp"
#include "resdelta/rng.hpp"

using namespace resdelta;

namespace {

// Distinct small rationals for exact spot checks.
std::vector<mpq_class> rational_point(Rng& rng, int nvars) {
  std::vector<mpq_class> pt(nvars);
  for (int i = 0; i < nvars; ++i) {
    mpq_class x;
    bool fresh;
    do {
      x = mpq_class(rng.uniform_int(-40, 40), 7);
      x.canonicalize();
      fresh = true;
      for (int j = 0; j < i; ++j)
        if (pt[j] == x) fresh = false;
    } while (!fresh);
    pt[i] = x;
  }
  return pt;
}

}  // namespace

TEST_CASE("size (1,1) expansion is the constant 1") {
  MultiPoly J = expand_j_symbolic(1, 1, 1, 1);
  CHECK(J.total_degree() == 0);
  CHECK(J.to_string(1) == "1");
}

TEST_CASE("size (2,2) expansion with unit leadings") {
  MultiPoly J = expand_j_symbolic(2, 2, 1, 1);
  CHECK(J.to_string(2) == "u1 + u2 - v1 - v2");

  MultiPoly expected(4);
  expected.add_term({1, 0, 0, 0}, 1);
  expected.add_term({0, 1, 0, 0}, 1);
  expected.add_term({0, 0, 1, 0}, -1);
  expected.add_term({0, 0, 0, 1}, -1);
  CHECK(J == expected);

  MultiPoly Jab = expand_j_symbolic(2, 2, mpq_class(2), mpq_class(-3));
  CHECK(Jab == expected.scaled(mpq_class(-6)));
}

TEST_CASE("size (1,2) expansion collapses to the constant -a") {
  MultiPoly J = expand_j_symbolic(1, 2, mpq_class(3, 2), 1);
  CHECK(J.total_degree() == 0);
  std::vector<mpq_class> pt{mpq_class(0), mpq_class(1), mpq_class(2)};
  CHECK(J.eval(pt) == mpq_class(-3, 2));
}

TEST_CASE("expansion equals the defining sum at rational points") {
  Rng rng(91);
  for (int sa = 1; sa <= 3; ++sa)
    for (int sb = 1; sb <= 3; ++sb) {
      mpq_class a(rng.uniform_int(1, 9), rng.uniform_int(1, 5));
      mpq_class b(-rng.uniform_int(1, 9), rng.uniform_int(1, 5));
      a.canonicalize();
      b.canonicalize();
      MultiPoly J = expand_j_symbolic(sa, sb, a, b);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<mpq_class> pt = rational_point(rng, sa + sb);
        std::vector<mpq_class> u(pt.begin(), pt.begin() + sa);
        std::vector<mpq_class> v(pt.begin() + sa, pt.end());
        CHECK(J.eval(pt) == j_multiplier_exact(u, v, a, b));
      }
    }
}

TEST_CASE("exact expansion matches the floating defining sum") {
  MultiPoly J = expand_j_symbolic(2, 2, 1, 1);
  std::vector<mpq_class> pt{mpq_class(1, 2), mpq_class(-3), mpq_class(2), mpq_class(5, 3)};
  RootPoly P{1.0, {0.5, -3.0}, Family::A};
  RootPoly Q{1.0, {2.0, 5.0 / 3.0}, Family::B};
  CHECK(J.eval(pt).get_d() == doctest::Approx(j_multiplier(P, Q)).epsilon(1e-12));
}

TEST_CASE("non-divisible quotient is rejected") {
  MultiPoly p(2);
  p.add_term({1, 0}, 1);
  p.add_term({0, 1}, 1);  // u1 + v1
  CHECK_THROWS_AS(p.divide_by_variable_difference(0, 1), DivisibilityFailure);

  MultiPoly q(2);
  q.add_term({2, 0}, 1);
  q.add_term({0, 2}, -1);  // u1^2 - v1^2
  MultiPoly quotient = q.divide_by_variable_difference(0, 1);
  MultiPoly expected(2);
  expected.add_term({1, 0}, 1);
  expected.add_term({0, 1}, 1);
  CHECK(quotient == expected);
}

TEST_CASE("canonical rendering uses graded order with u before v") {
  MultiPoly p(3);  // sizeA = 1: variables u1, v1, v2
  p.add_term({0, 1, 1}, mpq_class(1, 2));
  p.add_term({1, 0, 0}, -2);
  p.add_term({0, 0, 0}, 7);
  CHECK(p.to_string(1) == "1/2*v1*v2 - 2*u1 + 7");
}
