#include <doctest.h>

#include <cmath>

#include "resdelta/delta.hpp"
#include "resdelta/errors.hpp"
#include "resdelta/quadrature.hpp"
#include "resdelta/rng.hpp"

using namespace resdelta;

namespace {

const double inv_sqrt_2pi = 0.3989422804014327;

AffineFunction af(std::vector<double> g, double off) { return AffineFunction{std::move(g), off}; }

IntegrationConfig quad_cfg() {
  IntegrationConfig cfg;
  cfg.method = IntegrationMethod::AdaptiveQuadrature;
  return cfg;
}

}  // namespace

TEST_CASE("factorization validation") {
  CHECK_NOTHROW(validate_factorization({af({1, 0}, 0), af({0, 1}, 0)}));
  CHECK_NOTHROW(validate_factorization({af({1, 0}, 0), af({1, 0}, -1)}));
  CHECK_THROWS_AS(validate_factorization({af({1, 0}, 0), af({2, 0}, 0)}), ProportionalFactors);
  CHECK_THROWS_AS(validate_factorization({af({0, 0}, 1), af({0, 1}, 0)}), ZeroGradient);
  CHECK_THROWS_AS(validate_factorization({}), ConfigError);
  CHECK_THROWS_AS(validate_factorization({af({1}, 0), af({0, 1}, 0)}), ConfigError);

  try {
    validate_factorization({af({1, 0}, 0), af({0, 1}, 0), af({-3, 0}, 0)});
    CHECK(false);
  } catch (const ProportionalFactors& e) {
    CHECK(e.i == 0);
    CHECK(e.j == 2);
  }
}

TEST_CASE("chart geometry") {
  AffineFunction f = af({1.0, 2.0, -2.0}, 3.0);
  for (const std::vector<int>& pref :
       {std::vector<int>{}, std::vector<int>{2, 0, 1}, std::vector<int>{1, 2, 0}}) {
    HyperplaneChart ch = HyperplaneChart::build(f, 0, pref);
    REQUIRE(ch.basis.size() == 2);
    CHECK(f(ch.base_point) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ch.density == doctest::Approx(1.0 / 3.0));
    for (std::size_t i = 0; i < ch.basis.size(); ++i) {
      double ng = 0, nb = 0;
      for (int k = 0; k < 3; ++k) {
        ng += ch.basis[i][k] * f.gradient[k];
        nb += ch.basis[i][k] * ch.basis[i][k];
      }
      CHECK(std::abs(ng) <= 1e-12);
      CHECK(nb == doctest::Approx(1.0));
      for (std::size_t j = i + 1; j < ch.basis.size(); ++j) {
        double dot = 0;
        for (int k = 0; k < 3; ++k) dot += ch.basis[i][k] * ch.basis[j][k];
        CHECK(std::abs(dot) <= 1e-12);
      }
    }
    std::vector<double> y = ch.point({0.7, -1.3});
    CHECK(f(y) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("chart independence of the surface integral") {
  // Integrate phi over the same hyperplane through two different orthonormal
  // completions; the chart must be intrinsic.
  AffineFunction f = af({1.0, -1.0, 0.5}, 0.7);
  TestFunction phi = TestFunction::gaussian({0.2, -0.1, 0.4}, 1.0);
  auto surface = [&](const HyperplaneChart& ch) {
    auto inner = [&](double s1) {
      return gk_integrate(
          [&](double s2) {
            return phi.value(ch.point({s1, s2}));
          },
          -12.0, 12.0, 1e-12);
    };
    return ch.density * gk_integrate(inner, -12.0, 12.0, 1e-12);
  };
  double v1 = surface(HyperplaneChart::build(f, 0, {}));
  double v2 = surface(HyperplaneChart::build(f, 0, {2, 1, 0}));
  CHECK(std::abs(v1 - v2) <= 1e-10 * std::abs(v1));
}

TEST_CASE("single-factor integrals against Gaussians") {
  TestFunction phi = TestFunction::gaussian({0, 0}, 1.0);
  CHECK(delta_affine_integrate(af({1, 0}, 0), phi, quad_cfg()) ==
        doctest::Approx(inv_sqrt_2pi).epsilon(1e-9));
  CHECK(delta_affine_integrate(af({2, 0}, 0), phi, quad_cfg()) ==
        doctest::Approx(inv_sqrt_2pi / 2).epsilon(1e-9));

  TestFunction bump = TestFunction::bump({0, 0}, 1.0);
  CHECK(delta_affine_integrate(af({1, 0}, -5), bump, quad_cfg()) == 0.0);
}

TEST_CASE("quadrature, Monte Carlo, and closed form agree") {
  TestFunction phi = TestFunction::gaussian({0.3, -0.2}, 0.9);
  AffineFunction f = af({1.0, 1.0}, -0.4);
  IntegrationConfig closed = quad_cfg();
  closed.method = IntegrationMethod::ExactClosedForm;
  double exact = delta_affine_integrate(f, phi, closed);
  CHECK(delta_affine_integrate(f, phi, quad_cfg()) == doctest::Approx(exact).epsilon(1e-9));

  IntegrationConfig mc = quad_cfg();
  mc.method = IntegrationMethod::MonteCarlo;
  mc.samples = 400000;
  mc.seed = 5;
  CHECK(delta_affine_integrate(f, phi, mc) == doctest::Approx(exact).epsilon(0.02));
}

TEST_CASE("scaling of a single factor") {
  Rng rng(17);
  for (int it = 0; it < 100; ++it) {
    int n = rng.uniform_int(1, 3);
    std::vector<double> g(n);
    for (double& x : g) x = rng.uniform(-2, 2);
    double norm2 = 0;
    for (double x : g) norm2 += x * x;
    if (norm2 < 0.01) {
      g[0] += 1.0;
    }
    AffineFunction f{g, rng.uniform(-1, 1)};
    std::vector<double> c(n);
    for (double& x : c) x = rng.uniform(-1, 1);
    TestFunction phi = TestFunction::gaussian(c, rng.uniform(0.6, 1.4));
    double lambda = rng.uniform(0.2, 3.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
    AffineFunction fs{f.gradient, f.offset};
    for (double& x : fs.gradient) x *= lambda;
    fs.offset *= lambda;
    IntegrationConfig closed = quad_cfg();
    closed.method = IntegrationMethod::ExactClosedForm;
    double base = delta_affine_integrate(f, phi, closed);
    double scaled = delta_affine_integrate(fs, phi, closed);
    CHECK(std::abs(scaled - base / std::abs(lambda)) <= 1e-9 * std::abs(base));
  }
}

TEST_CASE("two parallel lines against a Gaussian") {
  AffineFactorization fac = validate_factorization({af({1, 0}, 0), af({1, 0}, -1)});
  TestFunction phi = TestFunction::gaussian({0, 0}, 1.0);
  IntegralResult r = delta_product_integrate(fac, phi, quad_cfg());
  REQUIRE(!r.divergent());
  double expected = (1.0 + std::exp(-0.5)) * inv_sqrt_2pi;
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("crossing lines diverge against a Gaussian") {
  AffineFactorization fac = validate_factorization({af({1, 0}, 0), af({0, 1}, 0)});
  TestFunction phi = TestFunction::gaussian({0, 0}, 1.0);
  IntegralResult r = delta_product_integrate(fac, phi, quad_cfg());
  REQUIRE(r.divergent());
  CHECK(r.divergent_pair == std::pair<int, int>{0, 1});

  // A bump clear of both lines integrates to zero but stays finite.
  TestFunction bump = TestFunction::bump({3, 3}, 1.0);
  IntegralResult rb = delta_product_integrate(fac, bump, quad_cfg());
  REQUIRE(!rb.divergent());
  CHECK(rb.value == 0.0);

  // A bump meeting one line but not the crossing stays finite and matches a
  // direct 1-D reduction of the chart integral.
  TestFunction side = TestFunction::bump({0, 3}, 1.0);
  IntegralResult rs = delta_product_integrate(fac, side, quad_cfg());
  REQUIRE(!rs.divergent());
  double oracle = gk_integrate(
      [&](double t) {
        return side.factor(0, 0.0) * side.factor(1, t) / std::abs(t);
      },
      2.0, 4.0, 1e-12);
  CHECK(rs.value == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("divergence probe geometry") {
  AffineFactorization axes = validate_factorization({af({1, 0}, 0), af({0, 1}, 0)});
  DivergenceReport rep = divergence_probe(axes, TestFunction::gaussian({5, -7}, 2.0));
  CHECK(rep.any_divergent());
  CHECK(rep.first_divergent() == std::pair<int, int>{0, 1});

  AffineFactorization parallel = validate_factorization({af({1, 0}, 0), af({1, 0}, -1)});
  DivergenceReport rp = divergence_probe(parallel, TestFunction::gaussian({0, 0}, 1.0));
  CHECK(!rp.any_divergent());
  REQUIRE(rp.pairs.size() == 1);
  CHECK(!rp.pairs[0].loci_intersect);

  DivergenceReport rb = divergence_probe(axes, TestFunction::bump({3, 0}, 1.0));
  CHECK(!rb.any_divergent());
  REQUIRE(rb.pairs.size() == 1);
  CHECK(rb.pairs[0].loci_intersect);
}

TEST_CASE("factorization independence") {
  TestFunction phi = TestFunction::gaussian({0, 0}, 1.0);
  AffineFactorization fac = validate_factorization({af({1, 0}, 0), af({1, 0}, -1)});
  AffineFactorization swapped = validate_factorization({af({1, 0}, -1), af({1, 0}, 0)});
  AffineFactorization rescaled =
      validate_factorization({af({2.5, 0}, 0), af({0.4, 0}, -0.4)});  // lambda, 1/lambda
  double base = delta_product_integrate(fac, phi, quad_cfg()).value;
  CHECK(delta_product_integrate(swapped, phi, quad_cfg()).value ==
        doctest::Approx(base).epsilon(1e-9));
  CHECK(delta_product_integrate(rescaled, phi, quad_cfg()).value ==
        doctest::Approx(base).epsilon(1e-9));

  AffineFactorization axes = validate_factorization({af({1, 0}, 0), af({0, 1}, 0)});
  AffineFactorization axes_rs = validate_factorization({af({0, -2}, 0), af({-0.5, 0}, 0)});
  TestFunction side = TestFunction::bump({0, 3}, 1.0);
  double b1 = delta_product_integrate(axes, side, quad_cfg()).value;
  double b2 = delta_product_integrate(axes_rs, side, quad_cfg()).value;
  CHECK(b2 == doctest::Approx(b1).epsilon(1e-9));
}

TEST_CASE("one-dimensional sums") {
  RootPoly pm{1.0, {1.0, -1.0}, Family::A};
  CHECK(delta_1d_integrate(pm, [](double x) { return x * x; }) == doctest::Approx(1.0));

  TestFunction phi = TestFunction::gaussian({0}, 1.0);
  CHECK(delta_1d_integrate(RootPoly{1.0, {0.0}, Family::A}, phi) ==
        doctest::Approx(inv_sqrt_2pi));
  CHECK(delta_1d_integrate(RootPoly{3.0, {0.0}, Family::A}, phi) ==
        doctest::Approx(inv_sqrt_2pi / 3));
  CHECK_THROWS_AS(delta_1d_integrate(RootPoly{1.0, {0.5, 0.5}, Family::A}, phi), RepeatedRoot);
}

TEST_CASE("1-D product measure matches the root sum") {
  Rng rng(23);
  for (int it = 0; it < 20; ++it) {
    int k = rng.uniform_int(1, 3);
    std::vector<double> roots;
    while (static_cast<int>(roots.size()) < k) {
      double r = rng.uniform(-2, 2);
      bool ok = true;
      for (double s : roots)
        if (std::abs(r - s) < 0.4) ok = false;
      if (ok) roots.push_back(r);
    }
    double lead = rng.uniform(0.5, 2.0);
    std::vector<AffineFunction> factors;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      double g = (i == 0) ? lead : 1.0;
      factors.push_back(af({g}, -g * roots[i]));
    }
    RootPoly P{lead, roots, Family::A};
    TestFunction phi = TestFunction::gaussian({rng.uniform(-1, 1)}, rng.uniform(0.7, 1.3));
    IntegralResult r = delta_product_integrate(validate_factorization(factors), phi, quad_cfg());
    REQUIRE(!r.divergent());
    CHECK(r.value == doctest::Approx(delta_1d_integrate(P, phi)).epsilon(1e-9));
  }
}

TEST_CASE("monotonicity in the test function") {
  AffineFunction f = af({1, 0}, -0.2);
  // Bumps at a common center are pointwise ordered by half-width.
  TestFunction small = TestFunction::bump({0, 0}, 0.6);
  TestFunction large = TestFunction::bump({0, 0}, 1.2);
  double vs = delta_affine_integrate(f, small, quad_cfg());
  double vl = delta_affine_integrate(f, large, quad_cfg());
  CHECK(vs >= 0.0);
  CHECK(vs <= vl);

  AffineFactorization fac = validate_factorization({af({1, 0}, 0), af({1, 0}, -1)});
  double ps = delta_product_integrate(fac, small, quad_cfg()).value;
  double pl = delta_product_integrate(fac, large, quad_cfg()).value;
  CHECK(ps >= 0.0);
  CHECK(ps <= pl);
}

TEST_CASE("root-space measure of one polynomial") {
  TestFunction phi1 = TestFunction::gaussian({0.4}, 1.0);
  IntegrationConfig cfg = quad_cfg();
  IntegralResult r1 = delta_Px_integrate(RootPoly{1.0, {9.0}, Family::A}, 0.25, phi1, cfg);
  REQUIRE(!r1.divergent());
  CHECK(r1.value == doctest::Approx(phi1.factor(0, 0.25)).epsilon(1e-12));
  IntegralResult r2 = delta_Px_integrate(RootPoly{2.0, {9.0}, Family::A}, 0.25, phi1, cfg);
  CHECK(r2.value == doctest::Approx(phi1.factor(0, 0.25) / 2).epsilon(1e-12));

  TestFunction phi2 = TestFunction::bump({0, 3}, 1.0);
  IntegralResult r3 = delta_Px_integrate(RootPoly{1.0, {0.0, 0.0}, Family::A}, 0.0, phi2, cfg);
  REQUIRE(!r3.divergent());
  double oracle = gk_integrate(
      [&](double s) { return phi2.factor(0, 0.0) * phi2.factor(1, s) / std::abs(s); }, 2.0, 4.0,
      1e-12);
  CHECK(r3.value == doctest::Approx(oracle).epsilon(1e-8));

  // Gaussian phi with eta = 0: the weight 1/|x - u_2| is non-integrable.
  TestFunction gphi = TestFunction::gaussian({0, 0}, 1.0);
  IntegrationConfig full = cfg;
  full.eta = 0.0;
  IntegralResult r4 = delta_Px_integrate(RootPoly{1.0, {0.0, 0.0}, Family::A}, 0.0, gphi, full);
  CHECK(r4.divergent());
}

TEST_CASE("product rule") {
  TestFunction phi = TestFunction::gaussian({0, 0}, 1.0);
  AffineFactorization f = validate_factorization({af({1, 0}, 0)});
  AffineFactorization g = validate_factorization({af({1, 0}, -1)});
  auto [lhs, rhs] = product_rule_check(f, g, phi, quad_cfg());
  REQUIRE(!lhs.divergent());
  REQUIRE(!rhs.divergent());
  double expected = (1.0 + std::exp(-0.5)) * inv_sqrt_2pi;
  CHECK(lhs.value == doctest::Approx(expected).epsilon(1e-6));
  CHECK(std::abs(lhs.value - rhs.value) <= 1e-8 * std::abs(lhs.value));

  AffineFactorization fx = validate_factorization({af({1, 0}, 0)});
  AffineFactorization gy = validate_factorization({af({0, 1}, 0)});
  TestFunction bump = TestFunction::bump({3, 3}, 1.0);
  auto [l2, r2] = product_rule_check(fx, gy, bump, quad_cfg());
  CHECK(l2.value == 0.0);
  CHECK(r2.value == 0.0);

  AffineFactorization gcross = validate_factorization({af({0, 1}, 0)});
  auto [l3, r3] = product_rule_check(fx, gcross, phi, quad_cfg());
  CHECK(l3.divergent());
  CHECK(r3.divergent());
}
