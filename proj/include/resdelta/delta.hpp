#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "resdelta/poly.hpp"
#include "resdelta/testfunction.hpp"

namespace resdelta {

// f(y) = gradient . y + offset
struct AffineFunction {
  std::vector<double> gradient;
  double offset = 0.0;

  int dim() const { return static_cast<int>(gradient.size()); }
  double operator()(const std::vector<double>& y) const;
  double gradient_norm() const;
};

// A product of pairwise non-proportional affine functions; build through
// validate_factorization so the invariant actually holds.
struct AffineFactorization {
  std::vector<AffineFunction> factors;
  int dim() const { return factors.empty() ? 0 : factors.front().dim(); }
};

AffineFactorization validate_factorization(std::vector<AffineFunction> factors);

// Orthonormal parametrization of one factor's zero hyperplane.  The measure
// attached to the factor is (surface Lebesgue measure) * density, with
// density = 1/|gradient|.
struct HyperplaneChart {
  int factor_index = 0;
  std::vector<double> base_point;
  std::vector<std::vector<double>> basis;  // n-1 orthonormal tangent vectors
  double density = 1.0;

  // axis_preference permutes which standard basis vectors seed the
  // Gram-Schmidt completion; the default (empty) is smallest index first.
  // Any preference yields the same integrals - that is a tested property.
  static HyperplaneChart build(const AffineFunction& f, int factor_index = 0,
                               const std::vector<int>& axis_preference = {});

  std::vector<double> point(const std::vector<double>& s) const;
};

enum class IntegrationMethod { ExactClosedForm, AdaptiveQuadrature, MonteCarlo };

// eta is the singularity exclusion radius: integrals leave out the
// eta-neighbourhood of every weight singularity.  eta = 0 requests the full
// integral; a non-integrable singularity inside the test function's support
// is then reported as Divergent instead of a value.
struct IntegrationConfig {
  IntegrationMethod method = IntegrationMethod::AdaptiveQuadrature;
  long samples = 200000;
  double eta = 1e-3;
  std::uint64_t seed = 1;
  double rel_tol = 1e-9;
};

enum class IntegralStatus { Finite, Divergent };

struct IntegralResult {
  IntegralStatus status = IntegralStatus::Finite;
  double value = 0.0;
  double error_estimate = 0.0;
  std::pair<int, int> divergent_pair{-1, -1};

  bool divergent() const { return status == IntegralStatus::Divergent; }

  static IntegralResult finite(double v, double err = 0.0) {
    return {IntegralStatus::Finite, v, err, {-1, -1}};
  }
  static IntegralResult divergent_at(int i, int j) {
    return {IntegralStatus::Divergent, 0.0, 0.0, {i, j}};
  }
};

// Integral of phi against the measure of a single affine factor.
double delta_affine_integrate(const AffineFunction& f, const TestFunction& phi,
                              const IntegrationConfig& cfg);

// Integral of phi against the measure of the product: sum over factors j of
// the hyperplane integral of phi / prod_{i != j} |f_i|.
IntegralResult delta_product_integrate(const AffineFactorization& fac, const TestFunction& phi,
                                       const IntegrationConfig& cfg);

// The measure attached to x -> leading * prod (x - u_alpha) in the root
// coordinates u, paired with phi over R^degP.  Only P's degree and leading
// coefficient enter; u ranges over the whole space.
IntegralResult delta_Px_integrate(const RootPoly& P, double x, const TestFunction& phi,
                                  const IntegrationConfig& cfg);

// One-dimensional case: exact finite sum of phi(root)/|derivative| over the
// roots.  phi may be any Borel function here.
double delta_1d_integrate(const RootPoly& P, const std::function<double(double)>& phi);
double delta_1d_integrate(const RootPoly& P, const TestFunction& phi);

// Geometric divergence analysis: for each factor pair whose zero loci
// intersect, decide whether phi is bounded away from zero near the
// intersection (which makes the pair weight non-integrable).
struct DivergenceReport {
  struct PairInfo {
    int i = 0, j = 0;
    bool loci_intersect = false;
    bool divergent = false;
    std::string reason;
  };
  std::vector<PairInfo> pairs;

  bool any_divergent() const {
    for (const auto& p : pairs)
      if (p.divergent) return true;
    return false;
  }
  std::pair<int, int> first_divergent() const {
    for (const auto& p : pairs)
      if (p.divergent) return {p.i, p.j};
    return {-1, -1};
  }
};

DivergenceReport divergence_probe(const AffineFactorization& fac, const TestFunction& phi);

// Both sides of the measure product rule for the concatenation of f and g:
// lhs integrates the combined factorization, rhs integrates each part with
// the other part's reciprocal absolute product as an extra weight.
std::pair<IntegralResult, IntegralResult> product_rule_check(const AffineFactorization& f,
                                                             const AffineFactorization& g,
                                                             const TestFunction& phi,
                                                             const IntegrationConfig& cfg);

}  // namespace resdelta
