#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "resdelta/delta.hpp"
#include "resdelta/poly.hpp"
#include "resdelta/testfunction.hpp"

namespace resdelta {

// The hyperplane {u_alpha = v_beta} in the combined root space.
struct SupportHyperplane {
  int alpha = 0;
  int beta = 0;
};

// Gaussian approximate identity of standard deviation epsilon.
struct MollifierSpec {
  double epsilon = 0.1;
};

struct MollifiedEstimate {
  double epsilon = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct VerifyOptions {
  IntegrationConfig integration;
  double rel_tol = 1e-6;        // cross-method agreement target
  double min_separation = 0.5;  // same-family root gate for Gaussian phi
  bool run_mollified = false;
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  long mollified_samples = 1000000;
};

struct IdentityReport {
  IntegralResult lhs_localized;
  IntegralResult lhs_direct;
  IntegralResult rhs_localized;
  std::vector<MollifiedEstimate> mollified;
  double abs_discrepancy = 0.0;
  double rel_discrepancy = 0.0;
  bool divergent = false;
  bool pass = false;
  std::string note;
};

// phi lives on R^(degP + degQ): coordinates [0, degP) form the u-block,
// [degP, degP+degQ) the v-block.  Divergent pair indices below refer to
// these combined coordinates.

// Sum over (alpha, beta) of the integral over {u_alpha = v_beta} of
// phi / (|P'(u_alpha)| |Q'(v_beta)|), reduced to a line integral of
// phi_alpha phi_beta times one punctured kernel per remaining coordinate.
IntegralResult lhs_localized(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                             const IntegrationConfig& cfg);

// Outer quadrature over x of the product of the two per-polynomial measure
// pairings (delta_Px_integrate on each block of phi).
IntegralResult lhs_direct(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                          const IntegrationConfig& cfg);

// Sum over (alpha, beta) of the integral over {u_alpha = v_beta} of
// phi * |J(u,v)| / |J_ab(u,v)|, with both factors evaluated numerically at
// every quadrature node (no algebraic simplification of the ratio).
IntegralResult rhs_localized(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                             const IntegrationConfig& cfg);

// Signed a^degQ b^degP prod over pairs (a',b') != (h.alpha, h.beta) of
// (u_{a'} - v_{b'}).
double j_ab(const std::vector<double>& u, const std::vector<double>& v,
            const SupportHyperplane& h, double a, double b);

// On {u_alpha = v_beta}: (|J|/|J_ab|, 1/(|P'(v_beta)| |Q'(u_alpha)|)).
// Throws OffSupport unless u[h.alpha] == v[h.beta] exactly.
std::pair<double, double> pointwise_ratio_check(const std::vector<double>& u,
                                                const std::vector<double>& v,
                                                const SupportHyperplane& h, double a, double b);

// Monte Carlo estimate of the fully mollified integral
//   int dx du dv theta_eps(P_x(u)) theta_eps(Q_x(v)) phi(u, v),
// sampling (u, v) from the Gaussian phi and x from a root-adapted mixture.
MollifiedEstimate mollified_oracle(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                                   const MollifierSpec& spec, long sample_count,
                                   std::uint64_t seed);

IdentityReport verify_identity(const RootPoly& P, const RootPoly& Q, const TestFunction& phi,
                               const VerifyOptions& opts);

}  // namespace resdelta
