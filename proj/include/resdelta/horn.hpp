#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "resdelta/poly.hpp"

namespace resdelta {

// Random-rotation coefficient statistics for C = diag(alpha) + R diag(beta) R^T.
struct HornConfig {
  std::array<double, 3> alpha{};  // eigenvalues, must sum to 0
  std::array<double, 3> beta{};   // eigenvalues, must sum to 0
  long samples = 1000000;
  int bins = 20;
  // Explicit grid ranges; leave lo >= hi to use the attainable-region
  // bounding box derived from the trace bounds and the discriminant curve.
  double p_lo = 0.0, p_hi = 0.0;
  double q_lo = 0.0, q_hi = 0.0;
  std::uint64_t seed = 1;
};

void validate(const HornConfig& cfg);

struct EulerAngles {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, pi] under the sampling convention
  double psi = 0.0;    // [0, pi]
  double c = 1.0;      // cos(theta), kept explicitly so callers can pin it exactly

  static EulerAngles from_c(double phi, double c, double psi);
};

struct HornGrid {
  int bins = 0;
  std::vector<double> p_edges, q_edges;  // bins + 1 each
  std::vector<double> value;             // bins * bins, p-major
  std::vector<double> std_error;
  std::vector<char> flag;  // ' ' normal, 'D' divergence-flagged
  std::string method;
  long discriminant_violations = 0;
  double total_mass = 0.0;  // fraction of samples landing inside the grid

  int idx(int ip, int iq) const { return ip * bins + iq; }
};

// z-x-z convention: R = R_z(phi) R_x(theta) R_z(psi), with cos(theta) taken
// from the stored c (and sin(theta) = sqrt(1 - c^2) >= 0).
Eigen::Matrix3d rotation_from_euler(const EulerAngles& angles);

// Characteristic polynomial z^3 + p z + q of the traceless symmetric
// C = diag(alpha) + R diag(beta) R^T: p = -tr(C^2)/2, q = -det(C).
std::pair<double, double> char_poly_pq(const std::array<double, 3>& alpha,
                                       const std::array<double, 3>& beta,
                                       const Eigen::Matrix3d& R);

// p and q as degree-2 polynomials in c = cos(theta) at fixed (phi, psi),
// built by interpolation at three c-nodes; a fourth node certifies the
// degree bound and throws DegreeCertificateFailure if it fails.
std::pair<CoeffPoly, CoeffPoly> pq_polynomials_in_c(const std::array<double, 3>& alpha,
                                                    const std::array<double, 3>& beta, double phi,
                                                    double psi);

// (p-range, q-range) bounding the attainable coefficient region.
std::pair<std::pair<double, double>, std::pair<double, double>> attainable_box(
    const std::array<double, 3>& alpha, const std::array<double, 3>& beta);

// Histogram density of (p, q) under phi, psi ~ U[0, pi], c ~ U[-1, 1].
HornGrid mc_histogram(const HornConfig& cfg);

struct RhoValue {
  double value = 0.0;
  bool divergent = false;  // a tangential resultant zero was met
};

// Localized density: (1/2 pi^2) * integral over psi of the sum over zeros
// phi* of R(., psi) of |J(phi*)| / |dR/dphi(phi*)|, where R is the
// c-resultant of (Pc - p, Qc - q) and the common root c* must lie in [-1, 1].
RhoValue rho_localized(const HornConfig& cfg, double p, double q);

struct CompareRow {
  int ip = 0, iq = 0;
  double mc = 0.0, sigma = 0.0, localized = 0.0, z = 0.0;
  char flag = ' ';
};

struct CompareReport {
  HornGrid mc;
  HornGrid localized;  // bin-averaged localized values on the same grid
  std::vector<CompareRow> rows;
  int unflagged = 0;
  int flagged = 0;
  double unflagged_pass_fraction = 0.0;  // fraction of unflagged bins with |z| <= 3
};

CompareReport compare_report(const HornConfig& cfg);

}  // namespace resdelta
