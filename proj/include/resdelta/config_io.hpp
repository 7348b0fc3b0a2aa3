#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "resdelta/delta.hpp"
#include "resdelta/horn.hpp"
#include "resdelta/testfunction.hpp"

namespace resdelta {

// One identity-verification case: P = a prod (x - u_i), Q = b prod (x - v_j),
// with a product-Gaussian test function centered at (u, v) of the given width.
struct VerifyCase {
  double a = 1.0, b = 1.0;
  std::vector<double> u, v;
  double width = 1.0;
};

struct VerifyJob {
  std::uint64_t seed = 0;
  double eta = 1e-3;
  double rel_tolerance = 1e-6;
  double min_separation = 0.5;
  bool mollified = false;
  long mollified_samples = 1000000;
  std::vector<VerifyCase> cases;
};

struct IntegrateJob {
  std::uint64_t seed = 0;
  double eta = 1e-3;
  IntegrationMethod method = IntegrationMethod::AdaptiveQuadrature;
  long samples = 200000;
  std::vector<AffineFunction> factors;
  TestFunction phi;
};

// Strict JSON parsing: unknown keys anywhere reject the document, types must
// match exactly, and the seed is mandatory.  All failures throw ConfigError.
VerifyJob parse_verify_config(const std::string& text);
HornConfig parse_horn_config(const std::string& text);
IntegrateJob parse_integrate_config(const std::string& text);

// Whole-file read; throws ConfigError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double x);

}  // namespace resdelta
