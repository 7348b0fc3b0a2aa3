#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace resdelta {

enum class TestFunctionKind { Gaussian, CompactBump };

// Positive, integrable test functions in coordinate-product form.
//
// Gaussian: product over coordinates of the normal density with the given
// per-coordinate center and common width (standard deviation); integrates
// to 1 over R^n.
//
// CompactBump: prod_i max(0, 1 - ((y_i - c_i)/w)^2)^2, supported exactly on
// the centered box of half-width w.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::Gaussian;
  std::vector<double> center;
  double width = 1.0;

  static TestFunction gaussian(std::vector<double> c, double w);
  static TestFunction bump(std::vector<double> c, double w);

  int dim() const { return static_cast<int>(center.size()); }

  // One coordinate's factor; the full value is the product of these.
  double factor(int i, double yi) const;
  double value(const std::vector<double>& y) const;

  // Interval outside which coordinate i's factor is negligible (Gaussian) or
  // exactly zero (bump).  tail_sigmas controls the Gaussian cutoff.
  std::pair<double, double> coordinate_window(int i, double tail_sigmas = 10.0) const;

  // Gaussians never vanish; bumps vanish off their support box.
  bool strictly_positive() const { return kind == TestFunctionKind::Gaussian; }
};

inline TestFunction TestFunction::gaussian(std::vector<double> c, double w) {
  return TestFunction{TestFunctionKind::Gaussian, std::move(c), w};
}

inline TestFunction TestFunction::bump(std::vector<double> c, double w) {
  return TestFunction{TestFunctionKind::CompactBump, std::move(c), w};
}

inline double TestFunction::factor(int i, double yi) const {
  double z = (yi - center[i]) / width;
  if (kind == TestFunctionKind::Gaussian) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi / width * std::exp(-0.5 * z * z);
  }
  double t = 1.0 - z * z;
  return t > 0.0 ? t * t : 0.0;
}

inline double TestFunction::value(const std::vector<double>& y) const {
  double p = 1.0;
  for (int i = 0; i < dim(); ++i) p *= factor(i, y[i]);
  return p;
}

inline std::pair<double, double> TestFunction::coordinate_window(int i, double tail_sigmas) const {
  double r = (kind == TestFunctionKind::Gaussian) ? tail_sigmas * width : width;
  return {center[i] - r, center[i] + r};
}

}  // namespace resdelta
