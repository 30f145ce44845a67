#pragma once

#include <vector>

#include "nlmimo/common.hpp"

namespace nlmimo {

enum class QuantizerKind { uniform, lloyd_max };

/// Scalar quantizer for one real dimension, designed for a unit-variance
/// Gaussian input. Both kinds carry explicit levels and thresholds;
/// `thresholds.size() == levels.size() - 1`.
struct QuantizerSpec {
  int bits = 1;
  QuantizerKind kind = QuantizerKind::uniform;
  double step = 0.0;  // uniform only
  std::vector<double> levels;
  std::vector<double> thresholds;
  double mse = 0.0;  // E[(Q(x) - x)^2], x ~ N(0, 1)
  bool converged = true;
  int iterations = 0;

  int num_levels() const { return static_cast<int>(levels.size()); }
};

/// Overloaded uniform quantizer: thresholds at k*step, levels at odd
/// multiples of step/2.
QuantizerSpec make_uniform_quantizer(int bits, double step);

/// Analytic MSE of a level/threshold quantizer for x ~ N(0, 1).
double gaussian_quantizer_mse(const std::vector<double>& levels,
                              const std::vector<double>& thresholds);

/// Step minimizing the Gaussian MSE (golden-section search on [0.01, 4]).
QuantizerSpec design_uniform_quantizer(int bits);

/// Lloyd iteration (centroid / midpoint) started from the uniform optimum.
QuantizerSpec design_lloyd_max(int bits, double tol = 1e-10, int max_iter = 10000);

/// Index of the bin containing x; a value on a threshold goes to the upper bin.
int quantizer_bin(double x, const QuantizerSpec& q);

double quantize_real(double x, const QuantizerSpec& q);

/// I and Q quantized independently.
Complex apply_quantizer(Complex y, const QuantizerSpec& q);

/// E[Q(x)^2] for x ~ N(0, 1).
double gaussian_quantizer_output_power(const QuantizerSpec& q);

/// E[Q(x) x] for x ~ N(0, 1).
double gaussian_quantizer_correlation(const QuantizerSpec& q);

}  // namespace nlmimo
