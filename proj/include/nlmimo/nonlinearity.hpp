#pragma once

#include "nlmimo/common.hpp"

namespace nlmimo {

/// Where a memoryless stage sees the signal: on the complex envelope (polar,
/// phase preserving) or on I and Q independently.
enum class StageDomain { passband, baseband };

/// Hard clipper: G*y below the power threshold, magnitude clamped above it.
/// `per_dimension` clips I and Q separately, with P_th referred to the power
/// of one real dimension (clip level sqrt(P_th / 2) per rail for unit input).
struct Limiter {
  double gain = 1.0;
  double power_threshold = 1.0;
  bool per_dimension = false;

  Limiter(double g, double p_th, bool per_dim = false);
};

/// Saturated third-order polynomial parametrized by its 1 dB compression
/// point (linear power, referred to the stage input).
struct ThirdOrderSaturated {
  double p1db = 1.0;
  StageDomain domain = StageDomain::passband;

  ThirdOrderSaturated(double p1db_linear, StageDomain d);
};

Complex apply_limiter(Complex y, const Limiter& lim);

/// Real scalar third-order nonlinearity with clamp at +/- sqrt(p1db).
double third_order_real(double x, double p1db);

/// Envelope form: compression driven by |y|^2.
Complex apply_third_order_complex(Complex y, double p1db);

/// I/Q form: the real scalar curve applied to Re(y) and Im(y) independently.
Complex apply_third_order_baseband(Complex y, double p1db);

Complex apply_third_order(Complex y, const ThirdOrderSaturated& stage);

/// Fundamental gain compression (dB, positive = compressed) of the real scalar
/// curve driven by A*cos(wt), measured with a single-bin DFT over
/// `samples_per_period` points.
double measure_p1db(const ThirdOrderSaturated& stage, double amplitude,
                    int samples_per_period = 4096);

}  // namespace nlmimo
