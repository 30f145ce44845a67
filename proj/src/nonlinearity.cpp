#include "nlmimo/nonlinearity.hpp"

#include <algorithm>

namespace nlmimo {

namespace {
constexpr double kCompressionCoeff = 0.44;
}

Limiter::Limiter(double g, double p_th, bool per_dim)
    : gain(g), power_threshold(p_th), per_dimension(per_dim) {
  if (!(g > 0.0) || !(p_th > 0.0)) {
    throw std::invalid_argument("limiter gain and threshold must be positive");
  }
}

ThirdOrderSaturated::ThirdOrderSaturated(double p1db_linear, StageDomain d)
    : p1db(p1db_linear), domain(d) {
  if (!(p1db_linear > 0.0)) throw std::invalid_argument("p1db must be positive");
}

Complex apply_limiter(Complex y, const Limiter& lim) {
  const Complex amplified = lim.gain * y;
  if (lim.per_dimension) {
    // Threshold referred to the power of one real dimension.
    const double clip = std::sqrt(0.5 * lim.power_threshold);
    return {std::clamp(amplified.real(), -clip, clip), std::clamp(amplified.imag(), -clip, clip)};
  }
  const double power = std::norm(amplified);
  if (power <= lim.power_threshold) return amplified;
  return amplified / std::sqrt(power) * std::sqrt(lim.power_threshold);
}

double third_order_real(double x, double p1db) {
  const double x2 = x * x;
  if (x2 <= p1db / kCompressionCoeff) {
    return x * (1.0 - kCompressionCoeff * x2 / (3.0 * p1db));
  }
  return std::copysign(std::sqrt(p1db), x);
}

Complex apply_third_order_complex(Complex y, double p1db) {
  const double power = std::norm(y);
  if (power <= p1db / kCompressionCoeff) {
    return y * (1.0 - kCompressionCoeff * power / (3.0 * p1db));
  }
  return y / std::sqrt(power) * std::sqrt(p1db);
}

Complex apply_third_order_baseband(Complex y, double p1db) {
  return {third_order_real(y.real(), p1db), third_order_real(y.imag(), p1db)};
}

Complex apply_third_order(Complex y, const ThirdOrderSaturated& stage) {
  return stage.domain == StageDomain::passband ? apply_third_order_complex(y, stage.p1db)
                                               : apply_third_order_baseband(y, stage.p1db);
}

double measure_p1db(const ThirdOrderSaturated& stage, double amplitude, int samples_per_period) {
  if (amplitude <= 0.0) return 0.0;
  // Real drive: both domains reduce to the scalar curve on the I rail.
  double fundamental = 0.0;
  for (int n = 0; n < samples_per_period; ++n) {
    const double c = std::cos(2.0 * kPi * n / samples_per_period);
    fundamental += third_order_real(amplitude * c, stage.p1db) * c;
  }
  fundamental *= 2.0 / samples_per_period;
  return -20.0 * std::log10(fundamental / amplitude);
}

}  // namespace nlmimo
