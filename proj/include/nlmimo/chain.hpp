#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlmimo/nonlinearity.hpp"
#include "nlmimo/quantizer.hpp"

namespace nlmimo {

/// Per-antenna receive chain. Stage order is fixed:
///   limiter -> passband -> baseband -> AGC -> quantizer.
/// Analog stage parameters are normalized to the chain input power, i.e. each
/// analog stage acts as sigma_y * g(y / sigma_y). The AGC scales every real
/// dimension to unit variance; it is always present when a quantizer is.
struct NonlinearChain {
  std::optional<Limiter> limiter;
  std::optional<ThirdOrderSaturated> passband;
  std::optional<ThirdOrderSaturated> baseband;
  bool agc = false;
  std::optional<QuantizerSpec> quantizer;

  bool has_quantizer() const { return quantizer.has_value(); }
  bool has_agc() const { return agc || quantizer.has_value(); }
  bool is_identity() const {
    return !limiter && !passband && !baseband && !has_agc();
  }
  /// True when the normalized chain is a function of |y| times the phase of y.
  bool radially_symmetric() const;
  /// Number of nonlinear stages (limiter, passband, baseband, quantizer).
  int stage_count() const;

  std::string describe() const;
};

/// Helper for the common pb -> bb -> ADC cascade (dB values normalized to the
/// input power; NaN-free; `bits == 0` means no ADC).
NonlinearChain make_cascade(std::optional<double> p1db_pb_db, std::optional<double> p1db_bb_db,
                            int bits, QuantizerKind kind = QuantizerKind::uniform);

/// Output of the analog stages for a unit-power input sample.
Complex apply_analog_normalized(Complex y, const NonlinearChain& chain);

/// E|analog(y)|^2 for y ~ CN(0, 1), by nested quadrature over the envelope
/// and phase. Used as the ideal AGC reference.
double analog_output_power(const NonlinearChain& chain);

/// Chain evaluated on a unit-power input. Caches the AGC gain so repeated
/// evaluation is cheap; immutable after construction.
class NormalizedChain {
 public:
  explicit NormalizedChain(NonlinearChain chain);

  Complex operator()(Complex y) const;

  const NonlinearChain& chain() const { return chain_; }
  double agc_gain() const { return agc_gain_; }

 private:
  NonlinearChain chain_;
  double agc_gain_ = 1.0;
};

/// Apply the chain to samples with known per-sample input power sigma_y2.
/// Returns the quantizer (or AGC, or analog) output without de-normalization.
std::vector<Complex> apply_chain(std::span<const Complex> y, const NonlinearChain& chain,
                                 double input_power);

}  // namespace nlmimo
