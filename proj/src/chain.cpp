#include "nlmimo/chain.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <sstream>

namespace nlmimo {

namespace {

constexpr double kEnvelopeCutoff = 8.0;  // P(|y| > 8) = e^-64

template <class F>
double integrate(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-11);
}

}  // namespace

bool NonlinearChain::radially_symmetric() const {
  if (limiter && limiter->per_dimension) return false;
  if (baseband || quantizer) return false;
  return true;
}

int NonlinearChain::stage_count() const {
  return static_cast<int>(limiter.has_value()) + static_cast<int>(passband.has_value()) +
         static_cast<int>(baseband.has_value()) + static_cast<int>(quantizer.has_value());
}

std::string NonlinearChain::describe() const {
  std::ostringstream os;
  const char* sep = "";
  if (limiter) {
    os << sep << (limiter->per_dimension ? "limiter_iq(" : "limiter(")
       << to_db(limiter->power_threshold / (limiter->gain * limiter->gain)) << "dB)";
    sep = "+";
  }
  if (passband) {
    os << sep << "pb(" << to_db(passband->p1db) << "dB)";
    sep = "+";
  }
  if (baseband) {
    os << sep << "bb(" << to_db(baseband->p1db) << "dB)";
    sep = "+";
  }
  if (quantizer) {
    os << sep << "adc(" << quantizer->bits << "b"
       << (quantizer->kind == QuantizerKind::lloyd_max ? ",lloyd" : "") << ")";
    sep = "+";
  } else if (agc) {
    os << sep << "agc";
    sep = "+";
  }
  if (*sep == '\0') os << "identity";
  return os.str();
}

NonlinearChain make_cascade(std::optional<double> p1db_pb_db, std::optional<double> p1db_bb_db,
                            int bits, QuantizerKind kind) {
  NonlinearChain c;
  if (p1db_pb_db) c.passband = ThirdOrderSaturated(from_db(*p1db_pb_db), StageDomain::passband);
  if (p1db_bb_db) c.baseband = ThirdOrderSaturated(from_db(*p1db_bb_db), StageDomain::baseband);
  if (bits > 0) {
    c.quantizer = kind == QuantizerKind::uniform ? design_uniform_quantizer(bits)
                                                 : design_lloyd_max(bits);
    c.agc = true;
  }
  return c;
}

Complex apply_analog_normalized(Complex y, const NonlinearChain& chain) {
  if (chain.limiter) y = apply_limiter(y, *chain.limiter);
  if (chain.passband) y = apply_third_order(y, *chain.passband);
  if (chain.baseband) {
    // Baseband P1dB is referred to the per-dimension input power (1/2 for a
    // unit-power complex input), so each rail is evaluated at unit scale.
    const double s = std::sqrt(2.0);
    y = apply_third_order(y * s, *chain.baseband) / s;
  }
  return y;
}

namespace {

// Per-rail clip level of the first I/Q-separable stage, referred to the
// envelope seen by that stage; 0 when there is none.
double rail_clip(const NonlinearChain& chain) {
  if (chain.limiter && chain.limiter->per_dimension) {
    return std::sqrt(0.5 * chain.limiter->power_threshold) / chain.limiter->gain;
  }
  if (chain.baseband) return std::sqrt(chain.baseband->p1db / 0.44 / 2.0);
  return 0.0;
}

// Envelope entering the first I/Q-separable stage for input envelope r.
double envelope_before_rails(const NonlinearChain& chain, double r) {
  if (chain.limiter && chain.limiter->per_dimension) return r;
  Complex y = r;
  if (chain.limiter) y = apply_limiter(y, *chain.limiter);
  if (chain.passband) y = apply_third_order(y, *chain.passband);
  return std::abs(y);
}

}  // namespace

double analog_output_power(const NonlinearChain& chain) {
  if (!chain.limiter && !chain.passband && !chain.baseband) return 1.0;
  // Rayleigh envelope with E r^2 = 1: pdf 2 r exp(-r^2). Every stage is odd in
  // I and Q and symmetric under I<->Q, so one quadrant of phase suffices. The
  // rail clamps are discontinuous in phase, so both integrals are split at
  // the clip angles and radii.
  const double clip = rail_clip(chain);
  auto power_at = [&](double r) {
    auto inner = [&](double theta) {
      return std::norm(apply_analog_normalized(std::polar(r, theta), chain));
    };
    if (chain.radially_symmetric()) return inner(0.0) * 2.0 * r * std::exp(-r * r);
    std::vector<double> phases{0.0, kPi / 2};
    const double env = envelope_before_rails(chain, r);
    if (clip > 0.0 && env > clip) {
      phases.push_back(std::acos(clip / env));
      phases.push_back(std::asin(clip / env));
    }
    std::sort(phases.begin(), phases.end());
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < phases.size(); ++i) {
      if (phases[i + 1] > phases[i]) mean += integrate(inner, phases[i], phases[i + 1]);
    }
    return mean * (2.0 / kPi) * 2.0 * r * std::exp(-r * r);
  };
  std::vector<double> breaks{0.0, kEnvelopeCutoff};
  if (chain.limiter && !chain.limiter->per_dimension) {
    breaks.push_back(std::sqrt(chain.limiter->power_threshold) / chain.limiter->gain);
  }
  if (chain.passband) breaks.push_back(std::sqrt(chain.passband->p1db / 0.44));
  if (clip > 0.0) {
    // Radii where the rails start to clip: env(r) = clip and env(r) = sqrt(2) clip.
    for (double level : {clip, std::sqrt(2.0) * clip}) {
      double lo = 0.0, hi = kEnvelopeCutoff;
      if (envelope_before_rails(chain, hi) <= level) continue;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (envelope_before_rails(chain, mid) > level ? hi : lo) = mid;
      }
      breaks.push_back(hi);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) total += integrate(power_at, breaks[i], breaks[i + 1]);
  }
  return total;
}

NormalizedChain::NormalizedChain(NonlinearChain chain) : chain_(std::move(chain)) {
  if (chain_.has_agc()) agc_gain_ = std::sqrt(2.0 / analog_output_power(chain_));
}

Complex NormalizedChain::operator()(Complex y) const {
  y = apply_analog_normalized(y, chain_);
  if (!chain_.has_agc()) return y;
  y *= agc_gain_;
  if (chain_.quantizer) y = apply_quantizer(y, *chain_.quantizer);
  return y;
}

std::vector<Complex> apply_chain(std::span<const Complex> y, const NonlinearChain& chain,
                                 double input_power) {
  if (!(input_power > 0.0)) throw std::invalid_argument("input power must be positive");
  const NormalizedChain normalized(chain);
  const double sigma = std::sqrt(input_power);
  // Analog-only chains undo the normalization; AGC output stays at unit scale.
  const double out_scale = chain.has_agc() ? 1.0 : sigma;
  std::vector<Complex> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = out_scale * normalized(y[i] / sigma);
  return out;
}

}  // namespace nlmimo
