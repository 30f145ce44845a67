#include "nlmimo/quantizer.hpp"

#include <algorithm>

namespace nlmimo {

namespace {

double phi(double x) {
  if (std::isinf(x)) return 0.0;
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double big_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// x * phi(x), with the infinite endpoints mapped to 0.
double x_phi(double x) { return std::isinf(x) ? 0.0 : x * phi(x); }

struct BinMoments {
  double p;   // P(lo < x < hi)
  double m1;  // E[x; bin]
  double m2;  // E[x^2; bin]
};

BinMoments bin_moments(double lo, double hi) {
  const double p = big_phi(hi) - big_phi(lo);
  return {p, phi(lo) - phi(hi), p + x_phi(lo) - x_phi(hi)};
}

double edge(const std::vector<double>& thresholds, int i) {
  if (i < 0) return -kInf;
  if (i >= static_cast<int>(thresholds.size())) return kInf;
  return thresholds[i];
}

void check_bits(int bits) {
  if (bits < 1 || bits > 8) throw std::invalid_argument("quantizer bits must be in 1..8");
}

}  // namespace

QuantizerSpec make_uniform_quantizer(int bits, double step) {
  check_bits(bits);
  if (!(step > 0.0)) throw std::invalid_argument("quantizer step must be positive");
  QuantizerSpec q;
  q.bits = bits;
  q.kind = QuantizerKind::uniform;
  q.step = step;
  const int levels = 1 << bits;
  const int half = levels / 2;
  q.levels.resize(levels);
  q.thresholds.resize(levels - 1);
  for (int i = 0; i < levels; ++i) q.levels[i] = (i - half + 0.5) * step;
  for (int i = 0; i + 1 < levels; ++i) q.thresholds[i] = (i + 1 - half) * step;
  q.mse = gaussian_quantizer_mse(q.levels, q.thresholds);
  return q;
}

double gaussian_quantizer_mse(const std::vector<double>& levels,
                              const std::vector<double>& thresholds) {
  double mse = 0.0;
  for (int i = 0; i < static_cast<int>(levels.size()); ++i) {
    const auto m = bin_moments(edge(thresholds, i - 1), edge(thresholds, i));
    const double l = levels[i];
    mse += m.m2 - 2.0 * l * m.m1 + l * l * m.p;
  }
  return mse;
}

QuantizerSpec design_uniform_quantizer(int bits) {
  check_bits(bits);
  auto objective = [bits](double step) { return make_uniform_quantizer(bits, step).mse; };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.01, hi = 4.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  return make_uniform_quantizer(bits, 0.5 * (lo + hi));
}

QuantizerSpec design_lloyd_max(int bits, double tol, int max_iter) {
  QuantizerSpec q = design_uniform_quantizer(bits);
  q.kind = QuantizerKind::lloyd_max;
  q.step = 0.0;
  q.converged = false;
  const int n = q.num_levels();
  for (int it = 1; it <= max_iter; ++it) {
    double max_change = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto m = bin_moments(edge(q.thresholds, i - 1), edge(q.thresholds, i));
      const double centroid = m.m1 / m.p;
      max_change = std::max(max_change, std::abs(centroid - q.levels[i]));
      q.levels[i] = centroid;
    }
    for (int i = 0; i + 1 < n; ++i) q.thresholds[i] = 0.5 * (q.levels[i] + q.levels[i + 1]);
    q.iterations = it;
    if (max_change < tol) {
      q.converged = true;
      break;
    }
  }
  q.mse = gaussian_quantizer_mse(q.levels, q.thresholds);
  return q;
}

int quantizer_bin(double x, const QuantizerSpec& q) {
  if (q.kind == QuantizerKind::uniform) {
    const int last = q.num_levels() - 1;
    const double guess = std::floor(x / q.step) + q.num_levels() / 2;
    int idx = static_cast<int>(std::clamp(guess, 0.0, static_cast<double>(last)));
    // Division rounding can land one bin off exactly at a threshold.
    if (idx > 0 && x < q.thresholds[idx - 1]) --idx;
    if (idx < last && x >= q.thresholds[idx]) ++idx;
    return idx;
  }
  return static_cast<int>(std::upper_bound(q.thresholds.begin(), q.thresholds.end(), x) -
                          q.thresholds.begin());
}

double quantize_real(double x, const QuantizerSpec& q) { return q.levels[quantizer_bin(x, q)]; }

Complex apply_quantizer(Complex y, const QuantizerSpec& q) {
  return {quantize_real(y.real(), q), quantize_real(y.imag(), q)};
}

double gaussian_quantizer_output_power(const QuantizerSpec& q) {
  double s = 0.0;
  for (int i = 0; i < q.num_levels(); ++i) {
    s += q.levels[i] * q.levels[i] * bin_moments(edge(q.thresholds, i - 1), edge(q.thresholds, i)).p;
  }
  return s;
}

double gaussian_quantizer_correlation(const QuantizerSpec& q) {
  double s = 0.0;
  for (int i = 0; i < q.num_levels(); ++i) {
    s += q.levels[i] * bin_moments(edge(q.thresholds, i - 1), edge(q.thresholds, i)).m1;
  }
  return s;
}

}  // namespace nlmimo
