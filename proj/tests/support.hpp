#pragma once
// Shared helpers for the unit and acceptance tests.

#include <vector>

#include "nlmimo/framework.hpp"

namespace nlmimo::testing {

/// Per-user SINR measured at the LMMSE output: |mean(xhat x*)|^2 over the
/// variance of the residual xhat - mu x.
inline std::vector<double> empirical_sinr(const CMatrix& xhat, const CMatrix& x) {
  const auto k = xhat.rows();
  const auto t = static_cast<double>(xhat.cols());
  std::vector<double> out(static_cast<std::size_t>(k));
  for (Eigen::Index u = 0; u < k; ++u) {
    Complex mu = 0.0;
    for (Eigen::Index s = 0; s < xhat.cols(); ++s) mu += xhat(u, s) * std::conj(x(u, s));
    mu /= t;
    double err = 0.0;
    for (Eigen::Index s = 0; s < xhat.cols(); ++s) err += std::norm(xhat(u, s) - mu * x(u, s));
    out[static_cast<std::size_t>(u)] = std::norm(mu) / (err / t);
  }
  return out;
}

/// K x T matrix of random QPSK symbols drawn from a counter stream.
inline CMatrix random_qpsk(Eigen::Index k, Eigen::Index t, std::uint64_t seed,
                           std::uint64_t stream) {
  const CounterRng rng(seed, stream);
  CMatrix x(k, t);
  for (Eigen::Index s = 0; s < t; ++s) {
    const auto b = rng.block(static_cast<std::uint64_t>(s));
    for (Eigen::Index u = 0; u < k; ++u) {
      x(u, s) = qpsk_symbol((b[static_cast<std::size_t>(u % 4)] >> (2 * (u / 4))) & 3u);
    }
  }
  return x;
}

/// Per-user measured SINR of one drop passed through `model` (normalized
/// domain, rescale by sigma_y / a, LMMSE on the effective noise) together
/// with the ideal-efficiency lower bound SNR_k(g, sigma_n2) * eff_k(sigma_n2).
struct BoundSample {
  std::vector<double> measured;
  std::vector<double> bound;
};

inline BoundSample bound_check(const UserDrop& drop, const ArrayGeometry& geometry,
                               double sigma_n2, const ChainModel& model, Eigen::Index symbols,
                               std::uint64_t seed, std::uint64_t index) {
  const CMatrix h = build_channel(drop, geometry);
  const CMatrix x = random_qpsk(h.cols(), symbols, seed, stream_id(stream_tag::kBits, index));
  CMatrix y = received_samples(h, x, sigma_n2, seed, stream_id(stream_tag::kNoise, index));
  const double sigma_y2 = drop.total_received_power() + sigma_n2;
  const auto lin = build_linearized_model(sigma_y2, model.params, sigma_n2);
  if (!model.ideal()) {
    const NormalizedChain chain(model.chain);
    const double sigma_y = std::sqrt(sigma_y2);
    const Complex rescale = sigma_y / model.params.a;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y.data()[i] = rescale * chain(y.data()[i] / sigma_y);
    }
  }
  const auto rx = lmmse_build(h, lin.effective_noise_var);
  const CMatrix xhat = rx.estimate(y);
  BoundSample out;
  out.measured = empirical_sinr(xhat, x);
  const auto eff = efficiency_all(h, sigma_n2);
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    const double snr_g = h.col(k).squaredNorm() / lin.effective_noise_var;
    out.bound.push_back(lmmse_lower_bound(snr_g, eff[static_cast<std::size_t>(k)]));
  }
  return out;
}

}  // namespace nlmimo::testing
