#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlmimo/bussgang.hpp"
#include "nlmimo/powercontrol.hpp"

namespace nlmimo {

struct LmmseReceiver {
  CMatrix w;  // K x N
  double noise_var = 0.0;

  CMatrix estimate(const CMatrix& y) const { return w * y; }
};

/// W = (H^H H + noise_var I)^{-1} H^H via a Cholesky solve of the K x K
/// normal equations.
LmmseReceiver lmmse_build(const CMatrix& h, double noise_var);

/// h_k^H (sum_{j != k} h_j h_j^H + noise_var I)^{-1} h_k by an N x N solve.
double lmmse_sinr(const CMatrix& h, double noise_var, int k);

/// All users at once: 1 / [(I + H^H H / noise_var)^{-1}]_kk - 1.
std::vector<double> lmmse_sinr_all(const CMatrix& h, double noise_var);

/// SINR_k / (||h_k||^2 / noise_var).
double efficiency(const CMatrix& h, double noise_var, int k);
std::vector<double> efficiency_all(const CMatrix& h, double noise_var);

/// Gray-mapped QPSK, two bits per symbol: the first bit picks the sign of I,
/// the second the sign of Q; 0 -> +, so 00 -> (1 + j) / sqrt(2).
Complex qpsk_symbol(unsigned bits2);
std::vector<Complex> qpsk_modulate(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> qpsk_detect(std::span<const Complex> estimates);
/// Bit error probability at symbol SNR Es/N0: Q(sqrt(snr)).
double qpsk_ber(double snr);

/// Drop geometry and link budget for one simulated operating point.
struct Scenario {
  ArrayGeometry geometry;
  int num_users = 1;
  double r_min = 5.0;
  double r_max = 100.0;
  /// Negative selects half the 3 dB beamwidth, 2.783 / N.
  double delta_omega_min = -1.0;
  PowerControlConfig pc;
  double snr_edge_db = 10.0;

  double beta() const { return static_cast<double>(num_users) / geometry.num_antennas; }
  double edge_amplitude() const { return geometry.amplitude_at(r_max); }
  /// From SNR_edge = N A_edge^2 / sigma_n2.
  double noise_var() const;
  DropConfig drop_config() const;
  void validate() const;
};

/// Receive chain used by the simulator together with its Bussgang fit.
struct ChainModel {
  NonlinearChain chain;
  BussgangParams params;  // normalized convention

  /// Linear chains (gamma_g = inf) are simulated as the identity.
  bool ideal() const { return chain.is_identity() || params.gamma_infinite; }
  double gamma_g() const { return params.gamma_infinite ? kInf : params.gamma_g; }
};

/// Identity chain with a = 1, gamma_g = inf.
ChainModel ideal_chain();
/// Quadrature for a single stage, Monte Carlo for cascades.
ChainModel fit_chain(const NonlinearChain& chain, std::size_t samples, std::uint64_t seed,
                     int workers = 0);

struct SimulationConfig {
  std::size_t n_symbols = 10000;  // per user per drop
  int n_drops = 20;
  std::uint64_t seed = 0;
  double availability = 0.95;
  int workers = 0;
};

struct OutageReport {
  std::vector<double> user_ber;       // pooled over drops, drop-major
  std::vector<double> user_sinr;      // analytic LMMSE SINR (linear, effective noise)
  double quantile_ber = 0.0;          // BER met by `availability` of users
  double availability = 0.95;
  std::size_t symbols = 0;            // per user per drop
  int drops = 0;
};

/// Order statistic: sorted value at index ceil(level * n) - 1.
double availability_quantile(std::vector<double> values, double level);

/// Monte Carlo link simulation. Per drop: place users, apply power control,
/// pass y = Hx + n through the chain in the normalized domain, rescale by
/// sigma_y / a and detect with an LMMSE built on sigma_n2 + nu_g2. Parallel
/// over (drop, symbol block); every block owns its RNG streams and error
/// counts are integers, so results do not depend on the worker count.
OutageReport ber_monte_carlo(const Scenario& scenario, const ChainModel& chain,
                             const SimulationConfig& sim);

/// Serial reference of ber_monte_carlo; identical results.
OutageReport ber_monte_carlo_reference(const Scenario& scenario, const ChainModel& chain,
                                       const SimulationConfig& sim);

inline constexpr std::size_t kSymbolBlock = 2048;

}  // namespace nlmimo
