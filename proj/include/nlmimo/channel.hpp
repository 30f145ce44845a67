#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nlmimo/common.hpp"

namespace nlmimo {

/// Uniform linear array.
struct ArrayGeometry {
  int num_antennas = 256;
  double spacing_wavelengths = 0.5;
  double wavelength = kSpeedOfLight / 140e9;

  ArrayGeometry() = default;
  ArrayGeometry(int n, double d_over_lambda, double lambda);

  double spatial_frequency(double theta) const {
    return 2.0 * kPi * spacing_wavelengths * std::sin(theta);
  }
  /// Free-space (Friis) received amplitude at range r.
  double amplitude_at(double range) const { return wavelength / (4.0 * kPi * range); }
};

struct User {
  double range = 0.0;     // R_k, meters
  double theta = 0.0;     // direction of arrival, radians
  double omega = 0.0;     // spatial frequency
  double phase = 0.0;     // phi_k
  double amplitude = 0.0;  // A_k
  double power_scale = 1.0;

  double received_power() const { return amplitude * amplitude * power_scale; }
};

struct UserDrop {
  std::vector<User> users;
  double r_min = 0.0;
  double r_max = 0.0;

  int size() const { return static_cast<int>(users.size()); }
  /// Mean of A_k^2 * power_scale_k.
  double mean_received_power() const;
  /// Sum of A_k^2 * power_scale_k.
  double total_received_power() const;
};

struct DropConfig {
  int num_users = 1;
  double r_min = 5.0;
  double r_max = 100.0;
  double delta_omega_min = 0.0;
  double max_theta = kPi / 3.0;
  int max_rejections = 100000;
};

/// Users uniform in area over the annular sector [r_min, r_max] x
/// [-max_theta, max_theta]; a user closer than delta_omega_min in spatial
/// frequency to an earlier user is redrawn. Throws InfeasibleError when the
/// packing cannot fit or the rejection budget is exhausted. Drop `index`
/// selects an independent stream under the same seed.
UserDrop drop_users(const ArrayGeometry& geometry, const DropConfig& config, std::uint64_t seed,
                    std::uint64_t index = 0);

/// N x K LoS channel; column k is A_k sqrt(ps_k) e^{j phi_k} [1 e^{j Omega_k} ...]^T.
CMatrix build_channel(const UserDrop& drop, const ArrayGeometry& geometry);

/// |sin(N dOmega / 2) / (N sin(dOmega / 2))|.
double spatial_crosscorr(double delta_omega, int num_antennas);

/// y = H x + n for symbols X (K x T), noise CN(0, sigma_n2 I). Noise column t
/// uses counter t of the given stream.
CMatrix received_samples(const CMatrix& h, const CMatrix& symbols, double sigma_n2,
                         std::uint64_t seed, std::uint64_t stream = 0);

/// Histogram KL divergence (nats) of standardized samples against N(0, 1):
/// `bins` equal bins over +/-5 sigma, add-one smoothing.
double gaussianity_kl(std::span<const double> samples, int bins = 100);

/// JSON text record of a drop (per-user range, theta, phase, power_scale).
std::string serialize_drop(const UserDrop& drop);
/// Inverse of serialize_drop; Omega and A are recomputed from the geometry.
UserDrop parse_drop(const std::string& text, const ArrayGeometry& geometry);

/// Closed-form E[A^2] for users uniform in area.
double mean_square_amplitude(const ArrayGeometry& geometry, double r_min, double r_max);

}  // namespace nlmimo
