#pragma once

#include <string>
#include <vector>

#include "nlmimo/channel.hpp"

namespace nlmimo {

enum class PcScheme { none, naive, adaptive };

std::string to_string(PcScheme scheme);
PcScheme parse_pc_scheme(const std::string& name);

struct PowerControlConfig {
  PcScheme scheme = PcScheme::none;
  double sinr_th_db = 10.0;  // adaptive target
  int n_iter = 20;
  double tol_db = 0.01;
  /// Adaptive SINR evaluated against sigma_n2 + nu_g2 (true) or sigma_n2 only.
  bool effective_noise = true;

  void validate() const;
};

/// Equalize every received amplitude to the edge amplitude (range r_max).
UserDrop apply_naive(const UserDrop& drop, const ArrayGeometry& geometry);

struct AdaptiveResult {
  UserDrop drop;
  /// power_scale of every user (dB) after each iteration.
  std::vector<std::vector<double>> power_trace_db;
  /// LMMSE SINR of every user (dB) seen by each iteration.
  std::vector<std::vector<double>> sinr_trace_db;
  int iterations = 0;
  bool converged = false;
};

/// Iterative back-off: each pass lowers every user's power (in dB) by
/// max(SINR_k - SINR_th, 0) and stops once the largest change is below tol_db.
/// The LMMSE noise is sigma_n2 + nu_g2 with nu_g2 = (sum A_k^2 ps_k + sigma_n2)
/// / gamma_g recomputed at each pass (gamma_g = inf gives sigma_n2).
AdaptiveResult apply_adaptive(const UserDrop& drop, const ArrayGeometry& geometry, double sigma_n2,
                              double gamma_g, const PowerControlConfig& config);

/// Applies the configured scheme.
UserDrop apply_power_control(const UserDrop& drop, const ArrayGeometry& geometry, double sigma_n2,
                             double gamma_g, const PowerControlConfig& config);

/// A_edge^2 / mean_k(A_k^2 ps_k), with A_edge at r_max and unit power scale.
double power_control_factor(const UserDrop& drop, const ArrayGeometry& geometry);

/// (1 - r_min^2 / r_max^2) / (2 ln(r_max / r_min)).
double analytic_alpha_no_pc(double r_min, double r_max);

struct AlphaEstimate {
  double alpha = 0.0;        // A_edge^2 / pooled mean of A_k^2 ps_k
  double standard_error_db = 0.0;
  std::size_t users = 0;
};

/// Ensemble power-control factor over `n_drops` drops. Parallel over drops;
/// deterministic for any worker count.
AlphaEstimate estimate_alpha(const ArrayGeometry& geometry, const DropConfig& drops,
                             const PowerControlConfig& pc, double sigma_n2, double gamma_g,
                             std::size_t n_drops, std::uint64_t seed, int workers = 0);

}  // namespace nlmimo
