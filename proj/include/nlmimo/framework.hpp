#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "nlmimo/receiver.hpp"

namespace nlmimo {

/// Matched-filter SNR of user k limited by self-noise only:
/// gamma_g A_k^2 / (beta A_rms^2).
double mfb_selfnoise(double gamma_g, double beta, double a_k2, double a_rms2);

/// Edge-user form gamma_g alpha_p / beta.
double mfb_selfnoise_edge(double gamma_g, double beta, double alpha_p);

/// Self-noise and thermal noise combined:
/// 1 / (1 / SNR_k(g) + ((1 + gamma_g) / gamma_g) / SNR_k).
double mfb_combined(double snr_selfnoise, double snr_thermal, double gamma_g);

/// SINR >= SNR(g, sigma_n2) eta_ideal.
double lmmse_lower_bound(double snr_g_sigma, double eta_ideal);

/// Es/N0 at which Gray QPSK reaches the given bit error rate.
double qpsk_required_snr(double ber);

enum class EtaMethod { sinr_analytic, ber_simulation, efficiency_quantile };

std::string to_string(EtaMethod method);
EtaMethod parse_eta_method(const std::string& name);

struct EtaConfig {
  EtaMethod method = EtaMethod::sinr_analytic;
  double target_ber = 1e-3;
  double availability = 0.95;
  int n_drops = 50;
  std::size_t n_symbols = 20000;  // ber_simulation only
  double snr_lo_db = -10.0;
  double snr_hi_db = 40.0;
  double tol_db = 0.01;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct EtaResult {
  double eta = 1.0;           // linear, <= 1
  double snr_edge_db = 0.0;   // SNR_edge meeting the target (bisection methods)
  double target_sinr = 0.0;   // linear
  bool clamped = false;       // raw estimate exceeded 1
};

/// LMMSE efficiency of the ideal system. The bisection methods find the
/// SNR_edge at which the availability-quantile BER meets the target (from the
/// analytic SINR through the QPSK map, or from simulated BER) and return
/// SINR_target / SNR_edge. efficiency_quantile returns the (1 - availability)
/// quantile of per-user efficiency at the scenario's SNR_edge. The result is
/// clamped to 1. The scenario's chain is ignored (ideal hardware).
EtaResult estimate_eta_ideal(const Scenario& scenario, const EtaConfig& config);

struct ContourPoint {
  double gamma_g = 0.0;   // linear
  double snr_edge = kInf;  // linear; inf where infeasible
  bool feasible = false;
};

/// SNR_edge = ((1 + gamma_g) / gamma_g) / (eta / target - beta / (gamma_g alpha)).
/// Throws InfeasibleError naming the minimum gamma_g when no grid point works.
std::vector<ContourPoint> solve_contour(double sinr_target, double eta_ideal, double beta,
                                        double alpha_p, const std::vector<double>& gamma_grid);

/// Smallest gamma_g for which the edge user meets the target at the given
/// SNR_edge; +inf when SNR_edge alone is insufficient.
double required_gamma(double sinr_target, double eta_ideal, double beta, double alpha_p,
                      double snr_edge);

/// Minimum gamma_g for which any finite SNR_edge suffices.
double minimum_gamma(double sinr_target, double eta_ideal, double beta, double alpha_p);

struct HwGrid {
  std::vector<int> bits;
  std::vector<double> p1db_pb_db;  // ascending
  std::vector<double> p1db_bb_db;  // ascending
  QuantizerKind kind = QuantizerKind::uniform;
};

/// b in 1..6, both compression points on [-4, 10] dB in 0.1 dB steps.
HwGrid default_hw_grid();

struct DesignPoint {
  int bits = 0;
  double p1db_pb_db = 0.0;
  double p1db_bb_db = 0.0;
  double gamma_g_db = 0.0;
  double snr_edge_required_db = kInf;
};

/// Cascade gamma_g (dB) keyed by (bits, pb, bb) at 1e-6 dB resolution.
class GammaCache {
 public:
  using Key = std::tuple<int, long long, long long>;
  static Key key(int bits, double pb_db, double bb_db);

  bool find(const Key& k, double& value) const;
  void store(const Key& k, double value);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, double> values_;
};

struct HwSearchConfig {
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  int workers = 0;
  QuantizerKind kind = QuantizerKind::uniform;
};

/// Monte Carlo gamma_g of the (pb, bb, b-bit ADC) cascade. The same sample
/// stream is used for every spec so comparisons share random numbers.
double cascade_gamma_db(int bits, double pb_db, double bb_db, const HwSearchConfig& config,
                        GammaCache* cache = nullptr);

/// Fewest ADC bits reaching the target with both compression points at the
/// grid maximum; then, per passband point, the lowest baseband point that
/// still reaches it (bisection, gamma_g assumed monotone). Returns the Pareto
/// set sorted by (bits, pb + bb, pb); the first entry is the recommended spec.
std::vector<DesignPoint> search_hw_spec(double gamma_target_db, const HwGrid& grid,
                                        const HwSearchConfig& config,
                                        GammaCache* cache = nullptr);

/// Normalized compression point (dB) to absolute (dBm) at the given input power.
double absolute_p1db(double normalized_db, double input_power_dbm);
double normalized_p1db(double absolute_dbm, double input_power_dbm);

}  // namespace nlmimo
