#include "nlmimo/powercontrol.hpp"

#include <algorithm>

#include "nlmimo/receiver.hpp"
#include "nlmimo/kernels.hpp"

namespace nlmimo {

std::string to_string(PcScheme scheme) {
  switch (scheme) {
    case PcScheme::none: return "none";
    case PcScheme::naive: return "naive";
    case PcScheme::adaptive: return "adaptive";
  }
  return "none";
}

PcScheme parse_pc_scheme(const std::string& name) {
  if (name == "none") return PcScheme::none;
  if (name == "naive") return PcScheme::naive;
  if (name == "adaptive") return PcScheme::adaptive;
  throw ConfigError("unknown power control scheme '" + name + "' (none|naive|adaptive)");
}

void PowerControlConfig::validate() const {
  if (n_iter < 1) throw ConfigError("power control n_iter must be >= 1");
  if (!(tol_db >= 0.0)) throw ConfigError("power control tol_db must be >= 0");
  if (scheme == PcScheme::adaptive && !std::isfinite(sinr_th_db)) {
    throw ConfigError("adaptive power control needs a finite sinr_th_db");
  }
}

UserDrop apply_naive(const UserDrop& drop, const ArrayGeometry& geometry) {
  UserDrop out = drop;
  const double edge = geometry.amplitude_at(drop.r_max);
  for (auto& u : out.users) u.power_scale = (edge * edge) / (u.amplitude * u.amplitude);
  return out;
}

AdaptiveResult apply_adaptive(const UserDrop& drop, const ArrayGeometry& geometry, double sigma_n2,
                              double gamma_g, const PowerControlConfig& config) {
  config.validate();
  AdaptiveResult r;
  r.drop = drop;
  const bool self_noise = config.effective_noise && std::isfinite(gamma_g);
  for (int it = 0; it < config.n_iter; ++it) {
    double noise = sigma_n2;
    if (self_noise) noise += (r.drop.total_received_power() + sigma_n2) / gamma_g;
    const auto sinr = lmmse_sinr_all(build_channel(r.drop, geometry), noise);

    std::vector<double> sinr_db(sinr.size()), power_db(sinr.size());
    double largest = 0.0;
    for (std::size_t k = 0; k < sinr.size(); ++k) {
      sinr_db[k] = to_db(sinr[k]);
      const double step = std::max(sinr_db[k] - config.sinr_th_db, 0.0);
      largest = std::max(largest, step);
      auto& u = r.drop.users[k];
      u.power_scale *= from_db(-step);
      power_db[k] = to_db(u.power_scale);
    }
    r.sinr_trace_db.push_back(std::move(sinr_db));
    r.power_trace_db.push_back(std::move(power_db));
    r.iterations = it + 1;
    if (largest < config.tol_db) {
      r.converged = true;
      break;
    }
  }
  return r;
}

UserDrop apply_power_control(const UserDrop& drop, const ArrayGeometry& geometry, double sigma_n2,
                             double gamma_g, const PowerControlConfig& config) {
  switch (config.scheme) {
    case PcScheme::none: return drop;
    case PcScheme::naive: return apply_naive(drop, geometry);
    case PcScheme::adaptive: return apply_adaptive(drop, geometry, sigma_n2, gamma_g, config).drop;
  }
  return drop;
}

double power_control_factor(const UserDrop& drop, const ArrayGeometry& geometry) {
  if (drop.users.empty()) throw std::invalid_argument("power control factor of an empty drop");
  const double edge = geometry.amplitude_at(drop.r_max);
  return edge * edge / drop.mean_received_power();
}

double analytic_alpha_no_pc(double r_min, double r_max) {
  if (!(r_min > 0.0) || !(r_min < r_max)) throw std::invalid_argument("need 0 < r_min < r_max");
  const double ratio = r_min / r_max;
  return (1.0 - ratio * ratio) / (2.0 * std::log(r_max / r_min));
}

AlphaEstimate estimate_alpha(const ArrayGeometry& geometry, const DropConfig& drops,
                             const PowerControlConfig& pc, double sigma_n2, double gamma_g,
                             std::size_t n_drops, std::uint64_t seed, int workers) {
  if (n_drops < 2) throw std::invalid_argument("alpha ensemble needs at least two drops");
  std::vector<double> means(n_drops);
  const auto n = static_cast<std::int64_t>(n_drops);
  kernels::ExceptionTrap trap;
#pragma omp parallel for schedule(static) num_threads(kernels::resolve_workers(workers))
  for (std::int64_t d = 0; d < n; ++d) {
    trap.run([&] {
      const auto drop = apply_power_control(drop_users(geometry, drops, seed, d), geometry,
                                            sigma_n2, gamma_g, pc);
      means[d] = drop.mean_received_power();
    });
  }
  trap.rethrow();
  double sum = 0.0, sum2 = 0.0;
  for (double m : means) {
    sum += m;
    sum2 += m * m;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, (sum2 / n - mean * mean) * n / (n - 1));
  const double edge = geometry.amplitude_at(drops.r_max);
  AlphaEstimate e;
  e.alpha = edge * edge / mean;
  // Delta method: sd(10 log10 m) ~ (10 / ln 10) sd(m) / m.
  e.standard_error_db = 10.0 / std::log(10.0) * std::sqrt(var / n) / mean;
  e.users = n_drops * drops.num_users;
  return e;
}

}  // namespace nlmimo
