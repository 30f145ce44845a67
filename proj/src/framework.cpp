#include "nlmimo/framework.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <functional>

#include "nlmimo/kernels.hpp"

namespace nlmimo {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

// Crossing of a decreasing f through `target` on [lo, hi], to within tol.
template <class F>
double bisect_decreasing(F f, double target, double lo, double hi, double tol) {
  if (f(lo) <= target) return lo;
  if (f(hi) > target) throw InfeasibleError("target not reached on the SNR_edge search range");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double mfb_selfnoise(double gamma_g, double beta, double a_k2, double a_rms2) {
  require_positive(gamma_g, "gamma_g");
  require_positive(beta, "beta");
  require_positive(a_k2, "A_k^2");
  require_positive(a_rms2, "A_rms^2");
  return gamma_g * a_k2 / (beta * a_rms2);
}

double mfb_selfnoise_edge(double gamma_g, double beta, double alpha_p) {
  return mfb_selfnoise(gamma_g, beta, alpha_p, 1.0);
}

double mfb_combined(double snr_selfnoise, double snr_thermal, double gamma_g) {
  require_positive(snr_selfnoise, "SNR(g)");
  require_positive(snr_thermal, "SNR");
  require_positive(gamma_g, "gamma_g");
  const double thermal_factor = std::isinf(gamma_g) ? 1.0 : (1.0 + gamma_g) / gamma_g;
  return 1.0 / (1.0 / snr_selfnoise + thermal_factor / snr_thermal);
}

double lmmse_lower_bound(double snr_g_sigma, double eta_ideal) {
  require_positive(snr_g_sigma, "SNR(g, sigma)");
  require_positive(eta_ideal, "eta_ideal");
  return snr_g_sigma * eta_ideal;
}

double qpsk_required_snr(double ber) {
  if (!(ber > 0.0 && ber < 0.5)) throw std::invalid_argument("BER target must be in (0, 0.5)");
  // Q(x) = erfc(x / sqrt 2) / 2
  const double x = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * ber);
  return x * x;
}

std::string to_string(EtaMethod method) {
  switch (method) {
    case EtaMethod::sinr_analytic: return "sinr_analytic";
    case EtaMethod::ber_simulation: return "ber_simulation";
    case EtaMethod::efficiency_quantile: return "efficiency_quantile";
  }
  return "sinr_analytic";
}

EtaMethod parse_eta_method(const std::string& name) {
  if (name == "sinr_analytic") return EtaMethod::sinr_analytic;
  if (name == "ber_simulation") return EtaMethod::ber_simulation;
  if (name == "efficiency_quantile") return EtaMethod::efficiency_quantile;
  throw ConfigError("unknown eta method '" + name + "'");
}

EtaResult estimate_eta_ideal(const Scenario& scenario, const EtaConfig& config) {
  if (config.n_drops < 1) throw std::invalid_argument("eta estimation needs drops");
  scenario.validate();
  EtaResult r;
  r.target_sinr = qpsk_required_snr(config.target_ber);
  const auto& g = scenario.geometry;
  const auto drops_cfg = scenario.drop_config();
  const int workers = kernels::resolve_workers(config.workers);

  std::vector<UserDrop> drops(config.n_drops);
  kernels::ExceptionTrap trap;
#pragma omp parallel for schedule(static) num_threads(workers)
  for (int d = 0; d < config.n_drops; ++d) {
    trap.run([&] { drops[d] = drop_users(g, drops_cfg, config.seed, static_cast<std::uint64_t>(d)); });
  }
  trap.rethrow();

  // Per-user ideal SINR (or efficiency) pooled over drops at a given SNR_edge.
  auto pooled = [&](double snr_edge_db, bool want_efficiency) {
    Scenario s = scenario;
    s.snr_edge_db = snr_edge_db;
    const double sigma_n2 = s.noise_var();
    std::vector<std::vector<double>> per(config.n_drops);
    kernels::ExceptionTrap inner_trap;
#pragma omp parallel for schedule(static) num_threads(workers)
    for (int d = 0; d < config.n_drops; ++d) {
      inner_trap.run([&] {
        const auto drop = apply_power_control(drops[d], g, sigma_n2, kInf, s.pc);
        const auto h = build_channel(drop, g);
        per[d] = want_efficiency ? efficiency_all(h, sigma_n2) : lmmse_sinr_all(h, sigma_n2);
      });
    }
    inner_trap.rethrow();
    std::vector<double> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
  };

  if (config.method == EtaMethod::efficiency_quantile) {
    r.snr_edge_db = scenario.snr_edge_db;
    r.eta = availability_quantile(pooled(scenario.snr_edge_db, true), 1.0 - config.availability);
  } else {
    std::function<double(double)> quantile_ber;
    if (config.method == EtaMethod::sinr_analytic) {
      quantile_ber = [&](double snr_db) {
        auto sinr = pooled(snr_db, false);
        for (double& v : sinr) v = qpsk_ber(v);
        return availability_quantile(std::move(sinr), config.availability);
      };
    } else {
      quantile_ber = [&](double snr_db) {
        Scenario s = scenario;
        s.snr_edge_db = snr_db;
        SimulationConfig sim;
        sim.n_symbols = config.n_symbols;
        sim.n_drops = config.n_drops;
        sim.seed = config.seed;
        sim.availability = config.availability;
        sim.workers = config.workers;
        return ber_monte_carlo(s, ideal_chain(), sim).quantile_ber;
      };
    }
    r.snr_edge_db = bisect_decreasing(quantile_ber, config.target_ber, config.snr_lo_db,
                                      config.snr_hi_db, config.tol_db);
    r.eta = r.target_sinr / from_db(r.snr_edge_db);
  }
  if (r.eta > 1.0) {
    r.eta = 1.0;
    r.clamped = true;
  }
  return r;
}

double minimum_gamma(double sinr_target, double eta_ideal, double beta, double alpha_p) {
  require_positive(sinr_target, "SINR target");
  require_positive(eta_ideal, "eta_ideal");
  require_positive(beta, "beta");
  require_positive(alpha_p, "alpha_p");
  return beta * (sinr_target / eta_ideal) / alpha_p;
}

std::vector<ContourPoint> solve_contour(double sinr_target, double eta_ideal, double beta,
                                        double alpha_p, const std::vector<double>& gamma_grid) {
  const double gmin = minimum_gamma(sinr_target, eta_ideal, beta, alpha_p);
  std::vector<ContourPoint> out;
  bool any = false;
  for (double gamma : gamma_grid) {
    ContourPoint p;
    p.gamma_g = gamma;
    const double slack =
        eta_ideal / sinr_target - (std::isinf(gamma) ? 0.0 : beta / (gamma * alpha_p));
    if (gamma > gmin && slack > 0.0) {
      const double factor = std::isinf(gamma) ? 1.0 : (1.0 + gamma) / gamma;
      p.snr_edge = factor / slack;
      p.feasible = true;
      any = true;
    }
    out.push_back(p);
  }
  if (!any) {
    throw InfeasibleError("no feasible intrinsic SNR on the grid; need gamma_g > " +
                          std::to_string(to_db(gmin)) + " dB");
  }
  return out;
}

double required_gamma(double sinr_target, double eta_ideal, double beta, double alpha_p,
                      double snr_edge) {
  require_positive(snr_edge, "SNR_edge");
  minimum_gamma(sinr_target, eta_ideal, beta, alpha_p);
  const double slack = eta_ideal / sinr_target - 1.0 / snr_edge;
  if (!(slack > 0.0)) return kInf;
  return (beta / alpha_p + 1.0 / snr_edge) / slack;
}

HwGrid default_hw_grid() {
  HwGrid g;
  g.bits = {1, 2, 3, 4, 5, 6};
  for (int i = 0; i <= 140; ++i) {
    const double v = (i - 40) / 10.0;
    g.p1db_pb_db.push_back(v);
    g.p1db_bb_db.push_back(v);
  }
  return g;
}

GammaCache::Key GammaCache::key(int bits, double pb_db, double bb_db) {
  return {bits, std::llround(pb_db * 1e6), std::llround(bb_db * 1e6)};
}

bool GammaCache::find(const Key& k, double& value) const {
  std::shared_lock lock(mutex_);
  const auto it = values_.find(k);
  if (it == values_.end()) return false;
  value = it->second;
  return true;
}

void GammaCache::store(const Key& k, double value) {
  std::unique_lock lock(mutex_);
  values_.emplace(k, value);
}

std::size_t GammaCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

double cascade_gamma_db(int bits, double pb_db, double bb_db, const HwSearchConfig& config,
                        GammaCache* cache) {
  const auto k = GammaCache::key(bits, pb_db, bb_db);
  double v = 0.0;
  if (cache && cache->find(k, v)) return v;
  const auto chain = make_cascade(pb_db, bb_db, bits, config.kind);
  v = bussgang_mc(chain, config.samples, config.seed, config.workers).gamma_db();
  if (cache) cache->store(k, v);
  return v;
}

std::vector<DesignPoint> search_hw_spec(double gamma_target_db, const HwGrid& grid,
                                        const HwSearchConfig& config, GammaCache* cache) {
  if (grid.bits.empty() || grid.p1db_pb_db.empty() || grid.p1db_bb_db.empty()) {
    throw std::invalid_argument("hardware grid must be non-empty");
  }
  auto bits = grid.bits;
  std::sort(bits.begin(), bits.end());
  const auto& pbs = grid.p1db_pb_db;
  const auto& bbs = grid.p1db_bb_db;
  HwSearchConfig cfg = config;
  cfg.kind = grid.kind;

  int chosen_bits = -1;
  double best = -kInf;
  for (int b : bits) {
    const double g = cascade_gamma_db(b, pbs.back(), bbs.back(), cfg, cache);
    best = std::max(best, g);
    if (g >= gamma_target_db) {
      chosen_bits = b;
      break;
    }
  }
  if (chosen_bits < 0) {
    throw InfeasibleError("intrinsic SNR target " + std::to_string(gamma_target_db) +
                          " dB not reachable on the grid; best is " + std::to_string(best) +
                          " dB");
  }

  // Per passband point, lowest baseband index meeting the target (-1: none).
  HwSearchConfig inner = cfg;
  inner.workers = 1;
  const auto npb = static_cast<std::int64_t>(pbs.size());
  std::vector<std::int64_t> lowest(npb, -1);
  std::vector<double> achieved(npb, 0.0);
  kernels::ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic) num_threads(kernels::resolve_workers(config.workers))
  for (std::int64_t i = 0; i < npb; ++i) {
    trap.run([&] {
      auto gam = [&](std::size_t j) {
        return cascade_gamma_db(chosen_bits, pbs[i], bbs[j], inner, cache);
      };
      std::size_t hi = bbs.size() - 1;
      if (gam(hi) < gamma_target_db) return;
      std::size_t lo = 0;
      if (gam(lo) >= gamma_target_db) {
        hi = 0;
      } else {
        while (hi - lo > 1) {
          const std::size_t mid = (lo + hi) / 2;
          (gam(mid) >= gamma_target_db ? hi : lo) = mid;
        }
      }
      lowest[i] = static_cast<std::int64_t>(hi);
      achieved[i] = gam(hi);
    });
  }
  trap.rethrow();

  std::vector<DesignPoint> candidates;
  for (std::int64_t i = 0; i < npb; ++i) {
    if (lowest[i] < 0) continue;
    candidates.push_back({chosen_bits, pbs[i], bbs[lowest[i]], achieved[i], kInf});
  }
  std::vector<DesignPoint> pareto;
  for (const auto& p : candidates) {
    const bool dominated = std::any_of(candidates.begin(), candidates.end(), [&](const auto& q) {
      return q.p1db_pb_db <= p.p1db_pb_db && q.p1db_bb_db <= p.p1db_bb_db &&
             (q.p1db_pb_db < p.p1db_pb_db || q.p1db_bb_db < p.p1db_bb_db);
    });
    if (!dominated) pareto.push_back(p);
  }
  std::sort(pareto.begin(), pareto.end(), [](const auto& a, const auto& b) {
    const double sa = a.p1db_pb_db + a.p1db_bb_db, sb = b.p1db_pb_db + b.p1db_bb_db;
    if (a.bits != b.bits) return a.bits < b.bits;
    if (sa != sb) return sa < sb;
    return a.p1db_pb_db < b.p1db_pb_db;
  });
  return pareto;
}

double absolute_p1db(double normalized_db, double input_power_dbm) {
  return normalized_db + input_power_dbm;
}

double normalized_p1db(double absolute_dbm, double input_power_dbm) {
  return absolute_dbm - input_power_dbm;
}

}  // namespace nlmimo
