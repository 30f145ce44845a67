// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "nlmimo/commands.hpp"
#include "nlmimo/rng.hpp"
#include "support.hpp"

using namespace nlmimo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const ArrayGeometry& array(int n) {
  static std::map<int, ArrayGeometry> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, ArrayGeometry(n, 0.5, kSpeedOfLight / 140e9)).first;
  return it->second;
}

Scenario scenario(int n, int k, double snr_db, PcScheme pc) {
  Scenario s;
  s.geometry = array(n);
  s.num_users = k;
  s.snr_edge_db = snr_db;
  s.pc.scheme = pc;
  return s;
}

NonlinearChain limiter_chain(double threshold_db, bool per_dim) {
  NonlinearChain c;
  c.limiter = Limiter(1.0, from_db(threshold_db), per_dim);
  return c;
}

Complex hard_limiter(Complex y) { return y == Complex(0.0) ? y : y / std::abs(y); }

// ---------------------------------------------------------------------------

Outcome alpha_factor() {
  const double analytic = to_db(analytic_alpha_no_pc(5.0, 100.0));
  DropConfig dc;
  dc.num_users = 4;
  const auto est = estimate_alpha(array(64), dc, PowerControlConfig{}, 1.0, kInf, 100000, 1);
  const double mc = to_db(est.alpha);
  return {std::abs(analytic + 7.79) < 0.005 && std::abs(mc - analytic) <= 0.1,
          fmt("analytic %.3f dB, ensemble %.3f dB (se %.3f dB, 1e5 drops)", analytic, mc,
              est.standard_error_db)};
}

Outcome limiter_gamma() {
  const auto chain = limiter_chain(6.0, true);
  const auto q = bussgang_quadrature(chain);
  const auto m = bussgang_mc(chain, 1'000'000, 2);
  const double diff = std::abs(m.gamma_db() - q.gamma_db());
  return {std::abs(q.gamma_db() - 20.0) <= 1.0 && diff <= 3 * m.se_gamma_db,
          fmt("quadrature %.2f dB, MC %.2f dB (se %.3f dB); polar limiter for reference %.2f dB",
              q.gamma_db(), m.gamma_db(), m.se_gamma_db,
              bussgang_quadrature(limiter_chain(6.0, false)).gamma_db())};
}

struct CascadeRow {
  double pb, bb;
  int bits;
  double expected_db;
};
const CascadeRow kRows[] = {{6.7, 8.4, 5, 20.0}, {4.9, 8.4, 4, 17.5}, {1.4, 4.2, 3, 12.0}, {-1.1, 1.4, 2, 7.6}};

Outcome cascade_table() {
  Outcome o{true, ""};
  for (const auto& r : kRows) {
    const auto p = bussgang_mc(make_cascade(r.pb, r.bb, r.bits), 1'000'000, 3);
    o.pass = o.pass && std::abs(p.gamma_db() - r.expected_db) <= 1.5;
    o.detail += fmt("(%g,%g,%d) %.2f/%.1f  ", r.pb, r.bb, r.bits, p.gamma_db(), r.expected_db);
  }
  o.detail += "[sim/ref dB]";
  return o;
}

Outcome orthogonality() {
  std::vector<NonlinearChain> chains{limiter_chain(6.0, true), limiter_chain(6.0, false),
                                     make_cascade(1.4, std::nullopt, 0),
                                     make_cascade(std::nullopt, 4.2, 0),
                                     make_cascade(std::nullopt, std::nullopt, 3)};
  for (const auto& r : kRows) chains.push_back(make_cascade(r.pb, r.bb, r.bits));
  Outcome o{true, ""};
  double worst = 0.0;
  for (const auto& c : chains) {
    const NormalizedChain n(c);
    const ComplexMap g = [&](Complex y) { return n(y); };
    const auto p = bussgang_mc(g, 1'000'000, 4);
    const auto r = orthogonality_residual(g, p.a, 1'000'000, 4);
    worst = std::max(worst, r.residual / r.standard_error);
    o.pass = o.pass && r.residual < 4 * r.standard_error;
  }
  o.detail = fmt("%zu chains, worst residual %.2f se; ", chains.size(), worst);
  for (double rho : {0.0, 0.3, 0.7}) {
    const auto c = check_covariance_preservation(hard_limiter, rho, 1'000'000, 5);
    const Complex ideal = std::sqrt(kPi) / 2 * rho;
    const bool ok = c.residual < 3 * c.standard_error + 1e-12 &&
                    std::abs(c.measured - ideal) < 3 * c.standard_error + 0.002;
    o.pass = o.pass && ok;
    o.detail += fmt("rho %.1f: %.4f vs %.4f  ", rho, c.measured.real(), ideal.real());
  }
  return o;
}

Outcome closed_forms() {
  const auto s = scenario(64, 16, 10.0, PcScheme::none);
  const double gamma = from_db(12.0);
  double worst = 0.0;
  for (std::uint64_t d = 0; d < 1000; ++d) {
    const auto drop = drop_users(s.geometry, s.drop_config(), 6, d);
    const CMatrix h = build_channel(drop, s.geometry);
    const double sigma = s.noise_var();
    const double total = drop.total_received_power();
    const double a_rms2 = drop.mean_received_power();
    const double nu_self = total / gamma, nu = (total + sigma) / gamma;
    for (int k = 0; k < drop.size(); ++k) {
      const double hk = h.col(k).squaredNorm();
      const double a2 = drop.users[k].received_power();
      const double self = mfb_selfnoise(gamma, s.beta(), a2, a_rms2);
      const double comb = mfb_combined(self, s.geometry.num_antennas * a2 / sigma, gamma);
      worst = std::max({worst, std::abs(self / (hk / nu_self) - 1.0),
                        std::abs(comb / (hk / (sigma + nu)) - 1.0)});
    }
  }
  return {worst <= 1e-12, fmt("max relative deviation %.2e over 1000 drops x 16 users", worst)};
}

double bound_violation_fraction(int k, PcScheme pc, const ChainModel& model, int drops,
                                std::uint64_t seed, std::size_t& samples) {
  const auto s = scenario(64, k, 10.0, pc);
  std::size_t bad = 0;
  for (int d = 0; d < drops; ++d) {
    const auto raw = drop_users(s.geometry, s.drop_config(), seed, static_cast<std::uint64_t>(d));
    const auto drop = apply_power_control(raw, s.geometry, s.noise_var(), model.gamma_g(), s.pc);
    const auto r = testing::bound_check(drop, s.geometry, s.noise_var(), model, 4000, seed,
                                        static_cast<std::uint64_t>(d));
    for (std::size_t i = 0; i < r.measured.size(); ++i) {
      ++samples;
      if (to_db(r.measured[i]) < to_db(r.bound[i]) - 0.3) ++bad;
    }
  }
  return static_cast<double>(bad);
}

Outcome bound_validity() {
  const ChainModel c12 = fit_chain(make_cascade(1.4, 4.2, 3), 1'000'000, 7);
  const ChainModel c20 = fit_chain(make_cascade(6.7, 8.4, 5), 1'000'000, 7);
  Outcome o{true, ""};
  std::string info;
  for (const ChainModel* m : {&c12, &c20}) {
    for (int k : {4, 32}) {
      std::size_t n = 0;
      const double bad = bound_violation_fraction(k, PcScheme::naive, *m, 100, 8, n);
      const double frac = bad / static_cast<double>(n);
      o.pass = o.pass && frac <= 0.01;
      o.detail += fmt("g%.0f/K%d %.2f%%  ", m->params.gamma_db(), k, 100 * frac);
      std::size_t n0 = 0;
      const double bad0 = bound_violation_fraction(k, PcScheme::none, *m, 100, 8, n0);
      info += fmt("g%.0f/K%d %.2f%%  ", m->params.gamma_db(), k, 100 * bad0 / static_cast<double>(n0));
    }
  }
  o.detail += "below bound-0.3 dB (naive PC, SNR_edge 10 dB, N=64, 100 drops)";
  std::printf("INFO  [6] without power control: %s\n", info.c_str());
  return o;
}

Outcome efficiency_monotone() {
  std::size_t checks = 0;
  double worst = 0.0;
  for (std::uint64_t d = 0; d < 100; ++d) {
    const int k = 2 + static_cast<int>(d % 31);
    const auto s = scenario(64, k, 10.0, PcScheme::none);
    const auto drop = drop_users(s.geometry, s.drop_config(), 9, d);
    const CMatrix h = build_channel(drop, s.geometry);
    const double base = s.noise_var();
    std::vector<double> prev(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i <= 80; ++i) {
      const auto eff = efficiency_all(h, base * std::pow(10.0, -2.0 + 0.05 * i));
      for (int u = 0; u < k; ++u) {
        worst = std::max(worst, prev[u] - eff[u]);
        prev[u] = eff[u];
        ++checks;
      }
    }
  }
  return {worst <= 1e-9, fmt("%zu comparisons, largest decrease %.2e", checks, worst)};
}

Outcome awgn_anchor() {
  auto s = scenario(1, 1, 9.7, PcScheme::none);
  s.r_min = s.r_max = 100.0;
  SimulationConfig sim;
  sim.n_symbols = 10'000'000;
  sim.n_drops = 1;
  sim.seed = 10;
  auto ber = [&](double db) {
    s.snr_edge_db = db;
    return ber_monte_carlo(s, ideal_chain(), sim).user_ber[0];
  };
  double lo = 9.0, hi = 10.5, blo = ber(lo), bhi = ber(hi);
  while (hi - lo > 0.02) {
    const double mid = 0.5 * (lo + hi), b = ber(mid);
    if (b > 1e-3) {
      lo = mid;
      blo = b;
    } else {
      hi = mid;
      bhi = b;
    }
  }
  const double t = (std::log(blo) - std::log(1e-3)) / (std::log(blo) - std::log(bhi));
  const double snr = lo + t * (hi - lo);
  return {std::abs(snr - 9.7) <= 0.2,
          fmt("BER 1e-3 at %.3f dB (1e7 symbols); Q-function value %.3f dB", snr,
              to_db(qpsk_required_snr(1e-3)))};
}

Outcome table_row() {
  RunConfig c;
  c.seed = 11;
  c.scenario = scenario(256, 16, 10.0, PcScheme::none);
  c.chain.p1db_pb_db = 1.4;
  c.chain.p1db_bb_db = 4.2;
  c.chain.bits = 3;
  c.simulate.n_drops = 20;
  c.simulate.n_symbols = 100000;
  c.simulate.snr_lo_db = 6.0;
  c.simulate.snr_hi_db = 16.0;
  c.simulate.tol_db = 0.1;

  // Bound from the analytic framework.
  const auto model = fit_chain(c.chain.build(), c.simulate.bussgang_samples, *c.seed);
  EtaConfig ec;
  ec.n_drops = 200;
  ec.seed = *c.seed;
  const auto eta = estimate_eta_ideal(c.scenario, ec);
  const double target = qpsk_required_snr(1e-3);
  const double alpha = analytic_alpha_no_pc(c.scenario.r_min, c.scenario.r_max);
  const auto pt = solve_contour(target, eta.eta, c.scenario.beta(), alpha, {model.gamma_g()});
  const double bound = to_db(pt[0].snr_edge);

  const auto t = cmd_simulate(c).table;
  const std::size_t last = t.rows.size() - 1;
  const double sim = std::stod(t.at(last, "snr_edge_db"));
  return {t.at(last, "status") == "ok" && sim >= bound - 2.0 && sim <= bound + 0.5,
          fmt("simulated %.2f dB, bound %.2f dB (gamma_g %.2f dB, eta %.2f dB, 20 drops x 1e5)",
              sim, bound, model.params.gamma_db(), to_db(eta.eta))};
}

Outcome quantizer_comparison() {
  Outcome o{true, ""};
  for (int b = 1; b <= 6; ++b) {
    const auto u = design_uniform_quantizer(b);
    const auto l = design_lloyd_max(b);
    const double gain = (u.mse - l.mse) / u.mse;
    bool ok = l.converged && l.mse <= u.mse + 1e-12;
    if (b == 1) ok = ok && std::abs(u.mse - l.mse) < 1e-9 && std::abs(u.mse - 0.3634) < 5e-5;
    if (b >= 2) ok = ok && gain < 0.10;
    o.pass = o.pass && ok;
    o.detail += fmt("b%d %.4f/%.4f (%.1f%%)  ", b, u.mse, l.mse, 100.0 * gain);
  }
  o.detail += "[uniform/Lloyd-Max MSE (improvement), limit 10% for b>=2]";
  return o;
}

Outcome gaussianity() {
  const auto s = scenario(256, 8, 10.0, PcScheme::none);
  std::vector<double> re;
  for (std::uint64_t d = 0; d < 20; ++d) {
    const auto drop = drop_users(s.geometry, s.drop_config(), 12, d);
    const CMatrix h = build_channel(drop, s.geometry);
    const CMatrix x = testing::random_qpsk(8, 4000, 12, stream_id(stream_tag::kBits, d));
    const CMatrix y = received_samples(h, x, s.noise_var(), 12, stream_id(stream_tag::kNoise, d));
    const double scale = std::sqrt(2.0 / (drop.total_received_power() + s.noise_var()));
    for (Eigen::Index m = 0; m < y.rows(); m += 8) {
      for (Eigen::Index t = 0; t < y.cols(); ++t) re.push_back(scale * y(m, t).real());
    }
  }
  const double kl = gaussianity_kl(re);
  return {kl < 0.01, fmt("KL %.5f nats over %zu samples (K=8, N=256, 20 drops)", kl, re.size())};
}

Outcome determinism() {
  RunConfig c;
  c.seed = 13;
  c.scenario = scenario(64, 8, 10.0, PcScheme::none);
  c.chain.p1db_pb_db = 1.4;
  c.chain.p1db_bb_db = 4.2;
  c.chain.bits = 3;
  c.simulate.n_drops = 4;
  c.simulate.n_symbols = 5000;
  c.simulate.bussgang_samples = 200000;
  std::string first;
  bool same = true;
  for (int w : {1, 4, 16}) {
    c.workers = w;
    std::ostringstream os;
    write_csv(os, cmd_simulate(c).table);
    if (first.empty()) first = os.str();
    same = same && os.str() == first;
  }
  return {same, fmt("simulate CSV (%zu bytes) identical at 1, 4 and 16 workers", first.size())};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"power-control factor", alpha_factor},
      {"limiter intrinsic SNR", limiter_gamma},
      {"cascade intrinsic SNR", cascade_table},
      {"Bussgang orthogonality and covariance", orthogonality},
      {"closed-form matched-filter SNR", closed_forms},
      {"LMMSE lower bound validity", bound_validity},
      {"efficiency monotonicity", efficiency_monotone},
      {"QPSK AWGN anchor", awgn_anchor},
      {"SNR_edge at N=256, K=16", table_row},
      {"Lloyd-Max vs uniform quantizer", quantizer_comparison},
      {"received-signal Gaussianity", gaussianity},
      {"determinism across workers", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
