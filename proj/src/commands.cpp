#include "nlmimo/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace nlmimo {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return format_number(v); }
std::string seed_text(const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : ""; }

std::string stage_name(const NonlinearChain& c) {
  if (c.limiter) return c.limiter->per_dimension ? "limiter_iq" : "limiter";
  if (c.passband) return "passband";
  if (c.baseband) return "baseband";
  if (c.quantizer) return "adc";
  return "identity";
}

std::vector<NonlinearChain> single_stages(const NonlinearChain& chain) {
  std::vector<NonlinearChain> out;
  if (chain.limiter) {
    NonlinearChain c;
    c.limiter = chain.limiter;
    out.push_back(c);
  }
  if (chain.passband) {
    NonlinearChain c;
    c.passband = chain.passband;
    out.push_back(c);
  }
  if (chain.baseband) {
    NonlinearChain c;
    c.baseband = chain.baseband;
    out.push_back(c);
  }
  if (chain.quantizer) {
    NonlinearChain c;
    c.quantizer = chain.quantizer;
    c.agc = true;
    out.push_back(c);
  }
  return out;
}

double pc_alpha(const Scenario& s, double sigma_n2, std::size_t drops, std::uint64_t seed,
                int workers) {
  switch (s.pc.scheme) {
    case PcScheme::none:
      return s.r_max > s.r_min ? analytic_alpha_no_pc(s.r_min, s.r_max) : 1.0;
    case PcScheme::naive: return 1.0;
    case PcScheme::adaptive:
      return estimate_alpha(s.geometry, s.drop_config(), s.pc, sigma_n2, kInf, drops, seed,
                            workers)
          .alpha;
  }
  return 1.0;
}

std::vector<double> p1db_grid(const DesignOptions& o) {
  std::vector<double> g;
  const auto steps = static_cast<long>(std::floor((o.p1db_max_db - o.p1db_min_db) / o.p1db_step_db + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    g.push_back(std::round((o.p1db_min_db + i * o.p1db_step_db) * 1e9) / 1e9);
  }
  return g;
}

const std::vector<std::string>& simulate_header() {
  static const std::vector<std::string> h{
      "kind",         "snr_edge_db",    "quantile_ber",  "mean_ber",
      "sinr_p5_db",   "sinr_median_db", "sinr_min_db",   "users",
      "drops",        "symbols",        "gamma_g_db",    "snr_edge_bound_db",
      "status",       "config_hash",    "seed"};
  return h;
}

}  // namespace

CommandResult cmd_bussgang(const RunConfig& config) {
  CommandResult r;
  r.table.header = {"stage",       "method", "a_re",        "a_im",     "sigma_g2",
                    "gamma_g_db",  "se_a",   "se_sigma_g2", "se_gamma_db", "n_samples",
                    "config_hash", "seed"};
  const std::string hash = config_hash(config);
  const auto chain = config.chain.build();
  const bool quad = config.bussgang.method == "quadrature";

  auto row = [&](const std::string& name, const std::string& method, const BussgangParams& p) {
    r.table.add_row({name, method, num(p.a.real()), num(p.a.imag()), num(p.sigma_g2),
                     num(p.gamma_db()), num(p.se_a), num(p.se_sigma_g2), num(p.se_gamma_db),
                     std::to_string(p.n_samples), hash, seed_text(config)});
  };
  auto evaluate = [&](const NonlinearChain& c, const std::string& name) {
    if (c.is_identity()) {
      row(name, "exact", ideal_chain().params);
    } else if (quad && c.stage_count() <= 1) {
      row(name, "quadrature", bussgang_quadrature(c));
    } else {
      const auto seed = config.require_seed("bussgang");
      row(name, "mc", bussgang_mc(c, config.bussgang.samples, seed, config.workers));
    }
  };
  for (const auto& stage : single_stages(chain)) evaluate(stage, stage_name(stage));
  evaluate(chain, "cascade");
  return r;
}

CommandResult cmd_simulate(const RunConfig& config) {
  const auto seed = config.require_seed("simulate");
  const auto& o = config.simulate;
  const std::string hash = config_hash(config);
  const Scenario& base = config.scenario;
  const auto model = fit_chain(config.chain.build(), o.bussgang_samples, seed, config.workers);

  SimulationConfig sim;
  sim.n_symbols = o.n_symbols;
  sim.n_drops = o.n_drops;
  sim.seed = seed;
  sim.availability = o.availability;
  sim.workers = config.workers;

  std::map<double, OutageReport> visited;
  auto eval = [&](double snr_db) -> const OutageReport& {
    auto it = visited.find(snr_db);
    if (it != visited.end()) return it->second;
    Scenario s = base;
    s.snr_edge_db = snr_db;
    return visited.emplace(snr_db, ber_monte_carlo(s, model, sim)).first->second;
  };

  for (double p : o.snr_points_db) eval(p);
  double lo = o.snr_lo_db, hi = o.snr_hi_db;
  std::string status = "ok";
  double threshold = kInf;
  const double qlo0 = eval(lo).quantile_ber;
  const double qhi0 = eval(hi).quantile_ber;
  if (qlo0 <= o.target_ber) {
    status = "below_range";
    threshold = lo;
  } else if (qhi0 > o.target_ber) {
    status = "unreachable";
  } else {
    while (hi - lo > o.tol_db) {
      const double mid = 0.5 * (lo + hi);
      (eval(mid).quantile_ber > o.target_ber ? lo : hi) = mid;
    }
    // Log-BER interpolation inside the final bracket.
    const double qlo = eval(lo).quantile_ber, qhi = eval(hi).quantile_ber;
    if (qhi > 0.0 && qlo > qhi) {
      const double t = (std::log(qlo) - std::log(o.target_ber)) / (std::log(qlo) - std::log(qhi));
      threshold = lo + std::clamp(t, 0.0, 1.0) * (hi - lo);
    } else {
      threshold = 0.5 * (lo + hi);
    }
  }

  std::string bound = "";
  if (o.eta_ideal_db) {
    const double target = qpsk_required_snr(o.target_ber);
    const double alpha = pc_alpha(base, base.noise_var(), 2000, seed, config.workers);
    const auto pts = solve_contour(target, from_db(*o.eta_ideal_db), base.beta(), alpha,
                                   {model.gamma_g()});
    bound = num(to_db(pts.front().snr_edge));
  }
  const std::string gamma_db = num(model.params.gamma_db());

  CommandResult r;
  r.table.header = simulate_header();
  for (const auto& [snr, rep] : visited) {
    std::vector<double> sinr_db;
    double mean_ber = 0.0;
    for (double v : rep.user_sinr) sinr_db.push_back(to_db(v));
    for (double b : rep.user_ber) mean_ber += b;
    mean_ber /= rep.user_ber.size();
    std::sort(sinr_db.begin(), sinr_db.end());
    r.table.add_row({"point", num(snr), num(rep.quantile_ber), num(mean_ber),
                     num(availability_quantile(sinr_db, 1.0 - o.availability)),
                     num(availability_quantile(sinr_db, 0.5)), num(sinr_db.front()),
                     std::to_string(rep.user_ber.size()), std::to_string(rep.drops),
                     std::to_string(rep.symbols), gamma_db, bound, "ok", hash,
                     std::to_string(seed)});
  }
  r.table.add_row({"threshold", num(threshold), num(o.target_ber), "", "", "", "",
                   std::to_string(static_cast<long long>(base.num_users) * o.n_drops),
                   std::to_string(o.n_drops), std::to_string(o.n_symbols), gamma_db, bound,
                   status, hash, std::to_string(seed)});
  return r;
}

CommandResult cmd_design(const RunConfig& config) {
  const auto seed = config.require_seed("design");
  const auto& o = config.design;
  if (o.rows.empty()) throw ConfigError("design: no rows configured");
  const std::string hash = config_hash(config);
  const double target =
      o.sinr_target_db ? from_db(*o.sinr_target_db) : qpsk_required_snr(o.target_ber);

  HwGrid grid;
  grid.bits = o.bits;
  grid.p1db_pb_db = p1db_grid(o);
  grid.p1db_bb_db = grid.p1db_pb_db;
  HwSearchConfig hw;
  hw.samples = o.samples;
  hw.seed = seed;
  hw.workers = config.workers;
  GammaCache cache;

  CommandResult r;
  r.table.header = {"beta",         "pc",          "b",           "p1db_bb_db",
                    "p1db_pb_db",   "gamma_g_db",  "snr_edge_bound_db", "gamma_target_db",
                    "alpha_p_db",   "eta_ideal_db", "eta_gap_db", "status",
                    "config_hash",  "seed"};
  for (const auto& row : o.rows) {
    Scenario s = config.scenario;
    s.num_users = static_cast<int>(std::lround(row.beta * s.geometry.num_antennas));
    if (s.num_users < 1) throw ConfigError("design: beta * antennas rounds to zero users");
    s.pc.scheme = row.pc;
    if (row.snr_edge_db) s.snr_edge_db = *row.snr_edge_db;
    const double beta = s.beta();

    const double alpha = pc_alpha(s, s.noise_var(), o.alpha_drops, seed, config.workers);
    double eta = 1.0;
    if (row.eta_ideal_db) {
      eta = from_db(*row.eta_ideal_db);
    } else {
      EtaConfig ec = o.eta;
      ec.seed = seed;
      ec.workers = config.workers;
      ec.target_ber = o.target_ber;
      eta = estimate_eta_ideal(s, ec).eta;
    }
    const double gamma_target =
        row.gamma_g_db ? from_db(*row.gamma_g_db)
                       : required_gamma(target, eta, beta, alpha, from_db(*row.snr_edge_db));

    std::vector<std::string> cells{num(row.beta), to_string(row.pc)};
    std::string status = "ok";
    try {
      if (std::isinf(gamma_target)) {
        throw InfeasibleError("SNR_edge budget too small for the target even with ideal hardware");
      }
      const auto points = search_hw_spec(to_db(gamma_target), grid, hw, &cache);
      if (points.empty()) throw InfeasibleError("no hardware point on the grid");
      const auto& p = points.front();
      const double bound =
          solve_contour(target, eta, beta, alpha, {from_db(p.gamma_g_db)}).front().snr_edge;
      cells.insert(cells.end(), {std::to_string(p.bits), num(p.p1db_bb_db), num(p.p1db_pb_db),
                                 num(p.gamma_g_db), num(to_db(bound))});
    } catch (const InfeasibleError& e) {
      status = std::string("infeasible: ") + e.what();
      cells.insert(cells.end(), {"", "", "", "", ""});
    }
    cells.insert(cells.end(), {num(to_db(gamma_target)), num(to_db(alpha)), num(to_db(eta)),
                               num(-to_db(eta)), status, hash, std::to_string(seed)});
    r.table.add_row(std::move(cells));
  }
  return r;
}

CommandResult cmd_sweep(const RunConfig& config) {
  const auto seed = config.require_seed("sweep");
  const auto& o = config.sweep;
  if (o.betas.empty() || o.pc.empty() || o.chains.empty()) {
    throw ConfigError("sweep: betas, pc and chains must all be non-empty");
  }
  if (!o.out_dir.empty()) fs::create_directories(o.out_dir);

  CommandResult r;
  r.table.header = {"cell", "beta", "pc", "chain"};
  for (const auto& h : simulate_header()) r.table.header.push_back(h);

  int cell = 0;
  for (double beta : o.betas) {
    for (PcScheme pc : o.pc) {
      for (const auto& chain : o.chains) {
        RunConfig c = config;
        c.sweep = SweepOptions{};
        c.scenario.num_users = static_cast<int>(std::lround(beta * c.scenario.geometry.num_antennas));
        c.scenario.pc.scheme = pc;
        c.chain = chain.chain;
        c.seed = seed;
        std::vector<std::string> row{std::to_string(cell), num(beta), to_string(pc), chain.name};

        const std::string stem = o.out_dir.empty() ? "" : o.out_dir + "/cell_" + std::to_string(cell);
        std::vector<std::string> result;
        try {
          c.scenario.validate();
          const std::string hash = config_hash(c);
          bool resumed = false;
          if (!stem.empty() && fs::exists(stem + ".done")) {
            std::ifstream marker(stem + ".done");
            std::string recorded;
            std::getline(marker, recorded);
            std::ifstream data(stem + ".csv");
            if (recorded == hash && data) {
              const Table t = read_csv(data);
              if (!t.rows.empty() && t.header == simulate_header()) {
                result = t.rows.back();
                resumed = true;
              }
            }
          }
          if (!resumed) {
            const auto sim = cmd_simulate(c);
            result = sim.table.rows.back();
            if (!stem.empty()) {
              {
                std::ofstream data(stem + ".csv", std::ios::binary);
                write_csv(data, sim.table);
              }
              std::ofstream marker(stem + ".done", std::ios::binary);
              marker << hash << '\n';
            }
          }
        } catch (const std::exception& e) {
          r.ok = false;
          result.assign(simulate_header().size(), "");
          result[0] = "threshold";
          result[12] = std::string("error: ") + e.what();
          result[14] = std::to_string(seed);
        }
        row.insert(row.end(), result.begin(), result.end());
        r.table.add_row(std::move(row));
        ++cell;
      }
    }
  }
  return r;
}

CommandResult run_command(const std::string& name, const RunConfig& config) {
  if (name == "bussgang") return cmd_bussgang(config);
  if (name == "design") return cmd_design(config);
  if (name == "simulate") return cmd_simulate(config);
  if (name == "sweep") return cmd_sweep(config);
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace nlmimo
