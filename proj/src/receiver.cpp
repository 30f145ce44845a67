#include "nlmimo/receiver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <bit>

#include "nlmimo/kernels.hpp"
#include "nlmimo/rng.hpp"

namespace nlmimo {

namespace {

void check_noise(double noise_var) {
  if (!(noise_var > 0.0)) throw std::invalid_argument("LMMSE noise variance must be positive");
}

}  // namespace

LmmseReceiver lmmse_build(const CMatrix& h, double noise_var) {
  check_noise(noise_var);
  const auto k = h.cols();
  CMatrix gram = h.adjoint() * h;
  gram.diagonal().array() += noise_var;
  LmmseReceiver r;
  r.noise_var = noise_var;
  r.w = gram.llt().solve(CMatrix(h.adjoint()));
  if (r.w.rows() != k) throw std::logic_error("LMMSE solve returned the wrong shape");
  return r;
}

double lmmse_sinr(const CMatrix& h, double noise_var, int k) {
  check_noise(noise_var);
  if (k < 0 || k >= h.cols()) throw std::out_of_range("user index out of range");
  const auto n = h.rows();
  CMatrix r = noise_var * CMatrix::Identity(n, n);
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    if (j != k) r.noalias() += h.col(j) * h.col(j).adjoint();
  }
  const CVector x = r.llt().solve(h.col(k));
  return h.col(k).dot(x).real();
}

std::vector<double> lmmse_sinr_all(const CMatrix& h, double noise_var) {
  check_noise(noise_var);
  const auto k = h.cols();
  CMatrix m = h.adjoint() * h / noise_var;
  m.diagonal().array() += 1.0;
  const CMatrix inv_diag_src = m.llt().solve(CMatrix::Identity(k, k));
  std::vector<double> out(k);
  for (Eigen::Index i = 0; i < k; ++i) out[i] = 1.0 / inv_diag_src(i, i).real() - 1.0;
  return out;
}

double efficiency(const CMatrix& h, double noise_var, int k) {
  return lmmse_sinr(h, noise_var, k) / (h.col(k).squaredNorm() / noise_var);
}

std::vector<double> efficiency_all(const CMatrix& h, double noise_var) {
  auto sinr = lmmse_sinr_all(h, noise_var);
  for (Eigen::Index k = 0; k < h.cols(); ++k) sinr[k] /= h.col(k).squaredNorm() / noise_var;
  return sinr;
}

Complex qpsk_symbol(unsigned bits2) {
  constexpr double r = 0.70710678118654752440;
  return {(bits2 & 2u) ? -r : r, (bits2 & 1u) ? -r : r};
}

std::vector<Complex> qpsk_modulate(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("QPSK needs an even number of bits");
  std::vector<Complex> out(bits.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = qpsk_symbol((bits[2 * i] ? 2u : 0u) | (bits[2 * i + 1] ? 1u : 0u));
  }
  return out;
}

std::vector<std::uint8_t> qpsk_detect(std::span<const Complex> estimates) {
  std::vector<std::uint8_t> bits(2 * estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    bits[2 * i] = estimates[i].real() < 0.0;
    bits[2 * i + 1] = estimates[i].imag() < 0.0;
  }
  return bits;
}

double qpsk_ber(double snr) { return q_function(std::sqrt(snr)); }

double Scenario::noise_var() const {
  const double a = edge_amplitude();
  return geometry.num_antennas * a * a / from_db(snr_edge_db);
}

DropConfig Scenario::drop_config() const {
  DropConfig c;
  c.num_users = num_users;
  c.r_min = r_min;
  c.r_max = r_max;
  c.delta_omega_min = delta_omega_min < 0.0 ? 2.783 / geometry.num_antennas : delta_omega_min;
  return c;
}

void Scenario::validate() const {
  if (num_users < 1 || num_users > geometry.num_antennas) {
    throw ConfigError("need 1 <= K <= N (load factor in (0, 1])");
  }
  if (!(r_min > 0.0) || !(r_max >= r_min)) throw ConfigError("need 0 < r_min <= r_max");
  if (!std::isfinite(snr_edge_db)) throw ConfigError("snr_edge_db must be finite");
  pc.validate();
}

ChainModel ideal_chain() {
  ChainModel m;
  m.params.a = 1.0;
  m.params.sigma_g2 = 0.0;
  m.params.gamma_g = kInf;
  m.params.gamma_infinite = true;
  return m;
}

ChainModel fit_chain(const NonlinearChain& chain, std::size_t samples, std::uint64_t seed,
                     int workers) {
  if (chain.is_identity()) return ideal_chain();
  ChainModel m;
  m.chain = chain;
  m.params = chain.stage_count() <= 1 ? bussgang_quadrature(chain)
                                      : bussgang_mc(chain, samples, seed, workers);
  return m;
}

double availability_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("level must be in (0, 1]");
  std::sort(values.begin(), values.end());
  auto idx = static_cast<std::size_t>(std::ceil(level * values.size() - 1e-12));
  idx = std::clamp<std::size_t>(idx, 1, values.size()) - 1;
  return values[idx];
}

namespace {

struct DropContext {
  CMatrix h;
  LmmseReceiver rx;
  double sigma_y = 1.0;
  Complex rescale{1.0, 0.0};  // sigma_y / a
  std::vector<double> sinr;
};

class LinkSimulator {
 public:
  LinkSimulator(const Scenario& scenario, const ChainModel& chain, const SimulationConfig& sim)
      : scenario_(scenario), chain_(chain), sim_(sim), normalized_(chain.chain) {
    scenario_.validate();
    if (sim.n_symbols == 0 || sim.n_drops < 1) {
      throw std::invalid_argument("simulation needs symbols and drops");
    }
    sigma_n2_ = scenario_.noise_var();
    blocks_ = (sim.n_symbols + kSymbolBlock - 1) / kSymbolBlock;
  }

  DropContext prepare(int d) const {
    const auto& g = scenario_.geometry;
    const double gamma = chain_.gamma_g();
    auto drop = drop_users(g, scenario_.drop_config(), sim_.seed, static_cast<std::uint64_t>(d));
    drop = apply_power_control(drop, g, sigma_n2_, gamma, scenario_.pc);
    DropContext c;
    c.h = build_channel(drop, g);
    const double sigma_y2 = drop.total_received_power() + sigma_n2_;
    const double nu2 = std::isfinite(gamma) ? sigma_y2 / gamma : 0.0;
    c.rx = lmmse_build(c.h, sigma_n2_ + nu2);
    c.sinr = lmmse_sinr_all(c.h, sigma_n2_ + nu2);
    c.sigma_y = std::sqrt(sigma_y2);
    c.rescale = c.sigma_y / chain_.params.a;
    return c;
  }

  // Bit errors per user for symbols [b * kSymbolBlock, ...) of drop d.
  std::vector<std::uint64_t> run_block(const DropContext& c, int d, std::size_t b) const {
    const auto n = c.h.rows();
    const auto k = c.h.cols();
    const std::size_t s0 = b * kSymbolBlock;
    const auto t = static_cast<Eigen::Index>(std::min(sim_.n_symbols, s0 + kSymbolBlock) - s0);
    const CounterRng bits_rng(sim_.seed, stream_id(stream_tag::kBits, d));
    const CounterRng noise_rng(sim_.seed, stream_id(stream_tag::kNoise, d));

    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> tx(k, t);
    CMatrix x(k, t);
    for (Eigen::Index j = 0; j < t; ++j) {
      const std::uint64_t s = s0 + j;
      for (Eigen::Index u = 0; u < k; ++u) {
        tx(u, j) = static_cast<std::uint8_t>(bits_rng.block(s * k + u)[0] & 3u);
        x(u, j) = qpsk_symbol(tx(u, j));
      }
    }
    CMatrix y = c.h * x;
    const double sn = std::sqrt(sigma_n2_);
    for (Eigen::Index j = 0; j < t; ++j) {
      const std::uint64_t base = (s0 + j) * static_cast<std::uint64_t>(n);
      for (Eigen::Index m = 0; m < n; ++m) y(m, j) += sn * noise_rng.complex_normal_at(base + m);
    }
    if (!chain_.ideal()) {
      const double in_scale = 1.0 / c.sigma_y;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        y.data()[i] = c.rescale * normalized_(y.data()[i] * in_scale);
      }
    }
    const CMatrix est = c.rx.w * y;

    std::vector<std::uint64_t> errors(k, 0);
    for (Eigen::Index j = 0; j < t; ++j) {
      for (Eigen::Index u = 0; u < k; ++u) {
        const unsigned sent = tx(u, j);
        const unsigned got = (est(u, j).real() < 0.0 ? 2u : 0u) | (est(u, j).imag() < 0.0 ? 1u : 0u);
        errors[u] += std::popcount(sent ^ got);
      }
    }
    return errors;
  }

  OutageReport assemble(const std::vector<DropContext>& ctx,
                        const std::vector<std::vector<std::uint64_t>>& errors) const {
    OutageReport r;
    r.availability = sim_.availability;
    r.symbols = sim_.n_symbols;
    r.drops = sim_.n_drops;
    const double bits = 2.0 * static_cast<double>(sim_.n_symbols);
    for (int d = 0; d < sim_.n_drops; ++d) {
      const auto k = ctx[d].h.cols();
      std::vector<std::uint64_t> total(k, 0);
      for (std::size_t b = 0; b < blocks_; ++b) {
        const auto& e = errors[d * blocks_ + b];
        for (Eigen::Index u = 0; u < k; ++u) total[u] += e[u];
      }
      for (Eigen::Index u = 0; u < k; ++u) {
        r.user_ber.push_back(static_cast<double>(total[u]) / bits);
        r.user_sinr.push_back(ctx[d].sinr[u]);
      }
    }
    r.quantile_ber = availability_quantile(r.user_ber, sim_.availability);
    return r;
  }

  std::size_t blocks() const { return blocks_; }

 private:
  Scenario scenario_;
  const ChainModel& chain_;
  SimulationConfig sim_;
  NormalizedChain normalized_;
  double sigma_n2_ = 0.0;
  std::size_t blocks_ = 0;
};

}  // namespace

OutageReport ber_monte_carlo(const Scenario& scenario, const ChainModel& chain,
                             const SimulationConfig& sim) {
  const LinkSimulator s(scenario, chain, sim);
  const int workers = kernels::resolve_workers(sim.workers);
  std::vector<DropContext> ctx(sim.n_drops);
  kernels::ExceptionTrap trap;
#pragma omp parallel for schedule(static) num_threads(workers)
  for (int d = 0; d < sim.n_drops; ++d) trap.run([&] { ctx[d] = s.prepare(d); });
  trap.rethrow();

  const auto items = static_cast<std::int64_t>(sim.n_drops * s.blocks());
  std::vector<std::vector<std::uint64_t>> errors(items);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::int64_t i = 0; i < items; ++i) {
    trap.run([&] {
      const int d = static_cast<int>(i / s.blocks());
      errors[i] = s.run_block(ctx[d], d, i % s.blocks());
    });
  }
  trap.rethrow();
  return s.assemble(ctx, errors);
}

OutageReport ber_monte_carlo_reference(const Scenario& scenario, const ChainModel& chain,
                                       const SimulationConfig& sim) {
  const LinkSimulator s(scenario, chain, sim);
  std::vector<DropContext> ctx;
  std::vector<std::vector<std::uint64_t>> errors;
  for (int d = 0; d < sim.n_drops; ++d) {
    ctx.push_back(s.prepare(d));
    for (std::size_t b = 0; b < s.blocks(); ++b) errors.push_back(s.run_block(ctx.back(), d, b));
  }
  return s.assemble(ctx, errors);
}

}  // namespace nlmimo
