#include <doctest.h>

#include "nlmimo/powercontrol.hpp"
#include "nlmimo/receiver.hpp"
#include "nlmimo/rng.hpp"

using namespace nlmimo;

namespace {

const ArrayGeometry kArray(64, 0.5, kSpeedOfLight / 140e9);

UserDrop orthogonal_drop(const ArrayGeometry& g, const std::vector<double>& ranges) {
  UserDrop d;
  d.r_min = 5.0;
  d.r_max = 100.0;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    User u;
    u.range = ranges[k];
    u.amplitude = g.amplitude_at(u.range);
    u.omega = 2 * kPi * static_cast<double>(k) / g.num_antennas;
    d.users.push_back(u);
  }
  return d;
}

}  // namespace

TEST_CASE("scheme names") {
  CHECK(parse_pc_scheme("adaptive") == PcScheme::adaptive);
  CHECK(to_string(PcScheme::naive) == "naive");
  CHECK_THROWS_AS(parse_pc_scheme("full"), ConfigError);
}

TEST_CASE("naive power control equalizes to the edge") {
  DropConfig cfg;
  cfg.num_users = 12;
  const auto drop = drop_users(kArray, cfg, 2);
  const auto pc = apply_naive(drop, kArray);
  const double edge = kArray.amplitude_at(100.0);
  for (const auto& u : pc.users) {
    CHECK(u.received_power() == doctest::Approx(edge * edge));
    CHECK(u.power_scale <= 1.0);
  }
  CHECK(power_control_factor(pc, kArray) == doctest::Approx(1.0));
}

TEST_CASE("adaptive power control: single user backs off to the target") {
  const auto drop = orthogonal_drop(kArray, {50.0});
  const double a2 = drop.users[0].amplitude * drop.users[0].amplitude;
  const double sigma = 64 * a2 / from_db(20.0);
  PowerControlConfig cfg;
  cfg.scheme = PcScheme::adaptive;
  cfg.sinr_th_db = 10.0;
  const auto r = apply_adaptive(drop, kArray, sigma, kInf, cfg);
  CHECK(r.converged);
  CHECK(to_db(r.drop.users[0].power_scale) == doctest::Approx(-10.0).epsilon(1e-6));
  CHECK(r.iterations <= 2);
}

TEST_CASE("adaptive power control on orthogonal users converges in one pass") {
  const auto drop = orthogonal_drop(kArray, {10.0, 30.0, 60.0, 100.0});
  const double edge = kArray.amplitude_at(100.0);
  const double sigma = 64 * edge * edge / from_db(12.0);
  PowerControlConfig cfg;
  cfg.scheme = PcScheme::adaptive;
  const auto r = apply_adaptive(drop, kArray, sigma, kInf, cfg);
  CHECK(r.converged);
  CHECK(r.power_trace_db.size() == 2);  // one change, one confirming pass
  const auto sinr = lmmse_sinr_all(build_channel(r.drop, kArray), sigma);
  for (int k = 0; k < 4; ++k) CHECK(to_db(sinr[k]) == doctest::Approx(10.0).epsilon(1e-6));
  // The edge user only gives up its 2 dB margin.
  CHECK(to_db(r.drop.users[3].power_scale) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("adaptive power control never raises power and respects the target") {
  DropConfig dc;
  dc.num_users = 16;
  dc.delta_omega_min = 2.783 / 64;
  const double edge = kArray.amplitude_at(100.0);
  const double sigma = 64 * edge * edge / from_db(15.0);
  PowerControlConfig cfg;
  cfg.scheme = PcScheme::adaptive;
  cfg.n_iter = 50;
  for (std::uint64_t d = 0; d < 10; ++d) {
    const auto drop = drop_users(kArray, dc, 6, d);
    const auto r = apply_adaptive(drop, kArray, sigma, from_db(15.0), cfg);
    for (std::size_t it = 1; it < r.power_trace_db.size(); ++it) {
      for (std::size_t k = 0; k < 16; ++k) {
        CHECK(r.power_trace_db[it][k] <= r.power_trace_db[it - 1][k] + 1e-12);
      }
    }
    for (const auto& u : r.drop.users) CHECK(u.power_scale <= 1.0);
    if (r.converged) {
      for (double s : r.sinr_trace_db.back()) CHECK(s >= 10.0 - 0.05);
    }
  }
}

TEST_CASE("config validation") {
  PowerControlConfig cfg;
  cfg.n_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.n_iter = 5;
  cfg.tol_db = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("analytic no-PC factor") {
  CHECK(analytic_alpha_no_pc(5, 100) == doctest::Approx(0.1665).epsilon(1e-3));
  CHECK(to_db(analytic_alpha_no_pc(5, 100)) == doctest::Approx(-7.79).epsilon(1e-3));
  CHECK(analytic_alpha_no_pc(99.999, 100) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS(analytic_alpha_no_pc(0, 100));
  CHECK_THROWS(analytic_alpha_no_pc(100, 100));
}

TEST_CASE("no-PC factor against direct integration by sampling") {
  // Independent oracle: R^2 uniform on [r_min^2, r_max^2].
  CounterRng rng(8, 8);
  double s = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double r2 = 100.0 + (10000.0 - 100.0) * rng.next_uniform();
    s += 1.0 / r2;
  }
  const double alpha_mc = (1.0 / 10000.0) / (s / n);
  CHECK(std::abs(to_db(analytic_alpha_no_pc(10, 100)) - to_db(alpha_mc)) < 0.05);
}

TEST_CASE("ensemble estimate and determinism") {
  DropConfig dc;
  dc.num_users = 8;
  PowerControlConfig none;
  const auto a = estimate_alpha(kArray, dc, none, 1.0, kInf, 20000, 4, 1);
  CHECK(std::abs(to_db(a.alpha) - to_db(analytic_alpha_no_pc(5, 100))) < 0.1);
  CHECK(a.users == 160000);
  const auto b = estimate_alpha(kArray, dc, none, 1.0, kInf, 20000, 4, 4);
  CHECK(a.alpha == b.alpha);
  PowerControlConfig naive;
  naive.scheme = PcScheme::naive;
  CHECK(estimate_alpha(kArray, dc, naive, 1.0, kInf, 50, 4).alpha == doctest::Approx(1.0));
}
