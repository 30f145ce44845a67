#include <doctest.h>

#include "nlmimo/bussgang.hpp"
#include "nlmimo/rng.hpp"

using namespace nlmimo;

namespace {

Complex hard_limiter(Complex y) { return y == Complex(0.0) ? y : y / std::abs(y); }

// Polar limiter at clip level c on CN(0, 1): E[g y*] and E|g|^2 in closed form.
double polar_limiter_gamma(double c) {
  const double e = std::exp(-c * c);
  const double a = 1.0 - e + 0.5 * c * std::sqrt(kPi) * std::erfc(c);
  const double gg = 1.0 - e;
  return a * a / (gg - a * a);
}

NonlinearChain limiter_chain(double threshold_db, bool per_dim) {
  NonlinearChain c;
  c.limiter = Limiter(1.0, from_db(threshold_db), per_dim);
  return c;
}

}  // namespace

TEST_CASE("identity map has infinite intrinsic SNR") {
  const auto p = bussgang_mc([](Complex y) { return y; }, 100000, 1);
  CHECK(std::abs(p.a - Complex(1.0)) < 1e-12);
  CHECK(p.gamma_infinite);
  CHECK(std::isinf(p.gamma_db()));
  const auto q = bussgang_quadrature(NonlinearChain{});
  CHECK(q.gamma_infinite);
}

TEST_CASE("polar hard limiter") {
  const auto p = bussgang_mc(hard_limiter, 1'000'000, 5);
  CHECK(std::abs(p.a.real() - std::sqrt(kPi) / 2) < 3 * p.se_a);
  CHECK(std::abs(p.a.imag()) < 3 * p.se_a + 1e-12);
  CHECK(std::abs(p.sigma_g2 - (1.0 - kPi / 4)) < 3 * p.se_sigma_g2);
  CHECK(p.gamma_db() == doctest::Approx(5.63).epsilon(0.01));
  // Quadrature with a huge gain is the hard limiter up to a vanishing core.
  NonlinearChain c;
  c.limiter = Limiter(1e8, 1.0);
  const auto q = bussgang_quadrature(c);
  CHECK(std::abs(q.a.real() - std::sqrt(kPi) / 2) < 1e-8);
}

TEST_CASE("polar limiter quadrature against closed form") {
  for (double db : {-3.0, 0.0, 6.0, 10.0}) {
    const auto q = bussgang_quadrature(limiter_chain(db, false));
    CHECK(q.gamma_g == doctest::Approx(polar_limiter_gamma(std::sqrt(from_db(db)))).epsilon(1e-7));
  }
}

TEST_CASE("per-dimension limiter at 6 dB") {
  const auto chain = limiter_chain(6.0, true);
  const auto q = bussgang_quadrature(chain);
  const auto m = bussgang_mc(chain, 1'000'000, 9);
  CHECK(q.gamma_db() == doctest::Approx(20.0).epsilon(0.05));
  CHECK(std::abs(m.gamma_db() - q.gamma_db()) < 3 * m.se_gamma_db);
  CHECK(std::abs(m.a - q.a) < 3 * m.se_a);
}

TEST_CASE("quadrature matches Monte Carlo for single stages") {
  std::vector<NonlinearChain> chains;
  chains.push_back(make_cascade(10.0, std::nullopt, 0));
  chains.push_back(make_cascade(1.0, std::nullopt, 0));
  chains.push_back(make_cascade(std::nullopt, 3.0, 0));
  chains.push_back(make_cascade(std::nullopt, std::nullopt, 3));
  chains.push_back(make_cascade(std::nullopt, std::nullopt, 2, QuantizerKind::lloyd_max));
  for (const auto& c : chains) {
    CAPTURE(c.describe());
    const auto q = bussgang_quadrature(c);
    const auto m = bussgang_mc(c, 1'000'000, 11);
    CHECK(std::abs(m.a - q.a) < 3 * m.se_a + 1e-9);
    CHECK(std::abs(m.sigma_g2 - q.sigma_g2) < 3 * m.se_sigma_g2 + 1e-9);
  }
}

TEST_CASE("third-order at 10 dB against 1e7 Monte Carlo samples") {
  const auto c = make_cascade(10.0, std::nullopt, 0);
  const auto q = bussgang_quadrature(c);
  const auto m = bussgang_mc(c, 10'000'000, 12);
  CHECK(std::abs(m.a - q.a) < 3 * m.se_a);
  CHECK(std::abs(m.sigma_g2 - q.sigma_g2) < 3 * m.se_sigma_g2);
}

TEST_CASE("quantizer alone has the closed-form Bussgang gain") {
  const auto spec = design_uniform_quantizer(3);
  const auto q = bussgang_quadrature(make_cascade(std::nullopt, std::nullopt, 3));
  // AGC maps the complex input to unit per-dimension variance.
  const double a = std::sqrt(2.0) * gaussian_quantizer_correlation(spec);
  CHECK(q.a.real() == doctest::Approx(a).epsilon(1e-8));
  CHECK(q.sigma_g2 == doctest::Approx(2.0 * gaussian_quantizer_output_power(spec) - a * a).epsilon(1e-8));
}

TEST_CASE("quadrature rejects cascades") {
  CHECK_THROWS_AS(bussgang_quadrature(make_cascade(1.4, 4.2, 3)), std::invalid_argument);
}

TEST_CASE("normalization leaves gamma unchanged") {
  // Limiter with absolute threshold 4 at input power 2 equals the unit-power
  // limiter with threshold 2.
  const Limiter raw_lim(1.0, 4.0);
  const ComplexMap g = [&](Complex y) { return apply_limiter(y, raw_lim); };
  const auto raw = bussgang_mc(g, 1'000'000, 13, 2.0);
  const auto norm = normalize_params(raw, 2.0);
  CHECK(norm.a == raw.a);
  CHECK(norm.sigma_g2 == doctest::Approx(raw.sigma_g2 / 2.0));
  CHECK(norm.gamma_g == raw.gamma_g);
  const auto ref = bussgang_quadrature(limiter_chain(to_db(2.0), false));
  CHECK(std::abs(norm.gamma_db() - ref.gamma_db()) < 3 * raw.se_gamma_db);
}

TEST_CASE("linearized model") {
  const auto m = build_linearized_model(2.0, 100.0, 0.5);
  CHECK(m.nu_g2 == doctest::Approx(0.02));
  CHECK(m.effective_noise_var == doctest::Approx(0.52));
  const auto inf = build_linearized_model(2.0, kInf, 0.5);
  CHECK(inf.nu_g2 == 0.0);
  CHECK(inf.effective_noise_var == 0.5);
  CHECK_THROWS(build_linearized_model(-1.0, 10.0, 0.5));
  CHECK_THROWS(build_linearized_model(1.0, 0.0, 0.5));
}

TEST_CASE("orthogonality of the error to the input") {
  std::vector<NonlinearChain> chains{limiter_chain(6.0, true), limiter_chain(6.0, false),
                                     make_cascade(1.4, std::nullopt, 0), make_cascade(std::nullopt, 4.2, 0),
                                     make_cascade(std::nullopt, std::nullopt, 3),
                                     make_cascade(1.4, 4.2, 3)};
  for (const auto& c : chains) {
    CAPTURE(c.describe());
    const NormalizedChain n(c);
    const ComplexMap g = [&](Complex y) { return n(y); };
    const auto p = bussgang_mc(g, 1'000'000, 21);
    const auto r = orthogonality_residual(g, p.a, 1'000'000, 21);
    CHECK(r.residual < 4 * r.standard_error);
  }
}

TEST_CASE("covariance preservation with the hard limiter") {
  for (double rho : {0.0, 0.3, 0.5, 0.7}) {
    const auto c = check_covariance_preservation(hard_limiter, rho, 1'000'000, 17);
    CHECK(c.residual < 3 * c.standard_error + 1e-12);
    CHECK(std::abs(c.expected - std::sqrt(kPi) / 2 * rho) < 0.003);
  }
  const auto id = check_covariance_preservation([](Complex y) { return y; }, Complex(0.0, 0.4), 200000, 3);
  CHECK(std::abs(id.measured - Complex(0.0, 0.4)) < 0.01);
}

TEST_CASE("vector Bussgang") {
  const Limiter lim(1.0, 1.0);
  const ComplexMap g = [&](Complex y) { return apply_limiter(y, lim); };
  const auto eq = vector_bussgang(g, {1.0, 1.0, 1.0}, 100000, 5);
  CHECK(eq.gains[0] == eq.gains[1]);
  CHECK(eq.gains[1] == eq.gains[2]);
  CHECK(eq.error_variances[0] == eq.error_variances[2]);
  const auto one = vector_bussgang(g, {2.0}, 100000, 5);
  const auto scalar = bussgang_mc(g, 100000, 5, 2.0);
  CHECK(std::abs(one.gains[0] - scalar.a) < 1e-12);
  const auto id = vector_bussgang([](Complex y) { return y; }, {0.5, 3.0}, 10000, 5);
  CHECK(std::abs(id.gains[0] - 1.0) < 1e-12);
  CHECK(std::abs(id.gains[1] - 1.0) < 1e-12);
  // A weaker antenna is compressed less.
  const auto mixed = vector_bussgang(g, {0.25, 4.0}, 100000, 5);
  CHECK(std::abs(mixed.gains[0]) > std::abs(mixed.gains[1]));
}

TEST_CASE("Monte Carlo fit is independent of the worker count") {
  const auto c = make_cascade(1.4, 4.2, 3);
  const auto ref = bussgang_mc(c, 300000, 77, 1);
  for (int w : {2, 4, 8}) {
    const auto p = bussgang_mc(c, 300000, 77, w);
    CHECK(p.a == ref.a);
    CHECK(p.sigma_g2 == ref.sigma_g2);
    CHECK(p.se_gamma_db == ref.se_gamma_db);
  }
}

TEST_CASE("cascade gamma grows with every spec on common random numbers") {
  const auto base = bussgang_mc(make_cascade(1.4, 4.2, 3), 200000, 5);
  CHECK(bussgang_mc(make_cascade(2.4, 4.2, 3), 200000, 5).gamma_g > base.gamma_g);
  CHECK(bussgang_mc(make_cascade(1.4, 5.2, 3), 200000, 5).gamma_g > base.gamma_g);
  CHECK(bussgang_mc(make_cascade(1.4, 4.2, 4), 200000, 5).gamma_g > base.gamma_g);
}
