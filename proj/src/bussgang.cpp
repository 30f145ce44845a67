#include "nlmimo/bussgang.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numeric>

#include "nlmimo/rng.hpp"

namespace nlmimo {

namespace {

// Relative floor below which the error variance is treated as zero.
constexpr double kSigmaFloor = 1e-13;

template <class F>
double integrate(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

template <class F>
double integrate_pieces(F f, std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) total += integrate(f, breaks[i], breaks[i + 1]);
  }
  return total;
}

BussgangParams from_moments(Complex gy, double gg, double yy, std::size_t n, double input_power) {
  BussgangParams p;
  p.n_samples = n;
  p.input_power = input_power;
  p.a = gy / yy;
  const double mean_g2 = gg / static_cast<double>(n);
  const double mean_y2 = yy / static_cast<double>(n);
  p.sigma_g2 = mean_g2 - std::norm(p.a) * mean_y2;
  if (p.sigma_g2 <= kSigmaFloor * mean_g2) {
    p.sigma_g2 = std::max(p.sigma_g2, 0.0);
    p.gamma_infinite = true;
    p.gamma_g = kInf;
  } else {
    p.gamma_infinite = false;
    p.gamma_g = std::norm(p.a) * mean_y2 / p.sigma_g2;
  }
  return p;
}

// Exact-expectation version (n irrelevant, E|y|^2 = 1).
BussgangParams from_expectations(double a, double mean_g2) {
  BussgangParams p = from_moments(Complex(a, 0.0), mean_g2, 1.0, 1, 1.0);
  p.n_samples = 0;
  return p;
}

double sample_std(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

BussgangParams bussgang_mc(const ComplexMap& g, std::size_t n_samples, std::uint64_t seed,
                           double input_power, int workers) {
  if (n_samples == 0) throw std::invalid_argument("bussgang_mc needs samples");
  if (!(input_power > 0.0)) throw std::invalid_argument("input power must be positive");
  const auto blocks = kernels::bussgang_moments_blocked(
      g, seed, stream_id(stream_tag::kBussgang), n_samples, std::sqrt(input_power), workers);
  const auto total = kernels::sum_blocks(blocks);
  BussgangParams p = from_moments(total.gy, total.gg, total.yy, total.n, input_power);

  // Batch means over sample blocks (the trailing partial block is dropped).
  std::vector<double> a_b, s_b, g_b;
  for (const auto& b : blocks) {
    if (b.n != kernels::kSampleBlock) continue;
    const auto q = from_moments(b.gy, b.gg, b.yy, b.n, input_power);
    a_b.push_back(std::abs(q.a));
    s_b.push_back(q.sigma_g2);
    if (!q.gamma_infinite) g_b.push_back(to_db(q.gamma_g));
  }
  if (a_b.size() >= 2) {
    const double root = std::sqrt(static_cast<double>(a_b.size()));
    p.se_a = sample_std(a_b) / root;
    p.se_sigma_g2 = sample_std(s_b) / root;
    if (g_b.size() == a_b.size()) p.se_gamma_db = sample_std(g_b) / root;
  } else {
    p.se_a = p.se_sigma_g2 = p.se_gamma_db = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

BussgangParams bussgang_mc(const NonlinearChain& chain, std::size_t n_samples, std::uint64_t seed,
                           int workers) {
  const NormalizedChain normalized(chain);
  return bussgang_mc([&normalized](Complex y) { return normalized(y); }, n_samples, seed, 1.0,
                     workers);
}

BussgangParams bussgang_quadrature(const NonlinearChain& chain) {
  if (chain.stage_count() > 1) {
    throw std::invalid_argument("quadrature path handles a single stage, not a cascade");
  }
  const NormalizedChain normalized(chain);
  const double agc = normalized.agc_gain();
  if (chain.stage_count() == 0) return from_expectations(agc, agc * agc);

  if (chain.radially_symmetric()) {
    // g(r e^{jt}) = f(r) e^{jt}, r Rayleigh with pdf 2 r exp(-r^2).
    auto f = [&normalized](double r) { return normalized(Complex(r, 0.0)).real(); };
    std::vector<double> breaks{0.0, 9.0};
    if (chain.limiter) breaks.push_back(std::sqrt(chain.limiter->power_threshold) / chain.limiter->gain);
    if (chain.passband) breaks.push_back(std::sqrt(chain.passband->p1db / 0.44));
    const double a = integrate_pieces([&](double r) { return f(r) * 2.0 * r * r * std::exp(-r * r); }, breaks);
    const double g2 = integrate_pieces(
        [&](double r) {
          const double v = f(r);
          return v * v * 2.0 * r * std::exp(-r * r);
        },
        breaks);
    return from_expectations(a, g2);
  }

  // I/Q separable: g(y) = h(Re y) + j h(Im y) with Re y ~ N(0, 1/2), so
  // a = 2 E[h(x) x] and E|g|^2 = 2 E[h(x)^2].
  if (chain.quantizer) {
    // AGC maps x to u = agc * x ~ N(0, agc^2 / 2) = N(0, 1).
    const auto& q = *chain.quantizer;
    const double a = 2.0 * gaussian_quantizer_correlation(q) / agc;
    return from_expectations(a, 2.0 * gaussian_quantizer_output_power(q));
  }
  auto h = [&normalized](double x) { return normalized(Complex(x, 0.0)).real(); };
  auto pdf = [](double x) { return std::exp(-x * x) / std::sqrt(kPi); };
  std::vector<double> breaks{0.0, 7.0};
  if (chain.limiter) {
    breaks.push_back(std::sqrt(0.5 * chain.limiter->power_threshold) / chain.limiter->gain);
  }
  if (chain.baseband) breaks.push_back(std::sqrt(chain.baseband->p1db / 0.44) / std::sqrt(2.0));
  // Both integrands are even in x.
  const double hx = 2.0 * integrate_pieces([&](double x) { return h(x) * x * pdf(x); }, breaks);
  const double h2 = 2.0 * integrate_pieces(
                              [&](double x) {
                                const double v = h(x);
                                return v * v * pdf(x);
                              },
                              breaks);
  return from_expectations(2.0 * hx, 2.0 * h2);
}

BussgangParams normalize_params(const BussgangParams& raw, double input_power) {
  if (!(input_power > 0.0)) throw std::invalid_argument("input power must be positive");
  BussgangParams p = raw;
  p.sigma_g2 = raw.sigma_g2 / input_power;
  p.se_sigma_g2 = raw.se_sigma_g2 / input_power;
  p.input_power = 1.0;
  return p;
}

LinearizedModel build_linearized_model(double sigma_y2, double gamma_g, double sigma_n2) {
  if (!(gamma_g > 0.0)) throw std::invalid_argument("gamma_g must be positive");
  if (sigma_y2 < 0.0 || sigma_n2 < 0.0) throw std::invalid_argument("powers must be non-negative");
  LinearizedModel m;
  m.sigma_y2 = sigma_y2;
  m.sigma_n2 = sigma_n2;
  m.gamma_g = gamma_g;
  m.gamma_infinite = std::isinf(gamma_g);
  m.nu_g2 = m.gamma_infinite ? 0.0 : sigma_y2 / gamma_g;
  m.effective_noise_var = sigma_n2 + m.nu_g2;
  return m;
}

LinearizedModel build_linearized_model(double sigma_y2, const BussgangParams& params,
                                       double sigma_n2) {
  return build_linearized_model(sigma_y2, params.gamma_infinite ? kInf : params.gamma_g, sigma_n2);
}

CovarianceCheck check_covariance_preservation(const ComplexMap& g, Complex rho,
                                              std::size_t n_samples, std::uint64_t seed,
                                              int workers) {
  if (std::abs(rho) > 1.0 + 1e-12) throw std::invalid_argument("|rho| must not exceed 1");
  const auto blocks = kernels::cross_moments_blocked(g, rho, seed,
                                                     stream_id(stream_tag::kCovariance), n_samples,
                                                     workers);
  const auto total = kernels::sum_blocks(blocks);
  const double n = static_cast<double>(total.cross.n);
  const Complex a = total.moments.gy / total.moments.yy;
  CovarianceCheck c;
  c.measured = total.cross.sum / n;
  c.expected = a * rho;
  c.residual = std::abs(c.measured - c.expected);
  const double var = std::max(0.0, total.cross.abs2 / n - std::norm(c.measured));
  c.standard_error = std::sqrt(var / n);
  return c;
}

OrthogonalityCheck orthogonality_residual(const ComplexMap& g, Complex a, std::size_t n_samples,
                                          std::uint64_t seed, double input_power, int workers) {
  const auto total = kernels::sum_blocks(kernels::orthogonality_blocked(
      g, a, seed, stream_id(stream_tag::kBussgang, 0x4f52), n_samples, std::sqrt(input_power),
      workers));
  const double n = static_cast<double>(total.n);
  const Complex mean = total.sum / n;
  OrthogonalityCheck c;
  c.residual = std::abs(mean);
  c.standard_error = std::sqrt(std::max(0.0, total.abs2 / n - std::norm(mean)) / n);
  return c;
}

VectorBussgang vector_bussgang(const ComplexMap& g, const std::vector<double>& powers,
                               std::size_t n_samples, std::uint64_t seed, int workers) {
  VectorBussgang v;
  for (double p : powers) {
    if (!(p > 0.0)) throw std::invalid_argument("antenna powers must be positive");
    const auto params = bussgang_mc(g, n_samples, seed, p, workers);
    v.gains.push_back(params.a);
    v.error_variances.push_back(params.sigma_g2);
  }
  return v;
}

}  // namespace nlmimo
