#pragma once

#include <cstdint>
#include <vector>

#include "nlmimo/chain.hpp"
#include "nlmimo/kernels.hpp"

namespace nlmimo {

/// Linear-gain-plus-uncorrelated-error fit g(y) = a y + e of a nonlinearity
/// driven by a circular complex Gaussian of power `input_power`.
///
/// gamma_g is the ratio of linear-part power to error power,
/// |a|^2 E|y|^2 / sigma_g2. In the normalized convention (input_power = 1)
/// this is the intrinsic SNR |a|^2 / sigma_g2. An error variance that is not
/// numerically positive is reported as `gamma_infinite` with gamma_g = +inf.
struct BussgangParams {
  Complex a{1.0, 0.0};
  double sigma_g2 = 0.0;
  double gamma_g = kInf;
  bool gamma_infinite = true;
  std::size_t n_samples = 0;  // 0 for quadrature
  double input_power = 1.0;

  // Batch-means standard errors (Monte Carlo only, else 0).
  double se_a = 0.0;
  double se_sigma_g2 = 0.0;
  double se_gamma_db = 0.0;

  double gamma_db() const { return gamma_infinite ? kInf : to_db(gamma_g); }
};

/// Effective-noise (equivalent AWGN) view of a per-antenna nonlinearity.
struct LinearizedModel {
  double sigma_y2 = 0.0;
  double gamma_g = kInf;
  bool gamma_infinite = true;
  double nu_g2 = 0.0;
  double sigma_n2 = 0.0;
  double effective_noise_var = 0.0;
};

inline constexpr std::size_t kDefaultBussgangSamples = 1'000'000;

/// Monte Carlo estimate from `n_samples` counter-based CN(0, input_power)
/// draws. Deterministic in (seed, n_samples) for any worker count.
BussgangParams bussgang_mc(const ComplexMap& g, std::size_t n_samples, std::uint64_t seed,
                           double input_power = 1.0, int workers = 0);

/// Monte Carlo Bussgang parameters of a chain in the normalized convention.
BussgangParams bussgang_mc(const NonlinearChain& chain, std::size_t n_samples,
                           std::uint64_t seed, int workers = 0);

/// Deterministic evaluation by 1-D quadrature. Accepts a single stage that is
/// either radially symmetric (polar limiter, passband third-order) or acts on
/// I and Q separately (per-dimension limiter, baseband third-order,
/// quantizer with its AGC). Cascades are rejected with std::invalid_argument.
BussgangParams bussgang_quadrature(const NonlinearChain& chain);

/// Parameters of the normalized nonlinearity: a unchanged, sigma_g2 divided
/// by the input power, gamma_g carried over unchanged.
BussgangParams normalize_params(const BussgangParams& raw, double input_power);

LinearizedModel build_linearized_model(double sigma_y2, double gamma_g, double sigma_n2);
LinearizedModel build_linearized_model(double sigma_y2, const BussgangParams& params,
                                       double sigma_n2);

struct CovarianceCheck {
  Complex measured;        // mean g(y) conj(z)
  Complex expected;        // a * rho
  double residual = 0.0;   // |measured - expected|
  double standard_error = 0.0;
};

/// Empirical check of E[g(y) conj(z)] = a E[y conj(z)] for jointly Gaussian
/// unit-power (y, z). `a` is estimated from the same y draws.
CovarianceCheck check_covariance_preservation(const ComplexMap& g, Complex rho,
                                              std::size_t n_samples, std::uint64_t seed,
                                              int workers = 0);

struct OrthogonalityCheck {
  double residual = 0.0;        // |mean (g(y) - a y) conj(y)|
  double standard_error = 0.0;  // sample std of the product / sqrt(n)
};

/// Orthogonality of the error to the input, measured on a fresh sample set
/// (stream independent of the one used to fit `a`).
OrthogonalityCheck orthogonality_residual(const ComplexMap& g, Complex a, std::size_t n_samples,
                                          std::uint64_t seed, double input_power = 1.0,
                                          int workers = 0);

struct VectorBussgang {
  std::vector<Complex> gains;          // diagonal of A
  std::vector<double> error_variances;  // sigma_gi^2
};

/// Per-antenna scalar fits for antenna input powers `powers` (un-normalized
/// nonlinearity). All antennas share one sample stream, so equal powers give
/// bit-identical entries.
VectorBussgang vector_bussgang(const ComplexMap& g, const std::vector<double>& powers,
                               std::size_t n_samples, std::uint64_t seed, int workers = 0);

}  // namespace nlmimo
