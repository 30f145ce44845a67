#include "nlmimo/channel.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <json.hpp>
#include <numeric>

#include "nlmimo/rng.hpp"

namespace nlmimo {

ArrayGeometry::ArrayGeometry(int n, double d_over_lambda, double lambda)
    : num_antennas(n), spacing_wavelengths(d_over_lambda), wavelength(lambda) {
  if (n < 1) throw std::invalid_argument("array needs at least one antenna");
  if (!(d_over_lambda > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("spacing and wavelength must be positive");
  }
}

double UserDrop::total_received_power() const {
  double s = 0.0;
  for (const auto& u : users) s += u.received_power();
  return s;
}

double UserDrop::mean_received_power() const {
  return users.empty() ? 0.0 : total_received_power() / users.size();
}

UserDrop drop_users(const ArrayGeometry& geometry, const DropConfig& config, std::uint64_t seed,
                    std::uint64_t index) {
  if (config.num_users < 1) throw std::invalid_argument("need at least one user");
  if (!(config.r_min > 0.0) || !(config.r_max >= config.r_min)) {
    throw std::invalid_argument("need 0 < r_min <= r_max");
  }
  const double omega_span = 2.0 * geometry.spatial_frequency(config.max_theta);
  if (config.num_users > 1 && config.num_users * config.delta_omega_min >= omega_span) {
    throw InfeasibleError("cannot pack " + std::to_string(config.num_users) +
                          " users with spatial-frequency separation " +
                          std::to_string(config.delta_omega_min) + " into a span of " +
                          std::to_string(omega_span));
  }

  CounterRng rng(seed, stream_id(stream_tag::kDrop, index));
  const double r2_lo = config.r_min * config.r_min;
  const double r2_hi = config.r_max * config.r_max;
  UserDrop drop;
  drop.r_min = config.r_min;
  drop.r_max = config.r_max;
  int rejections = 0;
  for (int k = 0; k < config.num_users; ++k) {
    User u;
    const double r2 = r2_lo + (r2_hi - r2_lo) * (1.0 - rng.next_uniform());
    u.range = std::sqrt(r2);
    u.amplitude = geometry.amplitude_at(u.range);
    u.phase = 2.0 * kPi * (1.0 - rng.next_uniform());
    for (;;) {
      u.theta = config.max_theta * (2.0 * rng.next_uniform() - 1.0);
      u.omega = geometry.spatial_frequency(u.theta);
      const bool clear = std::none_of(drop.users.begin(), drop.users.end(), [&](const User& o) {
        return std::abs(o.omega - u.omega) < config.delta_omega_min;
      });
      if (clear) break;
      if (++rejections > config.max_rejections) {
        throw InfeasibleError("spatial-frequency separation " +
                              std::to_string(config.delta_omega_min) + " not met after " +
                              std::to_string(config.max_rejections) + " redraws");
      }
    }
    drop.users.push_back(u);
  }
  return drop;
}

CMatrix build_channel(const UserDrop& drop, const ArrayGeometry& geometry) {
  const int n = geometry.num_antennas;
  CMatrix h(n, drop.size());
  for (int k = 0; k < drop.size(); ++k) {
    const auto& u = drop.users[k];
    const double gain = u.amplitude * std::sqrt(u.power_scale);
    for (int m = 0; m < n; ++m) h(m, k) = std::polar(gain, u.phase + m * u.omega);
  }
  return h;
}

double spatial_crosscorr(double delta_omega, int num_antennas) {
  if (num_antennas < 1) throw std::invalid_argument("need at least one antenna");
  const double half = 0.5 * delta_omega;
  const double den = num_antennas * std::sin(half);
  if (std::abs(den) < 1e-300 || std::abs(std::sin(half)) < 1e-12) {
    // Limit at dOmega -> 0 (mod 2 pi).
    return 1.0;
  }
  return std::min(1.0, std::abs(std::sin(num_antennas * half) / den));
}

CMatrix received_samples(const CMatrix& h, const CMatrix& symbols, double sigma_n2,
                         std::uint64_t seed, std::uint64_t stream) {
  const Eigen::Index n = h.rows();
  const Eigen::Index t = symbols.cols();
  CMatrix y = h.cols() == 0 ? CMatrix::Zero(n, t) : CMatrix(h * symbols);
  if (sigma_n2 > 0.0) {
    const CounterRng rng(seed, stream_id(stream_tag::kNoise, stream));
    const double s = std::sqrt(sigma_n2);
    for (Eigen::Index c = 0; c < t; ++c) {
      for (Eigen::Index m = 0; m < n; ++m) {
        y(m, c) += s * rng.complex_normal_at(static_cast<std::uint64_t>(c) * n + m);
      }
    }
  }
  return y;
}

double gaussianity_kl(std::span<const double> samples, int bins) {
  if (samples.size() < 2 || bins < 2) throw std::invalid_argument("need samples and bins");
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= samples.size();
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / samples.size());
  if (!(sd > 0.0)) throw std::invalid_argument("samples have zero variance");

  constexpr double kRange = 5.0;
  const double width = 2.0 * kRange / bins;
  std::vector<double> counts(bins, 1.0);  // add-one smoothing
  for (double x : samples) {
    const double z = (x - mean) / sd;
    if (z < -kRange || z >= kRange) continue;
    counts[std::min(bins - 1, static_cast<int>((z + kRange) / width))] += 1.0;
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const boost::math::normal_distribution<double> normal;
  const double mass = cdf(normal, kRange) - cdf(normal, -kRange);
  double kl = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double lo = -kRange + b * width;
    const double q = (cdf(normal, lo + width) - cdf(normal, lo)) / mass;
    const double p = counts[b] / total;
    kl += p * std::log(p / q);
  }
  return kl;
}

std::string serialize_drop(const UserDrop& drop) {
  nlohmann::json j;
  j["r_min"] = drop.r_min;
  j["r_max"] = drop.r_max;
  j["users"] = nlohmann::json::array();
  for (const auto& u : drop.users) {
    j["users"].push_back(
        {{"R", u.range}, {"theta", u.theta}, {"phi", u.phase}, {"power_scale", u.power_scale}});
  }
  return j.dump();
}

UserDrop parse_drop(const std::string& text, const ArrayGeometry& geometry) {
  const auto j = nlohmann::json::parse(text);
  UserDrop drop;
  drop.r_min = j.at("r_min").get<double>();
  drop.r_max = j.at("r_max").get<double>();
  for (const auto& ju : j.at("users")) {
    User u;
    u.range = ju.at("R").get<double>();
    u.theta = ju.at("theta").get<double>();
    u.phase = ju.at("phi").get<double>();
    u.power_scale = ju.at("power_scale").get<double>();
    u.omega = geometry.spatial_frequency(u.theta);
    u.amplitude = geometry.amplitude_at(u.range);
    drop.users.push_back(u);
  }
  return drop;
}

double mean_square_amplitude(const ArrayGeometry& geometry, double r_min, double r_max) {
  const double c = geometry.wavelength / (4.0 * kPi);
  if (r_max == r_min) return c * c / (r_min * r_min);
  return c * c * 2.0 * std::log(r_max / r_min) / (r_max * r_max - r_min * r_min);
}

}  // namespace nlmimo
