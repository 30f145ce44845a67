#include "nlmimo/kernels.hpp"

#include <omp.h>

#include "nlmimo/rng.hpp"

namespace nlmimo::kernels {

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

MomentSums& MomentSums::operator+=(const MomentSums& o) {
  gy += o.gy;
  gg += o.gg;
  yy += o.yy;
  n += o.n;
  return *this;
}

ResidualSums& ResidualSums::operator+=(const ResidualSums& o) {
  sum += o.sum;
  abs2 += o.abs2;
  n += o.n;
  return *this;
}

namespace {

std::size_t block_count(std::size_t n) { return (n + kSampleBlock - 1) / kSampleBlock; }

template <class Acc, class Body>
std::vector<Acc> blocked(std::size_t n, int workers, Body body) {
  const auto nblocks = static_cast<std::int64_t>(block_count(n));
  std::vector<Acc> out(nblocks);
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kSampleBlock;
    const std::size_t hi = std::min(n, lo + kSampleBlock);
    Acc acc{};
    for (std::size_t i = lo; i < hi; ++i) body(i, acc);
    out[b] = acc;
  }
  return out;
}

inline void accumulate_moments(MomentSums& acc, Complex y, Complex gy) {
  acc.gy += gy * std::conj(y);
  acc.gg += std::norm(gy);
  acc.yy += std::norm(y);
  ++acc.n;
}

}  // namespace

MomentSums bussgang_moments_reference(const ComplexMap& g, std::uint64_t seed,
                                      std::uint64_t stream, std::size_t n, double scale) {
  const CounterRng rng(seed, stream);
  MomentSums acc;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex y = scale * rng.complex_normal_at(i);
    accumulate_moments(acc, y, g(y));
  }
  return acc;
}

std::vector<MomentSums> bussgang_moments_blocked(const ComplexMap& g, std::uint64_t seed,
                                                 std::uint64_t stream, std::size_t n,
                                                 double scale, int workers) {
  const CounterRng rng(seed, stream);
  return blocked<MomentSums>(n, workers, [&](std::size_t i, MomentSums& acc) {
    const Complex y = scale * rng.complex_normal_at(i);
    accumulate_moments(acc, y, g(y));
  });
}

std::vector<ResidualSums> orthogonality_blocked(const ComplexMap& g, Complex a,
                                                std::uint64_t seed, std::uint64_t stream,
                                                std::size_t n, double scale, int workers) {
  const CounterRng rng(seed, stream);
  return blocked<ResidualSums>(n, workers, [&](std::size_t i, ResidualSums& acc) {
    const Complex y = scale * rng.complex_normal_at(i);
    const Complex p = (g(y) - a * y) * std::conj(y);
    acc.sum += p;
    acc.abs2 += std::norm(p);
    ++acc.n;
  });
}

std::vector<CrossSums> cross_moments_blocked(const ComplexMap& g, Complex rho,
                                             std::uint64_t seed, std::uint64_t stream,
                                             std::size_t n, int workers) {
  const CounterRng rng_y(seed, stream_id(stream, 1));
  const CounterRng rng_w(seed, stream_id(stream, 2));
  const double innovation = std::sqrt(std::max(0.0, 1.0 - std::norm(rho)));
  return blocked<CrossSums>(n, workers, [&](std::size_t i, CrossSums& acc) {
    const Complex y = rng_y.complex_normal_at(i);
    // E[y conj(z)] = rho
    const Complex z = std::conj(rho) * y + innovation * rng_w.complex_normal_at(i);
    const Complex gy = g(y);
    const Complex q = gy * std::conj(z);
    acc.cross.sum += q;
    acc.cross.abs2 += std::norm(q);
    ++acc.cross.n;
    accumulate_moments(acc.moments, y, gy);
  });
}

void chain_apply_reference(std::span<const Complex> in, std::span<Complex> out,
                           const NormalizedChain& chain, double in_scale, double out_scale) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = out_scale * chain(in[i] * in_scale);
}

void chain_apply_parallel(std::span<const Complex> in, std::span<Complex> out,
                          const NormalizedChain& chain, double in_scale, double out_scale,
                          int workers) {
  const auto n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) out[i] = out_scale * chain(in[i] * in_scale);
}

}  // namespace nlmimo::kernels
