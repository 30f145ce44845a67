#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference and an
// OpenMP variant. The OpenMP variants partition work into fixed-size blocks
// whose boundaries do not depend on the worker count, and combine partial
// results in block order, so their output is bit-identical for any number of
// workers. The references exist for testing and benchmarking.

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include "nlmimo/chain.hpp"
#include "nlmimo/common.hpp"

namespace nlmimo {

using ComplexMap = std::function<Complex(Complex)>;

namespace kernels {

inline constexpr std::size_t kSampleBlock = 4096;

/// Number of OpenMP workers to use; 0 selects the runtime default.
int resolve_workers(int workers);

struct MomentSums {
  Complex gy{0.0, 0.0};  // sum g(y) conj(y)
  double gg = 0.0;       // sum |g(y)|^2
  double yy = 0.0;       // sum |y|^2
  std::size_t n = 0;

  MomentSums& operator+=(const MomentSums& o);
};

/// Bussgang moments over y_i = scale * z_i, z_i the i-th CN(0, 1) draw of
/// stream `stream` under `seed`.
MomentSums bussgang_moments_reference(const ComplexMap& g, std::uint64_t seed,
                                      std::uint64_t stream, std::size_t n, double scale);
std::vector<MomentSums> bussgang_moments_blocked(const ComplexMap& g, std::uint64_t seed,
                                                 std::uint64_t stream, std::size_t n,
                                                 double scale, int workers = 0);

struct ResidualSums {
  Complex sum{0.0, 0.0};
  double abs2 = 0.0;
  std::size_t n = 0;

  ResidualSums& operator+=(const ResidualSums& o);
};

/// Sums of p_i = (g(y_i) - a y_i) conj(y_i) and |p_i|^2.
std::vector<ResidualSums> orthogonality_blocked(const ComplexMap& g, Complex a,
                                                std::uint64_t seed, std::uint64_t stream,
                                                std::size_t n, double scale, int workers = 0);

/// Sums of q_i = g(y_i) conj(z_i) for jointly Gaussian unit-power (y, z) with
/// E[y conj(z)] = rho, together with the Bussgang moments of y.
struct CrossSums {
  ResidualSums cross;
  MomentSums moments;

  CrossSums& operator+=(const CrossSums& o) {
    cross += o.cross;
    moments += o.moments;
    return *this;
  }
};
std::vector<CrossSums> cross_moments_blocked(const ComplexMap& g, Complex rho,
                                             std::uint64_t seed, std::uint64_t stream,
                                             std::size_t n, int workers = 0);

/// Exceptions cannot leave an OpenMP region. Loop bodies run through run();
/// the first exception is kept and rethrown on the calling thread.
class ExceptionTrap {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

template <class T>
T sum_blocks(const std::vector<T>& blocks) {
  T total{};
  for (const auto& b : blocks) total += b;
  return total;
}

/// out[i] = out_scale * chain(in[i] * in_scale)
void chain_apply_reference(std::span<const Complex> in, std::span<Complex> out,
                           const NormalizedChain& chain, double in_scale, double out_scale);
void chain_apply_parallel(std::span<const Complex> in, std::span<Complex> out,
                          const NormalizedChain& chain, double in_scale, double out_scale,
                          int workers = 0);

}  // namespace kernels
}  // namespace nlmimo
