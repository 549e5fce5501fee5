#pragma once

#include <cstdint>
#include <span>

namespace e2h::kernels {

/// Flag bits written per x0 by classify_x0_grid.
enum : std::uint8_t {
  kBaselineMonotone = 1u << 0,    // L steps of F, increasing (or plateau) and in domain
  kCurriculumMonotone = 1u << 1,  // H_0..H_{L-1}, increasing (or plateau) and in domain
  kImproves = 1u << 2,            // both defined and aL * H-chain(x0) > F^L(x0)
};

/// Everything a grid classification needs; a_mid has L - 1 entries.
struct ChainSpec {
  double nu = 0.0;
  double c = 0.9;
  double gamma = 0.0;
  double c_delta = 0.0;
  double c_delta_prime = 0.0;
  double a0 = 1.0;
  double aL = 1.0;
  const double* a_mid = nullptr;
  int L = 2;
};

/// Population acceptance statistics for m tries.
struct AcceptStats {
  double weighted_sum = 0.0;  // sum_q w_q (1 - (1 - alpha_q)^m)
  double min_value = 1.0;     // min_q (1 - (1 - alpha_q)^m)
};

enum class Isa { scalar, avx2 };

/// Selected once per process: AVX2 when the CPU supports it and the library
/// was built with it, unless E2H_SIMD=scalar is set in the environment.
Isa active_isa();
const char* isa_name(Isa isa);
bool isa_available(Isa isa);

void classify_x0_grid(const ChainSpec& spec, std::span<const double> x0, std::span<std::uint8_t> flags);
AcceptStats acceptance_stats(std::span<const double> weights, std::span<const double> alpha, int m);

/// Explicit-ISA entry points; both produce bit-identical results.
void classify_x0_grid(Isa isa, const ChainSpec& spec, std::span<const double> x0, std::span<std::uint8_t> flags);
AcceptStats acceptance_stats(Isa isa, std::span<const double> weights, std::span<const double> alpha, int m);

namespace scalar {
void classify_x0_grid(const ChainSpec& spec, const double* x0, std::uint8_t* flags, std::size_t n);
AcceptStats acceptance_stats(const double* w, const double* alpha, std::size_t n, int m);
}  // namespace scalar

namespace avx2 {
void classify_x0_grid(const ChainSpec& spec, const double* x0, std::uint8_t* flags, std::size_t n);
AcceptStats acceptance_stats(const double* w, const double* alpha, std::size_t n, int m);
}  // namespace avx2

}  // namespace e2h::kernels
