#include <cstdlib>
#include <cstring>

#include "e2h/error.hpp"
#include "e2h/kernels.hpp"

namespace e2h::kernels {

#ifndef E2H_BUILD_AVX2
namespace avx2 {
void classify_x0_grid(const ChainSpec& spec, const double* x0, std::uint8_t* flags, std::size_t n) {
  scalar::classify_x0_grid(spec, x0, flags, n);
}
AcceptStats acceptance_stats(const double* w, const double* alpha, std::size_t n, int m) {
  return scalar::acceptance_stats(w, alpha, n, m);
}
}  // namespace avx2
#endif

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(E2H_BUILD_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa chosen = [] {
    const char* env = std::getenv("E2H_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
  }();
  return chosen;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

namespace {

Isa checked(Isa isa) {
  if (!isa_available(isa)) throw ParameterError(std::string("instruction set not available: ") + isa_name(isa));
  return isa;
}

}  // namespace

void classify_x0_grid(Isa isa, const ChainSpec& spec, std::span<const double> x0, std::span<std::uint8_t> flags) {
  if (flags.size() != x0.size()) throw ParameterError("flags and x0 spans differ in size");
  if (spec.L < 2 || (spec.L > 1 && spec.a_mid == nullptr)) throw ParameterError("chain needs L >= 2 and a_mid");
  if (checked(isa) == Isa::avx2) {
    avx2::classify_x0_grid(spec, x0.data(), flags.data(), x0.size());
  } else {
    scalar::classify_x0_grid(spec, x0.data(), flags.data(), x0.size());
  }
}

AcceptStats acceptance_stats(Isa isa, std::span<const double> weights, std::span<const double> alpha, int m) {
  if (weights.size() != alpha.size()) throw ParameterError("weights and alpha spans differ in size");
  if (m < 1) throw ParameterError("invalid parameter: m >= 1");
  if (checked(isa) == Isa::avx2) return avx2::acceptance_stats(weights.data(), alpha.data(), alpha.size(), m);
  return scalar::acceptance_stats(weights.data(), alpha.data(), alpha.size(), m);
}

void classify_x0_grid(const ChainSpec& spec, std::span<const double> x0, std::span<std::uint8_t> flags) {
  classify_x0_grid(active_isa(), spec, x0, flags);
}

AcceptStats acceptance_stats(std::span<const double> weights, std::span<const double> alpha, int m) {
  return acceptance_stats(active_isa(), weights, alpha, m);
}

}  // namespace e2h::kernels
