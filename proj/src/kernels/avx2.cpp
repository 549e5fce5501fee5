#include <immintrin.h>

#include <algorithm>

#include "common.hpp"

namespace e2h::kernels::avx2 {

namespace {

struct Lanes {
  __m256d x;
  __m256d in_domain;  // all-ones while every step was defined
  __m256d monotone;
};

inline void step(Lanes& s, __m256d a, __m256d cpn, __m256d cdn, __m256d c, __m256d top, __m256d zero,
                 __m256d tol, __m256d abs_mask) {
  const __m256d rad = _mm256_sub_pd(_mm256_mul_pd(a, s.x), cpn);
  const __m256d ok = _mm256_cmp_pd(rad, zero, _CMP_GT_OQ);
  const __m256d y = _mm256_sub_pd(top, _mm256_div_pd(cdn, _mm256_mul_pd(c, _mm256_sqrt_pd(rad))));
  const __m256d delta = _mm256_sub_pd(y, s.x);
  const __m256d up = _mm256_cmp_pd(delta, zero, _CMP_GT_OQ);
  const __m256d flat = _mm256_cmp_pd(_mm256_and_pd(delta, abs_mask), tol, _CMP_LT_OQ);
  const __m256d live = _mm256_and_pd(s.in_domain, ok);
  s.monotone = _mm256_and_pd(s.monotone, _mm256_and_pd(live, _mm256_or_pd(up, flat)));
  s.x = _mm256_blendv_pd(s.x, y, live);
  s.in_domain = live;
}

}  // namespace

void classify_x0_grid(const ChainSpec& s, const double* x0, std::uint8_t* flags, std::size_t n) {
  const __m256d cpn = _mm256_set1_pd(s.c_delta_prime * s.nu);
  const __m256d cdn = _mm256_set1_pd(s.c_delta * s.nu);
  const __m256d c = _mm256_set1_pd(s.c);
  const __m256d top = _mm256_set1_pd(1.0 - s.gamma);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d tol = _mm256_set1_pd(kPlateauTol);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d all = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  const __m256d aL = _mm256_set1_pd(s.aL);

  std::size_t i = 0;
  for (; i + detail::kLanes <= n; i += detail::kLanes) {
    const __m256d x = _mm256_loadu_pd(x0 + i);
    Lanes b{x, all, all};
    for (int k = 0; k < s.L; ++k) step(b, one, cpn, cdn, c, top, zero, tol, abs_mask);
    Lanes h{x, all, all};
    for (int k = 0; k < s.L; ++k) {
      const __m256d a = _mm256_set1_pd(k == 0 ? s.a0 : s.a_mid[k - 1]);
      step(h, a, cpn, cdn, c, top, zero, tol, abs_mask);
    }
    const __m256d both = _mm256_and_pd(b.in_domain, h.in_domain);
    const __m256d wins = _mm256_and_pd(both, _mm256_cmp_pd(_mm256_mul_pd(aL, h.x), b.x, _CMP_GT_OQ));
    const int mb = _mm256_movemask_pd(b.monotone);
    const int mh = _mm256_movemask_pd(h.monotone);
    const int mw = _mm256_movemask_pd(wins);
    for (int l = 0; l < detail::kLanes; ++l) {
      std::uint8_t f = 0;
      if (mb >> l & 1) f |= kBaselineMonotone;
      if (mh >> l & 1) f |= kCurriculumMonotone;
      if (mw >> l & 1) f |= kImproves;
      flags[i + l] = f;
    }
  }
  if (i < n) scalar::classify_x0_grid(s, x0 + i, flags + i, n - i);
}

AcceptStats acceptance_stats(const double* w, const double* alpha, std::size_t n, int m) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  __m256d mn = one;
  std::size_t i = 0;
  for (; i + detail::kLanes <= n; i += detail::kLanes) {
    __m256d b = _mm256_sub_pd(one, _mm256_loadu_pd(alpha + i));
    __m256d r = one;
    for (int e = m; e > 0; e >>= 1) {
      if (e & 1) r = _mm256_mul_pd(r, b);
      b = _mm256_mul_pd(b, b);
    }
    const __m256d am = _mm256_sub_pd(one, r);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), am));
    mn = _mm256_min_pd(mn, am);
  }
  alignas(32) double part[detail::kLanes];
  alignas(32) double mins[detail::kLanes];
  _mm256_store_pd(part, acc);
  _mm256_store_pd(mins, mn);
  double m_all = std::min(std::min(mins[0], mins[1]), std::min(mins[2], mins[3]));
  for (; i < n; ++i) {
    const double am = 1.0 - detail::pow_int(1.0 - alpha[i], m);
    part[i % detail::kLanes] += w[i] * am;
    m_all = std::min(m_all, am);
  }
  return {(part[0] + part[1]) + (part[2] + part[3]), m_all};
}

}  // namespace e2h::kernels::avx2
