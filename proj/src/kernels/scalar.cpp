#include <algorithm>

#include "common.hpp"

namespace e2h::kernels::scalar {

using detail::step;

void classify_x0_grid(const ChainSpec& s, const double* x0, std::uint8_t* flags, std::size_t n) {
  const double cpn = s.c_delta_prime * s.nu;
  const double cdn = s.c_delta * s.nu;
  const double top = 1.0 - s.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    double xb = x0[i];
    bool b_dom = true, b_mono = true;
    for (int k = 0; k < s.L && b_dom; ++k) {
      const auto r = step(1.0, xb, cpn, cdn, s.c, top);
      b_dom = r.in_domain;
      b_mono = b_mono && r.monotone;
      xb = r.y;
    }
    double xc = x0[i];
    bool c_dom = true, c_mono = true;
    for (int k = 0; k < s.L && c_dom; ++k) {
      const double a = k == 0 ? s.a0 : s.a_mid[k - 1];
      const auto r = step(a, xc, cpn, cdn, s.c, top);
      c_dom = r.in_domain;
      c_mono = c_mono && r.monotone;
      xc = r.y;
    }
    std::uint8_t f = 0;
    if (b_dom && b_mono) f |= kBaselineMonotone;
    if (c_dom && c_mono) f |= kCurriculumMonotone;
    if (b_dom && c_dom && s.aL * xc > xb) f |= kImproves;
    flags[i] = f;
  }
}

// Four interleaved partial sums combined as (s0 + s1) + (s2 + s3), the same
// association the vector kernel uses.
AcceptStats acceptance_stats(const double* w, const double* alpha, std::size_t n, int m) {
  double part[detail::kLanes] = {0.0, 0.0, 0.0, 0.0};
  double mn = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double am = 1.0 - detail::pow_int(1.0 - alpha[i], m);
    part[i % detail::kLanes] += w[i] * am;
    mn = std::min(mn, am);
  }
  return {(part[0] + part[1]) + (part[2] + part[3]), mn};
}

}  // namespace e2h::kernels::scalar
