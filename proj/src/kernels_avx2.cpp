// AVX2 variants. Each kernel mirrors the scalar reference operation for
// operation (same order, no FMA contraction), so outputs are bit-identical.

#if defined(__x86_64__)

#include <immintrin.h>

#include <vector>

#include "gwv/kernels.hpp"

namespace gwv::kernels::detail {

double reduce_pairwise_avx2(std::span<const double> x) {
  if (x.empty()) return 0.0;
  if (x.size() == 1) return x[0];
  std::vector<double> buf(x.begin(), x.end());
  std::size_t n = buf.size();
  while (n > 1) {
    std::size_t m = n / 2;
    std::size_t i = 0;
    // four adjacent pair-sums per iteration, same pairs as the scalar pass
    for (; i + 4 <= m; i += 4) {
      __m256d a = _mm256_loadu_pd(&buf[2 * i]);
      __m256d b = _mm256_loadu_pd(&buf[2 * i + 4]);
      __m256d h = _mm256_hadd_pd(a, b);            // [a0+a1, b0+b1, a2+a3, b2+b3]
      h = _mm256_permute4x64_pd(h, 0xD8);          // [a0+a1, a2+a3, b0+b1, b2+b3]
      _mm256_storeu_pd(&buf[i], h);
    }
    for (; i < m; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (n & 1) {
      buf[m] = buf[n - 1];
      ++m;
    }
    n = m;
  }
  return buf[0];
}

void bump_batch_avx2(Vec2 c, double radius, std::span<const double> xs,
                     std::span<const double> ys, std::span<double> phi,
                     std::span<double> gx, std::span<double> gy) {
  const double inv_r2s = 1.0 / (radius * radius);
  const __m256d cx = _mm256_set1_pd(c.x);
  const __m256d cy = _mm256_set1_pd(c.y);
  const __m256d inv_r2 = _mm256_set1_pd(inv_r2s);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d neg6 = _mm256_set1_pd(-6.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= xs.size(); i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(&xs[i]), cx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(&ys[i]), cy);
    __m256d r2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
    __m256d q = _mm256_sub_pd(one, _mm256_mul_pd(r2, inv_r2));
    __m256d mask = _mm256_cmp_pd(q, zero, _CMP_GT_OQ);
    __m256d q2 = _mm256_mul_pd(q, q);
    __m256d ph = _mm256_mul_pd(q2, q);
    __m256d coef = _mm256_mul_pd(_mm256_mul_pd(neg6, q2), inv_r2);
    _mm256_storeu_pd(&phi[i], _mm256_and_pd(ph, mask));
    _mm256_storeu_pd(&gx[i], _mm256_and_pd(_mm256_mul_pd(coef, dx), mask));
    _mm256_storeu_pd(&gy[i], _mm256_and_pd(_mm256_mul_pd(coef, dy), mask));
  }
  for (; i < xs.size(); ++i) {
    double dx = xs[i] - c.x;
    double dy = ys[i] - c.y;
    double r2 = dx * dx + dy * dy;
    double q = 1.0 - r2 * inv_r2s;
    if (q > 0.0) {
      double q2 = q * q;
      phi[i] = q2 * q;
      double coef = -6.0 * q2 * inv_r2s;
      gx[i] = coef * dx;
      gy[i] = coef * dy;
    } else {
      phi[i] = 0.0;
      gx[i] = 0.0;
      gy[i] = 0.0;
    }
  }
}

void second_diff_periodic_avx2(std::span<const double> x, double ds, std::span<double> out) {
  const std::size_t n = x.size();
  const double inv_ds2s = 1.0 / (ds * ds);
  if (n < 8) {
    second_diff_periodic_scalar(x, ds, out);
    return;
  }
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d inv_ds2 = _mm256_set1_pd(inv_ds2s);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d xm = _mm256_loadu_pd(&x[i - 1]);
    __m256d xi = _mm256_loadu_pd(&x[i]);
    __m256d xp = _mm256_loadu_pd(&x[i + 1]);
    __m256d t = _mm256_add_pd(_mm256_sub_pd(xm, _mm256_mul_pd(two, xi)), xp);
    _mm256_storeu_pd(&out[i], _mm256_mul_pd(t, inv_ds2));
  }
  for (; i < n - 1; ++i) out[i] = (x[i - 1] - 2.0 * x[i] + x[i + 1]) * inv_ds2s;
  out[0] = (x[n - 1] - 2.0 * x[0] + x[1]) * inv_ds2s;
  out[n - 1] = (x[n - 2] - 2.0 * x[n - 1] + x[0]) * inv_ds2s;
}

}  // namespace gwv::kernels::detail

#endif  // __x86_64__
