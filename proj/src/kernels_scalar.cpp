#include <vector>

#include "gwv/kernels.hpp"

namespace gwv::kernels::detail {

// Reference reduction. One pass turns n values into ceil(n/2) by summing
// adjacent pairs; an odd last element passes through unchanged.
double reduce_pairwise_scalar(std::span<const double> x) {
  if (x.empty()) return 0.0;
  if (x.size() == 1) return x[0];
  std::vector<double> buf(x.begin(), x.end());
  std::size_t n = buf.size();
  while (n > 1) {
    std::size_t m = n / 2;
    for (std::size_t i = 0; i < m; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (n & 1) {
      buf[m] = buf[n - 1];
      ++m;
    }
    n = m;
  }
  return buf[0];
}

void bump_batch_scalar(Vec2 c, double radius, std::span<const double> xs,
                       std::span<const double> ys, std::span<double> phi,
                       std::span<double> gx, std::span<double> gy) {
  const double inv_r2 = 1.0 / (radius * radius);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - c.x;
    double dy = ys[i] - c.y;
    double r2 = dx * dx + dy * dy;
    double q = 1.0 - r2 * inv_r2;
    if (q > 0.0) {
      double q2 = q * q;
      phi[i] = q2 * q;
      double coef = -6.0 * q2 * inv_r2;
      gx[i] = coef * dx;
      gy[i] = coef * dy;
    } else {
      phi[i] = 0.0;
      gx[i] = 0.0;
      gy[i] = 0.0;
    }
  }
}

void second_diff_periodic_scalar(std::span<const double> x, double ds, std::span<double> out) {
  const std::size_t n = x.size();
  const double inv_ds2 = 1.0 / (ds * ds);
  for (std::size_t i = 0; i < n; ++i) {
    const double xm = x[i == 0 ? n - 1 : i - 1];
    const double xp = x[i + 1 == n ? 0 : i + 1];
    out[i] = (xm - 2.0 * x[i] + xp) * inv_ds2;
  }
}

}  // namespace gwv::kernels::detail
