#include <cstdlib>
#include <cstring>

#include "gwv/kernels.hpp"

namespace gwv::kernels {

bool variant_available(Variant v) {
  if (v == Variant::scalar) return true;
#if defined(GWV_HAVE_AVX2_TU)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Variant active_variant() {
  static Variant v = [] {
    if (const char* env = std::getenv("GWV_SIMD")) {
      if (std::strcmp(env, "scalar") == 0) return Variant::scalar;
      if (std::strcmp(env, "avx2") == 0 && variant_available(Variant::avx2))
        return Variant::avx2;
    }
    return variant_available(Variant::avx2) ? Variant::avx2 : Variant::scalar;
  }();
  return v;
}

const char* variant_name(Variant v) {
  return v == Variant::avx2 ? "avx2" : "scalar";
}

double reduce_pairwise_with(Variant v, std::span<const double> x) {
#if defined(GWV_HAVE_AVX2_TU)
  if (v == Variant::avx2) return detail::reduce_pairwise_avx2(x);
#endif
  (void)v;
  return detail::reduce_pairwise_scalar(x);
}

double reduce_pairwise(std::span<const double> x) {
  return reduce_pairwise_with(active_variant(), x);
}

void bump_batch_with(Variant v, Vec2 c, double radius, std::span<const double> xs,
                     std::span<const double> ys, std::span<double> phi,
                     std::span<double> gx, std::span<double> gy) {
#if defined(GWV_HAVE_AVX2_TU)
  if (v == Variant::avx2) {
    detail::bump_batch_avx2(c, radius, xs, ys, phi, gx, gy);
    return;
  }
#endif
  (void)v;
  detail::bump_batch_scalar(c, radius, xs, ys, phi, gx, gy);
}

void bump_batch(Vec2 c, double radius, std::span<const double> xs,
                std::span<const double> ys, std::span<double> phi,
                std::span<double> gx, std::span<double> gy) {
  bump_batch_with(active_variant(), c, radius, xs, ys, phi, gx, gy);
}

void second_diff_periodic_with(Variant v, std::span<const double> x, double ds,
                               std::span<double> out) {
#if defined(GWV_HAVE_AVX2_TU)
  if (v == Variant::avx2) {
    detail::second_diff_periodic_avx2(x, ds, out);
    return;
  }
#endif
  (void)v;
  detail::second_diff_periodic_scalar(x, ds, out);
}

void second_diff_periodic(std::span<const double> x, double ds, std::span<double> out) {
  second_diff_periodic_with(active_variant(), x, ds, out);
}

}  // namespace gwv::kernels
