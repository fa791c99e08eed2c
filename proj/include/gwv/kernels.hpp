#pragma once

#include <cstddef>
#include <span>

#include "gwv/vec2.hpp"

// Data-parallel inner kernels. Every kernel has a scalar reference
// implementation and (on x86-64) an AVX2 variant selected at runtime.
// The variants are defined to execute the exact same sequence of IEEE
// operations, so results are bit-identical; the test suite asserts this.
//
// GWV_SIMD=scalar forces the reference path.

namespace gwv::kernels {

enum class Variant { scalar, avx2 };

Variant active_variant();
const char* variant_name(Variant v);
bool variant_available(Variant v);

// Deterministic sum: level-by-level adjacent-pair reduction. The tree shape
// depends only on the input length, never on threads or variant.
double reduce_pairwise(std::span<const double> x);
double reduce_pairwise_with(Variant v, std::span<const double> x);

// Batch evaluation of the C^2 bump profile (1 - r^2/R^2)^3 clamped at 0,
// with its closed-form gradient -6 (1 - r^2/R^2)^2 (x - c) / R^2.
void bump_batch(Vec2 center, double radius,
                std::span<const double> xs, std::span<const double> ys,
                std::span<double> phi, std::span<double> gx, std::span<double> gy);
void bump_batch_with(Variant v, Vec2 center, double radius,
                     std::span<const double> xs, std::span<const double> ys,
                     std::span<double> phi, std::span<double> gx, std::span<double> gy);

// Periodic central second difference (x[i-1] - 2 x[i] + x[i+1]) / ds^2.
void second_diff_periodic(std::span<const double> x, double ds, std::span<double> out);
void second_diff_periodic_with(Variant v, std::span<const double> x, double ds,
                               std::span<double> out);

namespace detail {
double reduce_pairwise_scalar(std::span<const double> x);
void bump_batch_scalar(Vec2 c, double radius, std::span<const double> xs,
                       std::span<const double> ys, std::span<double> phi,
                       std::span<double> gx, std::span<double> gy);
void second_diff_periodic_scalar(std::span<const double> x, double ds, std::span<double> out);
#if defined(GWV_HAVE_AVX2_TU)
double reduce_pairwise_avx2(std::span<const double> x);
void bump_batch_avx2(Vec2 c, double radius, std::span<const double> xs,
                     std::span<const double> ys, std::span<double> phi,
                     std::span<double> gx, std::span<double> gy);
void second_diff_periodic_avx2(std::span<const double> x, double ds, std::span<double> out);
#endif
}  // namespace detail

}  // namespace gwv::kernels
