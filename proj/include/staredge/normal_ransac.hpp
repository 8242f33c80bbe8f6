#pragma once

#include <cstdint>
#include <vector>

#include "staredge/spherical_curve.hpp"

namespace staredge {

// Great circle {q : n . q = 0} fitted to a local spherical curve, with the
// tol-threshold split of the curve samples.
struct GreatCircleFit {
    Vec3 plane_normal;                 // unit
    std::vector<int> inlier_indices;   // |n . q| <= tol
    std::vector<int> outlier_indices;
    double inlier_rms = 0.0;
};

inline constexpr double kDefaultRansacTol = 0.05;
inline constexpr int kDefaultRansacIterations = 256;

// RANSAC over sample pairs: candidate normal = normalize(q_a x q_b), scored
// by inlier count (ties by inlier RMS), then refined by total least squares
// through the origin and re-partitioned once. Deterministic given seed.
GreatCircleFit fit_great_circle(const LocalSphericalCurve& curve, double tol,
                                int iterations, std::uint64_t seed);

// Oriented normal from the fitted great circle. The sign is chosen so the
// normal points away from the hemisphere holding the non-circle samples
// (n . mean(outliers) <= 0). With fewer than 3 outliers the normal is
// oriented along the curve's minor principal axis instead.
Vec3 estimate_normal(const LocalSphericalCurve& curve, double tol, int iterations,
                     std::uint64_t seed);

}  // namespace staredge
