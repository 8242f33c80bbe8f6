#include <doctest.h>

#include <cmath>

#include "staredge/error.hpp"
#include "staredge/normal_ransac.hpp"
#include "staredge/rng.hpp"
#include "staredge/synth.hpp"
#include "support/oracles.hpp"

using namespace staredge;

namespace {

LocalSphericalCurve curve_from(std::vector<Vec3> samples) {
    LocalSphericalCurve curve;
    curve.samples = std::move(samples);
    return curve;
}

// Full great circle in the plane with the given orthonormal basis (u, v).
std::vector<Vec3> circle_samples(const Vec3& u, const Vec3& v, int count,
                                 double start = 0.0, double span = 2.0 * M_PI) {
    std::vector<Vec3> samples;
    for (int i = 0; i < count; ++i) {
        const double a = start + span * i / count;
        samples.push_back(std::cos(a) * u + std::sin(a) * v);
    }
    return samples;
}

// Two orthogonal semicircles: half the equator (z = 0) plus half the x = 0
// circle bulging toward +z.
std::vector<Vec3> two_semicircles(int count) {
    std::vector<Vec3> samples;
    const int half = count / 2;
    for (int i = 0; i < half; ++i) {
        const double a = M_PI * i / (half - 1);  // equator from +x to -x
        samples.emplace_back(std::cos(a), std::sin(a), 0.0);
    }
    for (int i = 1; i + 1 < count - half + 1; ++i) {
        const double a = M_PI * i / (count - half);  // x = 0 circle through +z
        samples.emplace_back(-std::cos(a), 0.0, std::sin(a)).normalize();
    }
    return samples;
}

}  // namespace

TEST_SUITE("ransac") {

TEST_CASE("exact equator: unit normal along z, all samples inliers") {
    const auto curve = curve_from(circle_samples(Vec3(1, 0, 0), Vec3(0, 1, 0), 64));
    const GreatCircleFit fit = fit_great_circle(curve, 0.05, 256, 1);
    CHECK(std::abs(fit.plane_normal.norm() - 1.0) <= 1e-9);
    CHECK(line_angle(fit.plane_normal, Vec3(0, 0, 1)) <= 1e-9);
    CHECK(fit.inlier_indices.size() == curve.samples.size());
    CHECK(fit.outlier_indices.empty());
}

TEST_CASE("two orthogonal semicircles split into inliers and outliers") {
    const auto curve = curve_from(two_semicircles(64));
    const std::size_t m = curve.samples.size();
    const GreatCircleFit fit = fit_great_circle(curve, 0.05, 256, 2);

    CHECK(fit.inlier_indices.size() >= static_cast<std::size_t>(0.4 * m));
    CHECK(fit.inlier_indices.size() <= static_cast<std::size_t>(0.7 * m));
    // Partition is exactly the threshold split of the refined plane.
    for (int i : fit.inlier_indices) {
        CHECK(std::abs(fit.plane_normal.dot(curve.samples[i])) <= 0.05);
    }
    for (int i : fit.outlier_indices) {
        CHECK(std::abs(fit.plane_normal.dot(curve.samples[i])) > 0.05);
    }
    // The fitted plane is one of the two construction planes.
    const double to_z = line_angle(fit.plane_normal, Vec3(0, 0, 1));
    const double to_x = line_angle(fit.plane_normal, Vec3(1, 0, 0));
    CHECK(std::min(to_z, to_x) <= 0.05);
}

TEST_CASE("noisy equator: normal within 2 degrees over many seeds") {
    Rng jitter_rng(55);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::vector<Vec3> samples;
        for (const Vec3& q : circle_samples(Vec3(1, 0, 0), Vec3(0, 1, 0), 64)) {
            // Geodesic jitter sigma = 0.01 toward the poles.
            const double tilt = 0.01 * jitter_rng.normal();
            samples.push_back((q + Vec3(0, 0, std::tan(tilt))).normalized());
        }
        const GreatCircleFit fit = fit_great_circle(curve_from(samples), 0.05, 256, seed);
        CHECK(line_angle(fit.plane_normal, Vec3(0, 0, 1)) <= 2.0 * M_PI / 180.0);
    }
}

TEST_CASE("argument and degeneracy handling") {
    const auto curve = curve_from(circle_samples(Vec3(1, 0, 0), Vec3(0, 1, 0), 64));
    CHECK_THROWS_AS(fit_great_circle(curve, 0.0, 256, 1), ArgumentError);
    CHECK_THROWS_AS(fit_great_circle(curve, 0.5, 256, 1), ArgumentError);
    const auto tiny = curve_from(std::vector<Vec3>(4, Vec3(0, 0, 1)));
    CHECK_THROWS_AS(fit_great_circle(tiny, 0.05, 256, 1), ArgumentError);

    // All samples identical: every candidate pair is parallel.
    const auto flat = curve_from(std::vector<Vec3>(16, Vec3(0, 0, 1)));
    CHECK_THROWS_AS(fit_great_circle(flat, 0.05, 256, 1), DegenerateError);
}

TEST_CASE("estimate_normal orients away from the outlier hemisphere") {
    const auto curve = curve_from(two_semicircles(64));
    const GreatCircleFit fit = fit_great_circle(curve, 0.05, 256, 3);
    REQUIRE(fit.outlier_indices.size() >= 3);

    const Vec3 normal = estimate_normal(curve, 0.05, 256, 3);
    CHECK(std::abs(normal.norm() - 1.0) <= 1e-9);
    Vec3 mean = Vec3::Zero();
    for (int i : fit.outlier_indices) mean += curve.samples[i];
    mean /= static_cast<double>(fit.outlier_indices.size());
    CHECK(normal.dot(mean) <= 1e-9);
}

TEST_CASE("pure circle falls back to a deterministic +z orientation") {
    const auto curve = curve_from(circle_samples(Vec3(1, 0, 0), Vec3(0, 1, 0), 64));
    const Vec3 normal = estimate_normal(curve, 0.05, 256, 4);
    CHECK((normal - Vec3(0, 0, 1)).norm() <= 1e-9);
}

TEST_CASE("rotation equivariance on the noise-free construction") {
    Rng rng(59);
    const auto base_samples = two_semicircles(64);
    const Vec3 base_normal = estimate_normal(curve_from(base_samples), 0.05, 256, 7);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Matrix3d rot = oracles::random_rotation(rng);
        std::vector<Vec3> rotated;
        for (const Vec3& q : base_samples) rotated.push_back(rot * q);
        const Vec3 rotated_normal = estimate_normal(curve_from(rotated), 0.05, 256, 7);
        CHECK(angle_between(rotated_normal, rot * base_normal) <= 2.0 * M_PI / 180.0);
    }
}

TEST_CASE("plate interior point: estimated normal within 5 degrees") {
    ShapeSpec spec;
    spec.kind = ShapeKind::Plate;
    spec.extents = {20.0, 20.0};
    spec.thickness = 3.0;
    spec.resolution = 0.5;
    spec.noise_sigma = 0.001;
    spec.seed = 8;
    const GeneratedShape shape = generate(spec);
    const KdTree tree(shape.cloud.points);

    // A handful of top-face interior points.
    int checked = 0;
    for (std::size_t i = 0; i < shape.cloud.size() && checked < 10; ++i) {
        const Vec3& p = shape.cloud.points[i];
        if (std::abs(p.z() - 3.0) > 0.01) continue;  // top face only
        if (p.x() < 6.0 || p.x() > 14.0 || p.y() < 6.0 || p.y() > 14.0) continue;
        const LocalSphericalCurve curve =
            local_spherical_curve(shape.cloud, tree, static_cast<int>(i), 26, 64);
        const Vec3 normal = estimate_normal(curve, 0.05, 256, 100 + i);
        CHECK(line_angle(normal, Vec3(0, 0, 1)) <= 5.0 * M_PI / 180.0);
        ++checked;
    }
    CHECK(checked == 10);
}

}  // TEST_SUITE
