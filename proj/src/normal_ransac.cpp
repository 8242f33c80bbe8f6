#include "staredge/normal_ransac.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "staredge/error.hpp"
#include "staredge/rng.hpp"

namespace staredge {

namespace {

struct Partition {
    std::vector<int> inliers;
    std::vector<int> outliers;
    double rms = 0.0;
};

Partition partition_by_plane(const std::vector<Vec3>& samples, const Vec3& normal, double tol) {
    Partition part;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = std::abs(normal.dot(samples[i]));
        if (d <= tol) {
            part.inliers.push_back(static_cast<int>(i));
            sum_sq += d * d;
        } else {
            part.outliers.push_back(static_cast<int>(i));
        }
    }
    part.rms = part.inliers.empty() ? 0.0 : std::sqrt(sum_sq / part.inliers.size());
    return part;
}

// Total least squares plane through the origin: minor eigenvector of the
// sample scatter matrix.
Vec3 tls_plane_normal(const std::vector<Vec3>& samples, const std::vector<int>& subset) {
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (int i : subset) scatter += samples[i] * samples[i].transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(scatter);
    return canonical_sign(solver.eigenvectors().col(0).normalized());
}

}  // namespace

GreatCircleFit fit_great_circle(const LocalSphericalCurve& curve, double tol,
                                int iterations, std::uint64_t seed) {
    const std::vector<Vec3>& samples = curve.samples;
    if (samples.size() < 8) throw ArgumentError("great-circle fit requires >= 8 curve samples");
    if (!(tol > 0.0 && tol < 0.5)) throw ArgumentError("tolerance must be in (0, 0.5)");
    if (iterations < 1) throw ArgumentError("iterations must be >= 1");

    Rng rng(seed);
    const std::size_t m = samples.size();
    bool found = false;
    Vec3 best_normal = Vec3::UnitZ();
    std::size_t best_count = 0;
    double best_rms = 0.0;

    for (int it = 0; it < iterations; ++it) {
        const std::size_t a = rng.uniform_index(m);
        std::size_t b = rng.uniform_index(m - 1);
        if (b >= a) ++b;
        Vec3 candidate = samples[a].cross(samples[b]);
        const double len = candidate.norm();
        if (len < 1e-9) continue;  // near-parallel pair
        candidate /= len;

        std::size_t count = 0;
        double sum_sq = 0.0;
        for (const Vec3& q : samples) {
            const double d = candidate.dot(q);
            if (std::abs(d) <= tol) {
                ++count;
                sum_sq += d * d;
            }
        }
        if (count == 0) continue;
        const double rms = std::sqrt(sum_sq / count);
        if (!found || count > best_count || (count == best_count && rms < best_rms)) {
            found = true;
            best_normal = candidate;
            best_count = count;
            best_rms = rms;
        }
    }
    if (!found) throw DegenerateError("all RANSAC candidate pairs were degenerate");

    // Refine on the consensus set, then re-partition once against the
    // refined plane so the reported split matches the reported normal.
    Partition part = partition_by_plane(samples, best_normal, tol);
    const Vec3 refined = tls_plane_normal(samples, part.inliers);
    part = partition_by_plane(samples, refined, tol);
    if (part.inliers.empty()) throw DegenerateError("refined great circle lost all inliers");

    GreatCircleFit fit;
    fit.plane_normal = refined;
    fit.inlier_indices = std::move(part.inliers);
    fit.outlier_indices = std::move(part.outliers);
    fit.inlier_rms = part.rms;
    return fit;
}

Vec3 estimate_normal(const LocalSphericalCurve& curve, double tol, int iterations,
                     std::uint64_t seed) {
    const GreatCircleFit fit = fit_great_circle(curve, tol, iterations, seed);
    Vec3 normal = fit.plane_normal;

    if (fit.outlier_indices.size() >= 3) {
        Vec3 mean = Vec3::Zero();
        for (int i : fit.outlier_indices) mean += curve.samples[i];
        mean /= static_cast<double>(fit.outlier_indices.size());
        // Point away from the hemisphere holding the adjacent surface.
        if (normal.dot(mean) > 0.0) normal = -normal;
    } else {
        // Near-complete great circle: orient along the curve's minor axis.
        const PcaFrame frame = pca_frame(curve.samples);
        if (normal.dot(frame.axes[2]) < 0.0) normal = -normal;
    }
    return normal.normalized();
}

}  // namespace staredge
