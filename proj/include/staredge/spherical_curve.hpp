#pragma once

#include <filesystem>
#include <vector>

#include "staredge/kdtree.hpp"
#include "staredge/point_cloud.hpp"

namespace staredge {

// Closed polyline on the unit sphere representing one point's
// structure-aware neighborhood.
struct LocalSphericalCurve {
    int center_index = -1;
    std::vector<Vec3> samples;    // M unit vectors, closed loop (M wraps to 0)
    std::vector<Vec3> keypoints;  // convex-hull vertices used for fitting
};

struct SphericalNeighborhood {
    std::vector<Vec3> directions;  // unit vectors toward the k neighbors
    int dropped_duplicates = 0;    // neighbors coincident with the center
};

// Unit directions from point i toward its k nearest neighbors (the point
// itself excluded). Neighbors closer than 1e-12 are dropped and counted.
// Fewer than 4 usable directions -> DegenerateError.
SphericalNeighborhood spherical_neighborhood(const PointCloud& cloud, const KdTree& index,
                                             int i, int k);

// Orthonormal frame from the principal axes of a point set, ordered by
// descending variance. Signs are fixed deterministically: the minor axis is
// oriented toward the set mean, the major axis by canonical_sign, and the
// middle axis completes a right-handed frame.
struct PcaFrame {
    Vec3 mean;
    Vec3 axes[3];
    double variances[3];
};

PcaFrame pca_frame(const std::vector<Vec3>& points);

// Projects q onto its top-2 principal plane, computes the 2D convex hull,
// and returns the hull vertices as the original 3D unit vectors in CCW order
// starting from the lexicographically smallest projection.
// All projections collinear within 1e-9 -> DegenerateError.
std::vector<Vec3> convex_hull_keypoints(const std::vector<Vec3>& q);

// Closed interpolating cubic spline with chord-length parameterization.
class PeriodicSpline {
public:
    explicit PeriodicSpline(const std::vector<Vec3>& points);

    Vec3 evaluate(double t) const;  // t taken modulo period()
    double period() const { return period_; }
    const std::vector<double>& knots() const { return knots_; }

private:
    std::vector<Vec3> points_;
    std::vector<Vec3> moments_;   // second derivatives at knots
    std::vector<double> knots_;
    double period_ = 0.0;
};

// Fits the periodic spline through the keypoints, samples it at sample_count
// equally spaced parameters, and re-normalizes every sample to the sphere.
// Fewer than 3 keypoints -> DegenerateError. sample_count >= 16 required.
LocalSphericalCurve fit_spherical_curve(const std::vector<Vec3>& keypoints, int sample_count);

// Full pipeline for one point: neighborhood projection, hull keypoints,
// spline fit. Propagates DegenerateError for unusable neighborhoods.
LocalSphericalCurve local_spherical_curve(const PointCloud& cloud, const KdTree& index,
                                          int i, int k, int sample_count);

// Debug dump of curve samples as an XYZ polyline.
void dump_curve_xyz(const LocalSphericalCurve& curve, const std::filesystem::path& path);

}  // namespace staredge
