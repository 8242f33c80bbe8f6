#pragma once

#include <cstdint>
#include <vector>

#include "staredge/geometry.hpp"

namespace staredge {

// Maximum spacing between consecutive ground-truth polyline vertices. Dense
// enough that nearest-vertex queries approximate distance to the curve.
inline constexpr double kMaxGtSpacing = 0.05;

// Flat point set with optional per-point labels and normals. Treated as
// immutable once built; pipeline stages produce new clouds.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<std::uint8_t> labels;  // empty, or one 0/1 flag per point
    std::vector<Vec3> normals;         // empty, or one unit vector per point

    std::size_t size() const { return points.size(); }
    bool has_labels() const { return !labels.empty(); }
    bool has_normals() const { return !normals.empty(); }

    // Throws ArgumentError if any structural invariant is broken.
    void validate() const;
};

// Ground-truth edge curves as densely sampled ordered polylines.
struct GroundTruthEdges {
    std::vector<std::vector<Vec3>> polylines;

    bool empty() const { return polylines.empty(); }
    std::vector<Vec3> all_vertices() const;

    // Each polyline has >= 2 vertices with spacing <= kMaxGtSpacing.
    void validate() const;
};

}  // namespace staredge
