#include "staredge/point_cloud.hpp"

#include <cmath>

#include "staredge/error.hpp"

namespace staredge {

void PointCloud::validate() const {
    for (const Vec3& p : points) {
        if (!p.allFinite()) throw ArgumentError("point cloud contains non-finite coordinates");
    }
    if (!labels.empty()) {
        if (labels.size() != points.size()) {
            throw ArgumentError("label count does not match point count");
        }
        for (std::uint8_t l : labels) {
            if (l > 1) throw ArgumentError("labels must be 0 or 1");
        }
    }
    if (!normals.empty()) {
        if (normals.size() != points.size()) {
            throw ArgumentError("normal count does not match point count");
        }
        for (const Vec3& n : normals) {
            if (std::abs(n.norm() - 1.0) > 1e-6) {
                throw ArgumentError("normals must have unit length");
            }
        }
    }
}

std::vector<Vec3> GroundTruthEdges::all_vertices() const {
    std::vector<Vec3> out;
    std::size_t total = 0;
    for (const auto& line : polylines) total += line.size();
    out.reserve(total);
    for (const auto& line : polylines) out.insert(out.end(), line.begin(), line.end());
    return out;
}

void GroundTruthEdges::validate() const {
    for (const auto& line : polylines) {
        if (line.size() < 2) throw ArgumentError("ground-truth polyline needs >= 2 vertices");
        for (std::size_t i = 1; i < line.size(); ++i) {
            if ((line[i] - line[i - 1]).norm() > kMaxGtSpacing + 1e-12) {
                throw ArgumentError("ground-truth polyline vertex spacing exceeds limit");
            }
        }
    }
}

}  // namespace staredge
