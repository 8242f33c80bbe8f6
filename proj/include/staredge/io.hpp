#pragma once

#include <filesystem>

#include "staredge/point_cloud.hpp"

namespace staredge {

// Ground-truth labeling distance presets.
inline constexpr double kThinWalledLabelThreshold = 0.3;
inline constexpr double kAbcLabelThreshold = 0.025;

// XYZ text format: one point per line, whitespace-separated decimals,
// 3 (x y z), 4 (x y z label) or 6 (x y z nx ny nz) columns, sniffed from the
// first data line. '#' lines and blank lines are skipped.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const PointCloud& cloud, const std::filesystem::path& path);

// ASCII PLY 1.0 subset: element vertex with float x y z, optional float
// nx ny nz, optional uchar label. Binary PLY and other elements are rejected.
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);

// Returns a copy of cloud with labels set: a point is an edge point iff its
// distance to the nearest ground-truth polyline vertex is <= threshold.
PointCloud label_ground_truth(const PointCloud& cloud, const GroundTruthEdges& gt,
                              double threshold);

}  // namespace staredge
