#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "staredge/point_cloud.hpp"

namespace staredge {

enum class ShapeKind { Plate, Box, LBracket };

ShapeKind shape_kind_from_string(const std::string& name);
std::string to_string(ShapeKind kind);

// Parametric thin-walled shape. Extents per kind:
//   plate:     {lx, ly}           slab lx x ly x thickness
//   box:       {lx, ly, lz}       rectangular tube along y, wall = thickness
//   l-bracket: {l1, l2, width}    L cross-section in xz, extruded along y
struct ShapeSpec {
    ShapeKind kind = ShapeKind::Plate;
    std::vector<double> extents = {20.0, 20.0};
    double thickness = 3.0;
    double resolution = 0.5;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;  // throws ArgumentError / DegenerateError
};

struct GeneratedShape {
    PointCloud cloud;               // noisy samples, no labels/normals
    GroundTruthEdges edges;         // exact face-intersection lines, pre-noise
    std::vector<int> face_ids;      // generating face per point
    std::vector<Vec3> face_normals; // true outward face normal per point
};

// Samples every boundary face on a jittered cell-centered grid at the target
// spacing, then perturbs each coordinate with N(0, noise_sigma^2).
// Deterministic for a fixed spec.
GeneratedShape generate(const ShapeSpec& spec);

// Key-value spec file, one `key = value` per line. Keys mirror ShapeSpec
// fields; extents are whitespace-separated. '#' lines are skipped.
ShapeSpec parse_shape_spec_text(const std::string& text);
ShapeSpec parse_shape_spec(const std::filesystem::path& path);

}  // namespace staredge
