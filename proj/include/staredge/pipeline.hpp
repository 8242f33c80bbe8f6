#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "staredge/classifier.hpp"
#include "staredge/edge_refine.hpp"
#include "staredge/io.hpp"
#include "staredge/kdtree.hpp"
#include "staredge/normal_ransac.hpp"
#include "staredge/spherical_harmonics.hpp"

namespace staredge {

// Run-level hyperparameters with their default working values.
struct RunConfig {
    int k = 26;
    int bandwidth = 10;
    int curve_samples = 64;
    double mu = 0.1;
    double ransac_tol = kDefaultRansacTol;
    int ransac_iterations = kDefaultRansacIterations;
    std::uint64_t seed = 1;
    double label_threshold = kThinWalledLabelThreshold;
    int threads = 0;  // 0 = resolve from env / hardware

    void validate() const;
};

// Local spherical curves for every point; nullopt marks a degenerate
// neighborhood (reported, treated as non-edge downstream).
std::vector<std::optional<LocalSphericalCurve>> compute_curves(const PointCloud& cloud,
                                                               const KdTree& index,
                                                               const RunConfig& config);

std::vector<std::optional<Descriptor>> descriptors_from_curves(
    const std::vector<std::optional<LocalSphericalCurve>>& curves, const RunConfig& config);

// Oriented normal per point. Points without a usable curve fall back to the
// minor principal axis of their k-NN neighborhood.
std::vector<Vec3> normals_from_curves(const PointCloud& cloud, const KdTree& index,
                                      const std::vector<std::optional<LocalSphericalCurve>>& curves,
                                      const RunConfig& config);

struct StageTimings {
    double curves = 0.0;
    double descriptors = 0.0;
    double classify = 0.0;
    double normals = 0.0;
    double refine = 0.0;
};

struct ExtractResult {
    std::vector<std::uint8_t> labels;        // predicted, per point
    std::vector<double> edge_probability;    // per point
    std::vector<Vec3> normals;               // per point
    std::vector<int> edge_indices;
    PointCloud unrefined_edges;              // classifier positives, original positions
    PointCloud refined_edges;                // equals unrefined when refine = false
    int degenerate_points = 0;
    StageTimings timings;
};

// Full detection pipeline: curves, descriptors, classification, normal
// estimation, and (optionally) edge refinement.
ExtractResult extract_edges(const PointCloud& cloud, const MlpModel& model,
                            const RunConfig& config, bool refine = true);

}  // namespace staredge
