#include "staredge/pipeline.hpp"

#include <cmath>

#include "staredge/error.hpp"
#include "staredge/util.hpp"

namespace staredge {

void RunConfig::validate() const {
    if (k < 4) throw ArgumentError("k must be >= 4");
    if (bandwidth < 2 || bandwidth > 64) throw ArgumentError("bandwidth must be in [2, 64]");
    if (curve_samples < 16) throw ArgumentError("curve_samples must be >= 16");
    if (!(mu > 0.0)) throw ArgumentError("mu must be positive");
    if (!(ransac_tol > 0.0 && ransac_tol < 0.5)) throw ArgumentError("ransac_tol out of range");
    if (ransac_iterations < 1) throw ArgumentError("ransac_iterations must be >= 1");
    if (!(label_threshold > 0.0)) throw ArgumentError("label_threshold must be positive");
}

std::vector<std::optional<LocalSphericalCurve>> compute_curves(const PointCloud& cloud,
                                                               const KdTree& index,
                                                               const RunConfig& config) {
    config.validate();
    const int threads = resolve_threads(config.threads);
    std::vector<std::optional<LocalSphericalCurve>> curves(cloud.size());
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        try {
            curves[i] = local_spherical_curve(cloud, index, static_cast<int>(i), config.k,
                                              config.curve_samples);
        } catch (const DegenerateError&) {
            curves[i] = std::nullopt;
        }
    });
    return curves;
}

std::vector<std::optional<Descriptor>> descriptors_from_curves(
    const std::vector<std::optional<LocalSphericalCurve>>& curves, const RunConfig& config) {
    const SphericalGrid grid(config.bandwidth);
    const int threads = resolve_threads(config.threads);
    std::vector<std::optional<Descriptor>> descriptors(curves.size());
    parallel_for(curves.size(), threads, [&](std::size_t i) {
        if (curves[i]) {
            descriptors[i] = descriptor(dsht(kde_on_grid(curves[i]->samples, grid), grid));
        }
    });
    return descriptors;
}

namespace {

// PCA normal for points without a usable spherical curve.
Vec3 fallback_normal(const PointCloud& cloud, const KdTree& index, int i, int k) {
    auto neighbors = index.knn(cloud.points[i], k + 1);
    std::erase_if(neighbors, [i](const Neighbor& n) { return n.index == i; });
    if (neighbors.size() < 3) return Vec3::UnitZ();
    std::vector<Vec3> positions;
    positions.reserve(neighbors.size());
    for (const Neighbor& n : neighbors) positions.push_back(cloud.points[n.index]);
    return pca_frame(positions).axes[2];
}

}  // namespace

std::vector<Vec3> normals_from_curves(const PointCloud& cloud, const KdTree& index,
                                      const std::vector<std::optional<LocalSphericalCurve>>& curves,
                                      const RunConfig& config) {
    const int threads = resolve_threads(config.threads);
    std::vector<Vec3> normals(cloud.size());
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        const std::uint64_t point_seed = config.seed + 1000003ULL * i;
        if (curves[i]) {
            try {
                normals[i] = estimate_normal(*curves[i], config.ransac_tol,
                                             config.ransac_iterations, point_seed);
                return;
            } catch (const DegenerateError&) {
            }
        }
        normals[i] = fallback_normal(cloud, index, static_cast<int>(i), config.k);
    });
    return normals;
}

ExtractResult extract_edges(const PointCloud& cloud, const MlpModel& model,
                            const RunConfig& config, bool refine) {
    config.validate();
    if (cloud.points.empty()) throw ArgumentError("cannot extract edges from an empty cloud");
    if (model.input_dim() != config.bandwidth) {
        throw ArgumentError("model input dimension does not match configured bandwidth");
    }

    ExtractResult result;
    const KdTree index(cloud.points);

    StageTimer t_curves;
    const auto curves = compute_curves(cloud, index, config);
    result.timings.curves = t_curves.seconds();
    for (const auto& c : curves) {
        if (!c) ++result.degenerate_points;
    }

    StageTimer t_desc;
    const auto descriptors = descriptors_from_curves(curves, config);
    result.timings.descriptors = t_desc.seconds();

    StageTimer t_classify;
    result.labels.assign(cloud.size(), 0);
    result.edge_probability.assign(cloud.size(), 0.0);
    const int threads = resolve_threads(config.threads);
    parallel_for(cloud.size(), threads, [&](std::size_t i) {
        if (!descriptors[i]) return;  // degenerate neighborhoods stay non-edge
        const Prediction p = predict(model, *descriptors[i]);
        result.labels[i] = static_cast<std::uint8_t>(p.label);
        result.edge_probability[i] = p.edge_probability;
    });
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (result.labels[i]) result.edge_indices.push_back(static_cast<int>(i));
    }
    result.timings.classify = t_classify.seconds();

    StageTimer t_normals;
    result.normals = normals_from_curves(cloud, index, curves, config);
    result.timings.normals = t_normals.seconds();

    result.unrefined_edges.points.reserve(result.edge_indices.size());
    for (int i : result.edge_indices) result.unrefined_edges.points.push_back(cloud.points[i]);

    StageTimer t_refine;
    if (refine) {
        const RefineConfig refine_config{config.mu, config.k};
        result.refined_edges =
            refine_all(cloud, result.edge_indices, result.normals, refine_config, index);
    } else {
        result.refined_edges = result.unrefined_edges;
    }
    result.timings.refine = t_refine.seconds();
    return result;
}

}  // namespace staredge
