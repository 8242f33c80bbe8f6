#include "staredge/edge_refine.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "staredge/error.hpp"

namespace staredge {

void RefineConfig::validate() const {
    if (!(mu > 0.0)) throw ArgumentError("mu must be positive");
    if (k < 3) throw ArgumentError("refine neighborhood size must be >= 3");
}

Vec3 refine_point(const Vec3& p, const std::vector<std::pair<Vec3, Vec3>>& neighbors,
                  double mu) {
    if (neighbors.empty()) throw ArgumentError("refine_point requires >= 1 neighbor");
    if (!(mu > 0.0)) throw ArgumentError("mu must be positive");
    if (!p.allFinite()) throw ArgumentError("refine_point given non-finite position");

    // Normal equations of  sum_j ((z - p_j) . n_j)^2 + mu ||z - p_i||^2 :
    //   (sum_j n_j n_j^T + mu I) z = sum_j n_j (n_j . p_j) + mu p_i.
    Eigen::Matrix3d system = mu * Eigen::Matrix3d::Identity();
    Vec3 rhs = mu * p;
    for (const auto& [pos, normal] : neighbors) {
        if (!pos.allFinite() || !normal.allFinite()) {
            throw ArgumentError("refine_point given non-finite neighbor");
        }
        if (std::abs(normal.norm() - 1.0) > 1e-6) {
            throw ArgumentError("refine_point neighbor normal is not unit length");
        }
        system += normal * normal.transpose();
        rhs += normal * normal.dot(pos);
    }

    const Vec3 z = system.llt().solve(rhs);
    const double residual = (system * z - rhs).norm();
    if (residual > 1e-10 * std::max(1.0, rhs.norm())) {
        throw NumericError("refine_point normal-equation solve lost precision");
    }
    return z;
}

PointCloud refine_all(const PointCloud& cloud, const std::vector<int>& edge_indices,
                      const std::vector<Vec3>& normals, const RefineConfig& config,
                      const KdTree& index) {
    config.validate();
    if (normals.size() != cloud.size()) {
        throw ArgumentError("refine_all requires one normal per cloud point");
    }

    PointCloud refined;
    refined.points.reserve(edge_indices.size());
    for (int i : edge_indices) {
        if (i < 0 || static_cast<std::size_t>(i) >= cloud.size()) {
            throw IndexError("edge index " + std::to_string(i) + " out of range");
        }
        const Vec3& p = cloud.points[i];
        auto neighbors = index.knn(p, config.k + 1);
        std::erase_if(neighbors, [i](const Neighbor& n) { return n.index == i; });
        if (neighbors.size() > static_cast<std::size_t>(config.k)) neighbors.resize(config.k);

        std::vector<std::pair<Vec3, Vec3>> planes;
        planes.reserve(neighbors.size());
        for (const Neighbor& n : neighbors) {
            planes.emplace_back(cloud.points[n.index], normals[n.index]);
        }
        try {
            refined.points.push_back(refine_point(p, planes, config.mu));
        } catch (const Error& e) {
            throw ArgumentError("refining point " + std::to_string(i) + ": " + e.what());
        }
    }
    return refined;
}

}  // namespace staredge
