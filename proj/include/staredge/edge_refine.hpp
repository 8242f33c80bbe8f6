#pragma once

#include <utility>
#include <vector>

#include "staredge/kdtree.hpp"
#include "staredge/point_cloud.hpp"

namespace staredge {

struct RefineConfig {
    double mu = 0.1;  // regularization weight
    int k = 26;       // neighborhood size for the tangent-plane sum

    void validate() const;
};

// Minimizer of  sum_j ((z - p_j) . n_j)^2 + mu ||z - p_i||^2  via the 3x3
// SPD normal equations (closed form). neighbors are (position, unit normal).
Vec3 refine_point(const Vec3& p, const std::vector<std::pair<Vec3, Vec3>>& neighbors,
                  double mu);

// Refines every listed edge point against the tangent planes of its k nearest
// neighbors in the full cloud. Returns a cloud holding only the refined
// positions, one per edge index, in input order.
PointCloud refine_all(const PointCloud& cloud, const std::vector<int>& edge_indices,
                      const std::vector<Vec3>& normals, const RefineConfig& config,
                      const KdTree& index);

}  // namespace staredge
