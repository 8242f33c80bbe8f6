#pragma once

#include <vector>

#include "staredge/geometry.hpp"

namespace staredge {

struct Neighbor {
    int index = -1;
    double distance = 0.0;
};

// Exact k-nearest-neighbor search over a fixed point set. Median-split tree,
// immutable after construction, safe to share read-only across threads.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points);

    // k nearest points to query, sorted by nondecreasing distance (ties by
    // index). k larger than size() is clamped to size().
    std::vector<Neighbor> knn(const Vec3& query, int k) const;

    Neighbor nearest(const Vec3& query) const;

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }

private:
    struct Node {
        int axis = -1;        // -1 marks a leaf
        double split = 0.0;   // splitting coordinate
        int point = -1;       // point stored at this node
        int left = -1;
        int right = -1;
        int begin = 0, end = 0;  // leaf range into order_
    };

    struct Best;  // bounded max-heap used during search

    int build(int begin, int end);
    void search(int node, const Vec3& query, Best& best) const;

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 8;
};

}  // namespace staredge
