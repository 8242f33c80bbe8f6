#include "staredge/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "staredge/error.hpp"

namespace staredge {

namespace {

int widest_axis(const std::vector<Vec3>& pts, const std::vector<int>& order, int begin, int end) {
    Vec3 lo = pts[order[begin]];
    Vec3 hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(pts[order[i]]);
        hi = hi.cwiseMax(pts[order[i]]);
    }
    const Vec3 extent = hi - lo;
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
        if (extent[a] > extent[axis]) axis = a;
    }
    return axis;
}

}  // namespace

// Bounded set of the k best candidates, kept as a max-heap on squared distance.
struct KdTree::Best {
    explicit Best(int k) : capacity(k) { heap.reserve(k); }

    int capacity;
    std::vector<std::pair<double, int>> heap;  // (squared distance, index)

    double worst() const {
        return heap.size() < static_cast<std::size_t>(capacity)
                   ? std::numeric_limits<double>::infinity()
                   : heap.front().first;
    }

    void push(double d2, int index) {
        if (heap.size() < static_cast<std::size_t>(capacity)) {
            heap.emplace_back(d2, index);
            std::push_heap(heap.begin(), heap.end());
        } else if (d2 < heap.front().first) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = {d2, index};
            std::push_heap(heap.begin(), heap.end());
        }
    }
};

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw ArgumentError("kd-tree requires a non-empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.size() / kLeafSize + 8);
    root_ = build(0, static_cast<int>(points_.size()));
}

int KdTree::build(int begin, int end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    const int axis = widest_axis(points_, order_, begin, end);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });

    nodes_[id].axis = axis;
    nodes_[id].point = order_[mid];
    nodes_[id].split = points_[order_[mid]][axis];
    const int left = build(begin, mid);
    const int right = build(mid + 1, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(int node, const Vec3& query, Best& best) const {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
        for (int i = n.begin; i < n.end; ++i) {
            const int idx = order_[i];
            best.push((points_[idx] - query).squaredNorm(), idx);
        }
        return;
    }

    best.push((points_[n.point] - query).squaredNorm(), n.point);
    const double delta = query[n.axis] - n.split;
    const int near = delta <= 0.0 ? n.left : n.right;
    const int far = delta <= 0.0 ? n.right : n.left;
    search(near, query, best);
    if (delta * delta <= best.worst()) search(far, query, best);
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, int k) const {
    if (k <= 0) throw ArgumentError("knn requires k >= 1");
    k = std::min<int>(k, static_cast<int>(points_.size()));

    Best best(k);
    search(root_, query, best);

    std::vector<Neighbor> result;
    result.reserve(best.heap.size());
    for (const auto& [d2, idx] : best.heap) result.push_back({idx, std::sqrt(d2)});
    std::sort(result.begin(), result.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    });
    return result;
}

Neighbor KdTree::nearest(const Vec3& query) const { return knn(query, 1).front(); }

}  // namespace staredge
