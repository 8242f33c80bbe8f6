#include "staredge/spherical_curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>

#include "staredge/error.hpp"

namespace staredge {

SphericalNeighborhood spherical_neighborhood(const PointCloud& cloud, const KdTree& index,
                                             int i, int k) {
    if (i < 0 || static_cast<std::size_t>(i) >= cloud.size()) {
        throw IndexError("point index out of range");
    }
    if (k < 4) throw ArgumentError("spherical neighborhood requires k >= 4");

    const Vec3& center = cloud.points[i];
    auto neighbors = index.knn(center, k + 1);
    // Drop the query point itself, keep the k nearest of the rest.
    std::erase_if(neighbors, [i](const Neighbor& n) { return n.index == i; });
    if (neighbors.size() > static_cast<std::size_t>(k)) neighbors.resize(k);

    SphericalNeighborhood result;
    result.directions.reserve(neighbors.size());
    for (const Neighbor& n : neighbors) {
        const Vec3 d = cloud.points[n.index] - center;
        const double len = d.norm();
        if (len < 1e-12) {
            ++result.dropped_duplicates;
            continue;
        }
        result.directions.push_back(d / len);
    }
    if (result.directions.size() < 4) {
        throw DegenerateError("fewer than 4 usable neighbors around point " + std::to_string(i));
    }
    return result;
}

PcaFrame pca_frame(const std::vector<Vec3>& points) {
    if (points.size() < 2) throw ArgumentError("pca_frame requires >= 2 points");

    PcaFrame frame;
    frame.mean = Vec3::Zero();
    for (const Vec3& p : points) frame.mean += p;
    frame.mean /= static_cast<double>(points.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Vec3& p : points) {
        const Vec3 d = p - frame.mean;
        cov += d * d.transpose();
    }
    cov /= static_cast<double>(points.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);  // ascending eigenvalues
    for (int a = 0; a < 3; ++a) {
        frame.axes[a] = solver.eigenvectors().col(2 - a);
        frame.variances[a] = solver.eigenvalues()(2 - a);
    }

    // Deterministic signs: minor axis toward the mean, major axis canonical,
    // middle axis completing a right-handed frame.
    const double toward_mean = frame.axes[2].dot(frame.mean);
    if (std::abs(toward_mean) > 1e-12) {
        if (toward_mean < 0.0) frame.axes[2] = -frame.axes[2];
    } else {
        frame.axes[2] = canonical_sign(frame.axes[2]);
    }
    frame.axes[0] = canonical_sign(frame.axes[0]);
    frame.axes[1] = frame.axes[2].cross(frame.axes[0]);
    return frame;
}

namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; returns indices of the strictly convex hull in CCW
// order starting at the lexicographically smallest point.
std::vector<int> convex_hull_2d(const std::vector<Eigen::Vector2d>& pts) {
    std::vector<int> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (pts[a].x() != pts[b].x()) return pts[a].x() < pts[b].x();
        if (pts[a].y() != pts[b].y()) return pts[a].y() < pts[b].y();
        return a < b;
    });

    const int n = static_cast<int>(order.size());
    std::vector<int> hull(2 * n);
    int h = 0;
    for (int idx = 0; idx < n; ++idx) {  // lower hull
        const int p = order[idx];
        while (h >= 2 && cross2(pts[hull[h - 2]], pts[hull[h - 1]], pts[p]) <= 0.0) --h;
        hull[h++] = p;
    }
    for (int idx = n - 2, lower = h + 1; idx >= 0; --idx) {  // upper hull
        const int p = order[idx];
        while (h >= lower && cross2(pts[hull[h - 2]], pts[hull[h - 1]], pts[p]) <= 0.0) --h;
        hull[h++] = p;
    }
    hull.resize(h - 1);  // last point equals the first
    return hull;
}

}  // namespace

std::vector<Vec3> convex_hull_keypoints(const std::vector<Vec3>& q) {
    if (q.size() < 4) throw ArgumentError("convex hull keypoints require >= 4 points");

    const PcaFrame frame = pca_frame(q);
    std::vector<Eigen::Vector2d> projected;
    projected.reserve(q.size());
    for (const Vec3& p : q) {
        const Vec3 d = p - frame.mean;
        projected.emplace_back(d.dot(frame.axes[0]), d.dot(frame.axes[1]));
    }

    // Collinearity check on the projections: spread along the second axis.
    double mean_v = 0.0;
    for (const auto& p : projected) mean_v += p.y();
    mean_v /= static_cast<double>(projected.size());
    double max_dev = 0.0;
    for (const auto& p : projected) max_dev = std::max(max_dev, std::abs(p.y() - mean_v));
    if (max_dev <= 1e-9) {
        throw DegenerateError("projected neighborhood is collinear");
    }

    const std::vector<int> hull = convex_hull_2d(projected);
    if (hull.size() < 3) throw DegenerateError("projected neighborhood has no 2D extent");

    std::vector<Vec3> keypoints;
    keypoints.reserve(hull.size());
    for (int idx : hull) keypoints.push_back(q[idx]);
    return keypoints;
}

PeriodicSpline::PeriodicSpline(const std::vector<Vec3>& points) : points_(points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw DegenerateError("periodic spline requires >= 3 points");

    knots_.resize(n);
    knots_[0] = 0.0;
    for (int i = 1; i < n; ++i) {
        const double h = (points[i] - points[i - 1]).norm();
        if (h < 1e-12) throw DegenerateError("coincident consecutive spline points");
        knots_[i] = knots_[i - 1] + h;
    }
    const double closing = (points[0] - points[n - 1]).norm();
    if (closing < 1e-12) throw DegenerateError("coincident closing spline points");
    period_ = knots_[n - 1] + closing;

    // Cyclic tridiagonal system for the spline moments (second derivatives),
    // one right-hand side per coordinate.
    auto seg_len = [&](int i) {
        return i + 1 < n ? knots_[i + 1] - knots_[i] : period_ - knots_[n - 1];
    };
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 3);
    for (int i = 0; i < n; ++i) {
        const int prev = (i + n - 1) % n;
        const int next = (i + 1) % n;
        const double h_prev = seg_len(prev);
        const double h_cur = seg_len(i);
        system(i, prev) += h_prev / 6.0;
        system(i, i) += (h_prev + h_cur) / 3.0;
        system(i, next) += h_cur / 6.0;
        const Vec3 slope_diff =
            (points[next] - points[i]) / h_cur - (points[i] - points[prev]) / h_prev;
        rhs.row(i) = slope_diff.transpose();
    }
    const Eigen::MatrixXd moments = system.partialPivLu().solve(rhs);
    moments_.resize(n);
    for (int i = 0; i < n; ++i) moments_[i] = moments.row(i).transpose();
}

Vec3 PeriodicSpline::evaluate(double t) const {
    const int n = static_cast<int>(points_.size());
    t = std::fmod(t, period_);
    if (t < 0.0) t += period_;

    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const int i = static_cast<int>(it - knots_.begin()) - 1;
    const int next = (i + 1) % n;
    const double t0 = knots_[i];
    const double t1 = i + 1 < n ? knots_[i + 1] : period_;
    const double h = t1 - t0;
    const double a = t1 - t;
    const double b = t - t0;

    return moments_[i] * (a * a * a) / (6.0 * h) + moments_[next] * (b * b * b) / (6.0 * h) +
           (points_[i] / h - moments_[i] * h / 6.0) * a +
           (points_[next] / h - moments_[next] * h / 6.0) * b;
}

LocalSphericalCurve fit_spherical_curve(const std::vector<Vec3>& keypoints, int sample_count) {
    if (keypoints.size() < 3) throw DegenerateError("curve fitting requires >= 3 keypoints");
    if (sample_count < 16) throw ArgumentError("curve sample count must be >= 16");

    const PeriodicSpline spline(keypoints);
    LocalSphericalCurve curve;
    curve.keypoints = keypoints;
    curve.samples.reserve(sample_count);
    const double step = spline.period() / sample_count;
    for (int j = 0; j < sample_count; ++j) {
        Vec3 p = spline.evaluate(j * step);
        const double len = p.norm();
        if (len < 1e-6) throw DegenerateError("spline passes through the sphere center");
        curve.samples.push_back(p / len);
    }
    return curve;
}

LocalSphericalCurve local_spherical_curve(const PointCloud& cloud, const KdTree& index,
                                          int i, int k, int sample_count) {
    const SphericalNeighborhood hood = spherical_neighborhood(cloud, index, i, k);
    const std::vector<Vec3> keypoints = convex_hull_keypoints(hood.directions);
    LocalSphericalCurve curve = fit_spherical_curve(keypoints, sample_count);
    curve.center_index = i;
    return curve;
}

void dump_curve_xyz(const LocalSphericalCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const Vec3& s : curve.samples) {
        out << s.x() << ' ' << s.y() << ' ' << s.z() << '\n';
    }
}

}  // namespace staredge
