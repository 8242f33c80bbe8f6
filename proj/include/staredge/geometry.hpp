#pragma once

#include <Eigen/Core>
#include <cmath>

namespace staredge {

using Vec3 = Eigen::Vector3d;

inline double clamp_unit(double x) {
    return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
}

// Geodesic distance between two unit vectors, safe at coincident and
// antipodal pairs.
inline double geodesic_distance(const Vec3& a, const Vec3& b) {
    return std::acos(clamp_unit(a.dot(b)));
}

inline double angle_between(const Vec3& a, const Vec3& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::acos(clamp_unit(a.dot(b) / (na * nb)));
}

// Angle between the lines spanned by a and b (orientation ignored).
inline double line_angle(const Vec3& a, const Vec3& b) {
    const double t = angle_between(a, b);
    return std::min(t, M_PI - t);
}

// Flips v so that its largest-magnitude component is positive. Resolves the
// sign ambiguity of eigenvectors deterministically.
inline Vec3 canonical_sign(const Vec3& v) {
    int imax = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    }
    return v[imax] < 0.0 ? Vec3(-v) : v;
}

}  // namespace staredge
