#pragma once

#include <complex>
#include <vector>

#include "staredge/geometry.hpp"
#include "staredge/kdtree.hpp"
#include "staredge/point_cloud.hpp"
#include "staredge/spherical_curve.hpp"

namespace staredge {

// Equiangular analysis grid at bandwidth B: 2B zenith rings at
// theta_j = pi(2j+1)/(4B), 2B azimuths phi_k = pi k / B, with quadrature
// weights that integrate Legendre polynomials exactly below the band limit.
// Basis convention: Y_l^m(theta, phi) = Ptilde_l^m(cos theta) e^{i m phi} / sqrt(2 pi),
// where Ptilde is the orthonormalized associated Legendre function with the
// Condon-Shortley phase, so that the Y_l^m are orthonormal over the sphere.
class SphericalGrid {
public:
    explicit SphericalGrid(int bandwidth);

    int bandwidth() const { return bandwidth_; }
    int ring_count() const { return 2 * bandwidth_; }  // rings == azimuths

    const std::vector<double>& thetas() const { return thetas_; }
    const std::vector<double>& phis() const { return phis_; }
    const std::vector<double>& weights() const { return weights_; }

    const Vec3& direction(int j, int k) const { return directions_[j * ring_count() + k]; }
    const std::vector<Vec3>& directions() const { return directions_; }

    // Precomputed Ptilde_l^m(cos theta_j) for m >= 0, layout tri(l,m) = l(l+1)/2 + m.
    double legendre(int j, int l, int m) const {
        return legendre_[static_cast<std::size_t>(j) * tri_size_ + l * (l + 1) / 2 + m];
    }

    // e^{-i m phi_k} for m in [-(B-1), B-1].
    std::complex<double> phase(int m, int k) const {
        return phases_[static_cast<std::size_t>(m + bandwidth_ - 1) * ring_count() + k];
    }

private:
    int bandwidth_;
    std::size_t tri_size_;
    std::vector<double> thetas_, phis_, weights_;
    std::vector<Vec3> directions_;
    std::vector<double> legendre_;
    std::vector<std::complex<double>> phases_;
};

SphericalGrid build_grid(int bandwidth);

// Orthonormalized associated Legendre function Ptilde_l^m (Condon-Shortley
// phase, m >= 0), normalized so that its square integrates to 1 over [-1, 1].
double orthonormal_legendre(int l, int m, double x);

// Complex spherical harmonic under the grid's convention; valid for any |m| <= l.
std::complex<double> sh_basis(int l, int m, double theta, double phi);

// Zenith/azimuth of a unit direction; phi wrapped into [0, 2 pi).
void direction_to_angles(const Vec3& dir, double& theta, double& phi);
Vec3 angles_to_direction(double theta, double phi);

// Complex SH coefficients for degrees < bandwidth, all orders, packed at
// index l*l + (m + l).
struct ShCoefficients {
    int bandwidth = 0;
    std::vector<std::complex<double>> values;

    static std::size_t pack_index(int l, int m) {
        return static_cast<std::size_t>(l) * l + (m + l);
    }
    std::complex<double>& at(int l, int m) { return values[pack_index(l, m)]; }
    const std::complex<double>& at(int l, int m) const { return values[pack_index(l, m)]; }
};

ShCoefficients make_coefficients(int bandwidth);

// Per-degree energy vector ||beta_l||_2; the rotation-invariant descriptor.
struct Descriptor {
    int bandwidth = 0;
    std::vector<double> energies;
};

// Geodesic kernel density estimate of the sample set at one direction, with
// Gaussian kernel and window h.
double kde_value(const std::vector<Vec3>& samples, const Vec3& direction, double h);

// KDE evaluated on the whole grid (row-major j * 2B + k) with h = pi / B.
std::vector<double> kde_on_grid(const std::vector<Vec3>& samples, const SphericalGrid& grid);

// Discrete SH transform of grid-sampled values, separated into an azimuth
// transform followed by a zenith transform.
ShCoefficients dsht(const std::vector<double>& values, const SphericalGrid& grid);

// Band-limited synthesis from coefficients.
std::complex<double> synthesize_at(const ShCoefficients& coeffs, double theta, double phi);
std::vector<double> synthesize_on_grid(const ShCoefficients& coeffs, const SphericalGrid& grid);

Descriptor descriptor(const ShCoefficients& coeffs);

// Full per-point descriptor: local spherical curve -> KDE -> DSHT -> energies.
// Throws DegenerateError when the neighborhood cannot support a curve.
Descriptor compute_descriptor(const PointCloud& cloud, const KdTree& index, int i,
                              const SphericalGrid& grid, int k, int sample_count);
Descriptor compute_descriptor(const PointCloud& cloud, const KdTree& index, int i,
                              int k, int bandwidth, int sample_count);

// Descriptor batch file: one line per point, B energies plus an optional
// trailing 0/1 label. Degenerate points are written as NaN rows so the file
// keeps one line per point; readers may skip them.
void write_descriptor_batch(const std::vector<Descriptor>& descriptors,
                            const std::vector<int>& labels,  // empty = no label column
                            const std::filesystem::path& path);
struct DescriptorBatch {
    int bandwidth = 0;
    std::vector<Descriptor> descriptors;  // empty energies = degenerate row
    std::vector<int> labels;              // empty if the file had no label column
};
DescriptorBatch read_descriptor_batch(const std::filesystem::path& path);

}  // namespace staredge
