#include "staredge/spherical_harmonics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "staredge/error.hpp"

namespace staredge {

namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;  // sqrt(2 pi)

// Unnormalized Legendre polynomial P_l(x), used only to validate quadrature.
double legendre_poly(int l, double x) {
    double p0 = 1.0, p1 = x;
    if (l == 0) return p0;
    if (l == 1) return p1;
    for (int n = 2; n <= l; ++n) {
        const double pn = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = pn;
    }
    return p1;
}

// Fills table[tri(l, m)] with Ptilde_l^m(x) for 0 <= m <= l < bandwidth.
void legendre_table(int bandwidth, double x, double* table) {
    const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
    auto tri = [](int l, int m) { return l * (l + 1) / 2 + m; };

    double pmm = std::sqrt(0.5);  // Ptilde_0^0
    for (int m = 0; m < bandwidth; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        table[tri(m, m)] = pmm;
        if (m + 1 < bandwidth) {
            double prev2 = pmm;
            double prev1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
            table[tri(m + 1, m)] = prev1;
            for (int l = m + 2; l < bandwidth; ++l) {
                const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
                const double b = std::sqrt(
                    ((static_cast<double>(l) - 1.0) * (l - 1.0) - m * m) /
                    (4.0 * (static_cast<double>(l) - 1.0) * (l - 1.0) - 1.0));
                const double cur = a * (x * prev1 - b * prev2);
                table[tri(l, m)] = cur;
                prev2 = prev1;
                prev1 = cur;
            }
        }
    }
}

}  // namespace

double orthonormal_legendre(int l, int m, double x) {
    if (l < 0 || m < 0 || m > l) throw ArgumentError("orthonormal_legendre requires 0 <= m <= l");
    std::vector<double> table((l + 1) * (l + 2) / 2);
    legendre_table(l + 1, x, table.data());
    return table[l * (l + 1) / 2 + m];
}

std::complex<double> sh_basis(int l, int m, double theta, double phi) {
    const int am = std::abs(m);
    if (l < 0 || am > l) throw ArgumentError("sh_basis requires |m| <= l");
    double p = orthonormal_legendre(l, am, std::cos(theta));
    if (m < 0 && (am & 1)) p = -p;  // Ptilde_l^{-m} = (-1)^m Ptilde_l^m
    return p / kSqrt2Pi * std::complex<double>(std::cos(m * phi), std::sin(m * phi));
}

void direction_to_angles(const Vec3& dir, double& theta, double& phi) {
    theta = std::acos(clamp_unit(dir.z()));
    phi = std::atan2(dir.y(), dir.x());
    if (phi < 0.0) phi += 2.0 * M_PI;
}

Vec3 angles_to_direction(double theta, double phi) {
    const double s = std::sin(theta);
    return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

SphericalGrid::SphericalGrid(int bandwidth) : bandwidth_(bandwidth) {
    if (bandwidth < 2 || bandwidth > 64) throw ArgumentError("bandwidth must be in [2, 64]");
    const int size = 2 * bandwidth;
    tri_size_ = static_cast<std::size_t>(bandwidth) * (bandwidth + 1) / 2;

    thetas_.resize(size);
    phis_.resize(size);
    weights_.resize(size);
    for (int j = 0; j < size; ++j) thetas_[j] = M_PI * (2.0 * j + 1.0) / (4.0 * bandwidth);
    for (int k = 0; k < size; ++k) phis_[k] = M_PI * k / bandwidth;

    // Driscoll-Healy quadrature weights for the (0, pi) equiangular rings.
    for (int j = 0; j < size; ++j) {
        double sum = 0.0;
        for (int l = 0; l < bandwidth; ++l) {
            sum += std::sin((2.0 * l + 1.0) * thetas_[j]) / (2.0 * l + 1.0);
        }
        weights_[j] = (2.0 / bandwidth) * std::sin(thetas_[j]) * sum;
    }
    // Exactness check: integrates Legendre polynomials below the band limit.
    for (int l = 0; l < bandwidth; ++l) {
        double sum = 0.0;
        for (int j = 0; j < size; ++j) sum += weights_[j] * legendre_poly(l, std::cos(thetas_[j]));
        const double expected = l == 0 ? 2.0 : 0.0;
        if (std::abs(sum - expected) > 1e-10) {
            throw NumericError("quadrature weights failed the exactness check");
        }
    }

    directions_.resize(static_cast<std::size_t>(size) * size);
    for (int j = 0; j < size; ++j) {
        for (int k = 0; k < size; ++k) {
            directions_[j * size + k] = angles_to_direction(thetas_[j], phis_[k]);
        }
    }

    legendre_.resize(static_cast<std::size_t>(size) * tri_size_);
    for (int j = 0; j < size; ++j) {
        legendre_table(bandwidth, std::cos(thetas_[j]), legendre_.data() + j * tri_size_);
    }

    phases_.resize(static_cast<std::size_t>(2 * bandwidth - 1) * size);
    for (int m = -(bandwidth - 1); m <= bandwidth - 1; ++m) {
        for (int k = 0; k < size; ++k) {
            const double angle = -m * phis_[k];
            phases_[static_cast<std::size_t>(m + bandwidth - 1) * size + k] = {std::cos(angle),
                                                                               std::sin(angle)};
        }
    }
}

SphericalGrid build_grid(int bandwidth) { return SphericalGrid(bandwidth); }

ShCoefficients make_coefficients(int bandwidth) {
    ShCoefficients c;
    c.bandwidth = bandwidth;
    c.values.assign(static_cast<std::size_t>(bandwidth) * bandwidth, {0.0, 0.0});
    return c;
}

double kde_value(const std::vector<Vec3>& samples, const Vec3& direction, double h) {
    double sum = 0.0;
    for (const Vec3& s : samples) {
        const double delta = geodesic_distance(s, direction) / h;
        sum += std::exp(-0.5 * delta * delta);
    }
    // Gaussian kernel 1/sqrt(2 pi) exp(-x^2/2), averaged and scaled by 1/h.
    return sum / (static_cast<double>(samples.size()) * h * kSqrt2Pi);
}

std::vector<double> kde_on_grid(const std::vector<Vec3>& samples, const SphericalGrid& grid) {
    if (samples.empty()) throw ArgumentError("kde_on_grid requires at least one sample");
    const int size = grid.ring_count();
    const double h = M_PI / grid.bandwidth();
    std::vector<double> values(static_cast<std::size_t>(size) * size);
    for (int j = 0; j < size; ++j) {
        for (int k = 0; k < size; ++k) {
            values[j * size + k] = kde_value(samples, grid.direction(j, k), h);
        }
    }
    return values;
}

ShCoefficients dsht(const std::vector<double>& values, const SphericalGrid& grid) {
    const int bandwidth = grid.bandwidth();
    const int size = grid.ring_count();
    if (values.size() != static_cast<std::size_t>(size) * size) {
        throw ArgumentError("dsht input must have 2B x 2B samples");
    }

    // Azimuth transform: g[j][m] = sum_k f(theta_j, phi_k) e^{-i m phi_k}.
    const int m_count = 2 * bandwidth - 1;
    std::vector<std::complex<double>> g(static_cast<std::size_t>(size) * m_count);
    for (int j = 0; j < size; ++j) {
        for (int mi = 0; mi < m_count; ++mi) {
            const int m = mi - (bandwidth - 1);
            std::complex<double> sum = 0.0;
            for (int k = 0; k < size; ++k) {
                sum += values[j * size + k] * grid.phase(m, k);
            }
            g[static_cast<std::size_t>(j) * m_count + mi] = sum;
        }
    }

    // Zenith transform against the orthonormalized Legendre functions.
    ShCoefficients coeffs = make_coefficients(bandwidth);
    const double scale = kSqrt2Pi / (2.0 * bandwidth);
    for (int l = 0; l < bandwidth; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            const double sign = (m < 0 && (am & 1)) ? -1.0 : 1.0;
            std::complex<double> sum = 0.0;
            for (int j = 0; j < size; ++j) {
                sum += grid.weights()[j] * grid.legendre(j, l, am) *
                       g[static_cast<std::size_t>(j) * m_count + (m + bandwidth - 1)];
            }
            coeffs.at(l, m) = scale * sign * sum;
        }
    }
    return coeffs;
}

std::complex<double> synthesize_at(const ShCoefficients& coeffs, double theta, double phi) {
    const int bandwidth = coeffs.bandwidth;
    std::vector<double> table(static_cast<std::size_t>(bandwidth) * (bandwidth + 1) / 2);
    legendre_table(bandwidth, std::cos(theta), table.data());

    std::complex<double> sum = 0.0;
    for (int l = 0; l < bandwidth; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            double p = table[l * (l + 1) / 2 + am];
            if (m < 0 && (am & 1)) p = -p;
            sum += coeffs.at(l, m) * (p / kSqrt2Pi) *
                   std::complex<double>(std::cos(m * phi), std::sin(m * phi));
        }
    }
    return sum;
}

std::vector<double> synthesize_on_grid(const ShCoefficients& coeffs, const SphericalGrid& grid) {
    if (coeffs.bandwidth != grid.bandwidth()) {
        throw ArgumentError("coefficient bandwidth does not match grid");
    }
    const int bandwidth = grid.bandwidth();
    const int size = grid.ring_count();
    std::vector<double> values(static_cast<std::size_t>(size) * size);
    for (int j = 0; j < size; ++j) {
        for (int k = 0; k < size; ++k) {
            std::complex<double> sum = 0.0;
            for (int l = 0; l < bandwidth; ++l) {
                for (int m = -l; m <= l; ++m) {
                    const int am = std::abs(m);
                    double p = grid.legendre(j, l, am);
                    if (m < 0 && (am & 1)) p = -p;
                    // e^{+i m phi_k} = conj(phase(m, k))
                    sum += coeffs.at(l, m) * (p / kSqrt2Pi) * std::conj(grid.phase(m, k));
                }
            }
            values[j * size + k] = sum.real();
        }
    }
    return values;
}

Descriptor descriptor(const ShCoefficients& coeffs) {
    Descriptor d;
    d.bandwidth = coeffs.bandwidth;
    d.energies.resize(coeffs.bandwidth);
    for (int l = 0; l < coeffs.bandwidth; ++l) {
        double sum = 0.0;
        for (int m = -l; m <= l; ++m) sum += std::norm(coeffs.at(l, m));
        d.energies[l] = std::sqrt(sum);
    }
    return d;
}

Descriptor compute_descriptor(const PointCloud& cloud, const KdTree& index, int i,
                              const SphericalGrid& grid, int k, int sample_count) {
    const LocalSphericalCurve curve = local_spherical_curve(cloud, index, i, k, sample_count);
    return descriptor(dsht(kde_on_grid(curve.samples, grid), grid));
}

Descriptor compute_descriptor(const PointCloud& cloud, const KdTree& index, int i,
                              int k, int bandwidth, int sample_count) {
    const SphericalGrid grid(bandwidth);
    return compute_descriptor(cloud, index, i, grid, k, sample_count);
}

void write_descriptor_batch(const std::vector<Descriptor>& descriptors,
                            const std::vector<int>& labels,
                            const std::filesystem::path& path) {
    if (!labels.empty() && labels.size() != descriptors.size()) {
        throw ArgumentError("label count does not match descriptor count");
    }
    int bandwidth = 0;
    for (const Descriptor& d : descriptors) {
        if (!d.energies.empty()) {
            bandwidth = d.bandwidth;
            break;
        }
    }

    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "# staredge descriptor batch bandwidth=" << bandwidth
        << " labels=" << (labels.empty() ? 0 : 1) << "\n";
    char buf[32];
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        const Descriptor& d = descriptors[i];
        std::string line;
        for (int l = 0; l < bandwidth; ++l) {
            if (l) line += ' ';
            if (d.energies.empty()) {
                line += "nan";
            } else {
                std::snprintf(buf, sizeof(buf), "%.17g", d.energies[l]);
                line += buf;
            }
        }
        if (!labels.empty()) {
            line += ' ';
            line += labels[i] ? '1' : '0';
        }
        line += '\n';
        out << line;
    }
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

DescriptorBatch read_descriptor_batch(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    DescriptorBatch batch;
    bool has_labels = false;
    bool header_seen = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line);
            std::string tok;
            while (hs >> tok) {
                if (tok.rfind("bandwidth=", 0) == 0) {
                    batch.bandwidth = std::stoi(tok.substr(10));
                    header_seen = true;
                } else if (tok.rfind("labels=", 0) == 0) {
                    has_labels = tok.substr(7) == "1";
                }
            }
            continue;
        }

        std::istringstream fs(line);
        std::vector<std::string> fields;
        std::string tok;
        while (fs >> tok) fields.push_back(tok);
        if (!header_seen) {
            batch.bandwidth = static_cast<int>(fields.size());
            header_seen = true;
        }
        const std::size_t expected = batch.bandwidth + (has_labels ? 1 : 0);
        if (fields.size() != expected) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(expected) + " fields");
        }

        Descriptor d;
        d.bandwidth = batch.bandwidth;
        d.energies.reserve(batch.bandwidth);
        bool degenerate = false;
        for (int l = 0; l < batch.bandwidth; ++l) {
            double v = 0.0;
            const auto [ptr, ec] =
                std::from_chars(fields[l].data(), fields[l].data() + fields[l].size(), v);
            if (ec != std::errc() || ptr != fields[l].data() + fields[l].size()) {
                throw ParseError("line " + std::to_string(line_no) + ": bad value '" + fields[l] +
                                 "'");
            }
            if (std::isnan(v)) degenerate = true;
            d.energies.push_back(v);
        }
        if (degenerate) d.energies.clear();
        batch.descriptors.push_back(std::move(d));
        if (has_labels) {
            const std::string& lt = fields.back();
            if (lt != "0" && lt != "1") {
                throw ParseError("line " + std::to_string(line_no) + ": label must be 0 or 1");
            }
            batch.labels.push_back(lt == "1" ? 1 : 0);
        }
    }
    return batch;
}

}  // namespace staredge
