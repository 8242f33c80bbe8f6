#include "staredge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "staredge/error.hpp"
#include "staredge/rng.hpp"

namespace staredge {

namespace {

// Rectangular boundary face: origin + s*u_dir + t*v_dir, s in [0, lu], t in [0, lv].
struct Rect {
    Vec3 origin;
    Vec3 u_dir, v_dir;  // orthonormal in-plane directions
    double lu, lv;
    Vec3 normal;        // outward
};

struct FaceSoup {
    std::vector<Rect> faces;
    std::vector<std::pair<Vec3, Vec3>> edge_segments;
};

void add_slab(FaceSoup& soup, const Vec3& lo, const Vec3& hi) {
    const Vec3 d = hi - lo;
    const Vec3 ex(1, 0, 0), ey(0, 1, 0), ez(0, 0, 1);
    soup.faces.push_back({lo, ex, ey, d.x(), d.y(), -ez});                       // bottom
    soup.faces.push_back({{lo.x(), lo.y(), hi.z()}, ex, ey, d.x(), d.y(), ez});  // top
    soup.faces.push_back({lo, ey, ez, d.y(), d.z(), -ex});                       // x = lo
    soup.faces.push_back({{hi.x(), lo.y(), lo.z()}, ey, ez, d.y(), d.z(), ex});  // x = hi
    soup.faces.push_back({lo, ex, ez, d.x(), d.z(), -ey});                       // y = lo
    soup.faces.push_back({{lo.x(), hi.y(), lo.z()}, ex, ez, d.x(), d.z(), ey});  // y = hi

    const double xs[2] = {lo.x(), hi.x()};
    const double ys[2] = {lo.y(), hi.y()};
    const double zs[2] = {lo.z(), hi.z()};
    for (double y : ys)
        for (double z : zs)
            soup.edge_segments.push_back({{lo.x(), y, z}, {hi.x(), y, z}});
    for (double x : xs)
        for (double z : zs)
            soup.edge_segments.push_back({{x, lo.y(), z}, {x, hi.y(), z}});
    for (double x : xs)
        for (double y : ys)
            soup.edge_segments.push_back({{x, y, lo.z()}, {x, y, hi.z()}});
}

FaceSoup plate_soup(const ShapeSpec& spec) {
    FaceSoup soup;
    add_slab(soup, Vec3::Zero(), Vec3(spec.extents[0], spec.extents[1], spec.thickness));
    return soup;
}

// Rectangular tube along y: outer lx x lz cross-section, wall thickness t,
// open at both ends. Side-end faces are the width-t annulus strips at the ends.
FaceSoup box_soup(const ShapeSpec& spec) {
    const double lx = spec.extents[0], ly = spec.extents[1], lz = spec.extents[2];
    const double t = spec.thickness;
    const Vec3 ex(1, 0, 0), ey(0, 1, 0), ez(0, 0, 1);

    FaceSoup soup;
    // Outer walls.
    soup.faces.push_back({{0, 0, 0}, ex, ey, lx, ly, -ez});
    soup.faces.push_back({{0, 0, lz}, ex, ey, lx, ly, ez});
    soup.faces.push_back({{0, 0, 0}, ey, ez, ly, lz, -ex});
    soup.faces.push_back({{lx, 0, 0}, ey, ez, ly, lz, ex});
    // Inner walls (normals point into the cavity).
    soup.faces.push_back({{t, 0, t}, ex, ey, lx - 2 * t, ly, ez});
    soup.faces.push_back({{t, 0, lz - t}, ex, ey, lx - 2 * t, ly, -ez});
    soup.faces.push_back({{t, 0, t}, ey, ez, ly, lz - 2 * t, ex});
    soup.faces.push_back({{lx - t, 0, t}, ey, ez, ly, lz - 2 * t, -ex});
    // End caps: four strips per end.
    for (int end = 0; end < 2; ++end) {
        const double y = end == 0 ? 0.0 : ly;
        const Vec3 n = end == 0 ? Vec3(-ey) : ey;
        soup.faces.push_back({{0, y, 0}, ex, ez, lx, t, n});            // bottom strip
        soup.faces.push_back({{0, y, lz - t}, ex, ez, lx, t, n});       // top strip
        soup.faces.push_back({{0, y, t}, ex, ez, t, lz - 2 * t, n});    // left strip
        soup.faces.push_back({{lx - t, y, t}, ex, ez, t, lz - 2 * t, n});  // right strip
    }

    // Longitudinal edges: outer and inner tube corners.
    const double outer_x[2] = {0, lx}, outer_z[2] = {0, lz};
    for (double x : outer_x)
        for (double z : outer_z) soup.edge_segments.push_back({{x, 0, z}, {x, ly, z}});
    const double inner_x[2] = {t, lx - t}, inner_z[2] = {t, lz - t};
    for (double x : inner_x)
        for (double z : inner_z) soup.edge_segments.push_back({{x, 0, z}, {x, ly, z}});
    // Rim edges at each end: outer and inner rectangles in the end plane.
    for (int end = 0; end < 2; ++end) {
        const double y = end == 0 ? 0.0 : ly;
        auto rim = [&](double x0, double z0, double x1, double z1) {
            soup.edge_segments.push_back({{x0, y, z0}, {x1, y, z0}});
            soup.edge_segments.push_back({{x0, y, z1}, {x1, y, z1}});
            soup.edge_segments.push_back({{x0, y, z0}, {x0, y, z1}});
            soup.edge_segments.push_back({{x1, y, z0}, {x1, y, z1}});
        };
        rim(0, 0, lx, lz);
        rim(t, t, lx - t, lz - t);
    }
    return soup;
}

// L cross-section in xz, extruded along y: legs of length l1 (along x) and
// l2 (along z), arm thickness t, width w.
FaceSoup lbracket_soup(const ShapeSpec& spec) {
    const double l1 = spec.extents[0], l2 = spec.extents[1], w = spec.extents[2];
    const double t = spec.thickness;
    const Vec3 ex(1, 0, 0), ey(0, 1, 0), ez(0, 0, 1);

    // Cross-section polygon: (0,0) (l1,0) (l1,t) (t,t) (t,l2) (0,l2).
    const std::vector<std::pair<Vec3, Vec3>> profile = {
        {{0, 0, 0}, {l1, 0, 0}},    // bottom
        {{l1, 0, 0}, {l1, 0, t}},   // right end
        {{l1, 0, t}, {t, 0, t}},    // top of leg A
        {{t, 0, t}, {t, 0, l2}},    // inner vertical
        {{t, 0, l2}, {0, 0, l2}},   // top end
        {{0, 0, l2}, {0, 0, 0}},    // left
    };
    const Vec3 profile_normals[6] = {-ez, ex, ez, ex, ez, -ex};

    FaceSoup soup;
    // Extruded side faces.
    for (std::size_t i = 0; i < profile.size(); ++i) {
        const Vec3 a = profile[i].first, b = profile[i].second;
        const Vec3 d = b - a;
        const double len = d.norm();
        soup.faces.push_back({a, d / len, ey, len, w, profile_normals[i]});
    }
    // End caps as two rectangles each.
    for (int end = 0; end < 2; ++end) {
        const double y = end == 0 ? 0.0 : w;
        const Vec3 n = end == 0 ? Vec3(-ey) : ey;
        soup.faces.push_back({{0, y, 0}, ex, ez, l1, t, n});
        soup.faces.push_back({{0, y, t}, ex, ez, t, l2 - t, n});
    }

    // Edges: the profile polygon at both caps plus the swept polygon vertices.
    for (int end = 0; end < 2; ++end) {
        const double y = end == 0 ? 0.0 : w;
        for (const auto& [a, b] : profile) {
            soup.edge_segments.push_back({{a.x(), y, a.z()}, {b.x(), y, b.z()}});
        }
    }
    for (const auto& [a, b] : profile) {
        soup.edge_segments.push_back({{a.x(), 0, a.z()}, {a.x(), w, a.z()}});
    }
    return soup;
}

FaceSoup build_soup(const ShapeSpec& spec) {
    switch (spec.kind) {
        case ShapeKind::Plate: return plate_soup(spec);
        case ShapeKind::Box: return box_soup(spec);
        case ShapeKind::LBracket: return lbracket_soup(spec);
    }
    throw ArgumentError("unknown shape kind");
}

// Cell count along a length at the target spacing; cell-centered sampling.
int cell_count(double length, double resolution) {
    return std::max(1, static_cast<int>(std::llround(length / resolution)));
}

}  // namespace

ShapeKind shape_kind_from_string(const std::string& name) {
    if (name == "plate") return ShapeKind::Plate;
    if (name == "box") return ShapeKind::Box;
    if (name == "l-bracket" || name == "lbracket") return ShapeKind::LBracket;
    throw ArgumentError("unknown shape kind '" + name + "'");
}

std::string to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Plate: return "plate";
        case ShapeKind::Box: return "box";
        case ShapeKind::LBracket: return "l-bracket";
    }
    return "?";
}

void ShapeSpec::validate() const {
    const std::size_t expected = kind == ShapeKind::Plate ? 2 : 3;
    if (extents.size() != expected) {
        throw ArgumentError(to_string(kind) + " expects " + std::to_string(expected) +
                            " extents, got " + std::to_string(extents.size()));
    }
    for (double e : extents) {
        if (!(e > 0.0) || !std::isfinite(e)) throw ArgumentError("extents must be positive");
    }
    if (!(thickness > 0.0)) throw ArgumentError("thickness must be positive");
    if (!(resolution > 0.0)) throw ArgumentError("resolution must be positive");
    if (noise_sigma < 0.0) throw ArgumentError("noise_sigma must be non-negative");

    const double min_extent = *std::min_element(extents.begin(), extents.end());
    if (thickness >= min_extent) {
        throw ArgumentError("thin-wall condition violated: thickness >= min lateral extent");
    }
    if (kind == ShapeKind::Box) {
        const double lx = extents[0], lz = extents[2];
        if (2 * thickness >= std::min(lx, lz)) {
            throw ArgumentError("box walls overlap: 2 * thickness >= cross-section extent");
        }
    }
    if (kind == ShapeKind::LBracket && thickness >= std::min(extents[0], extents[1])) {
        throw ArgumentError("l-bracket arm thickness exceeds leg length");
    }
    if (resolution > thickness * 10.0) {
        throw DegenerateError("resolution too coarse for the wall thickness");
    }
}

GeneratedShape generate(const ShapeSpec& spec) {
    spec.validate();
    const FaceSoup soup = build_soup(spec);
    Rng rng(spec.seed);

    GeneratedShape shape;
    const double jitter = 0.25 * spec.resolution;
    for (std::size_t f = 0; f < soup.faces.size(); ++f) {
        const Rect& face = soup.faces[f];
        const int nu = cell_count(face.lu, spec.resolution);
        const int nv = cell_count(face.lv, spec.resolution);
        const double du = face.lu / nu;
        const double dv = face.lv / nv;
        for (int iu = 0; iu < nu; ++iu) {
            for (int iv = 0; iv < nv; ++iv) {
                double s = (iu + 0.5) * du + rng.uniform(-jitter, jitter);
                double t = (iv + 0.5) * dv + rng.uniform(-jitter, jitter);
                s = std::clamp(s, 0.0, face.lu);
                t = std::clamp(t, 0.0, face.lv);
                shape.cloud.points.push_back(face.origin + s * face.u_dir + t * face.v_dir);
                shape.face_ids.push_back(static_cast<int>(f));
                shape.face_normals.push_back(face.normal);
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        for (Vec3& p : shape.cloud.points) {
            p += spec.noise_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
        }
    }

    for (const auto& [a, b] : soup.edge_segments) {
        const double len = (b - a).norm();
        const int n = std::max(1, static_cast<int>(std::ceil(len / kMaxGtSpacing)));
        std::vector<Vec3> line;
        line.reserve(n + 1);
        for (int i = 0; i <= n; ++i) {
            line.push_back(a + (static_cast<double>(i) / n) * (b - a));
        }
        shape.edges.polylines.push_back(std::move(line));
    }
    shape.edges.validate();
    return shape;
}

namespace {

std::pair<std::string, std::string> split_key_value(const std::string& line, std::size_t line_no) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

}  // namespace

ShapeSpec parse_shape_spec_text(const std::string& text) {
    ShapeSpec spec;
    spec.extents.clear();
    bool saw_extents = false;

    std::istringstream stream(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto [key, value] = split_key_value(line, line_no);

        try {
            if (key == "kind") {
                spec.kind = shape_kind_from_string(value);
            } else if (key == "extents") {
                std::istringstream vs(value);
                double e;
                while (vs >> e) spec.extents.push_back(e);
                saw_extents = true;
            } else if (key == "thickness") {
                spec.thickness = std::stod(value);
            } else if (key == "resolution") {
                spec.resolution = std::stod(value);
            } else if (key == "noise_sigma") {
                spec.noise_sigma = std::stod(value);
            } else if (key == "seed") {
                spec.seed = std::stoull(value);
            } else {
                throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ParseError("line " + std::to_string(line_no) + ": bad value '" + value + "'");
        } catch (const std::out_of_range&) {
            throw ParseError("line " + std::to_string(line_no) + ": value out of range");
        }
    }
    if (!saw_extents) {
        spec.extents = spec.kind == ShapeKind::Plate ? std::vector<double>{20.0, 20.0}
                                                     : std::vector<double>{20.0, 20.0, 20.0};
    }
    spec.validate();
    return spec;
}

ShapeSpec parse_shape_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_shape_spec_text(buf.str());
}

}  // namespace staredge
