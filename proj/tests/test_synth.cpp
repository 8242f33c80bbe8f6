#include <doctest.h>

#include <map>
#include <set>

#include "staredge/error.hpp"
#include "staredge/synth.hpp"
#include "support/oracles.hpp"

using namespace staredge;

namespace {

ShapeSpec plate_spec(double resolution, double sigma, std::uint64_t seed = 1) {
    ShapeSpec spec;
    spec.kind = ShapeKind::Plate;
    spec.extents = {20.0, 20.0};
    spec.thickness = 3.0;
    spec.resolution = resolution;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    return spec;
}

// Distance to the boundary of the axis-aligned slab [0,lx]x[0,ly]x[0,t].
double slab_boundary_distance(const Vec3& p, double lx, double ly, double t) {
    const double dx = std::max({0.0 - p.x(), p.x() - lx, 0.0});
    const double dy = std::max({0.0 - p.y(), p.y() - ly, 0.0});
    const double dz = std::max({0.0 - p.z(), p.z() - t, 0.0});
    const double outside = Vec3(dx, dy, dz).norm();
    if (outside > 0.0) return outside;
    const double inside = std::min({p.x(), lx - p.x(), p.y(), ly - p.y(), p.z(), t - p.z()});
    return inside;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("noise-free plate lies exactly on the slab boundary") {
    const GeneratedShape shape = generate(plate_spec(0.5, 0.0));
    for (const Vec3& p : shape.cloud.points) {
        CHECK(slab_boundary_distance(p, 20.0, 20.0, 3.0) <= 1e-12);
    }
}

TEST_CASE("side-end faces carry enough rows across the thickness") {
    const GeneratedShape shape = generate(plate_spec(0.5, 0.0));
    // Points on the x = 0 face; count distinct z rows (one per grid cell).
    std::set<long long> rows;
    for (const Vec3& p : shape.cloud.points) {
        if (std::abs(p.x()) > 1e-9) continue;
        rows.insert(std::llround(std::floor(p.z() / (3.0 / 6.0))));
    }
    CHECK(rows.size() >= 6);
}

TEST_CASE("hardest regime: 3-4 points across a thickness-3 face at resolution 0.8") {
    const GeneratedShape shape = generate(plate_spec(0.8, 0.0));
    std::set<long long> rows;
    for (const Vec3& p : shape.cloud.points) {
        if (std::abs(p.x()) > 1e-9) continue;
        rows.insert(std::llround(std::floor(p.z() / (3.0 / 4.0))));
    }
    CHECK(rows.size() >= 3);
    CHECK(rows.size() <= 4);
}

TEST_CASE("noise displacement RMS matches sigma * sqrt(3)") {
    const double sigma = 0.001;
    const GeneratedShape clean = generate(plate_spec(0.5, 0.0, 5));
    const GeneratedShape noisy = generate(plate_spec(0.5, sigma, 5));
    REQUIRE(clean.cloud.size() == noisy.cloud.size());

    double sum_sq = 0.0;
    for (std::size_t i = 0; i < clean.cloud.size(); ++i) {
        sum_sq += (noisy.cloud.points[i] - clean.cloud.points[i]).squaredNorm();
    }
    const double rms = std::sqrt(sum_sq / clean.cloud.size());
    CHECK(rms == doctest::Approx(sigma * std::sqrt(3.0)).epsilon(0.2));
}

TEST_CASE("determinism: identical spec gives bit-identical output") {
    const GeneratedShape a = generate(plate_spec(0.5, 0.01, 99));
    const GeneratedShape b = generate(plate_spec(0.5, 0.01, 99));
    REQUIRE(a.cloud.size() == b.cloud.size());
    for (std::size_t i = 0; i < a.cloud.size(); ++i) {
        CHECK(a.cloud.points[i] == b.cloud.points[i]);
    }
    REQUIRE(a.edges.polylines.size() == b.edges.polylines.size());
}

TEST_CASE("halving the resolution roughly quadruples the point count") {
    const std::size_t coarse = generate(plate_spec(0.5, 0.0)).cloud.size();
    const std::size_t fine = generate(plate_spec(0.25, 0.0)).cloud.size();
    const double ratio = static_cast<double>(fine) / static_cast<double>(coarse);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("gt polylines are dense and valid") {
    for (ShapeKind kind : {ShapeKind::Plate, ShapeKind::Box, ShapeKind::LBracket}) {
        ShapeSpec spec;
        spec.kind = kind;
        spec.extents = kind == ShapeKind::Plate ? std::vector<double>{20.0, 20.0}
                                                : std::vector<double>{20.0, 20.0, 20.0};
        spec.thickness = 3.0;
        spec.resolution = 0.5;
        const GeneratedShape shape = generate(spec);
        shape.edges.validate();
        CHECK(!shape.edges.empty());
        CHECK(shape.cloud.size() > 100);
        CHECK(shape.face_ids.size() == shape.cloud.size());
        CHECK(shape.face_normals.size() == shape.cloud.size());
    }
}

TEST_CASE("box and l-bracket samples lie on their declared face planes") {
    for (ShapeKind kind : {ShapeKind::Box, ShapeKind::LBracket}) {
        ShapeSpec spec;
        spec.kind = kind;
        spec.extents = {20.0, 20.0, 20.0};
        spec.thickness = 3.0;
        spec.resolution = 0.5;
        const GeneratedShape shape = generate(spec);
        // Every noise-free point must satisfy its face's plane equation; use
        // the stored per-point normal and any gt vertex on the same plane via
        // the nearest edge segment being coplanar is involved, so instead
        // check distance along the normal to a point on the plane found from
        // the same face id.
        std::map<int, std::pair<Vec3, Vec3>> plane_of_face;  // face -> (point, normal)
        for (std::size_t i = 0; i < shape.cloud.size(); ++i) {
            const int f = shape.face_ids[i];
            if (!plane_of_face.count(f)) {
                plane_of_face[f] = {shape.cloud.points[i], shape.face_normals[i]};
            } else {
                const auto& [origin, normal] = plane_of_face[f];
                CHECK(std::abs(normal.dot(shape.cloud.points[i] - origin)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("degenerate and invalid specs are rejected") {
    ShapeSpec spec = plate_spec(0.5, 0.0);
    spec.resolution = 31.0;  // > 10 * thickness
    CHECK_THROWS_AS(generate(spec), DegenerateError);

    spec = plate_spec(0.5, 0.0);
    spec.thickness = 25.0;  // violates the thin-wall condition
    CHECK_THROWS_AS(generate(spec), ArgumentError);

    spec = plate_spec(0.5, 0.0);
    spec.resolution = -1.0;
    CHECK_THROWS_AS(generate(spec), ArgumentError);
}

TEST_CASE("spec file parsing") {
    const ShapeSpec spec = parse_shape_spec_text(
        "# demo\nkind = l-bracket\nextents = 18 14 10\nthickness = 2.5\n"
        "resolution = 0.4\nnoise_sigma = 0.002\nseed = 77\n");
    CHECK(spec.kind == ShapeKind::LBracket);
    CHECK(spec.extents == std::vector<double>{18.0, 14.0, 10.0});
    CHECK(spec.thickness == 2.5);
    CHECK(spec.seed == 77);

    CHECK_THROWS_AS(parse_shape_spec_text("kind = plate\nresolution = 0\n"), ArgumentError);
    CHECK_THROWS_AS(parse_shape_spec_text("bogus-line\n"), ParseError);
    CHECK_THROWS_AS(parse_shape_spec_text("mystery = 1\n"), ParseError);
}

}  // TEST_SUITE
