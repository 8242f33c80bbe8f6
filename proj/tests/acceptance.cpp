// Acceptance suite: each criterion prints one [PASS]/[FAIL] line with the
// measured quantity and its bound. Run all with no arguments, or pass
// criterion numbers to run a subset. Non-zero exit when anything fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "staredge/classifier.hpp"
#include "staredge/edge_refine.hpp"
#include "staredge/io.hpp"
#include "staredge/metrics.hpp"
#include "staredge/normal_ransac.hpp"
#include "staredge/pipeline.hpp"
#include "staredge/rng.hpp"
#include "staredge/spherical_harmonics.hpp"
#include "staredge/synth.hpp"
#include "staredge/util.hpp"
#include "support/oracles.hpp"

using namespace staredge;

namespace {

struct Check {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

ShCoefficients random_real_coefficients(int bandwidth, Rng& rng) {
    ShCoefficients c = make_coefficients(bandwidth);
    for (int l = 0; l < bandwidth; ++l) {
        c.at(l, 0) = {rng.uniform(-1, 1), 0.0};
        for (int m = 1; m <= l; ++m) {
            const std::complex<double> v(rng.uniform(-1, 1), rng.uniform(-1, 1));
            c.at(l, m) = v;
            c.at(l, -m) = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(v);
        }
    }
    return c;
}

ShapeSpec make_spec(ShapeKind kind, std::vector<double> extents, double thickness,
                    double resolution, double sigma, std::uint64_t seed) {
    ShapeSpec spec;
    spec.kind = kind;
    spec.extents = std::move(extents);
    spec.thickness = thickness;
    spec.resolution = resolution;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    return spec;
}

// Training corpus shared by criteria 7 and 8: three shapes at the reference
// resolution plus coarse/fine/noisy variants so the classifier sees the whole
// sweep envelope.
MlpModel train_reference_model(const RunConfig& config) {
    static std::optional<MlpModel> cached;
    if (cached) return *cached;

    const std::vector<ShapeSpec> specs = {
        make_spec(ShapeKind::Plate, {16.0, 24.0}, 3.0, 0.5, 0.001, 101),
        make_spec(ShapeKind::Box, {18.0, 16.0, 14.0}, 3.0, 0.5, 0.001, 102),
        make_spec(ShapeKind::LBracket, {18.0, 14.0, 12.0}, 3.0, 0.5, 0.001, 103),
        make_spec(ShapeKind::Plate, {16.0, 24.0}, 3.0, 0.3, 0.001, 104),
        make_spec(ShapeKind::LBracket, {18.0, 14.0, 12.0}, 3.0, 0.8, 0.001, 105),
        make_spec(ShapeKind::Box, {18.0, 16.0, 14.0}, 3.0, 0.5, 0.03, 106),
    };

    std::vector<Descriptor> dataset;
    std::vector<int> labels;
    for (const ShapeSpec& spec : specs) {
        const GeneratedShape shape = generate(spec);
        const PointCloud labeled =
            label_ground_truth(shape.cloud, shape.edges, config.label_threshold);
        const KdTree index(shape.cloud.points);
        const auto curves = compute_curves(shape.cloud, index, config);
        const auto descriptors = descriptors_from_curves(curves, config);
        for (std::size_t i = 0; i < shape.cloud.size(); ++i) {
            if (!descriptors[i]) continue;
            dataset.push_back(*descriptors[i]);
            labels.push_back(labeled.labels[i]);
        }
    }

    TrainConfig train_config;
    train_config.seed = 17;
    cached = train(dataset, labels, train_config);
    return *cached;
}

// --- criteria -------------------------------------------------------------

Check criterion_1_round_trip() {
    Check check;
    Rng rng(1001);
    double worst = 0.0;
    for (int bandwidth : {5, 10, 15}) {
        const SphericalGrid grid(bandwidth);
        for (int trial = 0; trial < 50; ++trial) {
            const ShCoefficients original = random_real_coefficients(bandwidth, rng);
            const ShCoefficients recovered = dsht(synthesize_on_grid(original, grid), grid);
            for (std::size_t i = 0; i < original.values.size(); ++i) {
                worst = std::max(worst, std::abs(original.values[i] - recovered.values[i]));
            }
        }
    }
    check.require(worst <= 1e-9,
                  "max coefficient error " + fmt(worst) + " <= 1e-9 over 50 functions x B in {5,10,15}");
    return check;
}

Check criterion_2_direct_sum() {
    Check check;
    Rng rng(1002);
    const SphericalGrid grid(10);
    const int n = grid.ring_count() * grid.ring_count();
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> values(n);
        for (double& v : values) v = rng.uniform(-1, 1);
        const ShCoefficients fast = dsht(values, grid);
        const ShCoefficients direct = oracles::dsht_direct(values, grid);
        for (std::size_t i = 0; i < fast.values.size(); ++i) {
            worst = std::max(worst, std::abs(fast.values[i] - direct.values[i]));
        }
    }
    check.require(worst <= 1e-12,
                  "separated vs literal double sum max difference " + fmt(worst) + " <= 1e-12");
    return check;
}

Check criterion_3_rotation_invariance() {
    Check check;
    Rng rng(1003);
    const int bandwidth = 10;
    const SphericalGrid grid(bandwidth);

    // Transform-level invariance: rotate coefficients by re-synthesis.
    double transform_worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const ShCoefficients coeffs = random_real_coefficients(bandwidth, rng);
        const Eigen::Matrix3d rot = oracles::random_rotation(rng);
        const int size = grid.ring_count();
        std::vector<double> rotated_values(size * size);
        for (int j = 0; j < size; ++j) {
            for (int k = 0; k < size; ++k) {
                double theta, phi;
                direction_to_angles(rot.transpose() * grid.direction(j, k), theta, phi);
                rotated_values[j * size + k] = synthesize_at(coeffs, theta, phi).real();
            }
        }
        const Descriptor a = descriptor(coeffs);
        const Descriptor b = descriptor(dsht(rotated_values, grid));
        for (int l = 0; l < bandwidth; ++l) {
            transform_worst = std::max(transform_worst, std::abs(a.energies[l] - b.energies[l]));
        }
    }
    check.require(transform_worst <= 1e-9,
                  "coefficient-rotation energy drift " + fmt(transform_worst) + " <= 1e-9");

    // Pipeline-level invariance on a synthetic dihedral cloud.
    const GeneratedShape shape =
        generate(make_spec(ShapeKind::LBracket, {12.0, 10.0, 8.0}, 2.0, 0.5, 0.0, 31));
    const PointCloud& cloud = shape.cloud;
    const KdTree tree(cloud.points);
    std::vector<int> probes;
    for (std::size_t i = 0; i < cloud.size() && probes.size() < 12; i += cloud.size() / 12) {
        probes.push_back(static_cast<int>(i));
    }

    std::vector<Descriptor> base;
    for (int i : probes) base.push_back(compute_descriptor(cloud, tree, i, grid, 26, 64));

    double pipeline_worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Matrix3d rot = oracles::random_rotation(rng);
        PointCloud rotated = cloud;
        for (Vec3& p : rotated.points) p = rot * p;
        const KdTree rotated_tree(rotated.points);
        for (std::size_t pi = 0; pi < probes.size(); ++pi) {
            const Descriptor moved =
                compute_descriptor(rotated, rotated_tree, probes[pi], grid, 26, 64);
            double linf = 0.0, scale = 0.0;
            for (int l = 0; l < bandwidth; ++l) {
                linf = std::max(linf, std::abs(base[pi].energies[l] - moved.energies[l]));
                scale = std::max(scale, std::abs(base[pi].energies[l]));
            }
            pipeline_worst = std::max(pipeline_worst, linf / scale);
        }
    }
    check.require(pipeline_worst <= 1e-2,
                  "per-point descriptor relative Linf change " + fmt(pipeline_worst) +
                      " <= 0.01 over 20 rotations");
    return check;
}

Check criterion_4_refine_oracle() {
    Check check;
    Rng rng(1004);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<Vec3, Vec3>> planes;
        const int count = 3 + static_cast<int>(rng.uniform_index(12));
        for (int i = 0; i < count; ++i) {
            planes.push_back({Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)),
                              Vec3(rng.normal(), rng.normal(), rng.normal()).normalized()});
        }
        const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double mu = std::pow(10.0, rng.uniform(-1.5, 0.5));
        const Vec3 z = refine_point(p, planes, mu);
        const Vec3 oracle = oracles::refine_gradient_descent(p, planes, mu);
        worst = std::max(worst, (z - oracle).norm());
    }
    check.require(worst <= 1e-8,
                  "closed form vs gradient descent max distance " + fmt(worst) +
                      " <= 1e-8 over 200 instances");

    // Fixed point: p already on both planes.
    const std::vector<std::pair<Vec3, Vec3>> dihedral = {
        {Vec3(-1, 0.5, 0), Vec3(0, 0, 1)}, {Vec3(-2, -0.5, 0), Vec3(0, 0, 1)},
        {Vec3(0, 0.7, -1), Vec3(1, 0, 0)}, {Vec3(0, -0.4, -2), Vec3(1, 0, 0)}};
    const Vec3 p(0.0, 0.3, 0.0);
    const double moved = (refine_point(p, dihedral, 0.1) - p).norm();
    check.require(moved <= 1e-12, "fixed-point displacement " + fmt(moved) + " <= 1e-12");
    return check;
}

Check criterion_5_normal_accuracy() {
    Check check;
    const GeneratedShape shape =
        generate(make_spec(ShapeKind::Plate, {20.0, 20.0}, 3.0, 0.5, 0.001, 1005));
    const KdTree tree(shape.cloud.points);
    const std::vector<Vec3> gt_vertices = shape.edges.all_vertices();
    const KdTree edge_tree(gt_vertices);

    std::vector<double> errors;
    for (std::size_t i = 0; i < shape.cloud.size(); ++i) {
        if (edge_tree.nearest(shape.cloud.points[i]).distance < 1.5) continue;  // interior only
        try {
            const LocalSphericalCurve curve =
                local_spherical_curve(shape.cloud, tree, static_cast<int>(i), 26, 64);
            const Vec3 normal = estimate_normal(curve, 0.05, 256, 2000 + i);
            errors.push_back(line_angle(normal, shape.face_normals[i]) * 180.0 / M_PI);
        } catch (const DegenerateError&) {
            errors.push_back(90.0);  // count unusable neighborhoods as failures
        }
    }
    check.require(errors.size() > 500, std::to_string(errors.size()) + " interior points");
    std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
    const double median = errors[errors.size() / 2];
    check.require(median <= 5.0, "median angular error " + fmt(median) + " deg <= 5 deg");
    return check;
}

Check criterion_6_gradient_check() {
    Check check;
    Rng rng(1006);
    // Small trained model keeps the check on the production architecture.
    std::vector<Descriptor> descriptors;
    std::vector<int> labels;
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < 12; ++i) {
            Descriptor d;
            d.bandwidth = 10;
            for (int f = 0; f < 10; ++f) d.energies.push_back(3.0 * c + rng.normal());
            descriptors.push_back(std::move(d));
            labels.push_back(c);
        }
    }
    TrainConfig config;
    config.epochs = 2;
    config.batch_size = 8;
    config.seed = 3;
    const MlpModel model = train(descriptors, labels, config);

    Eigen::MatrixXd batch(3, 10);
    std::vector<int> batch_labels = {1, 0, 1};
    for (int i = 0; i < 3; ++i) {
        for (int c = 0; c < 10; ++c) batch(i, c) = rng.uniform(-2, 2);
    }
    const Eigen::Vector2d class_weights(0.8, 1.4);
    MlpGradients grads;
    mlp_loss_and_gradients(model, batch, batch_labels, class_weights, &grads);

    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t layer = 0; layer < model.weights.size(); ++layer) {
        auto probe = [&](auto accessor, double analytic) {
            MlpModel plus = model, minus = model;
            accessor(plus) += eps;
            accessor(minus) -= eps;
            const double lp =
                mlp_loss_and_gradients(plus, batch, batch_labels, class_weights, nullptr);
            const double lm =
                mlp_loss_and_gradients(minus, batch, batch_labels, class_weights, nullptr);
            const double numeric = (lp - lm) / (2.0 * eps);
            worst = std::max(worst, std::abs(analytic - numeric) /
                                        std::max({std::abs(analytic), std::abs(numeric), 1e-8}));
        };
        for (Eigen::Index r = 0; r < model.weights[layer].rows(); ++r) {
            for (Eigen::Index c = 0; c < model.weights[layer].cols(); ++c) {
                probe([layer, r, c](MlpModel& m) -> double& { return m.weights[layer](r, c); },
                      grads.d_weights[layer](r, c));
            }
        }
        for (Eigen::Index r = 0; r < model.biases[layer].size(); ++r) {
            probe([layer, r](MlpModel& m) -> double& { return m.biases[layer](r); },
                  grads.d_biases[layer](r));
        }
    }
    check.require(worst <= 1e-5,
                  "max relative gradient error " + fmt(worst) + " <= 1e-5 across all layers");
    return check;
}

Check criterion_7_end_to_end() {
    Check check;
    RunConfig config;
    config.seed = 7001;
    config.threads = 0;
    const MlpModel model = train_reference_model(config);

    // Held-out plate, never part of the training corpus.
    const GeneratedShape held_out =
        generate(make_spec(ShapeKind::Plate, {20.0, 20.0}, 3.0, 0.5, 0.001, 7777));
    const PointCloud labeled =
        label_ground_truth(held_out.cloud, held_out.edges, kThinWalledLabelThreshold);

    const ExtractResult result = extract_edges(held_out.cloud, model, config, true);
    const EvalReport cls = classification_metrics(result.labels, labeled.labels);
    check.require(cls.recall >= 0.90, "recall " + fmt(cls.recall) + " >= 0.90");

    check.require(!result.unrefined_edges.points.empty(), "non-empty prediction set");
    if (!result.unrefined_edges.points.empty()) {
        const double before = ecd(result.unrefined_edges, held_out.edges);
        const double after = ecd(result.refined_edges, held_out.edges);
        check.require(after <= 0.5 * before, "ECD refined " + fmt(after) + " <= 0.5 x unrefined " +
                                                 fmt(before));
    }
    return check;
}

Check criterion_8_robustness_trends() {
    Check check;
    RunConfig config;
    config.seed = 8001;
    const MlpModel model = train_reference_model(config);

    auto run_cell = [&](double resolution, double sigma, std::uint64_t seed) {
        const GeneratedShape shape =
            generate(make_spec(ShapeKind::Plate, {20.0, 20.0}, 3.0, resolution, sigma, seed));
        const ExtractResult result = extract_edges(shape.cloud, model, config, true);
        if (result.refined_edges.points.empty()) {
            return std::numeric_limits<double>::infinity();
        }
        return ecd(result.refined_edges, shape.edges);
    };

    const double noise_low = run_cell(0.5, 0.001, 8101);
    const double noise_mid = run_cell(0.5, 0.005, 8102);
    const double noise_high = run_cell(0.5, 0.03, 8103);
    check.require(noise_mid >= 0.9 * noise_low,
                  "ECD(0.005)=" + fmt(noise_mid) + " >= 0.9 x ECD(0.001)=" + fmt(noise_low));
    check.require(noise_high >= 0.9 * noise_mid,
                  "ECD(0.03)=" + fmt(noise_high) + " >= 0.9 x ECD(0.005)=" + fmt(noise_mid));

    const double res_fine = run_cell(0.3, 0.001, 8104);
    const double res_coarse = run_cell(0.8, 0.001, 8105);
    check.require(res_coarse > res_fine,
                  "ECD(res 0.8)=" + fmt(res_coarse) + " > ECD(res 0.3)=" + fmt(res_fine));
    return check;
}

Check criterion_9_metric_identities() {
    Check check;
    Rng rng(1009);

    // Brute-force equivalence.
    std::vector<Vec3> predicted, vertices;
    for (int i = 0; i < 1000; ++i) {
        predicted.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    }
    for (int i = 0; i < 5000; ++i) {
        vertices.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    }
    GroundTruthEdges gt;
    gt.polylines.push_back(vertices);
    const double fast = ecd(predicted, gt);
    const double brute = oracles::ecd_brute_force(predicted, vertices);
    check.require(std::abs(fast - brute) <= 1e-12,
                  "ECD vs brute force difference " + fmt(std::abs(fast - brute)) + " <= 1e-12");

    // Identity cases.
    GroundTruthEdges small;
    small.polylines.push_back({Vec3(0, 0, 0), Vec3(0.05, 0, 0)});
    check.require(ecd(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(0.05, 0, 0)}, small) == 0.0,
                  "ECD of coincident points is 0");
    GroundTruthEdges origin;
    origin.polylines.push_back({Vec3(0, 0, 0), Vec3(0, 0, 0)});
    check.require(std::abs(ecd(std::vector<Vec3>{Vec3(1, 0, 0)}, origin) - 1.0) <= 1e-15,
                  "unit offset gives ECD 1");

    bool threw = false;
    try {
        ecd(std::vector<Vec3>{}, small);
    } catch (const NumericError&) {
        threw = true;
    }
    check.require(threw, "empty prediction raises the failed-calculation error");

    const EvalReport r = classification_metrics({1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                                                {1, 1, 0, 1, 0, 0, 0, 0, 0, 0});
    check.require(std::abs(r.precision - 2.0 / 3.0) <= 1e-12 &&
                      std::abs(r.recall - 2.0 / 3.0) <= 1e-12 &&
                      std::abs(r.f1 - 2.0 / 3.0) <= 1e-12 && std::abs(r.accuracy - 0.8) <= 1e-12,
                  "confusion arithmetic TP=2 FP=1 FN=1 TN=6");
    const EvalReport none = classification_metrics({0, 0, 0}, {1, 0, 1});
    check.require(none.recall == 0.0 && std::isnan(none.precision),
                  "all-negative prediction: recall 0, precision undefined");
    return check;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
        {"DSHT sampling-theorem round trip", criterion_1_round_trip},
        {"DSHT separated vs literal double sum", criterion_2_direct_sum},
        {"descriptor rotation invariance", criterion_3_rotation_invariance},
        {"refinement closed form vs gradient descent", criterion_4_refine_oracle},
        {"normal estimation accuracy on the synthetic plate", criterion_5_normal_accuracy},
        {"MLP analytic gradients vs finite differences", criterion_6_gradient_check},
        {"end-to-end synthetic regression", criterion_7_end_to_end},
        {"robustness trends across noise and resolution", criterion_8_robustness_trends},
        {"ECD brute-force equivalence and metric identities", criterion_9_metric_identities},
    };

    std::vector<int> selected;
    for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
    if (selected.empty()) {
        for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(static_cast<int>(i));
    }

    int failures = 0;
    for (int id : selected) {
        if (id < 1 || id > static_cast<int>(criteria.size())) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }
        const auto& [name, run] = criteria[id - 1];
        const StageTimer timer;
        Check check;
        try {
            check = run();
        } catch (const std::exception& e) {
            check.pass = false;
            check.detail = std::string("exception: ") + e.what();
        }
        if (!check.pass) ++failures;
        std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", check.pass ? "PASS" : "FAIL", id,
                    name.c_str(), check.detail.c_str(), timer.seconds());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
