#include "staredge/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "staredge/error.hpp"
#include "staredge/rng.hpp"

namespace staredge {

namespace {

constexpr int kHiddenWidth = 64;
constexpr const char* kModelMagic = "staredge-mlp";
constexpr const char* kModelVersion = "v1";

Eigen::MatrixXd relu(const Eigen::MatrixXd& x) { return x.cwiseMax(0.0); }

// Row-wise stable softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd shifted = logits.colwise() - logits.rowwise().maxCoeff();
    Eigen::MatrixXd e = shifted.array().exp();
    return e.array().colwise() / e.rowwise().sum().array();
}

Eigen::VectorXd scale_input(const MlpModel& model, const Descriptor& d) {
    if (d.bandwidth != model.input_dim() ||
        d.energies.size() != static_cast<std::size_t>(model.input_dim())) {
        throw ArgumentError("descriptor bandwidth does not match model input dimension");
    }
    Eigen::VectorXd x(model.input_dim());
    for (int i = 0; i < model.input_dim(); ++i) {
        x(i) = (d.energies[i] - model.scaler_mean(i)) / model.scaler_std(i);
    }
    return x;
}

void append_full_precision(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ArgumentError("epochs must be >= 1");
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be positive");
}

double mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& scaled_inputs,
                              const std::vector<int>& labels,
                              const Eigen::Vector2d& class_weights, MlpGradients* grads) {
    const auto n = scaled_inputs.rows();
    if (n == 0 || labels.size() != static_cast<std::size_t>(n)) {
        throw ArgumentError("batch size mismatch");
    }
    const std::size_t layers = model.weights.size();

    // Forward pass, keeping pre-activation outputs per layer.
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = input
    activations.reserve(layers + 1);
    activations.push_back(scaled_inputs);
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z =
            (activations.back() * model.weights[l].transpose()).rowwise() +
            model.biases[l].transpose();
        activations.push_back(l + 1 < layers ? relu(z) : z);
    }

    const Eigen::MatrixXd probs = softmax(activations.back());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double p = std::max(probs(i, labels[i]), 1e-300);
        loss -= class_weights(labels[i]) * std::log(p);
    }
    loss /= static_cast<double>(n);
    if (!grads) return loss;

    grads->d_weights.resize(layers);
    grads->d_biases.resize(layers);

    // d(loss)/d(logits) for weighted cross-entropy over softmax.
    Eigen::MatrixXd delta = probs;
    for (Eigen::Index i = 0; i < n; ++i) {
        delta(i, labels[i]) -= 1.0;
        delta.row(i) *= class_weights(labels[i]) / static_cast<double>(n);
    }

    for (std::size_t l = layers; l-- > 0;) {
        grads->d_weights[l] = delta.transpose() * activations[l];
        grads->d_biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd back = delta * model.weights[l];
            // ReLU mask from the stored activation.
            delta = back.cwiseProduct(
                (activations[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

MlpModel train(const std::vector<Descriptor>& descriptors, const std::vector<int>& labels,
               const TrainConfig& config) {
    config.validate();
    if (descriptors.empty() || descriptors.size() != labels.size()) {
        throw ArgumentError("training set is empty or label count mismatches");
    }
    const int dim = descriptors.front().bandwidth;
    for (const Descriptor& d : descriptors) {
        if (d.bandwidth != dim || d.energies.size() != static_cast<std::size_t>(dim)) {
            throw ArgumentError("descriptors must share one bandwidth");
        }
    }
    std::array<long long, 2> counts = {0, 0};
    for (int l : labels) {
        if (l != 0 && l != 1) throw ArgumentError("labels must be 0 or 1");
        ++counts[l];
    }
    if (counts[0] == 0 || counts[1] == 0) {
        throw ArgumentError("training set must contain both classes");
    }

    const std::size_t n = descriptors.size();
    Eigen::MatrixXd features(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < dim; ++c) features(i, c) = descriptors[i].energies[c];
    }

    MlpModel model;
    model.layer_dims = {dim, kHiddenWidth, kHiddenWidth, 2};
    model.train_config = config;

    // Per-feature standardization from the training data only.
    model.scaler_mean = features.colwise().mean();
    model.scaler_std.resize(dim);
    for (int c = 0; c < dim; ++c) {
        const double var =
            (features.col(c).array() - model.scaler_mean(c)).square().sum() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        model.scaler_std(c) = sd > 1e-12 ? sd : 1.0;
    }
    Eigen::MatrixXd scaled = (features.rowwise() - model.scaler_mean.transpose());
    scaled.array().rowwise() /= model.scaler_std.transpose().array();

    // Seeded uniform init in +-sqrt(6 / (fan_in + fan_out)), biases at zero.
    Rng rng(config.seed);
    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const int fan_in = model.layer_dims[l];
        const int fan_out = model.layer_dims[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }

    Eigen::Vector2d class_weights(1.0, 1.0);
    if (config.class_weighting) {
        for (int c = 0; c < 2; ++c) {
            class_weights(c) = static_cast<double>(n) / (2.0 * static_cast<double>(counts[c]));
        }
    }

    // Adam state.
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        m_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        v_w.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        m_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        v_b.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    MlpGradients grads;
    long long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t count = std::min<std::size_t>(config.batch_size, n - start);
            Eigen::MatrixXd batch_x(count, dim);
            std::vector<int> batch_y(count);
            for (std::size_t i = 0; i < count; ++i) {
                batch_x.row(i) = scaled.row(order[start + i]);
                batch_y[i] = labels[order[start + i]];
            }

            mlp_loss_and_gradients(model, batch_x, batch_y, class_weights, &grads);

            ++step;
            const double bias1 = 1.0 - std::pow(config.adam_beta1, step);
            const double bias2 = 1.0 - std::pow(config.adam_beta2, step);
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                m_w[l] = config.adam_beta1 * m_w[l] + (1.0 - config.adam_beta1) * grads.d_weights[l];
                v_w[l] = config.adam_beta2 * v_w[l] +
                         (1.0 - config.adam_beta2) * grads.d_weights[l].array().square().matrix();
                model.weights[l].array() -=
                    config.learning_rate * (m_w[l].array() / bias1) /
                    ((v_w[l].array() / bias2).sqrt() + config.adam_epsilon);

                m_b[l] = config.adam_beta1 * m_b[l] + (1.0 - config.adam_beta1) * grads.d_biases[l];
                v_b[l] = config.adam_beta2 * v_b[l] +
                         (1.0 - config.adam_beta2) * grads.d_biases[l].array().square().matrix();
                model.biases[l].array() -=
                    config.learning_rate * (m_b[l].array() / bias1) /
                    ((v_b[l].array() / bias2).sqrt() + config.adam_epsilon);
            }
        }
    }

    // Final metrics over the full training set.
    std::vector<int> all_labels(labels.begin(), labels.end());
    model.final_loss = mlp_loss_and_gradients(model, scaled, all_labels, class_weights, nullptr);
    long long correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd x = scaled.row(i);
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            Eigen::MatrixXd z = (x * model.weights[l].transpose()).rowwise() +
                                model.biases[l].transpose();
            x = l + 1 < model.weights.size() ? relu(z) : z;
        }
        const int pred = x(0, 1) > x(0, 0) ? 1 : 0;
        if (pred == labels[i]) ++correct;
    }
    model.final_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return model;
}

Prediction predict(const MlpModel& model, const Descriptor& d) {
    Eigen::MatrixXd x = scale_input(model, d).transpose();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Eigen::MatrixXd z = (x * model.weights[l].transpose()).rowwise() +
                            model.biases[l].transpose();
        x = l + 1 < model.weights.size() ? relu(z) : z;
    }
    const Eigen::MatrixXd probs = softmax(x);
    Prediction p;
    p.edge_probability = probs(0, 1);
    p.label = p.edge_probability >= 0.5 ? 1 : 0;
    return p;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "bandwidth " << model.input_dim() << '\n';
    out << "layers " << model.layer_dims.size();
    for (int d : model.layer_dims) out << ' ' << d;
    out << '\n';
    const TrainConfig& tc = model.train_config;
    std::string line;
    auto emit_kv = [&](const char* key, double v) {
        line.clear();
        line += key;
        line += ' ';
        append_full_precision(line, v);
        line += '\n';
        out << line;
    };
    out << "epochs " << tc.epochs << '\n';
    out << "batch_size " << tc.batch_size << '\n';
    emit_kv("learning_rate", tc.learning_rate);
    emit_kv("adam_beta1", tc.adam_beta1);
    emit_kv("adam_beta2", tc.adam_beta2);
    emit_kv("adam_epsilon", tc.adam_epsilon);
    out << "seed " << tc.seed << '\n';
    out << "class_weighting " << (tc.class_weighting ? 1 : 0) << '\n';
    emit_kv("final_accuracy", model.final_accuracy);
    emit_kv("final_loss", model.final_loss);

    auto emit_vector = [&](const char* key, const Eigen::VectorXd& v) {
        line.clear();
        line += key;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            line += ' ';
            append_full_precision(line, v(i));
        }
        line += '\n';
        out << line;
    };
    emit_vector("scaler_mean", model.scaler_mean);
    emit_vector("scaler_std", model.scaler_std);

    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        out << "layer " << l << ' ' << model.weights[l].rows() << ' ' << model.weights[l].cols()
            << '\n';
        for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
            line.clear();
            for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c) {
                if (c) line += ' ';
                append_full_precision(line, model.weights[l](r, c));
            }
            line += '\n';
            out << line;
        }
        emit_vector("bias", model.biases[l]);
    }
    out << "end\n";
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

std::vector<std::string> next_fields(std::ifstream& in, const char* section) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fs(line);
        std::vector<std::string> fields;
        std::string tok;
        while (fs >> tok) fields.push_back(tok);
        if (!fields.empty()) return fields;
    }
    throw FormatError(std::string("model file truncated in section '") + section + "'");
}

std::vector<std::string> expect_key(std::ifstream& in, const char* key) {
    auto fields = next_fields(in, key);
    if (fields[0] != key) {
        throw FormatError(std::string("expected '") + key + "' section, got '" + fields[0] + "'");
    }
    return fields;
}

double to_double(const std::string& tok, const char* section) {
    try {
        return std::stod(tok);
    } catch (const std::exception&) {
        throw FormatError(std::string("bad number '") + tok + "' in section '" + section + "'");
    }
}

}  // namespace

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

    auto magic = next_fields(in, "header");
    if (magic.size() != 2 || magic[0] != kModelMagic) {
        throw FormatError("not a staredge model file");
    }
    if (magic[1] != kModelVersion) {
        throw UnsupportedFormatError("unsupported model version '" + magic[1] + "'");
    }

    MlpModel model;
    const auto bw = expect_key(in, "bandwidth");
    const int bandwidth = static_cast<int>(to_double(bw.at(1), "bandwidth"));

    const auto layers = expect_key(in, "layers");
    const std::size_t layer_count = static_cast<std::size_t>(to_double(layers.at(1), "layers"));
    if (layers.size() != 2 + layer_count) throw FormatError("bad layers line");
    for (std::size_t i = 0; i < layer_count; ++i) {
        model.layer_dims.push_back(static_cast<int>(to_double(layers[2 + i], "layers")));
    }
    if (model.layer_dims.empty() || model.layer_dims.front() != bandwidth) {
        throw FormatError("layer dimensions disagree with bandwidth");
    }

    TrainConfig tc;
    tc.epochs = static_cast<int>(to_double(expect_key(in, "epochs").at(1), "epochs"));
    tc.batch_size = static_cast<int>(to_double(expect_key(in, "batch_size").at(1), "batch_size"));
    tc.learning_rate = to_double(expect_key(in, "learning_rate").at(1), "learning_rate");
    tc.adam_beta1 = to_double(expect_key(in, "adam_beta1").at(1), "adam_beta1");
    tc.adam_beta2 = to_double(expect_key(in, "adam_beta2").at(1), "adam_beta2");
    tc.adam_epsilon = to_double(expect_key(in, "adam_epsilon").at(1), "adam_epsilon");
    tc.seed = static_cast<std::uint64_t>(to_double(expect_key(in, "seed").at(1), "seed"));
    tc.class_weighting = to_double(expect_key(in, "class_weighting").at(1), "class_weighting") != 0;
    model.train_config = tc;
    model.final_accuracy = to_double(expect_key(in, "final_accuracy").at(1), "final_accuracy");
    model.final_loss = to_double(expect_key(in, "final_loss").at(1), "final_loss");

    auto read_vector = [&](const char* key, Eigen::Index size) {
        const auto fields = expect_key(in, key);
        if (fields.size() != static_cast<std::size_t>(size) + 1) {
            throw FormatError(std::string("section '") + key + "' has wrong length");
        }
        Eigen::VectorXd v(size);
        for (Eigen::Index i = 0; i < size; ++i) v(i) = to_double(fields[i + 1], key);
        return v;
    };
    model.scaler_mean = read_vector("scaler_mean", bandwidth);
    model.scaler_std = read_vector("scaler_std", bandwidth);

    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const auto header = expect_key(in, "layer");
        if (header.size() != 4 || static_cast<std::size_t>(to_double(header[1], "layer")) != l) {
            throw FormatError("bad layer header");
        }
        const auto rows = static_cast<Eigen::Index>(to_double(header[2], "layer"));
        const auto cols = static_cast<Eigen::Index>(to_double(header[3], "layer"));
        if (rows != model.layer_dims[l + 1] || cols != model.layer_dims[l]) {
            throw FormatError("layer shape disagrees with dimensions");
        }
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto fields = next_fields(in, "layer weights");
            if (fields.size() != static_cast<std::size_t>(cols)) {
                throw FormatError("weight row has wrong length");
            }
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = to_double(fields[c], "weights");
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(read_vector("bias", rows));
    }
    const auto tail = next_fields(in, "end");
    if (tail[0] != "end") throw FormatError("missing end marker");
    return model;
}

ThresholdBaseline baseline_fit(const std::vector<Descriptor>& edge_descriptors) {
    if (edge_descriptors.empty()) throw ArgumentError("baseline requires >= 1 edge descriptor");
    const int dim = edge_descriptors.front().bandwidth;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const Descriptor& d : edge_descriptors) {
        if (d.bandwidth != dim) throw ArgumentError("descriptors must share one bandwidth");
        for (int i = 0; i < dim; ++i) mean(i) += d.energies[i];
    }
    mean /= static_cast<double>(edge_descriptors.size());
    return {mean, 0.0};
}

namespace {

double baseline_distance(const ThresholdBaseline& baseline, const Descriptor& d) {
    if (d.bandwidth != baseline.mean_edge_descriptor.size()) {
        throw ArgumentError("descriptor bandwidth does not match baseline");
    }
    double sum = 0.0;
    for (int i = 0; i < d.bandwidth; ++i) {
        const double diff = d.energies[i] - baseline.mean_edge_descriptor(i);
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

}  // namespace

int baseline_predict(const ThresholdBaseline& baseline, const Descriptor& d) {
    return baseline_distance(baseline, d) <= baseline.threshold ? 1 : 0;
}

double baseline_select_threshold(const ThresholdBaseline& baseline,
                                 const std::vector<Descriptor>& descriptors,
                                 const std::vector<int>& labels) {
    if (descriptors.size() != labels.size() || descriptors.empty()) {
        throw ArgumentError("validation set is empty or mismatched");
    }
    std::vector<std::pair<double, int>> scored;  // (distance, label)
    scored.reserve(descriptors.size());
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        scored.emplace_back(baseline_distance(baseline, descriptors[i]), labels[i]);
    }
    std::sort(scored.begin(), scored.end());

    const long long total_edges =
        std::count_if(labels.begin(), labels.end(), [](int l) { return l == 1; });
    double best_threshold = 0.0;
    double best_f1 = -1.0;
    long long tp = 0, fp = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        if (scored[i].second == 1) ++tp;
        else ++fp;
        // Threshold at this distance includes everything up to and including i.
        if (i + 1 < scored.size() && scored[i + 1].first == scored[i].first) continue;
        const long long fn = total_edges - tp;
        const double precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double recall = total_edges > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        if (f1 > best_f1) {
            best_f1 = f1;
            best_threshold = scored[i].first;
        }
    }
    return best_threshold;
}

}  // namespace staredge
