#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "staredge/spherical_harmonics.hpp"

namespace staredge {

struct TrainConfig {
    int epochs = 40;
    int batch_size = 1024;
    double learning_rate = 0.02;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 1;
    bool class_weighting = true;  // inverse-frequency weights on the two classes

    void validate() const;
};

// Fully connected classifier [B, 64, 64, 2] with ReLU hidden layers and a
// softmax output. Inputs are standardized per feature with statistics
// learned from the training set.
struct MlpModel {
    std::vector<int> layer_dims;            // {B, 64, 64, 2}
    std::vector<Eigen::MatrixXd> weights;   // weights[i]: dims[i+1] x dims[i]
    std::vector<Eigen::VectorXd> biases;    // biases[i]: dims[i+1]
    Eigen::VectorXd scaler_mean;            // length B
    Eigen::VectorXd scaler_std;             // length B, strictly positive
    TrainConfig train_config;               // configuration used at training time
    double final_accuracy = 0.0;
    double final_loss = 0.0;

    int input_dim() const { return layer_dims.empty() ? 0 : layer_dims.front(); }
};

struct Prediction {
    int label = 0;              // 1 = edge
    double edge_probability = 0.0;
};

// Loss and gradients of the weighted cross-entropy over one batch; this is
// the exact function the trainer descends, exposed so finite-difference
// checks cover the production path.
struct MlpGradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
};

double mlp_loss_and_gradients(const MlpModel& model, const Eigen::MatrixXd& scaled_inputs,
                              const std::vector<int>& labels,
                              const Eigen::Vector2d& class_weights, MlpGradients* grads);

// Trains on the descriptor set; deterministic for a fixed seed (fixed init,
// fixed shuffle order, sequential batches). Dataset must contain both classes.
MlpModel train(const std::vector<Descriptor>& descriptors, const std::vector<int>& labels,
               const TrainConfig& config);

Prediction predict(const MlpModel& model, const Descriptor& d);

// Self-describing text format; load(save(m)) reproduces predictions exactly.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

// Distance-to-mean baseline: a point is an edge point when its descriptor
// lies within `threshold` of the average ground-truth edge descriptor.
struct ThresholdBaseline {
    Eigen::VectorXd mean_edge_descriptor;
    double threshold = 0.0;
};

ThresholdBaseline baseline_fit(const std::vector<Descriptor>& edge_descriptors);
int baseline_predict(const ThresholdBaseline& baseline, const Descriptor& d);

// Picks the threshold maximizing F1 on a labeled validation set (smallest
// maximizer on ties).
double baseline_select_threshold(const ThresholdBaseline& baseline,
                                 const std::vector<Descriptor>& descriptors,
                                 const std::vector<int>& labels);

}  // namespace staredge
