#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mirrorgame/rng.hpp"

namespace mg {

enum class Activation : unsigned char { sigmoid = 0, linear = 1 };

struct Layer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
    Activation act{Activation::sigmoid};
};

// Dense feedforward action-value network. The production architecture is
// 4-64-32-9 (sigmoid hidden, linear output); other sizes are constructible
// for tests.
struct QNetwork {
    std::vector<Layer> layers;

    int input_size() const { return static_cast<int>(layers.front().W.cols()); }
    int output_size() const { return static_cast<int>(layers.back().W.rows()); }
    bool same_architecture(const QNetwork& other) const;
};

inline const std::vector<int>& production_layer_sizes() {
    static const std::vector<int> sizes{4, 64, 32, 9};
    return sizes;
}

// Uniform Xavier weights in +-sqrt(6/(fan_in+fan_out)), zero biases; hidden
// layers sigmoid, output linear.
QNetwork make_qnetwork(const std::vector<int>& sizes, RngStream& rng);

Eigen::VectorXd forward(const QNetwork& net, const Eigen::VectorXd& input);
// Columns are samples.
Eigen::MatrixXd forward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs);

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

// Gradients of 0.5*(target[action] - output[action])^2; outputs for other
// actions do not contribute.
Gradients backward(const QNetwork& net, const Eigen::VectorXd& input,
                   const Eigen::VectorXd& target, int action);

// Mean of per-sample masked gradients over a batch; per-sample targets are
// scalars on the chosen action. Returns the mean loss.
double backward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs,
                      const Eigen::VectorXd& targets, const std::vector<int>& actions,
                      Gradients& out);

struct TrainStep {
    double learning_rate{1e-3};
    double momentum{0.9};
    std::vector<Eigen::MatrixXd> velocity_W;
    std::vector<Eigen::VectorXd> velocity_b;
};

// velocity <- momentum*velocity - learning_rate*gradient; params += velocity.
void apply_update(QNetwork& net, const Gradients& grads, TrainStep& ts);

void clone_into(const QNetwork& src, QNetwork& dst);

// Versioned binary checkpoint; round-trips parameters bit-exactly.
void save_network(const QNetwork& net, const std::string& path);
QNetwork load_network(const std::string& path);

}  // namespace mg
