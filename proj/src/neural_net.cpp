#include "mirrorgame/neural_net.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace mg {

namespace {

Eigen::ArrayXXd activate(const Eigen::ArrayXXd& z, Activation act) {
    if (act == Activation::linear) return z;
    return 1.0 / (1.0 + (-z).exp());
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains non-finite values");
}

}  // namespace

bool QNetwork::same_architecture(const QNetwork& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].W.rows() != other.layers[i].W.rows() ||
            layers[i].W.cols() != other.layers[i].W.cols() || layers[i].act != other.layers[i].act)
            return false;
    }
    return true;
}

QNetwork make_qnetwork(const std::vector<int>& sizes, RngStream& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("network needs at least two layers");
    QNetwork net;
    net.layers.reserve(sizes.size() - 1);
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
        Layer layer;
        const int fan_in = sizes[i], fan_out = sizes[i + 1];
        if (fan_in < 1 || fan_out < 1) throw std::invalid_argument("layer sizes must be positive");
        const double lim = std::sqrt(6.0 / (fan_in + fan_out));
        layer.W.resize(fan_out, fan_in);
        for (int c = 0; c < fan_in; ++c)
            for (int r = 0; r < fan_out; ++r) layer.W(r, c) = uniform_real(rng, -lim, lim);
        layer.b = Eigen::VectorXd::Zero(fan_out);
        layer.act = (i + 2 == sizes.size()) ? Activation::linear : Activation::sigmoid;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Eigen::VectorXd forward(const QNetwork& net, const Eigen::VectorXd& input) {
    if (input.size() != net.input_size()) throw std::invalid_argument("forward: input size mismatch");
    check_finite(input, "forward input");
    Eigen::VectorXd a = input;
    for (const auto& layer : net.layers) {
        Eigen::VectorXd z = layer.W * a + layer.b;
        a = activate(z.array(), layer.act).matrix();
    }
    return a;
}

Eigen::MatrixXd forward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != net.input_size())
        throw std::invalid_argument("forward_batch: input size mismatch");
    Eigen::MatrixXd a = inputs;
    for (const auto& layer : net.layers) {
        Eigen::MatrixXd z = (layer.W * a).colwise() + layer.b;
        a = activate(z.array(), layer.act).matrix();
    }
    return a;
}

namespace {

// Shared backprop core: dOut holds dLoss/dOutput per sample column.
void backprop(const QNetwork& net, const Eigen::MatrixXd& inputs,
              const std::vector<Eigen::MatrixXd>& activations, Eigen::MatrixXd dOut,
              Gradients& out) {
    const int L = static_cast<int>(net.layers.size());
    out.dW.resize(L);
    out.db.resize(L);
    Eigen::MatrixXd d = std::move(dOut);  // dLoss/dz for the current layer
    for (int li = L - 1; li >= 0; --li) {
        // activations[li] is the layer input (activations[0] == inputs).
        out.dW[li] = d * activations[li].transpose();
        out.db[li] = d.rowwise().sum();
        if (li > 0) {
            Eigen::MatrixXd da = net.layers[li].W.transpose() * d;
            const auto& a = activations[li];
            d = (da.array() * a.array() * (1.0 - a.array())).matrix();
        }
    }
}

std::vector<Eigen::MatrixXd> forward_collect(const QNetwork& net, const Eigen::MatrixXd& inputs) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(net.layers.size() + 1);
    acts.push_back(inputs);
    for (const auto& layer : net.layers) {
        Eigen::MatrixXd z = (layer.W * acts.back()).colwise() + layer.b;
        acts.push_back(activate(z.array(), layer.act).matrix());
    }
    return acts;
}

}  // namespace

Gradients backward(const QNetwork& net, const Eigen::VectorXd& input,
                   const Eigen::VectorXd& target, int action) {
    if (input.size() != net.input_size()) throw std::invalid_argument("backward: input size mismatch");
    if (target.size() != net.output_size())
        throw std::invalid_argument("backward: target size mismatch");
    if (action < 0 || action >= net.output_size())
        throw std::invalid_argument("backward: action index out of range");
    check_finite(target, "backward target");

    const auto acts = forward_collect(net, input);
    Eigen::MatrixXd dOut = Eigen::MatrixXd::Zero(net.output_size(), 1);
    dOut(action, 0) = acts.back()(action, 0) - target[action];
    Gradients out;
    backprop(net, input, acts, std::move(dOut), out);
    return out;
}

double backward_batch(const QNetwork& net, const Eigen::MatrixXd& inputs,
                      const Eigen::VectorXd& targets, const std::vector<int>& actions,
                      Gradients& out) {
    const int B = static_cast<int>(inputs.cols());
    if (targets.size() != B || static_cast<int>(actions.size()) != B)
        throw std::invalid_argument("backward_batch: batch size mismatch");
    const auto acts = forward_collect(net, inputs);
    Eigen::MatrixXd dOut = Eigen::MatrixXd::Zero(net.output_size(), B);
    double loss = 0;
    for (int i = 0; i < B; ++i) {
        const int a = actions[i];
        if (a < 0 || a >= net.output_size())
            throw std::invalid_argument("backward_batch: action index out of range");
        const double err = acts.back()(a, i) - targets[i];
        loss += 0.5 * err * err;
        dOut(a, i) = err / static_cast<double>(B);
    }
    backprop(net, inputs, acts, std::move(dOut), out);
    return loss / static_cast<double>(B);
}

void apply_update(QNetwork& net, const Gradients& grads, TrainStep& ts) {
    const size_t L = net.layers.size();
    if (grads.dW.size() != L || grads.db.size() != L)
        throw std::invalid_argument("apply_update: gradient shape mismatch");
    if (ts.velocity_W.empty()) {
        ts.velocity_W.resize(L);
        ts.velocity_b.resize(L);
        for (size_t i = 0; i < L; ++i) {
            ts.velocity_W[i] = Eigen::MatrixXd::Zero(net.layers[i].W.rows(), net.layers[i].W.cols());
            ts.velocity_b[i] = Eigen::VectorXd::Zero(net.layers[i].b.size());
        }
    }
    for (size_t i = 0; i < L; ++i) {
        if (grads.dW[i].rows() != net.layers[i].W.rows() ||
            grads.dW[i].cols() != net.layers[i].W.cols())
            throw std::invalid_argument("apply_update: gradient shape mismatch");
        ts.velocity_W[i] = ts.momentum * ts.velocity_W[i] - ts.learning_rate * grads.dW[i];
        ts.velocity_b[i] = ts.momentum * ts.velocity_b[i] - ts.learning_rate * grads.db[i];
        net.layers[i].W += ts.velocity_W[i];
        net.layers[i].b += ts.velocity_b[i];
    }
}

void clone_into(const QNetwork& src, QNetwork& dst) {
    if (!src.same_architecture(dst)) throw std::invalid_argument("clone_into: architecture mismatch");
    for (size_t i = 0; i < src.layers.size(); ++i) {
        dst.layers[i].W = src.layers[i].W;
        dst.layers[i].b = src.layers[i].b;
    }
}

namespace {

constexpr std::uint32_t kCheckpointMagic = 0x4d47514eu;  // "MGQN"
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

}  // namespace

void save_network(const QNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    write_pod(out, kCheckpointMagic);
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& layer : net.layers) {
        write_pod(out, static_cast<std::uint32_t>(layer.W.rows()));
        write_pod(out, static_cast<std::uint32_t>(layer.W.cols()));
        write_pod(out, static_cast<std::uint8_t>(layer.act));
        out.write(reinterpret_cast<const char*>(layer.W.data()),
                  static_cast<std::streamsize>(sizeof(double) * layer.W.size()));
        out.write(reinterpret_cast<const char*>(layer.b.data()),
                  static_cast<std::streamsize>(sizeof(double) * layer.b.size()));
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

QNetwork load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    if (read_pod<std::uint32_t>(in) != kCheckpointMagic)
        throw std::runtime_error("not a network checkpoint: " + path);
    if (read_pod<std::uint32_t>(in) != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version: " + path);
    const auto n_layers = read_pod<std::uint32_t>(in);
    if (n_layers == 0 || n_layers > 64) throw std::runtime_error("corrupt checkpoint: " + path);
    QNetwork net;
    net.layers.resize(n_layers);
    for (auto& layer : net.layers) {
        const auto rows = read_pod<std::uint32_t>(in);
        const auto cols = read_pod<std::uint32_t>(in);
        const auto act = read_pod<std::uint8_t>(in);
        if (rows == 0 || cols == 0 || rows > 65536 || cols > 65536 || act > 1)
            throw std::runtime_error("corrupt checkpoint: " + path);
        layer.W.resize(rows, cols);
        layer.b.resize(rows);
        layer.act = static_cast<Activation>(act);
        in.read(reinterpret_cast<char*>(layer.W.data()),
                static_cast<std::streamsize>(sizeof(double) * layer.W.size()));
        in.read(reinterpret_cast<char*>(layer.b.data()),
                static_cast<std::streamsize>(sizeof(double) * layer.b.size()));
        if (!in) throw std::runtime_error("checkpoint truncated: " + path);
    }
    return net;
}

}  // namespace mg
