#include "mirrorgame/dqn.hpp"

#include <cmath>
#include <stdexcept>

namespace mg {

Eigen::Vector4d observation_input(const AgentObservation& obs) {
    return {obs.x / 1.0, obs.v / 2.0, obs.xbar / 1.0, obs.vbar / 2.0};
}

void ActionSpace::validate() const {
    const int n = size();
    if (n < 2) throw std::invalid_argument("action space needs at least two actions");
    for (int i = 0; i + 1 < n; ++i)
        if (!(accelerations[i] < accelerations[i + 1]))
            throw std::invalid_argument("actions must be strictly increasing");
    for (int i = 0; i < n; ++i)
        if (std::abs(accelerations[i] + accelerations[n - 1 - i]) > 1e-12)
            throw std::invalid_argument("actions must be symmetric about zero");
}

ActionSpace default_action_space() {
    ActionSpace a;
    a.accelerations.resize(9);
    a.accelerations << -4, -3, -2, -1, 0, 1, 2, 3, 4;
    a.validate();
    return a;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    storage_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& tr) {
    if (tr.reward > 0)
        throw std::invalid_argument("transition reward must be non-positive");
    if (tr.action < 0) throw std::invalid_argument("transition action index negative");
    if (count_ < capacity_) {
        storage_.push_back(tr);
        ++count_;
    } else {
        storage_[head_] = tr;
    }
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::oldest(std::size_t i) const {
    if (i >= count_) throw std::out_of_range("replay buffer index out of range");
    if (count_ < capacity_) return storage_[i];
    return storage_[(head_ + i) % capacity_];
}

const Transition& ReplayBuffer::sample(RngStream& rng) const {
    if (count_ == 0) throw std::out_of_range("sampling from empty replay buffer");
    return storage_[static_cast<std::size_t>(uniform_index(rng, count_))];
}

void DqnHyperParams::validate() const {
    if (!(discount > 0 && discount < 1)) throw std::invalid_argument("discount must be in (0, 1)");
    if (!(eps_min >= 0 && eps_min <= eps_max && eps_max <= 1))
        throw std::invalid_argument("need 0 <= eps_min <= eps_max <= 1");
    if (target_update_period <= 0) throw std::invalid_argument("target update period must be positive");
    if (batch_size <= 0) throw std::invalid_argument("batch size must be positive");
    if (buffer_capacity == 0) throw std::invalid_argument("buffer capacity must be positive");
}

double reward(const OscillatorState& cp, const OscillatorState& target, double u,
              double eta_effort) {
    const double ex = cp.x - target.x;
    const double ev = cp.v - target.v;
    return -(ex * ex) - 0.1 * ev * ev - eta_effort * u * u;
}

double epsilon_at(long step, const DqnHyperParams& hp) {
    if (step < 0) throw std::invalid_argument("step must be non-negative");
    const double tau = hp.eps_decay_tau;
    if (tau <= 0) throw std::invalid_argument("eps_decay_tau must be set before use");
    return hp.eps_min + (hp.eps_max - hp.eps_min) * std::exp(-static_cast<double>(step) / tau);
}

int greedy_action(const QNetwork& net, const AgentObservation& obs) {
    const Eigen::VectorXd q = forward(net, observation_input(obs));
    int best = 0;
    for (int i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = i;
    return best;
}

int select_action(const QNetwork& net, const AgentObservation& obs, double eps, RngStream& rng) {
    if (eps < 0 || eps > 1) throw std::invalid_argument("epsilon must be in [0, 1]");
    if (uniform01(rng) < eps)
        return static_cast<int>(uniform_index(rng, net.output_size()));
    return greedy_action(net, obs);
}

double td_target(const Transition& tr, const QNetwork& target_net, double discount) {
    const Eigen::VectorXd q = forward(target_net, observation_input(tr.next_state));
    return tr.reward + discount * q.maxCoeff();
}

std::optional<double> train_batch(QNetwork& net, const QNetwork& target_net,
                                  const ReplayBuffer& buffer, const DqnHyperParams& hp,
                                  TrainStep& ts, RngStream& rng) {
    const int B = hp.batch_size;
    if (buffer.size() < static_cast<std::size_t>(B)) return std::nullopt;  // warmup

    Eigen::MatrixXd states(4, B), next_states(4, B);
    Eigen::VectorXd rewards(B);
    std::vector<int> actions(B);
    for (int i = 0; i < B; ++i) {
        const Transition& tr = buffer.sample(rng);
        states.col(i) = observation_input(tr.state);
        next_states.col(i) = observation_input(tr.next_state);
        rewards[i] = tr.reward;
        actions[i] = tr.action;
    }
    const Eigen::MatrixXd q_next = forward_batch(target_net, next_states);
    const Eigen::VectorXd targets = rewards + hp.discount * q_next.colwise().maxCoeff().transpose();

    Gradients grads;
    const double loss = backward_batch(net, states, targets, actions, grads);
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite training loss");
    apply_update(net, grads, ts);
    return loss;
}

void maybe_sync_target(long step, const DqnHyperParams& hp, const QNetwork& net,
                       QNetwork& target_net) {
    if (step % hp.target_update_period == 0) clone_into(net, target_net);
}

bool check_termination(double rms_tp, double rms_cp, double eps_term) {
    if (rms_tp < 0 || rms_cp < 0) throw std::invalid_argument("RMS values must be non-negative");
    return std::abs(rms_tp - rms_cp) <= eps_term;
}

}  // namespace mg
