#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "mirrorgame/dynamics.hpp"
#include "mirrorgame/neural_net.hpp"
#include "mirrorgame/rng.hpp"

namespace mg {

struct AgentObservation {
    double x{0};     // CP position
    double v{0};     // CP velocity
    double xbar{0};  // neighbor mean position
    double vbar{0};  // neighbor mean velocity
};

// Component-wise normalization applied before the network input, keeping
// sigmoid pre-activations in range.
Eigen::Vector4d observation_input(const AgentObservation& obs);

struct ActionSpace {
    Eigen::VectorXd accelerations;

    int size() const { return static_cast<int>(accelerations.size()); }
    void validate() const;
};

// Nine accelerations uniformly spaced over [-4, 4].
ActionSpace default_action_space();

struct Transition {
    AgentObservation state;
    int action{0};
    AgentObservation next_state;
    double reward{0};
};

class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& tr);
    std::size_t size() const { return count_; }
    std::size_t capacity() const { return capacity_; }

    // Oldest-first access (FIFO order).
    const Transition& oldest(std::size_t i) const;
    const Transition& sample(RngStream& rng) const;

  private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    std::size_t head_{0};  // next write slot
    std::size_t count_{0};
};

struct DqnHyperParams {
    double discount{0.95};
    double eps_max{1.0};
    double eps_min{0.05};
    double eps_decay_tau{0};  // steps; <= 0 means the harness sets planned-steps/3
    long target_update_period{150};
    int batch_size{32};
    std::size_t buffer_capacity{200000};
    double eta_effort{1e-3};

    void validate() const;
};

// -(x - x_t)^2 - 0.1*(v - v_t)^2 - eta*u^2, always <= 0.
double reward(const OscillatorState& cp, const OscillatorState& target, double u,
              double eta_effort);

double epsilon_at(long step, const DqnHyperParams& hp);

// Greedy argmax with probability 1-eps (ties to the lowest index), uniform
// otherwise.
int select_action(const QNetwork& net, const AgentObservation& obs, double eps, RngStream& rng);

int greedy_action(const QNetwork& net, const AgentObservation& obs);

double td_target(const Transition& tr, const QNetwork& target_net, double discount);

// One minibatch update, sampling uniformly with replacement. Returns the mean
// batch loss, or nullopt while the buffer is still warming up.
std::optional<double> train_batch(QNetwork& net, const QNetwork& target_net,
                                  const ReplayBuffer& buffer, const DqnHyperParams& hp,
                                  TrainStep& ts, RngStream& rng);

void maybe_sync_target(long step, const DqnHyperParams& hp, const QNetwork& net,
                       QNetwork& target_net);

bool check_termination(double rms_tp, double rms_cp, double eps_term);

}  // namespace mg
