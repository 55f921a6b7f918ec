#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mirrorgame/dqn.hpp"
#include "mirrorgame/dynamics.hpp"
#include "mirrorgame/ensemble.hpp"
#include "mirrorgame/virtual_player.hpp"

namespace mg {

struct TopologySpec {
    TopologyKind kind{TopologyKind::complete};
    int n{4};
    int center{2};  // 0-based; config files speak 1-based
    std::vector<std::pair<int, int>> edges;  // 0-based, used when kind == custom

    Topology build() const;
};

struct ExperimentConfig {
    std::uint64_t seed{1};
    int trial_count{300};
    int trial_length{500};  // observations per trial
    double dt{0.03};
    IntegrationMethod method{IntegrationMethod::rk4};
    int n_players{4};
    int target_player{3};  // 0-based; config files speak 1-based
    double transient{2.0};  // seconds cut before metrics
    int eval_steps{2000};   // closed-loop validation trial length
    int sweep_trials{12};

    TopologySpec topology;
    HkbParams hkb;
    VpControlParams vp;
    ControlBounds vp_bounds;
    std::vector<SignatureChain> chains;  // one per player; filled by finalize()

    DqnHyperParams dqn;
    double learning_rate{3e-3};
    double momentum{0.9};
    double eps_term{0.01};
    double workspace{3.0};  // CP position saturates at +-workspace

    // Chain files as given in the config (empty -> built-in default chain).
    std::string chain_file_all;
    std::vector<std::string> chain_file_per_player;

    void finalize();  // loads chains, then validates
    void validate() const;
};

// Key/value text with [section] headers; unknown sections or keys are
// rejected. Relative chain-file paths resolve against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig parse_config_file(const std::string& path);

// Canonical config text for the effective configuration.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace mg
