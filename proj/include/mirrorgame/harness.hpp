#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mirrorgame/analysis.hpp"
#include "mirrorgame/config.hpp"
#include "mirrorgame/dqn.hpp"
#include "mirrorgame/io.hpp"
#include "mirrorgame/neural_net.hpp"

namespace mg {

// VP-only group rollout; the returned series includes the initial sample at
// t = 0 followed by one row per step. Deterministic in (cfg.seed, trial).
GroupTimeSeries simulate_vp_group(const ExperimentConfig& cfg, int trial = 0, int steps = -1);

struct TrainResult {
    QNetwork net;
    std::vector<TrainLogRow> log;
    bool terminated{false};
    int trials_run{0};
};

// Shadow training: the CP observes the target's neighbors and is rewarded
// against the target VP, but its motion never feeds back into the group.
TrainResult train_cp(const ExperimentConfig& cfg,
                     const std::function<void(const TrainLogRow&)>& on_trial = nullptr);

enum class SubstitutePolicy {
    network,  // greedy CP drives the target slot
    vp_clone  // the target VP itself drives it (control experiment)
};

struct ValidationResult {
    std::vector<TrialMetrics> cp;  // target slot driven by the substitute
    std::vector<TrialMetrics> vp;  // matched VP-only baseline, same seeds
};

ValidationResult validate_cp(const ExperimentConfig& cfg, const QNetwork& net, TopologyKind kind,
                             int trials, SubstitutePolicy policy = SubstitutePolicy::network);

struct SweepRow {
    TopologyKind kind;
    double rho_vp_mean{0};
    double rho_vp_sd{0};
    double rho_cp_mean{0};
    double rho_cp_sd{0};
};

// All four topologies, VP baseline vs CP-substituted group sync index.
std::vector<SweepRow> run_topology_sweep(const ExperimentConfig& cfg, const QNetwork& net,
                                         int trials = -1);

struct MetricAggregate {
    double mean{0};
    double sd{0};
};

MetricAggregate aggregate(const std::vector<double>& values);

// Per-trial series sliced to t > transient, as used by all metric reporting.
TimeSeries post_transient(const TimeSeries& full, double transient);

// Metrics of one recorded group run: rho_g over everyone plus target-centric
// tracking metrics against the target's neighbor mean.
TrialMetrics trial_metrics(const GroupTimeSeries& run, const Topology& topo, int target,
                           double transient, double lag_bound = 2.0);

// Artifact writers shared by the CLI subcommands.
void write_simulate_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                              const std::string& config_snapshot);
void write_train_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                           const std::string& config_snapshot, bool progress = false);
void write_validate_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                              const std::string& config_snapshot, const std::string& checkpoint,
                              TopologyKind kind, int trials);
void write_sweep_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                           const std::string& config_snapshot, const std::string& checkpoint,
                           int trials);
void write_analyze_artifacts(const std::string& in_dir, const std::string& out_dir,
                             double transient);

}  // namespace mg
