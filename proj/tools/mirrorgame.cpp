#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

#include "mirrorgame/config.hpp"
#include "mirrorgame/harness.hpp"
#include "mirrorgame/io.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed{0};
    bool seed_set{false};
};

// Effective config plus the snapshot text embedded into every artifact. When
// a config file is given the snapshot is its verbatim bytes (with any CLI
// seed override appended); otherwise it is the serialized effective config.
std::pair<mg::ExperimentConfig, std::string> load_effective_config(const CommonArgs& args) {
    mg::ExperimentConfig cfg;
    std::string snapshot;
    if (!args.config_path.empty()) {
        cfg = mg::parse_config_file(args.config_path);
        snapshot = mg::read_text_file(args.config_path);
        if (args.seed_set) {
            cfg.seed = args.seed;
            snapshot += "\n# seed overridden on the command line\n[run]\nseed = " +
                        std::to_string(args.seed) + "\n";
        }
    } else {
        if (args.seed_set) cfg.seed = args.seed;
        cfg.finalize();
        snapshot = mg::serialize_config(cfg);
    }
    return {cfg, snapshot};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group mirror game simulator and cyber-player trainer"};
    app.require_subcommand(1);
    app.fallthrough();  // lets the global --seed appear after the subcommand

    CommonArgs common;
    app.add_option("--seed", common.seed, "Override the rng seed")
        ->each([&common](const std::string&) { common.seed_set = true; });

    std::string out_dir, in_dir, checkpoint, topology = "complete";
    int trials = -1;
    double duration = -1;

    auto* simulate = app.add_subcommand("simulate", "Run the VP-only group for one trial");
    simulate->add_option("--config", common.config_path, "Experiment config file");
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--duration", duration, "Simulation length in seconds");

    auto* train = app.add_subcommand("train", "Shadow-train the cyber player");
    train->add_option("--config", common.config_path, "Experiment config file");
    train->add_option("--out", out_dir, "Output directory")->required();
    train->add_option("--trials", trials, "Override the training trial count");

    auto* validate = app.add_subcommand("validate", "Closed-loop substitution validation");
    validate->add_option("--config", common.config_path, "Experiment config file");
    validate->add_option("--checkpoint", checkpoint, "Trained network checkpoint")->required();
    validate->add_option("--topology", topology, "complete|ring|path|star");
    validate->add_option("--trials", trials, "Validation trial count")->required();
    validate->add_option("--out", out_dir, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Group sync index across all four topologies");
    sweep->add_option("--config", common.config_path, "Experiment config file");
    sweep->add_option("--checkpoint", checkpoint, "Trained network checkpoint")->required();
    sweep->add_option("--trials", trials, "Trials per topology");
    sweep->add_option("--out", out_dir, "Output directory")->required();

    auto* analyze = app.add_subcommand("analyze", "Compute metrics for recorded time series");
    analyze->add_option("--in", in_dir, "Directory of time-series CSV files")->required();
    analyze->add_option("--out", out_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            auto [cfg, snapshot] = load_effective_config(common);
            if (duration > 0) {
                const int steps = static_cast<int>(duration / cfg.dt + 0.5);
                cfg.trial_length = std::max(steps, 100);
                cfg.validate();
            }
            mg::write_simulate_artifacts(out_dir, cfg, snapshot);
        } else if (train->parsed()) {
            auto [cfg, snapshot] = load_effective_config(common);
            if (trials > 0) {
                cfg.trial_count = trials;
                cfg.validate();
            }
            mg::write_train_artifacts(out_dir, cfg, snapshot, /*progress=*/true);
        } else if (validate->parsed()) {
            auto [cfg, snapshot] = load_effective_config(common);
            mg::write_validate_artifacts(out_dir, cfg, snapshot, checkpoint,
                                         mg::topology_kind_from_string(topology), trials);
        } else if (sweep->parsed()) {
            auto [cfg, snapshot] = load_effective_config(common);
            mg::write_sweep_artifacts(out_dir, cfg, snapshot, checkpoint, trials);
        } else if (analyze->parsed()) {
            mg::ExperimentConfig defaults;
            mg::write_analyze_artifacts(in_dir, out_dir, defaults.transient);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
