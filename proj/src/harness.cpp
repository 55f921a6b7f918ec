#include "mirrorgame/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

namespace mg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Stream tags keep the VP group, the CP, and the network draws on disjoint
// rng streams; the VP streams depend only on (seed, trial, player), which is
// what makes shadow runs bit-identical to plain group runs.
constexpr std::uint32_t kVpTag = 0x56504c59u;
constexpr std::uint32_t kCpTag = 0x43504143u;
constexpr std::uint32_t kNetTag = 0x4e455449u;

RngStream vp_stream(std::uint64_t seed, int trial, int player) {
    return make_stream(seed, {static_cast<std::uint32_t>(trial),
                              static_cast<std::uint32_t>(player), kVpTag});
}

// Synchronous-update VP group: all controls are computed from the current
// state, then every player steps.
class VpGroupSim {
  public:
    VpGroupSim(const ExperimentConfig& cfg, const Topology& topo, int trial)
        : cfg_(cfg), topo_(topo) {
        group_.states.resize(cfg.n_players);
        group_.t = 0.0;
        gens_.reserve(cfg.n_players);
        for (int k = 0; k < cfg.n_players; ++k) {
            RngStream rng = vp_stream(cfg.seed, trial, k);
            group_.states[k].x = uniform_real(rng, -0.5, 0.5);
            group_.states[k].v = 0.0;
            gens_.emplace_back(cfg.chains[k], std::move(rng));
        }
    }

    const GroupState& group() const { return group_; }
    GroupState& group() { return group_; }
    double t() const { return group_.t; }

    // One step with every slot VP-driven.
    void step_all() { step_excluding(-1); }

    // One step of all VPs except `excluded` (whose state the caller owns).
    void step_excluding(int excluded) {
        const StepConfig sc{cfg_.dt, cfg_.method};
        std::vector<double> controls(cfg_.n_players, 0.0);
        for (int k = 0; k < cfg_.n_players; ++k) {
            if (k == excluded) continue;
            const NeighborMean nb = neighbor_mean(group_, topo_, k);
            const double ref = gens_[k].reference(group_.t);
            controls[k] = vp_control(group_.states[k], nb, ref, cfg_.vp, cfg_.hkb, cfg_.vp_bounds);
        }
        for (int k = 0; k < cfg_.n_players; ++k) {
            if (k == excluded) continue;
            group_.states[k] = step_oscillator(group_.states[k], controls[k], cfg_.hkb, sc);
        }
        group_.t += cfg_.dt;
    }

  private:
    const ExperimentConfig& cfg_;
    const Topology& topo_;
    GroupState group_;
    std::vector<SignatureGenerator> gens_;
};

OscillatorState clamp_to_workspace(OscillatorState s, double halfwidth) {
    if (s.x > halfwidth) {
        s.x = halfwidth;
        s.v = 0.0;
    } else if (s.x < -halfwidth) {
        s.x = -halfwidth;
        s.v = 0.0;
    }
    return s;
}

AgentObservation observe(const OscillatorState& cp, const GroupState& g, const Topology& topo,
                         int target) {
    const NeighborMean nb = neighbor_mean(g, topo, target);
    return {cp.x, cp.v, nb.r_p, nb.rdot_p};
}

// First post-step sample index whose time exceeds the transient.
int transient_cut_steps(double transient, double dt) {
    int cut = 0;
    while ((cut + 1) * dt <= transient + 1e-12) ++cut;
    return cut;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

MetricAggregate aggregate(const std::vector<double>& values) {
    MetricAggregate out;
    if (values.empty()) throw std::invalid_argument("aggregate of empty vector");
    out.mean = mean_of(values);
    double ss = 0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return out;
}

TimeSeries post_transient(const TimeSeries& full, double transient) {
    int begin = 0;
    while (begin < full.size() && begin * full.dt <= transient + 1e-12) ++begin;
    if (full.size() - begin < 16)
        throw std::invalid_argument("series too short after transient cut");
    TimeSeries out;
    out.dt = full.dt;
    out.values = full.values.segment(begin, full.size() - begin);
    return out;
}

GroupTimeSeries simulate_vp_group(const ExperimentConfig& cfg, int trial, int steps) {
    if (steps < 0) steps = cfg.trial_length;
    const Topology topo = cfg.topology.build();
    VpGroupSim sim(cfg, topo, trial);

    GroupTimeSeries ts;
    ts.dt = cfg.dt;
    ts.t.resize(steps + 1);
    ts.x.resize(steps + 1, cfg.n_players);
    ts.v.resize(steps + 1, cfg.n_players);
    const auto record = [&](int row) {
        ts.t[row] = row * cfg.dt;
        for (int k = 0; k < cfg.n_players; ++k) {
            ts.x(row, k) = sim.group().states[k].x;
            ts.v(row, k) = sim.group().states[k].v;
        }
    };
    record(0);
    for (int s = 0; s < steps; ++s) {
        try {
            sim.step_all();
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " (trial " + std::to_string(trial) +
                                  ", step " + std::to_string(s) + ")");
        }
        record(s + 1);
    }
    return ts;
}

TrainResult train_cp(const ExperimentConfig& cfg,
                     const std::function<void(const TrainLogRow&)>& on_trial) {
    const Topology topo = cfg.topology.build();
    const int target = cfg.target_player;
    const ActionSpace actions = default_action_space();

    DqnHyperParams hp = cfg.dqn;
    if (hp.eps_decay_tau <= 0)
        hp.eps_decay_tau =
            static_cast<double>(cfg.trial_count) * static_cast<double>(cfg.trial_length) / 3.0;

    RngStream net_rng = make_stream(cfg.seed, {kNetTag});
    RngStream cp_rng = make_stream(cfg.seed, {kCpTag});
    TrainResult result;
    result.net = make_qnetwork(production_layer_sizes(), net_rng);
    QNetwork target_net = result.net;
    TrainStep ts;
    ts.learning_rate = cfg.learning_rate;
    ts.momentum = cfg.momentum;
    ReplayBuffer buffer(hp.buffer_capacity);

    const int cut = transient_cut_steps(cfg.transient, cfg.dt);
    long gstep = 0;
    std::vector<double> rms_tp_hist, rms_cp_hist;

    for (int trial = 0; trial < cfg.trial_count; ++trial) {
        VpGroupSim sim(cfg, topo, trial);
        OscillatorState cp{sim.group().states[target].x, 0.0};

        double acc_tp = 0, acc_cp = 0;
        int n_metric = 0;
        double loss_sum = 0;
        int loss_n = 0;
        double eps = 0;

        for (int s = 0; s < cfg.trial_length; ++s) {
            const AgentObservation obs = observe(cp, sim.group(), topo, target);
            ++gstep;
            eps = epsilon_at(gstep, hp);
            const int a = select_action(result.net, obs, eps, cp_rng);
            const double u = actions.accelerations[a];

            try {
                sim.step_excluding(-1);  // shadow mode: the full VP group runs untouched
                cp = clamp_to_workspace(step_double_integrator(cp, u, cfg.dt), cfg.workspace);
            } catch (const DivergenceError& e) {
                throw DivergenceError(std::string(e.what()) + " (training trial " +
                                      std::to_string(trial) + ", step " + std::to_string(s) + ")");
            }

            const AgentObservation obs2 = observe(cp, sim.group(), topo, target);
            const OscillatorState& tgt = sim.group().states[target];
            const double r = reward(cp, tgt, u, hp.eta_effort);
            buffer.push({obs, a, obs2, r});

            if (s >= cut) {
                const double e_tp = tgt.x - obs2.xbar;
                const double e_cp = cp.x - obs2.xbar;
                acc_tp += e_tp * e_tp;
                acc_cp += e_cp * e_cp;
                ++n_metric;
            }

            if (const auto loss = train_batch(result.net, target_net, buffer, hp, ts, cp_rng)) {
                loss_sum += *loss;
                ++loss_n;
            }
            maybe_sync_target(gstep, hp, result.net, target_net);
        }

        TrainLogRow row;
        row.trial = trial + 1;
        row.loss = loss_n > 0 ? loss_sum / loss_n : 0.0;
        row.epsilon = eps;
        row.rms_tp = std::sqrt(acc_tp / n_metric);
        row.rms_cp = std::sqrt(acc_cp / n_metric);
        result.log.push_back(row);
        rms_tp_hist.push_back(row.rms_tp);
        rms_cp_hist.push_back(row.rms_cp);
        result.trials_run = trial + 1;
        if (on_trial) on_trial(row);

        constexpr int kWindow = 50;
        if (static_cast<int>(rms_tp_hist.size()) >= kWindow) {
            const auto tail_mean = [&](const std::vector<double>& v) {
                return std::accumulate(v.end() - kWindow, v.end(), 0.0) / kWindow;
            };
            if (check_termination(tail_mean(rms_tp_hist), tail_mean(rms_cp_hist), cfg.eps_term)) {
                result.terminated = true;
                break;
            }
        }
    }
    return result;
}

TrialMetrics trial_metrics(const GroupTimeSeries& run, const Topology& topo, int target,
                           double transient, double lag_bound) {
    TrialMetrics m;

    std::vector<TimeSeries> positions;
    positions.reserve(run.players());
    for (int k = 0; k < run.players(); ++k)
        positions.push_back(post_transient(run.position_series(k), transient));
    m.rho_g = group_sync_index(positions);

    // Target-centric series against its neighbor mean.
    const auto& nb = topo.neighbors[target];
    TimeSeries xbar, vbar;
    xbar.dt = vbar.dt = run.dt;
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(run.samples());
    Eigen::VectorXd vs = Eigen::VectorXd::Zero(run.samples());
    for (int j : nb) {
        xs += run.x.col(j);
        vs += run.v.col(j);
    }
    xbar.values = xs / static_cast<double>(nb.size());
    vbar.values = vs / static_cast<double>(nb.size());
    const TimeSeries xbar_c = post_transient(xbar, transient);
    const TimeSeries vbar_c = post_transient(vbar, transient);
    const TimeSeries xp_c = post_transient(run.position_series(target), transient);

    m.rms = rms_to_mean(xp_c, xbar_c);
    m.delta_phi = relative_phase_error(xbar_c, xp_c);
    // Short runs cannot honor the full requested search window.
    const double usable_lag = std::min(lag_bound, 0.25 * xbar_c.duration());
    m.time_lag = time_lag(xbar_c, xp_c, usable_lag);
    m.rpe_series = relative_position_error(xbar_c, vbar_c, xp_c);
    return m;
}

ValidationResult validate_cp(const ExperimentConfig& cfg, const QNetwork& net, TopologyKind kind,
                             int trials, SubstitutePolicy policy) {
    if (trials < 1) throw std::invalid_argument("validate_cp: need at least one trial");
    ExperimentConfig ecfg = cfg;
    ecfg.topology.kind = kind;
    if (kind != TopologyKind::custom) ecfg.topology.edges.clear();
    const Topology topo = ecfg.topology.build();
    const int target = ecfg.target_player;
    const ActionSpace actions = default_action_space();
    const int steps = ecfg.eval_steps;

    ValidationResult out;
    for (int trial = 0; trial < trials; ++trial) {
        // Matched VP-only baseline.
        const GroupTimeSeries base = simulate_vp_group(ecfg, trial, steps);
        out.vp.push_back(trial_metrics(base, topo, target, ecfg.transient));

        // Substituted run on identical streams.
        VpGroupSim sim(ecfg, topo, trial);
        GroupTimeSeries ts;
        ts.dt = ecfg.dt;
        ts.t.resize(steps + 1);
        ts.x.resize(steps + 1, ecfg.n_players);
        ts.v.resize(steps + 1, ecfg.n_players);
        const auto record = [&](int row) {
            ts.t[row] = row * ecfg.dt;
            for (int k = 0; k < ecfg.n_players; ++k) {
                ts.x(row, k) = sim.group().states[k].x;
                ts.v(row, k) = sim.group().states[k].v;
            }
        };
        record(0);
        OscillatorState cp{sim.group().states[target].x, 0.0};
        for (int s = 0; s < steps; ++s) {
            if (policy == SubstitutePolicy::vp_clone) {
                sim.step_all();
            } else {
                const AgentObservation obs = observe(cp, sim.group(), topo, target);
                const int a = greedy_action(net, obs);
                const double u = actions.accelerations[a];
                sim.step_excluding(target);
                cp = clamp_to_workspace(step_double_integrator(cp, u, ecfg.dt), ecfg.workspace);
                sim.group().states[target] = cp;
            }
            record(s + 1);
        }
        out.cp.push_back(trial_metrics(ts, topo, target, ecfg.transient));
    }
    return out;
}

std::vector<SweepRow> run_topology_sweep(const ExperimentConfig& cfg, const QNetwork& net,
                                         int trials) {
    if (trials < 0) trials = cfg.sweep_trials;
    std::vector<SweepRow> rows;
    for (const TopologyKind kind :
         {TopologyKind::complete, TopologyKind::ring, TopologyKind::path, TopologyKind::star}) {
        const ValidationResult r = validate_cp(cfg, net, kind, trials);
        std::vector<double> rho_vp, rho_cp;
        for (const auto& m : r.vp) rho_vp.push_back(m.rho_g);
        for (const auto& m : r.cp) rho_cp.push_back(m.rho_g);
        const MetricAggregate av = aggregate(rho_vp);
        const MetricAggregate ac = aggregate(rho_cp);
        rows.push_back({kind, av.mean, av.sd, ac.mean, ac.sd});
    }
    return rows;
}

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + dir);
}

ordered_json metrics_json(const TrialMetrics& m) {
    ordered_json j;
    j["rho_g"] = m.rho_g;
    j["delta_phi"] = m.delta_phi;
    j["rms"] = m.rms;
    j["time_lag"] = m.time_lag;
    j["rpe_mean"] = m.rpe_series.values.mean();
    return j;
}

ordered_json aggregate_json(const std::vector<TrialMetrics>& ms) {
    std::vector<double> rho, phi, rms, lag, rpe;
    for (const auto& m : ms) {
        rho.push_back(m.rho_g);
        phi.push_back(m.delta_phi);
        rms.push_back(m.rms);
        lag.push_back(m.time_lag);
        rpe.push_back(m.rpe_series.values.mean());
    }
    const auto pack = [](const MetricAggregate& a) {
        return ordered_json{{"mean", a.mean}, {"sd", a.sd}};
    };
    ordered_json j;
    j["rho_g"] = pack(aggregate(rho));
    j["delta_phi"] = pack(aggregate(phi));
    j["rms"] = pack(aggregate(rms));
    j["time_lag"] = pack(aggregate(lag));
    j["rpe_mean"] = pack(aggregate(rpe));
    return j;
}

void write_json(const std::string& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

void write_simulate_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                              const std::string& config_snapshot) {
    ensure_dir(out_dir);
    const GroupTimeSeries ts = simulate_vp_group(cfg);
    write_timeseries_csv((fs::path(out_dir) / "timeseries.csv").string(), ts);

    const Topology topo = cfg.topology.build();
    const TrialMetrics m = trial_metrics(ts, topo, cfg.target_player, cfg.transient);
    ordered_json j;
    j["trial"] = 0;
    j["metrics"] = metrics_json(m);
    write_json((fs::path(out_dir) / "metrics.json").string(), j);
    write_text_file((fs::path(out_dir) / "config.snapshot").string(), config_snapshot);
}

void write_train_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                           const std::string& config_snapshot, bool progress) {
    ensure_dir(out_dir);
    const auto on_trial = [&](const TrainLogRow& row) {
        if (progress && row.trial % 50 == 0)
            std::cerr << "trial " << row.trial << ": rms_tp=" << row.rms_tp
                      << " rms_cp=" << row.rms_cp << " eps=" << row.epsilon << '\n';
    };
    const TrainResult result = train_cp(cfg, on_trial);
    write_training_log_csv((fs::path(out_dir) / "training_log.csv").string(), result.log);
    save_network(result.net, (fs::path(out_dir) / "checkpoint.qnet").string());

    ordered_json j;
    j["trials_run"] = result.trials_run;
    j["terminated"] = result.terminated;
    constexpr int kWindow = 50;
    const int n = static_cast<int>(result.log.size());
    const int w = std::min(kWindow, n);
    double tp = 0, cp = 0;
    for (int i = n - w; i < n; ++i) {
        tp += result.log[i].rms_tp;
        cp += result.log[i].rms_cp;
    }
    j["trailing_rms_tp"] = tp / w;
    j["trailing_rms_cp"] = cp / w;
    write_json((fs::path(out_dir) / "metrics.json").string(), j);
    write_text_file((fs::path(out_dir) / "config.snapshot").string(), config_snapshot);
}

void write_validate_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                              const std::string& config_snapshot, const std::string& checkpoint,
                              TopologyKind kind, int trials) {
    ensure_dir(out_dir);
    const QNetwork net = load_network(checkpoint);
    const ValidationResult r = validate_cp(cfg, net, kind, trials);

    std::string csv = "condition,trial,rho_g,delta_phi,rms,time_lag,rpe_mean\n";
    const auto add_rows = [&csv](const char* cond, const std::vector<TrialMetrics>& ms) {
        for (size_t i = 0; i < ms.size(); ++i) {
            csv += cond;
            csv += ',' + std::to_string(i + 1) + ',' + format_double(ms[i].rho_g) + ',' +
                   format_double(ms[i].delta_phi) + ',' + format_double(ms[i].rms) + ',' +
                   format_double(ms[i].time_lag) + ',' +
                   format_double(ms[i].rpe_series.values.mean()) + '\n';
        }
    };
    add_rows("cp", r.cp);
    add_rows("vp", r.vp);
    write_text_file((fs::path(out_dir) / "validation.csv").string(), csv);

    ordered_json j;
    j["topology"] = to_string(kind);
    j["trials"] = trials;
    ordered_json per_trial = ordered_json::array();
    for (size_t i = 0; i < r.cp.size(); ++i) {
        ordered_json row;
        row["trial"] = i + 1;
        row["cp"] = metrics_json(r.cp[i]);
        row["vp"] = metrics_json(r.vp[i]);
        per_trial.push_back(row);
    }
    j["per_trial"] = per_trial;
    j["aggregate"]["cp"] = aggregate_json(r.cp);
    j["aggregate"]["vp"] = aggregate_json(r.vp);
    write_json((fs::path(out_dir) / "metrics.json").string(), j);
    write_text_file((fs::path(out_dir) / "config.snapshot").string(), config_snapshot);
}

void write_sweep_artifacts(const std::string& out_dir, const ExperimentConfig& cfg,
                           const std::string& config_snapshot, const std::string& checkpoint,
                           int trials) {
    ensure_dir(out_dir);
    const QNetwork net = load_network(checkpoint);
    const std::vector<SweepRow> rows = run_topology_sweep(cfg, net, trials);

    std::string csv = "topology,rho_vp_mean,rho_vp_sd,rho_cp_mean,rho_cp_sd\n";
    ordered_json jrows = ordered_json::array();
    for (const auto& row : rows) {
        csv += to_string(row.kind) + ',' + format_double(row.rho_vp_mean) + ',' +
               format_double(row.rho_vp_sd) + ',' + format_double(row.rho_cp_mean) + ',' +
               format_double(row.rho_cp_sd) + '\n';
        ordered_json jr;
        jr["topology"] = to_string(row.kind);
        jr["rho_vp"] = ordered_json{{"mean", row.rho_vp_mean}, {"sd", row.rho_vp_sd}};
        jr["rho_cp"] = ordered_json{{"mean", row.rho_cp_mean}, {"sd", row.rho_cp_sd}};
        jrows.push_back(jr);
    }
    write_text_file((fs::path(out_dir) / "sweep.csv").string(), csv);
    ordered_json j;
    j["topologies"] = jrows;
    write_json((fs::path(out_dir) / "metrics.json").string(), j);
    write_text_file((fs::path(out_dir) / "config.snapshot").string(), config_snapshot);
}

void write_analyze_artifacts(const std::string& in_dir, const std::string& out_dir,
                             double transient) {
    ensure_dir(out_dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().extension() != ".csv") continue;
        std::ifstream probe(entry.path());
        std::string header;
        if (std::getline(probe, header) && header.rfind("t,", 0) == 0)
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no time-series CSV files in " + in_dir);

    ordered_json jfiles = ordered_json::array();
    std::vector<double> rho_all;
    for (const auto& file : files) {
        const GroupTimeSeries ts = read_timeseries_csv(file);
        ordered_json jf;
        jf["file"] = fs::path(file).filename().string();

        std::vector<TimeSeries> positions;
        for (int k = 0; k < ts.players(); ++k)
            positions.push_back(post_transient(ts.position_series(k), transient));
        const double rho = group_sync_index(positions);
        jf["rho_g"] = rho;
        rho_all.push_back(rho);

        // Per player vs the mean of all others (complete-graph reading).
        ordered_json jplayers = ordered_json::array();
        for (int k = 0; k < ts.players(); ++k) {
            TimeSeries xbar, vbar;
            xbar.dt = vbar.dt = ts.dt;
            Eigen::VectorXd xs = Eigen::VectorXd::Zero(ts.samples());
            Eigen::VectorXd vs = Eigen::VectorXd::Zero(ts.samples());
            for (int j = 0; j < ts.players(); ++j) {
                if (j == k) continue;
                xs += ts.x.col(j);
                vs += ts.v.col(j);
            }
            xbar.values = xs / static_cast<double>(ts.players() - 1);
            vbar.values = vs / static_cast<double>(ts.players() - 1);
            const TimeSeries xbar_c = post_transient(xbar, transient);
            const TimeSeries vbar_c = post_transient(vbar, transient);
            const TimeSeries xp_c = post_transient(ts.position_series(k), transient);
            ordered_json jp;
            jp["player"] = k + 1;
            jp["rms"] = rms_to_mean(xp_c, xbar_c);
            jp["delta_phi"] = relative_phase_error(xbar_c, xp_c);
            jp["time_lag"] = time_lag(xbar_c, xp_c, std::min(2.0, 0.25 * xbar_c.duration()));
            jp["rpe_mean"] = relative_position_error(xbar_c, vbar_c, xp_c).values.mean();
            jplayers.push_back(jp);
        }
        jf["players"] = jplayers;
        jfiles.push_back(jf);
    }

    ordered_json j;
    j["files"] = jfiles;
    const MetricAggregate agg = aggregate(rho_all);
    j["aggregate"]["rho_g"] = ordered_json{{"mean", agg.mean}, {"sd", agg.sd}};
    write_json((fs::path(out_dir) / "metrics.json").string(), j);
}

}  // namespace mg
