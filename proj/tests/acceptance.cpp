// Acceptance gate: eight end-to-end criteria, one PASS/FAIL line each.
// Usage: acceptance --cli /path/to/mirrorgame
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mirrorgame/analysis.hpp"
#include "mirrorgame/config.hpp"
#include "mirrorgame/dqn.hpp"
#include "mirrorgame/harness.hpp"
#include "mirrorgame/io.hpp"
#include "mirrorgame/neural_net.hpp"
#include "mirrorgame/rng.hpp"
#include "mirrorgame/virtual_player.hpp"

namespace fs = std::filesystem;
using namespace mg;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

std::string g_cli_path;                 // mirrorgame binary under test
std::optional<QNetwork> g_trained_net;  // first converged full-scale checkpoint

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------- criterion 1

double masked_loss(const QNetwork& net, const Eigen::VectorXd& in, const Eigen::VectorXd& target,
                   int action) {
    const double d = target[action] - forward(net, in)[action];
    return 0.5 * d * d;
}

Outcome criterion_gradients() {
    constexpr double kEps = 1e-5;
    constexpr double kTol = 1e-4;
    double worst = 0;
    for (int rep = 0; rep < 100; ++rep) {
        RngStream rng = make_stream(4001, {static_cast<std::uint32_t>(rep)});
        std::vector<int> sizes;
        if (rep % 10 == 0) {
            sizes = production_layer_sizes();
        } else {
            sizes.push_back(2 + static_cast<int>(uniform_index(rng, 5)));
            const int hidden = 1 + static_cast<int>(uniform_index(rng, 2));
            for (int l = 0; l < hidden; ++l)
                sizes.push_back(3 + static_cast<int>(uniform_index(rng, 18)));
            sizes.push_back(2 + static_cast<int>(uniform_index(rng, 8)));
        }
        QNetwork net = make_qnetwork(sizes, rng);
        Eigen::VectorXd in(sizes.front()), target(sizes.back());
        for (int i = 0; i < in.size(); ++i) in[i] = uniform_real(rng, -2, 2);
        for (int i = 0; i < target.size(); ++i) target[i] = uniform_real(rng, -2, 2);
        const int action = static_cast<int>(uniform_index(rng, sizes.back()));

        const Gradients an = backward(net, in, target, action);
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            auto probe = [&](double* p, double analytic) {
                const double keep = *p;
                *p = keep + kEps;
                const double up = masked_loss(net, in, target, action);
                *p = keep - kEps;
                const double dn = masked_loss(net, in, target, action);
                *p = keep;
                const double fd = (up - dn) / (2 * kEps);
                const double rel =
                    std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8});
                worst = std::max(worst, rel);
            };
            auto& W = net.layers[l].W;
            for (int r = 0; r < W.rows(); ++r)
                for (int c = 0; c < W.cols(); ++c) probe(&W(r, c), an.dW[l](r, c));
            auto& b = net.layers[l].b;
            for (int r = 0; r < b.size(); ++r) probe(&b[r], an.db[l][r]);
        }
        if (worst > kTol)
            return {false, fmt("rep %d: max relative error %.3g > %.0e", rep, worst, kTol)};
    }
    return {true, fmt("100 networks, max relative error %.3g", worst)};
}

// ---------------------------------------------------------------- criterion 2

Outcome criterion_vp_control() {
    constexpr int kGrid = 1000000;
    const ControlBounds bounds;
    const VpControlParams p;
    const HkbParams hkb;
    const double du = (bounds.u_max - bounds.u_min) / (kGrid - 1);

    RngStream rng = make_stream(4002, {0});
    double worst = 0;
    int clipped = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        OscillatorState s;
        NeighborMean nb;
        double rds;
        if (rep % 10 < 7) {  // mostly interior minima
            s.x = uniform_real(rng, -0.3, 0.3);
            s.v = uniform_real(rng, -0.5, 0.5);
            nb.r_p = s.x + uniform_real(rng, -0.3, 0.3);
            nb.rdot_p = s.v + uniform_real(rng, -1, 1);
            rds = uniform_real(rng, -1.2, 1.2);
        } else {  // wide draws exercise the clipping branch
            s.x = uniform_real(rng, -1.5, 1.5);
            s.v = uniform_real(rng, -2, 2);
            nb.r_p = uniform_real(rng, -1.5, 1.5);
            nb.rdot_p = uniform_real(rng, -2, 2);
            rds = uniform_real(rng, -1.5, 1.5);
        }

        // Independent surrogate: one-step prediction errors at candidate u.
        const double h = p.horizon;
        const double f = -(hkb.alpha * s.x * s.x + hkb.beta * s.v * s.v - hkb.gamma_damp) * s.v -
                         hkb.omega * hkb.omega * s.x;
        const double a = s.x + h * s.v + h * h * f - nb.r_p;
        const double b = s.v + h * f - rds;
        const double c = s.v + h * f - nb.rdot_p;

        double best_u = bounds.u_min, best_j = std::numeric_limits<double>::infinity();
        for (int i = 0; i < kGrid; ++i) {
            const double u = bounds.u_min + du * i;
            const double ep = a + h * h * u, es = b + h * u, ev = c + h * u;
            const double j = 0.5 * p.theta_p * ep * ep + 0.5 * p.theta_sigma * h * es * es +
                             0.5 * p.theta_v * h * ev * ev + 0.5 * p.eta * h * u * u;
            if (j < best_j) {
                best_j = j;
                best_u = u;
            }
        }
        const double u_lib = vp_control(s, nb, rds, p, hkb, bounds);
        if (std::abs(u_lib) >= bounds.u_max - 1e-12) ++clipped;
        worst = std::max(worst, std::abs(u_lib - best_u));
        if (worst > du)
            return {false, fmt("rep %d: |closed form - grid argmin| %.3g > grid step %.3g", rep,
                               worst, du)};
    }
    return {true, fmt("1000 inputs (%d clipped), max |deviation| %.2e <= grid step %.2e", clipped,
                      worst, du)};
}

// ---------------------------------------------------------------- criterion 3

bool toy_mdp_policy_recovered(std::uint64_t seed, long iters) {
    const double g = 0.95;
    const double r_stay0 = -0.2, r_switch = -0.6, r_stay1 = 0.0;
    auto encode = [](int s) {
        AgentObservation o;
        o.x = s == 0 ? 1.0 : 0.0;
        o.xbar = s == 1 ? 1.0 : 0.0;
        return o;
    };

    RngStream rng = make_stream(seed, {21});
    QNetwork net = make_qnetwork({4, 64, 32, 2}, rng);
    QNetwork target = make_qnetwork({4, 64, 32, 2}, rng);
    clone_into(net, target);

    DqnHyperParams hp;
    hp.discount = g;
    hp.batch_size = 32;
    hp.buffer_capacity = 4096;
    hp.target_update_period = 100;
    ReplayBuffer buf(hp.buffer_capacity);

    TrainStep ts;
    ts.learning_rate = 1e-2;
    ts.momentum = 0.9;
    int s = 0;
    for (long it = 1; it <= iters; ++it) {
        const int a = static_cast<int>(uniform_index(rng, 2));
        const int ns = a == 0 ? s : 1 - s;
        Transition tr;
        tr.state = encode(s);
        tr.action = a;
        tr.next_state = encode(ns);
        tr.reward = a == 1 ? r_switch : (s == 0 ? r_stay0 : r_stay1);
        buf.push(tr);
        s = ns;
        train_batch(net, target, buf, hp, ts, rng);
        maybe_sync_target(it, hp, net, target);
    }
    return greedy_action(net, encode(0)) == 1 && greedy_action(net, encode(1)) == 0;
}

Outcome criterion_toy_mdp() {
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
        if (toy_mdp_policy_recovered(seed, 8000)) ++hits;
    return {hits >= 19, fmt("value-iteration policy recovered in %d/20 seeds (need >= 19)", hits)};
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion_phase_pipeline() {
    const double dt = 0.03, freq = 0.5;
    const int n = static_cast<int>(60.0 / dt) + 1;
    TimeSeries cosine{Eigen::VectorXd(n), dt};
    for (int i = 0; i < n; ++i) cosine.values[i] = std::cos(2 * M_PI * freq * dt * i);

    const PhaseSeries ph = hilbert_phase(cosine);
    double worst = 0;
    for (int i = ph.valid_begin + 1; i + 1 < ph.valid_end; ++i) {
        const double f_inst = (ph.theta[i + 1] - ph.theta[i - 1]) / (2 * dt) / (2 * M_PI);
        worst = std::max(worst, std::abs(f_inst - freq) / freq);
    }
    if (worst > 0.01)
        return {false, fmt("instantaneous frequency off by %.3g%% > 1%%", worst * 100)};

    std::vector<TimeSeries> identical(4, cosine);
    const double rho_same = group_sync_index(identical);
    if (std::abs(rho_same - 1.0) > 1e-9)
        return {false, fmt("rho_g of identical signals %.12f not within 1e-9 of 1", rho_same)};

    const double offsets[4] = {0.0, 0.4, 0.9, 1.4};
    std::vector<TimeSeries> shifted;
    for (double c : offsets) {
        TimeSeries ts{Eigen::VectorXd(n), dt};
        for (int i = 0; i < n; ++i) ts.values[i] = std::cos(2 * M_PI * freq * dt * i + c);
        shifted.push_back(ts);
    }
    const double rho_off = group_sync_index(shifted);
    if (std::abs(rho_off - 1.0) > 1e-6)
        return {false, fmt("rho_g of constant-offset copies %.9f not within 1e-6 of 1", rho_off)};

    return {true, fmt("frequency error %.3g%%, rho_g(identical) - 1 = %.1e, "
                      "rho_g(offsets) - 1 = %.1e",
                      worst * 100, rho_same - 1.0, rho_off - 1.0)};
}

// ---------------------------------------------------------------- criterion 5

Outcome criterion_training_convergence() {
    ExperimentConfig desk;
    desk.finalize();
    const TrainResult dr = train_cp(desk);
    const int nrows = static_cast<int>(dr.log.size());
    if (nrows < 100) return {false, fmt("desk run produced only %d trials", nrows)};
    double first = 0, trail = 0;
    for (int i = 0; i < 50; ++i) first += std::abs(dr.log[i].rms_tp - dr.log[i].rms_cp);
    for (int i = nrows - 50; i < nrows; ++i)
        trail += std::abs(dr.log[i].rms_tp - dr.log[i].rms_cp);
    first /= 50;
    trail /= 50;
    if (!(trail <= 0.5 * first))
        return {false, fmt("desk trailing-50 mean %.4f > half of first-50 mean %.4f", trail,
                           first)};

    int fired = 0;
    std::vector<int> stop_trials;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ExperimentConfig full;
        full.seed = seed;
        full.trial_count = 1500;
        full.finalize();
        const TrainResult fr = train_cp(full);
        if (fr.terminated && fr.trials_run < 1500) {
            ++fired;
            stop_trials.push_back(fr.trials_run);
            if (!g_trained_net) g_trained_net = fr.net;
        }
    }
    std::ostringstream stops;
    for (std::size_t i = 0; i < stop_trials.size(); ++i)
        stops << (i ? "," : "") << stop_trials[i];
    if (fired * 2 < 5)
        return {false, fmt("desk ratio %.3f ok, but full-scale termination fired in only %d/5 "
                           "seeds",
                           trail / first, fired)};
    return {true, fmt("desk trail/first ratio %.3f <= 0.5; full-scale termination in %d/5 seeds "
                      "(trials %s)",
                      trail / first, fired, stops.str().c_str())};
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion_substitution_fidelity() {
    if (!g_trained_net) return {false, "no converged checkpoint from criterion 5"};
    ExperimentConfig cfg;
    cfg.seed = 101;
    cfg.finalize();
    const ValidationResult vr = validate_cp(cfg, *g_trained_net, TopologyKind::complete, 20);
    if (vr.cp.size() != 20 || vr.vp.size() != 20)
        return {false, fmt("expected 20 trials, got %zu CP / %zu VP", vr.cp.size(), vr.vp.size())};

    auto mean_of = [](const std::vector<TrialMetrics>& rows, double TrialMetrics::*field) {
        double acc = 0;
        for (const auto& r : rows) acc += r.*field;
        return acc / static_cast<double>(rows.size());
    };
    const double rms_cp = mean_of(vr.cp, &TrialMetrics::rms);
    const double rms_vp = mean_of(vr.vp, &TrialMetrics::rms);
    const double dphi_cp = mean_of(vr.cp, &TrialMetrics::delta_phi);
    const double dphi_vp = mean_of(vr.vp, &TrialMetrics::delta_phi);
    const double dphi_gap = std::abs(dphi_cp - dphi_vp);

    // One-sided: the substitute must not track worse than 1.5x the baseline.
    // Tracking better is the expected direction for a signature-free agent.
    const bool rms_ok = rms_cp <= 1.5 * rms_vp;
    const bool dphi_ok = dphi_gap <= 0.25;
    return {rms_ok && dphi_ok,
            fmt("CP rms %.4f vs VP rms %.4f (ratio %.2f, need <= 1.5); |dPhi gap| %.4f rad "
                "(need <= 0.25)",
                rms_cp, rms_vp, rms_cp / rms_vp, dphi_gap)};
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion_topology_sweep() {
    if (!g_trained_net) return {false, "no converged checkpoint from criterion 5"};
    int hits = 0;
    double worst_gap = 0;
    for (std::uint64_t seed = 201; seed <= 220; ++seed) {
        ExperimentConfig cfg;
        cfg.seed = seed;
        cfg.finalize();
        const std::vector<SweepRow> rows = run_topology_sweep(cfg, *g_trained_net);
        double vp_of[4] = {0, 0, 0, 0};
        bool gaps_ok = true;
        for (const auto& r : rows) {
            const double gap = std::abs(r.rho_cp_mean - r.rho_vp_mean);
            worst_gap = std::max(worst_gap, gap);
            if (gap > 0.1) gaps_ok = false;
            vp_of[static_cast<int>(r.kind)] = r.rho_vp_mean;
        }
        const double hi = std::min(vp_of[static_cast<int>(TopologyKind::complete)],
                                   vp_of[static_cast<int>(TopologyKind::star)]);
        const double lo = std::max(vp_of[static_cast<int>(TopologyKind::ring)],
                                   vp_of[static_cast<int>(TopologyKind::path)]);
        if (gaps_ok && hi >= lo) ++hits;
    }
    return {hits >= 16, fmt("gap <= 0.1 and complete/star >= ring/path in %d/20 seeds "
                            "(need >= 16); worst |rho gap| %.3f",
                            hits, worst_gap)};
}

// ---------------------------------------------------------------- criterion 8

bool run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = g_cli_path + " " + args + " >" + log.string() + " 2>&1";
    return std::system(cmd.c_str()) == 0;
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
    auto listing = [](const fs::path& dir) {
        std::map<std::string, std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (!e.is_regular_file()) continue;
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream bytes;
            bytes << in.rdbuf();
            files[fs::relative(e.path(), dir).string()] = bytes.str();
        }
        return files;
    };
    const auto fa = listing(a), fb = listing(b);
    if (fa.size() != fb.size()) {
        why = fmt("%zu vs %zu files", fa.size(), fb.size());
        return false;
    }
    for (const auto& [name, bytes] : fa) {
        const auto it = fb.find(name);
        if (it == fb.end()) {
            why = name + " missing from second run";
            return false;
        }
        if (it->second != bytes) {
            why = name + " differs";
            return false;
        }
    }
    return true;
}

Outcome criterion_cli_determinism() {
    if (g_cli_path.empty()) return {false, "no --cli path given"};
    if (!g_trained_net) return {false, "no converged checkpoint from criterion 5"};

    const fs::path root = fs::temp_directory_path() / "mirrorgame_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    const fs::path cfg_path = root / "small.ini";
    write_text_file(cfg_path.string(),
                    "[run]\ntrials = 25\ntrial_length = 200\neval_steps = 600\n"
                    "sweep_trials = 2\n");
    const fs::path ckpt = root / "trained.qnet";
    save_network(*g_trained_net, ckpt.string());

    const std::string cfg_arg = " --config " + cfg_path.string();
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "simulate" + cfg_arg + " --seed 7 --out "},
        {"train", "train" + cfg_arg + " --seed 9 --trials 25 --out "},
        {"validate", "validate" + cfg_arg + " --checkpoint " + ckpt.string() +
                         " --topology star --trials 3 --seed 2 --out "},
        {"sweep", "sweep" + cfg_arg + " --checkpoint " + ckpt.string() +
                      " --trials 2 --seed 3 --out "},
    };

    for (const auto& [name, prefix] : commands) {
        const fs::path d1 = root / (name + "_1"), d2 = root / (name + "_2");
        if (!run_cli(prefix + d1.string(), root / (name + "_1.log")) ||
            !run_cli(prefix + d2.string(), root / (name + "_2.log")))
            return {false, name + " invocation failed, see " + (root / (name + "_1.log")).string()};
        std::string why;
        if (!dirs_identical(d1, d2, why)) return {false, name + ": " + why};
    }

    // analyze re-reads the simulate artifacts.
    const fs::path a1 = root / "analyze_1", a2 = root / "analyze_2";
    const std::string in_arg = (root / "simulate_1").string();
    if (!run_cli("analyze --in " + in_arg + " --out " + a1.string(), root / "analyze_1.log") ||
        !run_cli("analyze --in " + in_arg + " --out " + a2.string(), root / "analyze_2.log"))
        return {false, "analyze invocation failed"};
    std::string why;
    if (!dirs_identical(a1, a2, why)) return {false, "analyze: " + why};

    fs::remove_all(root);
    return {true, "simulate/train/validate/sweep/analyze each byte-identical across two runs"};
}

// -----------------------------------------------------------------------------

int run_all() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"backprop gradients vs central finite differences", criterion_gradients},
        {"closed-form vp control vs 1e6-point grid search", criterion_vp_control},
        {"toy-MDP policy recovery across 20 seeds", criterion_toy_mdp},
        {"Hilbert phase pipeline and group sync index", criterion_phase_pipeline},
        {"training convergence trend and termination", criterion_training_convergence},
        {"substitution fidelity on the complete graph", criterion_substitution_fidelity},
        {"topology sweep sync gap and ordering", criterion_topology_sweep},
        {"CLI artifact byte determinism", criterion_cli_determinism},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu (%s): %s - %s [%.1f s]\n", i + 1, criteria[i].first.c_str(),
                    out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];
    if (g_cli_path.empty()) std::fprintf(stderr, "warning: --cli not given, criterion 8 fails\n");
    return run_all();
}
