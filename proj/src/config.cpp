#include "mirrorgame/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mg {

namespace fs = std::filesystem;

Topology TopologySpec::build() const {
    if (kind == TopologyKind::custom) return topology_from_edges(n, edges);
    return make_topology(kind, n, center);
}

void ExperimentConfig::finalize() {
    chains.clear();
    chains.reserve(n_players);
    SignatureChain shared;
    if (!chain_file_all.empty())
        shared = load_signature_chain_file(chain_file_all);
    else
        shared = default_signature_chain();
    for (int k = 0; k < n_players; ++k) {
        if (k < static_cast<int>(chain_file_per_player.size()) &&
            !chain_file_per_player[k].empty())
            chains.push_back(load_signature_chain_file(chain_file_per_player[k]));
        else
            chains.push_back(shared);
    }
    validate();
}

void ExperimentConfig::validate() const {
    if (trial_count < 1) throw std::invalid_argument("config: trials must be positive");
    if (trial_length < 100) throw std::invalid_argument("config: trial_length must be at least 100");
    if (!(dt > 0 && dt <= 0.1)) throw std::invalid_argument("config: dt must be in (0, 0.1]");
    if (n_players < 2) throw std::invalid_argument("config: need at least 2 players");
    if (target_player < 0 || target_player >= n_players)
        throw std::invalid_argument("config: target_player out of range");
    if (topology.n != n_players)
        throw std::invalid_argument("config: topology size must equal player count");
    if (!(hkb.omega > 0)) throw std::invalid_argument("config: omega must be positive");
    if (!(transient >= 0)) throw std::invalid_argument("config: transient must be non-negative");
    if (transient >= trial_length * dt)
        throw std::invalid_argument("config: transient must be shorter than a trial");
    if (eval_steps < 100) throw std::invalid_argument("config: eval_steps must be at least 100");
    if (sweep_trials < 1) throw std::invalid_argument("config: sweep_trials must be positive");
    if (!(learning_rate >= 0))
        throw std::invalid_argument("config: learning_rate must be non-negative");
    if (!(momentum >= 0 && momentum < 1))
        throw std::invalid_argument("config: momentum must be in [0, 1)");
    if (!(eps_term >= 0)) throw std::invalid_argument("config: eps_term must be non-negative");
    if (!(workspace > 0)) throw std::invalid_argument("config: workspace must be positive");
    vp.validate();
    vp_bounds.validate();
    dqn.validate();
    if (static_cast<int>(chains.size()) != n_players)
        throw std::invalid_argument("config: need one signature chain per player");
    for (const auto& c : chains) c.validate();
    topology.build();  // throws on malformed topologies
}

namespace {

struct RawConfig {
    // section -> key -> (value, line number)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

RawConfig read_raw(std::istream& in) {
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": empty section name");
            raw.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": key outside any section");
        auto [it, inserted] = raw.sections[section].emplace(key, std::make_pair(value, lineno));
        if (!inserted)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + key + "'");
    }
    return raw;
}

// Tracks which keys were consumed so leftovers can be rejected.
class SectionReader {
  public:
    SectionReader(RawConfig& raw, std::string name) : raw_(raw), name_(std::move(name)) {}

    bool has(const std::string& key) const {
        auto sec = raw_.sections.find(name_);
        return sec != raw_.sections.end() && sec->second.count(key) > 0;
    }

    std::string take(const std::string& key) {
        auto& sec = raw_.sections.at(name_);
        auto it = sec.find(key);
        const std::string value = it->second.first;
        sec.erase(it);
        return value;
    }

    template <typename T, typename Parse>
    void get(const std::string& key, T& out, Parse parse) {
        if (!has(key)) return;
        const std::string value = take(key);
        try {
            out = parse(value);
        } catch (const std::exception& e) {
            throw std::invalid_argument("config: bad value for " + name_ + "." + key + ": " +
                                        e.what());
        }
    }

    void get_double(const std::string& key, double& out) {
        get(key, out, [](const std::string& v) {
            size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return d;
        });
    }

    void get_int(const std::string& key, int& out) {
        get(key, out, [](const std::string& v) {
            size_t pos = 0;
            const long l = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing characters");
            return static_cast<int>(l);
        });
    }

    void get_long(const std::string& key, long& out) {
        get(key, out, [](const std::string& v) {
            size_t pos = 0;
            return std::stol(v, &pos);
        });
    }

    void get_u64(const std::string& key, std::uint64_t& out) {
        get(key, out, [](const std::string& v) { return std::stoull(v); });
    }

    void get_size(const std::string& key, std::size_t& out) {
        get(key, out, [](const std::string& v) { return static_cast<std::size_t>(std::stoull(v)); });
    }

    void get_string(const std::string& key, std::string& out) {
        get(key, out, [](const std::string& v) { return v; });
    }

  private:
    RawConfig& raw_;
    std::string name_;
};

std::vector<std::pair<int, int>> parse_edges(const std::string& text) {
    // "1-2, 2-3, 3-4" with 1-based node labels.
    std::vector<std::pair<int, int>> edges;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto dash = item.find('-');
        if (dash == std::string::npos)
            throw std::invalid_argument("edge '" + item + "' must look like a-b");
        const int a = std::stoi(trim(item.substr(0, dash)));
        const int b = std::stoi(trim(item.substr(dash + 1)));
        if (a < 1 || b < 1) throw std::invalid_argument("edge labels are 1-based");
        edges.emplace_back(a - 1, b - 1);
    }
    if (edges.empty()) throw std::invalid_argument("empty edge list");
    return edges;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
    RawConfig raw = read_raw(in);
    ExperimentConfig cfg;

    static const std::map<std::string, std::vector<std::string>> schema = {
        {"run",
         {"seed", "trials", "trial_length", "dt", "integrator", "target_player", "transient",
          "eval_steps", "sweep_trials"}},
        {"topology", {"kind", "n", "center", "edges"}},
        {"hkb", {"alpha", "beta", "gamma", "omega"}},
        {"vp", {"theta_p", "theta_sigma", "theta_v", "eta", "horizon", "u_min", "u_max", "mode"}},
        {"signature", {"file"}},  // plus per-player file1..fileN checked below
        {"dqn",
         {"discount", "eps_max", "eps_min", "eps_decay_tau", "target_update_period", "batch_size",
          "buffer_capacity", "eta_effort", "learning_rate", "momentum", "eps_term", "workspace"}},
    };
    for (const auto& [name, keys] : raw.sections) {
        if (schema.find(name) == schema.end())
            throw std::invalid_argument("config: unknown section [" + name + "]");
    }

    SectionReader run(raw, "run");
    run.get_u64("seed", cfg.seed);
    run.get_int("trials", cfg.trial_count);
    run.get_int("trial_length", cfg.trial_length);
    run.get_double("dt", cfg.dt);
    run.get("integrator", cfg.method, [](const std::string& v) {
        if (v == "euler") return IntegrationMethod::euler;
        if (v == "rk4") return IntegrationMethod::rk4;
        throw std::invalid_argument("must be euler or rk4");
    });
    const bool explicit_target = run.has("target_player");
    {
        int one_based = cfg.target_player + 1;
        run.get_int("target_player", one_based);
        cfg.target_player = one_based - 1;
    }
    run.get_double("transient", cfg.transient);
    run.get_int("eval_steps", cfg.eval_steps);
    run.get_int("sweep_trials", cfg.sweep_trials);

    SectionReader topo(raw, "topology");
    topo.get("kind", cfg.topology.kind,
             [](const std::string& v) { return topology_kind_from_string(v); });
    topo.get_int("n", cfg.topology.n);
    {
        int one_based = cfg.topology.center + 1;
        topo.get_int("center", one_based);
        cfg.topology.center = one_based - 1;
    }
    if (topo.has("edges")) cfg.topology.edges = parse_edges(topo.take("edges"));
    cfg.n_players = cfg.topology.n;
    // The default target is the last player; explicit choices are validated
    // against the final player count instead.
    if (!explicit_target) cfg.target_player = cfg.n_players - 1;

    SectionReader hkb(raw, "hkb");
    hkb.get_double("alpha", cfg.hkb.alpha);
    hkb.get_double("beta", cfg.hkb.beta);
    hkb.get_double("gamma", cfg.hkb.gamma_damp);
    hkb.get_double("omega", cfg.hkb.omega);

    SectionReader vp(raw, "vp");
    if (vp.has("mode")) {
        const VpMode mode = vp_mode_from_string(vp.take("mode"));
        cfg.vp = leader_follower_mix(cfg.vp, mode);
    }
    vp.get_double("theta_p", cfg.vp.theta_p);
    vp.get_double("theta_sigma", cfg.vp.theta_sigma);
    vp.get_double("theta_v", cfg.vp.theta_v);
    vp.get_double("eta", cfg.vp.eta);
    vp.get_double("horizon", cfg.vp.horizon);
    vp.get_double("u_min", cfg.vp_bounds.u_min);
    vp.get_double("u_max", cfg.vp_bounds.u_max);

    SectionReader sig(raw, "signature");
    const auto resolve = [&base_dir](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path.string() : (fs::path(base_dir) / path).string();
    };
    if (sig.has("file")) cfg.chain_file_all = resolve(sig.take("file"));
    cfg.chain_file_per_player.assign(cfg.n_players, "");
    for (int k = 1; k <= cfg.n_players; ++k) {
        const std::string key = "file" + std::to_string(k);
        if (sig.has(key)) cfg.chain_file_per_player[k - 1] = resolve(sig.take(key));
    }

    SectionReader dqn(raw, "dqn");
    dqn.get_double("discount", cfg.dqn.discount);
    dqn.get_double("eps_max", cfg.dqn.eps_max);
    dqn.get_double("eps_min", cfg.dqn.eps_min);
    dqn.get_double("eps_decay_tau", cfg.dqn.eps_decay_tau);
    dqn.get_long("target_update_period", cfg.dqn.target_update_period);
    dqn.get_int("batch_size", cfg.dqn.batch_size);
    dqn.get_size("buffer_capacity", cfg.dqn.buffer_capacity);
    dqn.get_double("eta_effort", cfg.dqn.eta_effort);
    dqn.get_double("learning_rate", cfg.learning_rate);
    dqn.get_double("momentum", cfg.momentum);
    dqn.get_double("eps_term", cfg.eps_term);
    dqn.get_double("workspace", cfg.workspace);

    for (const auto& [name, keys] : raw.sections) {
        if (!keys.empty()) {
            const auto& [key, entry] = *keys.begin();
            throw std::invalid_argument("config line " + std::to_string(entry.second) +
                                        ": unknown key '" + key + "' in section [" + name + "]");
        }
    }

    cfg.finalize();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(in, fs::path(path).parent_path().string().empty()
                                ? "."
                                : fs::path(path).parent_path().string());
}

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[run]\n";
    out << "seed = " << cfg.seed << '\n';
    out << "trials = " << cfg.trial_count << '\n';
    out << "trial_length = " << cfg.trial_length << '\n';
    out << "dt = " << fmt(cfg.dt) << '\n';
    out << "integrator = " << (cfg.method == IntegrationMethod::rk4 ? "rk4" : "euler") << '\n';
    out << "target_player = " << cfg.target_player + 1 << '\n';
    out << "transient = " << fmt(cfg.transient) << '\n';
    out << "eval_steps = " << cfg.eval_steps << '\n';
    out << "sweep_trials = " << cfg.sweep_trials << '\n';
    out << "\n[topology]\n";
    out << "kind = " << to_string(cfg.topology.kind) << '\n';
    out << "n = " << cfg.topology.n << '\n';
    if (cfg.topology.kind == TopologyKind::star) out << "center = " << cfg.topology.center + 1 << '\n';
    if (cfg.topology.kind == TopologyKind::custom) {
        out << "edges = ";
        for (size_t i = 0; i < cfg.topology.edges.size(); ++i) {
            if (i) out << ", ";
            out << cfg.topology.edges[i].first + 1 << '-' << cfg.topology.edges[i].second + 1;
        }
        out << '\n';
    }
    out << "\n[hkb]\n";
    out << "alpha = " << fmt(cfg.hkb.alpha) << '\n';
    out << "beta = " << fmt(cfg.hkb.beta) << '\n';
    out << "gamma = " << fmt(cfg.hkb.gamma_damp) << '\n';
    out << "omega = " << fmt(cfg.hkb.omega) << '\n';
    out << "\n[vp]\n";
    out << "theta_p = " << fmt(cfg.vp.theta_p) << '\n';
    out << "theta_sigma = " << fmt(cfg.vp.theta_sigma) << '\n';
    out << "theta_v = " << fmt(cfg.vp.theta_v) << '\n';
    out << "eta = " << fmt(cfg.vp.eta) << '\n';
    out << "horizon = " << fmt(cfg.vp.horizon) << '\n';
    out << "u_min = " << fmt(cfg.vp_bounds.u_min) << '\n';
    out << "u_max = " << fmt(cfg.vp_bounds.u_max) << '\n';
    if (!cfg.chain_file_all.empty() ||
        std::any_of(cfg.chain_file_per_player.begin(), cfg.chain_file_per_player.end(),
                    [](const std::string& s) { return !s.empty(); })) {
        out << "\n[signature]\n";
        if (!cfg.chain_file_all.empty()) out << "file = " << cfg.chain_file_all << '\n';
        for (size_t k = 0; k < cfg.chain_file_per_player.size(); ++k)
            if (!cfg.chain_file_per_player[k].empty())
                out << "file" << k + 1 << " = " << cfg.chain_file_per_player[k] << '\n';
    }
    out << "\n[dqn]\n";
    out << "discount = " << fmt(cfg.dqn.discount) << '\n';
    out << "eps_max = " << fmt(cfg.dqn.eps_max) << '\n';
    out << "eps_min = " << fmt(cfg.dqn.eps_min) << '\n';
    out << "eps_decay_tau = " << fmt(cfg.dqn.eps_decay_tau) << '\n';
    out << "target_update_period = " << cfg.dqn.target_update_period << '\n';
    out << "batch_size = " << cfg.dqn.batch_size << '\n';
    out << "buffer_capacity = " << cfg.dqn.buffer_capacity << '\n';
    out << "eta_effort = " << fmt(cfg.dqn.eta_effort) << '\n';
    out << "learning_rate = " << fmt(cfg.learning_rate) << '\n';
    out << "momentum = " << fmt(cfg.momentum) << '\n';
    out << "eps_term = " << fmt(cfg.eps_term) << '\n';
    out << "workspace = " << fmt(cfg.workspace) << '\n';
    return out.str();
}

}  // namespace mg
