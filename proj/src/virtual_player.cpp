#include "mirrorgame/virtual_player.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mg {

void VpControlParams::validate() const {
    if (theta_p < 0 || theta_sigma < 0 || theta_v < 0)
        throw std::invalid_argument("control weights must be non-negative");
    if (std::abs(theta_p + theta_sigma + theta_v - 1.0) > 1e-9)
        throw std::invalid_argument("control weights must sum to 1");
    if (!(eta > 0)) throw std::invalid_argument("effort weight must be positive");
    if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
}

void ControlBounds::validate() const {
    if (!(u_min < u_max)) throw std::invalid_argument("u_min must be below u_max");
}

VpMode vp_mode_from_string(const std::string& s) {
    if (s == "leader") return VpMode::leader;
    if (s == "follower") return VpMode::follower;
    if (s == "joint-improviser") return VpMode::joint_improviser;
    throw std::invalid_argument("unknown vp mode: " + s);
}

std::string to_string(VpMode m) {
    switch (m) {
        case VpMode::leader: return "leader";
        case VpMode::follower: return "follower";
        case VpMode::joint_improviser: return "joint-improviser";
    }
    throw std::logic_error("unreachable");
}

VpControlParams leader_follower_mix(const VpControlParams& p, VpMode mode) {
    VpControlParams out = p;
    switch (mode) {
        case VpMode::leader:
            out.theta_p = 0.1;
            out.theta_sigma = 0.85;
            out.theta_v = 0.05;
            break;
        case VpMode::follower:
            out.theta_p = 0.85;
            out.theta_sigma = 0.1;
            out.theta_v = 0.05;
            break;
        case VpMode::joint_improviser:
            out.theta_p = 0.8;
            out.theta_sigma = 0.15;
            out.theta_v = 0.05;
            break;
    }
    out.validate();
    return out;
}

void SignatureChain::validate() const {
    const int k = state_count();
    if (k < 1) throw std::invalid_argument("chain needs at least one state");
    if (transition.rows() != k || transition.cols() != k)
        throw std::invalid_argument("transition matrix shape must match bin count");
    if (!(dwell > 0)) throw std::invalid_argument("dwell must be positive");
    for (int i = 0; i + 1 < k; ++i)
        if (!(bin_velocities[i] < bin_velocities[i + 1]))
            throw std::invalid_argument("bin velocities must be strictly increasing");
    for (int i = 0; i < k; ++i) {
        if ((transition.row(i).array() < 0).any())
            throw std::invalid_argument("transition entries must be non-negative");
        if (std::abs(transition.row(i).sum() - 1.0) > 1e-9)
            throw std::invalid_argument("transition row " + std::to_string(i) + " must sum to 1");
    }
}

SignatureChain default_signature_chain() {
    SignatureChain c;
    c.bin_velocities.resize(7);
    c.bin_velocities << -1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2;
    c.dwell = 0.8;
    // Anti-persistent rows: the next velocity concentrates near the sign
    // flip of the current one, which keeps the group's collective mode
    // bounded while preserving large swings.
    const int k = 7;
    c.transition.resize(k, k);
    for (int i = 0; i < k; ++i) {
        Eigen::ArrayXd w =
            (-(c.bin_velocities.array() + 0.8 * c.bin_velocities[i]).abs() / 0.6).exp();
        c.transition.row(i) = (w / w.sum()).matrix().transpose();
    }
    c.validate();
    return c;
}

SignatureChain load_signature_chain(std::istream& in) {
    SignatureChain c;
    std::vector<double> bins;
    std::vector<std::vector<double>> rows;
    bool have_dwell = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "bins") {
            double v;
            while (ls >> v) bins.push_back(v);
        } else if (key == "dwell") {
            if (!(ls >> c.dwell)) throw std::invalid_argument("chain file: bad dwell value");
            have_dwell = true;
        } else if (key == "row") {
            std::vector<double> row;
            double v;
            while (ls >> v) row.push_back(v);
            rows.push_back(std::move(row));
        } else {
            throw std::invalid_argument("chain file line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    if (bins.empty()) throw std::invalid_argument("chain file: missing bins");
    if (!have_dwell) throw std::invalid_argument("chain file: missing dwell");
    if (rows.size() != bins.size())
        throw std::invalid_argument("chain file: need one transition row per bin");
    const int k = static_cast<int>(bins.size());
    c.bin_velocities = Eigen::Map<Eigen::VectorXd>(bins.data(), k);
    c.transition.resize(k, k);
    for (int i = 0; i < k; ++i) {
        if (static_cast<int>(rows[i].size()) != k)
            throw std::invalid_argument("chain file: row " + std::to_string(i) + " has wrong length");
        c.transition.row(i) = Eigen::Map<Eigen::RowVectorXd>(rows[i].data(), k);
    }
    c.validate();
    return c;
}

SignatureChain load_signature_chain_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open chain file: " + path);
    return load_signature_chain(in);
}

void save_signature_chain(const SignatureChain& chain, std::ostream& out) {
    out.precision(17);  // round-trip precision so row sums survive reloading
    out << "bins";
    for (int i = 0; i < chain.state_count(); ++i) out << ' ' << chain.bin_velocities[i];
    out << "\ndwell " << chain.dwell << '\n';
    for (int i = 0; i < chain.state_count(); ++i) {
        out << "row";
        for (int j = 0; j < chain.state_count(); ++j) out << ' ' << chain.transition(i, j);
        out << '\n';
    }
}

SignatureGenerator::SignatureGenerator(SignatureChain chain, RngStream rng)
    : chain_(std::move(chain)), rng_(std::move(rng)) {
    chain_.validate();
    state_ = static_cast<int>(uniform_index(rng_, chain_.state_count()));
    prev_state_ = state_;
}

int SignatureGenerator::draw_next(int from) {
    const double u = uniform01(rng_);
    double acc = 0;
    const int k = chain_.state_count();
    for (int j = 0; j < k; ++j) {
        acc += chain_.transition(from, j);
        if (u < acc) return j;
    }
    return k - 1;
}

double SignatureGenerator::reference(double t) {
    const double dwell = chain_.dwell;
    while (t >= static_cast<double>(boundaries_passed_ + 1) * dwell) {
        prev_state_ = state_;
        state_ = draw_next(state_);
        ++boundaries_passed_;
    }
    const double since = t - static_cast<double>(boundaries_passed_) * dwell;
    const double fade = chain_.fade_duration();
    if (boundaries_passed_ > 0 && since < fade) {
        const double w = since / fade;
        return (1.0 - w) * chain_.bin_velocities[prev_state_] + w * chain_.bin_velocities[state_];
    }
    return chain_.bin_velocities[state_];
}

namespace {

struct SurrogateTerms {
    double a;  // predicted position error at zero control
    double b;  // predicted velocity error vs signature reference
    double c;  // predicted velocity error vs neighbor velocity
};

SurrogateTerms surrogate_terms(const OscillatorState& self, const NeighborMean& nb,
                               double rdot_sigma, const VpControlParams& p, const HkbParams& hkb) {
    if (!(std::isfinite(self.x) && std::isfinite(self.v) && std::isfinite(nb.r_p) &&
          std::isfinite(nb.rdot_p) && std::isfinite(rdot_sigma)))
        throw std::invalid_argument("vp_control: non-finite input");
    const double h = p.horizon;
    const double f = hkb_acceleration(self, 0.0, hkb);
    SurrogateTerms s;
    s.a = self.x + h * self.v + h * h * f - nb.r_p;
    s.b = self.v + h * f - rdot_sigma;
    s.c = self.v + h * f - nb.rdot_p;
    return s;
}

}  // namespace

double vp_cost(const OscillatorState& self, const NeighborMean& nb, double rdot_sigma,
               const VpControlParams& p, const HkbParams& hkb, double u) {
    const auto s = surrogate_terms(self, nb, rdot_sigma, p, hkb);
    const double h = p.horizon;
    const double ep = s.a + h * h * u;
    const double es = s.b + h * u;
    const double ev = s.c + h * u;
    return 0.5 * p.theta_p * ep * ep + 0.5 * p.theta_sigma * h * es * es +
           0.5 * p.theta_v * h * ev * ev + 0.5 * p.eta * h * u * u;
}

double vp_control(const OscillatorState& self, const NeighborMean& nb, double rdot_sigma,
                  const VpControlParams& p, const HkbParams& hkb, const ControlBounds& bounds) {
    const auto s = surrogate_terms(self, nb, rdot_sigma, p, hkb);
    const double h = p.horizon;
    const double num = -h * (p.theta_p * s.a + p.theta_sigma * s.b + p.theta_v * s.c);
    const double den = p.theta_p * h * h * h + (p.theta_sigma + p.theta_v) * h * h + p.eta;
    return std::clamp(num / den, bounds.u_min, bounds.u_max);
}

}  // namespace mg
