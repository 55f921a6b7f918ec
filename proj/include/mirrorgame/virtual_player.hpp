#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>

#include "mirrorgame/dynamics.hpp"
#include "mirrorgame/ensemble.hpp"
#include "mirrorgame/rng.hpp"

namespace mg {

struct VpControlParams {
    double theta_p{0.8};      // neighbor-position tracking weight
    double theta_sigma{0.15}; // motor-signature tracking weight
    double theta_v{0.05};     // neighbor-velocity tracking weight
    double eta{1e-4};         // control effort weight
    double horizon{0.03};     // prediction interval (s)

    void validate() const;
};

enum class VpMode { leader, follower, joint_improviser };

VpMode vp_mode_from_string(const std::string& s);
std::string to_string(VpMode m);

// Preset weight triples. Only the joint-improviser values are calibrated;
// leader/follower swap dominance toward the signature or the neighbors.
VpControlParams leader_follower_mix(const VpControlParams& p, VpMode mode);

struct ControlBounds {
    double u_min{-20.0};
    double u_max{20.0};

    void validate() const;
};

// Markov chain over representative velocities; emits a piecewise-constant
// reference with short linear cross-fades between states.
struct SignatureChain {
    Eigen::VectorXd bin_velocities;
    Eigen::MatrixXd transition;  // row-stochastic
    double dwell{0.8};           // per-state dwell time (s)

    int state_count() const { return static_cast<int>(bin_velocities.size()); }
    double fade_duration() const { return std::min(0.2 * dwell, 0.1); }
    void validate() const;
};

SignatureChain default_signature_chain();
SignatureChain load_signature_chain(std::istream& in);
SignatureChain load_signature_chain_file(const std::string& path);
void save_signature_chain(const SignatureChain& chain, std::ostream& out);

// Owns the chain state and its rng stream; queries must use non-decreasing t.
class SignatureGenerator {
  public:
    SignatureGenerator(SignatureChain chain, RngStream rng);

    // Reference velocity at time t.
    double reference(double t);
    int current_state() const { return state_; }

  private:
    SignatureChain chain_;
    RngStream rng_;
    int state_{0};
    int prev_state_{0};
    long boundaries_passed_{0};

    int draw_next(int from);
};

inline double signature_reference(SignatureGenerator& gen, double t) { return gen.reference(t); }

// Closed-form minimizer of the one-step quadratic tracking cost, clipped to
// bounds. nb supplies neighbor means, rdot_sigma the signature reference.
double vp_control(const OscillatorState& self, const NeighborMean& nb, double rdot_sigma,
                  const VpControlParams& p, const HkbParams& hkb, const ControlBounds& bounds);

// The same quadratic surrogate evaluated at a candidate u (the objective the
// minimizer above solves). Exposed for oracle comparison.
double vp_cost(const OscillatorState& self, const NeighborMean& nb, double rdot_sigma,
               const VpControlParams& p, const HkbParams& hkb, double u);

}  // namespace mg
