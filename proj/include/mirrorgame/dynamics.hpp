#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mg {

// Divergence guard bounds, an order of magnitude above the game's normalized
// position range.
inline constexpr double kMaxPosition = 10.0;
inline constexpr double kMaxVelocity = 50.0;

template <typename Scalar = double>
struct OscillatorStateT {
    Scalar x{0};
    Scalar v{0};
};
using OscillatorState = OscillatorStateT<double>;

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Scalar>
void check_state(const OscillatorStateT<Scalar>& s) {
    if (!(std::isfinite(s.x) && std::isfinite(s.v)))
        throw DivergenceError("oscillator state is not finite");
    if (std::abs(s.x) > Scalar(kMaxPosition))
        throw DivergenceError("position guard exceeded: |x| = " + std::to_string(std::abs(s.x)));
    if (std::abs(s.v) > Scalar(kMaxVelocity))
        throw DivergenceError("velocity guard exceeded: |v| = " + std::to_string(std::abs(s.v)));
}

template <typename Scalar = double>
struct HkbParamsT {
    Scalar alpha{1};
    Scalar beta{2};
    Scalar gamma_damp{-1};
    Scalar omega{1};
};
using HkbParams = HkbParamsT<double>;

enum class IntegrationMethod { euler, rk4 };

struct StepConfig {
    double dt{0.03};
    IntegrationMethod method{IntegrationMethod::rk4};
};

// HKB acceleration: u - (alpha*x^2 + beta*v^2 - gamma_damp)*v - omega^2*x.
template <typename Scalar>
Scalar hkb_acceleration(const OscillatorStateT<Scalar>& s, Scalar u, const HkbParamsT<Scalar>& p) {
    const Scalar damping = p.alpha * s.x * s.x + p.beta * s.v * s.v - p.gamma_damp;
    const Scalar a = u - damping * s.v - p.omega * p.omega * s.x;
    if (!std::isfinite(a))
        throw DivergenceError("non-finite acceleration: damping term " + std::to_string(damping) +
                              ", restoring term " + std::to_string(p.omega * p.omega * s.x));
    return a;
}

// One step of the second-order ODE with zero-order-hold control u.
template <typename Scalar>
OscillatorStateT<Scalar> step_oscillator(const OscillatorStateT<Scalar>& s, Scalar u,
                                         const HkbParamsT<Scalar>& p, const StepConfig& cfg) {
    const Scalar h = static_cast<Scalar>(cfg.dt);
    OscillatorStateT<Scalar> out;
    if (cfg.method == IntegrationMethod::euler) {
        const Scalar a = hkb_acceleration(s, u, p);
        out.x = s.x + h * s.v;
        out.v = s.v + h * a;
    } else {
        const auto accel = [&](const OscillatorStateT<Scalar>& q) { return hkb_acceleration(q, u, p); };
        const Scalar k1x = s.v, k1v = accel(s);
        const OscillatorStateT<Scalar> s2{s.x + h / 2 * k1x, s.v + h / 2 * k1v};
        const Scalar k2x = s2.v, k2v = accel(s2);
        const OscillatorStateT<Scalar> s3{s.x + h / 2 * k2x, s.v + h / 2 * k2v};
        const Scalar k3x = s3.v, k3v = accel(s3);
        const OscillatorStateT<Scalar> s4{s.x + h * k3x, s.v + h * k3v};
        const Scalar k4x = s4.v, k4v = accel(s4);
        out.x = s.x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
        out.v = s.v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    check_state(out);
    return out;
}

// Cyber-player plant: exact constant-acceleration kinematics.
template <typename Scalar>
OscillatorStateT<Scalar> step_double_integrator(const OscillatorStateT<Scalar>& s, Scalar u, Scalar dt) {
    OscillatorStateT<Scalar> out;
    out.x = s.x + s.v * dt + Scalar(0.5) * u * dt * dt;
    out.v = s.v + u * dt;
    check_state(out);
    return out;
}

}  // namespace mg
