#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mirrorgame/dynamics.hpp"

namespace mg {

struct TimeSeries {
    Eigen::VectorXd values;
    double dt{0.03};

    int size() const { return static_cast<int>(values.size()); }
    double duration() const { return dt * static_cast<double>(size()); }
};

// Unwrapped instantaneous phase with the Hilbert end effects trimmed away.
struct PhaseSeries {
    Eigen::VectorXd theta;
    int valid_begin{0};
    int valid_end{0};  // exclusive
    double dt{0.03};
};

struct ClusterPhase {
    double q_mag{0};
    double q_arg{0};
    bool degenerate{false};
};

struct TrialMetrics {
    double rho_g{0};
    double delta_phi{0};
    double rms{0};
    double time_lag{0};
    TimeSeries rpe_series;
};

// arg of the mean unit vector.
double circular_mean(const Eigen::VectorXd& angles);

// Analytic-signal phase: mean removal, FFT, positive bins doubled, negative
// bins zeroed, DC and Nyquist kept, then four-quadrant angle unwrapped by
// 2*pi jumps. Trims 5% of samples at each end.
PhaseSeries hilbert_phase(const TimeSeries& x);

ClusterPhase cluster_phase(const std::vector<PhaseSeries>& phases, int sample);

double group_sync_index(const std::vector<PhaseSeries>& phases);
double group_sync_index(const std::vector<TimeSeries>& signals);

// Cross-covariance peak location; positive lag means b leads a, ties broken
// toward zero lag.
double time_lag(const TimeSeries& a, const TimeSeries& b, double max_lag);

// Sign-aware position discrepancy: (xbar - xp)*sgn(xbar_dot) where the signs
// of xbar_dot and xp agree and are nonzero, |xbar - xp| otherwise.
TimeSeries relative_position_error(const TimeSeries& xbar, const TimeSeries& xbar_dot,
                                   const TimeSeries& xp);

double rms_to_mean(const TimeSeries& xp, const TimeSeries& xbar);

// Circular mean of the phase difference theta_xbar - theta_xp.
double relative_phase_error(const TimeSeries& xbar, const TimeSeries& xp);

}  // namespace mg
