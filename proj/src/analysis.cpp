#include "mirrorgame/analysis.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace mg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegenerateClusterMag = 1e-9;

int sgn(double v) { return (v > 0) - (v < 0); }

void require_aligned(const TimeSeries& a, const TimeSeries& b, const char* what) {
    if (a.size() != b.size() || a.dt != b.dt)
        throw std::invalid_argument(std::string(what) + ": series must share length and dt");
}

}  // namespace

double circular_mean(const Eigen::VectorXd& angles) {
    if (angles.size() == 0) throw std::invalid_argument("circular_mean of empty vector");
    const double s = angles.array().sin().mean();
    const double c = angles.array().cos().mean();
    return std::atan2(s, c);
}

PhaseSeries hilbert_phase(const TimeSeries& x) {
    const int n = x.size();
    if (n < 16) throw std::invalid_argument("hilbert_phase needs at least 16 samples");
    if (!x.values.allFinite()) throw std::invalid_argument("hilbert_phase: non-finite input");

    Eigen::VectorXd centered = x.values.array() - x.values.mean();
    if (centered.squaredNorm() == 0.0)
        throw std::invalid_argument("hilbert_phase: constant signal has no phase");

    std::vector<double> time(centered.data(), centered.data() + n);
    std::vector<std::complex<double>> spec;
    Eigen::FFT<double> fft;
    fft.fwd(spec, time);
    // Build the analytic-signal spectrum.
    const int half = n / 2;
    for (int k = 1; k < (n + 1) / 2; ++k) spec[k] *= 2.0;
    for (int k = half + 1; k < n; ++k) spec[k] = 0.0;
    std::vector<std::complex<double>> analytic;
    fft.inv(analytic, spec);

    PhaseSeries out;
    out.dt = x.dt;
    out.theta.resize(n);
    double prev = std::arg(analytic[0]);
    double offset = 0.0;
    out.theta[0] = prev;
    for (int i = 1; i < n; ++i) {
        const double raw = std::arg(analytic[i]);
        double d = raw - prev;
        if (d > kPi) offset -= 2.0 * kPi;
        else if (d < -kPi) offset += 2.0 * kPi;
        out.theta[i] = raw + offset;
        prev = raw;
    }
    const int trim = static_cast<int>(0.05 * n);
    out.valid_begin = trim;
    out.valid_end = n - trim;
    if (out.valid_end <= out.valid_begin)
        throw std::invalid_argument("hilbert_phase: series too short after trimming");
    return out;
}

ClusterPhase cluster_phase(const std::vector<PhaseSeries>& phases, int sample) {
    const int n = static_cast<int>(phases.size());
    if (n == 0) throw std::invalid_argument("cluster_phase of empty group");
    std::complex<double> q{0, 0};
    for (const auto& p : phases) {
        if (sample < p.valid_begin || sample >= p.valid_end)
            throw std::out_of_range("cluster_phase: sample outside valid range");
        q += std::polar(1.0, p.theta[sample]);
    }
    q /= static_cast<double>(n);
    ClusterPhase out;
    out.q_mag = std::abs(q);
    out.degenerate = out.q_mag < kDegenerateClusterMag;
    out.q_arg = out.degenerate ? 0.0 : std::arg(q);
    return out;
}

double group_sync_index(const std::vector<PhaseSeries>& phases) {
    const int n = static_cast<int>(phases.size());
    if (n == 0) throw std::invalid_argument("group_sync_index of empty group");
    int lo = phases[0].valid_begin, hi = phases[0].valid_end;
    for (const auto& p : phases) {
        lo = std::max(lo, p.valid_begin);
        hi = std::min(hi, p.valid_end);
    }
    if (hi - lo < 2) throw std::invalid_argument("group_sync_index: common valid range too short");

    const int len = hi - lo;
    Eigen::MatrixXd rel(n, len);  // phi_k(t) = theta_k(t) - arg q(t)
    std::vector<bool> keep(len, true);
    int dropped = 0;
    for (int i = 0; i < len; ++i) {
        const ClusterPhase q = cluster_phase(phases, lo + i);
        if (q.degenerate) {
            keep[i] = false;
            ++dropped;
            continue;
        }
        for (int k = 0; k < n; ++k) rel(k, i) = phases[k].theta[lo + i] - q.q_arg;
    }
    if (dropped > 0)
        std::cerr << "group_sync_index: excluded " << dropped
                  << " samples with degenerate cluster phase\n";
    if (dropped == len) throw std::invalid_argument("group_sync_index: no usable samples");

    Eigen::VectorXd mean_rel(n);  // circular mean phi_bar_k over kept samples
    for (int k = 0; k < n; ++k) {
        double s = 0, c = 0;
        for (int i = 0; i < len; ++i) {
            if (!keep[i]) continue;
            s += std::sin(rel(k, i));
            c += std::cos(rel(k, i));
        }
        mean_rel[k] = std::atan2(s, c);
    }

    double acc = 0;
    for (int i = 0; i < len; ++i) {
        if (!keep[i]) continue;
        std::complex<double> z{0, 0};
        for (int k = 0; k < n; ++k) z += std::polar(1.0, rel(k, i) - mean_rel[k]);
        acc += std::abs(z) / static_cast<double>(n);
    }
    return acc / static_cast<double>(len - dropped);
}

double group_sync_index(const std::vector<TimeSeries>& signals) {
    std::vector<PhaseSeries> phases;
    phases.reserve(signals.size());
    for (const auto& s : signals) phases.push_back(hilbert_phase(s));
    return group_sync_index(phases);
}

double time_lag(const TimeSeries& a, const TimeSeries& b, double max_lag) {
    require_aligned(a, b, "time_lag");
    const int n = a.size();
    if (n < 2) throw std::invalid_argument("time_lag: series too short");
    if (max_lag > 0.25 * a.duration())
        throw std::invalid_argument("time_lag: max_lag exceeds 25% of duration");
    const Eigen::VectorXd a0 = a.values.array() - a.values.mean();
    const Eigen::VectorXd b0 = b.values.array() - b.values.mean();
    if (a0.squaredNorm() == 0.0 || b0.squaredNorm() == 0.0)
        throw std::invalid_argument("time_lag: zero-variance input");

    const int max_m = static_cast<int>(std::floor(max_lag / a.dt + 1e-9));
    // Cross-covariance at integer shift m: mean over t of a(t + m)*b(t).
    const auto cov_at = [&](int m) {
        const int lo = std::max(0, -m);
        const int hi = std::min(n, n - m);
        double s = 0;
        for (int i = lo; i < hi; ++i) s += a0[i + m] * b0[i];
        return s / static_cast<double>(n);
    };
    int best_m = 0;
    double best = cov_at(0);
    for (int mag = 1; mag <= max_m; ++mag) {
        for (const int m : {mag, -mag}) {
            const double c = cov_at(m);
            if (c > best) {
                best = c;
                best_m = m;
            }
        }
    }
    return best_m * a.dt;
}

TimeSeries relative_position_error(const TimeSeries& xbar, const TimeSeries& xbar_dot,
                                   const TimeSeries& xp) {
    require_aligned(xbar, xp, "relative_position_error");
    require_aligned(xbar, xbar_dot, "relative_position_error");
    TimeSeries out;
    out.dt = xbar.dt;
    out.values.resize(xbar.size());
    for (int i = 0; i < xbar.size(); ++i) {
        const int sv = sgn(xbar_dot.values[i]);
        const int sp = sgn(xp.values[i]);
        const double diff = xbar.values[i] - xp.values[i];
        out.values[i] = (sv == sp && sv != 0) ? diff * sv : std::abs(diff);
    }
    return out;
}

double rms_to_mean(const TimeSeries& xp, const TimeSeries& xbar) {
    require_aligned(xp, xbar, "rms_to_mean");
    return std::sqrt((xp.values - xbar.values).array().square().mean());
}

double relative_phase_error(const TimeSeries& xbar, const TimeSeries& xp) {
    const PhaseSeries pb = hilbert_phase(xbar);
    const PhaseSeries pp = hilbert_phase(xp);
    const int lo = std::max(pb.valid_begin, pp.valid_begin);
    const int hi = std::min(pb.valid_end, pp.valid_end);
    if (hi <= lo) throw std::invalid_argument("relative_phase_error: no common valid range");
    Eigen::VectorXd diff(hi - lo);
    for (int i = lo; i < hi; ++i) diff[i - lo] = pb.theta[i] - pp.theta[i];
    return circular_mean(diff);
}

}  // namespace mg
