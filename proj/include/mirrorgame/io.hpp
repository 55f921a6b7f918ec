#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mirrorgame/analysis.hpp"

namespace mg {

// Shortest round-trip decimal representation; identical input bits always
// produce identical text, which the artifact determinism contract relies on.
std::string format_double(double v);

struct GroupTimeSeries {
    Eigen::VectorXd t;
    Eigen::MatrixXd x;  // samples x players
    Eigen::MatrixXd v;
    double dt{0.03};

    int samples() const { return static_cast<int>(t.size()); }
    int players() const { return static_cast<int>(x.cols()); }
    TimeSeries position_series(int player) const;
    TimeSeries velocity_series(int player) const;
};

// Header: t,x1,v1,x2,v2,...
void write_timeseries_csv(const std::string& path, const GroupTimeSeries& ts);
GroupTimeSeries read_timeseries_csv(const std::string& path);

struct TrainLogRow {
    int trial{0};
    double loss{0};
    double epsilon{0};
    double rms_cp{0};
    double rms_tp{0};
};

void write_training_log_csv(const std::string& path, const std::vector<TrainLogRow>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace mg
