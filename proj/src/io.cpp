#include "mirrorgame/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mg {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, res.ptr);
}

TimeSeries GroupTimeSeries::position_series(int player) const {
    return TimeSeries{x.col(player), dt};
}

TimeSeries GroupTimeSeries::velocity_series(int player) const {
    return TimeSeries{v.col(player), dt};
}

void write_timeseries_csv(const std::string& path, const GroupTimeSeries& ts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << 't';
    for (int k = 0; k < ts.players(); ++k) out << ",x" << k + 1 << ",v" << k + 1;
    out << '\n';
    for (int i = 0; i < ts.samples(); ++i) {
        out << format_double(ts.t[i]);
        for (int k = 0; k < ts.players(); ++k)
            out << ',' << format_double(ts.x(i, k)) << ',' << format_double(ts.v(i, k));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

GroupTimeSeries read_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty time-series file: " + path);
    int cols = 1;
    for (char c : line) cols += (c == ',');
    if (cols < 3 || (cols - 1) % 2 != 0)
        throw std::runtime_error("time-series header must be t,x1,v1,...: " + path);
    const int players = (cols - 1) / 2;

    std::vector<double> values;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        int got = 0;
        while (std::getline(ls, cell, ',')) {
            values.push_back(std::stod(cell));
            ++got;
        }
        if (got != cols) throw std::runtime_error("ragged CSV row in " + path);
        ++rows;
    }
    if (rows < 2) throw std::runtime_error("time series too short: " + path);

    GroupTimeSeries ts;
    ts.t.resize(rows);
    ts.x.resize(rows, players);
    ts.v.resize(rows, players);
    for (int i = 0; i < rows; ++i) {
        const double* row = values.data() + static_cast<std::size_t>(i) * cols;
        ts.t[i] = row[0];
        for (int k = 0; k < players; ++k) {
            ts.x(i, k) = row[1 + 2 * k];
            ts.v(i, k) = row[2 + 2 * k];
        }
    }
    ts.dt = ts.t[1] - ts.t[0];
    return ts;
}

void write_training_log_csv(const std::string& path, const std::vector<TrainLogRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "trial,loss,epsilon,rms_cp,rms_tp\n";
    for (const auto& r : rows) {
        out << r.trial << ',' << format_double(r.loss) << ',' << format_double(r.epsilon) << ','
            << format_double(r.rms_cp) << ',' << format_double(r.rms_tp) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace mg
