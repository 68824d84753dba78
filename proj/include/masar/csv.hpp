#ifndef MASAR_CSV_HPP
#define MASAR_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "masar/epr_analysis.hpp"
#include "masar/error.hpp"
#include "masar/integrator.hpp"
#include "masar/pump.hpp"
#include "masar/receiver_noise.hpp"

namespace masar::csv {

inline constexpr std::string_view trajectory_header =
    "t_s,S0,S1,NX,NY,NZ,q,T_mode_K,eta_bar,gamma_c,delta_p_dB,P_maser_W";

/// Shortest form that reads back bit-exact: 17 significant digits, "nan", "inf", "-inf".
inline std::string format(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Signed token for values where infinity is a legitimate result.
inline std::string format_signed(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return format(v);
}

inline double parse_number(std::string_view s, int line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty())
        throw config_error("line " + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

/// Numeric table with a required header. Blank lines are skipped.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline Table read_table(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw config_error("empty CSV: missing header row");
    line = strip_cr(line);
    for (auto c : split(line)) t.columns.emplace_back(c);
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.columns.size())
            throw config_error("line " + std::to_string(n) + ": expected " + std::to_string(t.columns.size()) +
                               " fields, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto c : cells) row.push_back(parse_number(c, n));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------

/// `time_offset` only shifts the printed timestamps.
inline void write_trajectory(std::ostream& out, const Trajectory& traj, double time_offset = 0.0) {
    out << trajectory_header << '\n';
    for (const auto& s : traj.samples) {
        out << format(s.t + time_offset) << ',' << format(s.spins.s0) << ',' << format(s.spins.s1) << ','
            << format(s.spins.n_x) << ',' << format(s.spins.n_y) << ',' << format(s.spins.n_z) << ','
            << format(s.q) << ',' << format(s.t_mode) << ',' << format(s.eta_bar) << ',' << format(s.gamma_c)
            << ',' << format(s.delta_p_db) << ',' << format(s.p_maser) << '\n';
    }
}

inline std::vector<TrajectorySample> read_trajectory(std::istream& in) {
    const Table t = read_table(in);
    std::string header;
    for (std::size_t i = 0; i < t.columns.size(); ++i) header += (i ? "," : "") + t.columns[i];
    if (header != trajectory_header) throw config_error("unexpected trajectory header: " + header);
    std::vector<TrajectorySample> out;
    out.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        TrajectorySample s;
        s.t = r[0];
        s.spins = {r[1], r[2], r[3], r[4], r[5]};
        s.q = r[6];
        s.t_mode = r[7];
        s.eta_bar = r[8];
        s.gamma_c = r[9];
        s.delta_p_db = r[10];
        s.p_maser = r[11];
        out.push_back(s);
    }
    return out;
}

inline void write_pump(std::ostream& out, const PumpProfile& p) {
    out << "t_s,P_W\n";
    for (const auto& s : p.samples()) out << format(s.t) << ',' << format(s.p) << '\n';
}

inline PumpProfile read_pump(std::istream& in, Hold hold = Hold::linear) {
    const Table t = read_table(in);
    const int ct = t.column("t_s"), cp = t.column("P_W");
    if (ct < 0 || cp < 0) throw config_error("pump CSV needs columns t_s,P_W");
    std::vector<PumpProfile::Sample> samples;
    samples.reserve(t.rows.size());
    for (const auto& r : t.rows) samples.push_back({r[ct], r[cp]});
    return PumpProfile(std::move(samples), hold);
}

/// Signal CSV: t_s, dp_dB and optionally sigma_dB.
inline SignalSeries read_signal(std::istream& in) {
    const Table t = read_table(in);
    const int ct = t.column("t_s"), cy = t.column("dp_dB"), cs = t.column("sigma_dB");
    if (ct < 0 || cy < 0) throw config_error("signal CSV needs columns t_s,dp_dB[,sigma_dB]");
    SignalSeries s;
    for (const auto& r : t.rows) {
        s.t.push_back(r[ct]);
        s.y.push_back(r[cy]);
        if (cs >= 0) s.sigma.push_back(r[cs]);
    }
    return s;
}

inline void write_signal(std::ostream& out, const SignalSeries& s) {
    out << (s.sigma.empty() ? "t_s,dp_dB\n" : "t_s,dp_dB,sigma_dB\n");
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format(s.t[i]) << ',' << format(s.y[i]);
        if (!s.sigma.empty()) out << ',' << format(s.sigma[i]);
        out << '\n';
    }
}

inline void write_calibration(std::ostream& out, const std::vector<CalibrationPoint>& curve) {
    out << "T_mode_K,delta_p_dB\n";
    for (const auto& p : curve) out << format(p.t_mode) << ',' << format(p.delta_p_db) << '\n';
}

/// Fitted curve and its 95 % band at each sample time.
inline void write_fit_curve(std::ostream& out, const SignalSeries& s, const BiexpFit& fit) {
    out << "t_s,fit_dB,lower_dB,upper_dB\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format(s.t[i]) << ',' << format(fit.value(s.t[i])) << ',' << format(fit.band[i].lower) << ','
            << format(fit.band[i].upper) << '\n';
}

}  // namespace masar::csv

#endif
