#ifndef MASAR_TOOLS_CLI_APP_HPP
#define MASAR_TOOLS_CLI_APP_HPP

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "masar/masar.hpp"

namespace masar::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDomain = 2, kFit = 3 };

namespace detail {

inline std::vector<double> parse_list(const std::string& text, char sep, std::size_t n, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = std::min(text.find(sep, pos), text.size());
        out.push_back(csv::parse_number(std::string_view(text).substr(pos, next - pos), 0));
        pos = next + 1;
    }
    if (out.size() != n) throw config_error(std::string(what) + ": expected " + std::to_string(n) + " fields");
    return out;
}

inline PulseTrainSpec parse_train(const std::string& text, std::optional<double> rise) {
    const auto v = parse_list(text, ',', 4, "--train n,dur,interval,energy");
    PulseTrainSpec s;
    if (v[0] != std::floor(v[0])) throw config_error("--train: n must be an integer");
    s.n_pulses = static_cast<int>(v[0]);
    s.duration = v[1];
    s.interval = v[2];
    s.total_energy = v[3];
    if (rise) s.shape = Trapezoid{*rise};
    validate(s);
    return s;
}

inline Config config_from(const std::string& path) { return path.empty() ? default_config() : load_config(path); }

/// Owns the file stream when --out names a path; falls back to `fallback` otherwise.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw config_error("cannot open output file '" + path + "'");
            out_ = file_.get();
        }
    }
    std::ostream& operator*() { return *out_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

struct SimulateArgs {
    std::string config, out, pump, train = "3,150e-6,500e-6,2.4";
    std::optional<double> rise, t_end;
    std::optional<int> stride;
    bool time_offset = false;
};

inline int run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    Config cfg = detail::config_from(a.config);
    if (a.t_end) cfg.integration.t_end = *a.t_end;
    if (a.stride) cfg.integration.stride = *a.stride;
    PumpProfile pump;
    if (!a.pump.empty()) {
        auto in = detail::open_input(a.pump);
        pump = csv::read_pump(in, cfg.pump_hold);
    } else {
        pump = synth_pump(detail::parse_train(a.train, a.rise));
    }
    const Trajectory traj = integrate(cfg.model, pump, cfg.integration);

    detail::Sink sink(a.out, out);
    csv::write_trajectory(*sink, traj, a.time_offset ? 150e-6 : 0.0);

    const auto lowest = std::min_element(traj.samples.begin(), traj.samples.end(),
                                         [](const auto& x, const auto& y) { return x.t_mode < y.t_mode; });
    err << "min T_mode_K = " << csv::format(lowest->t_mode) << " (q = " << csv::format(lowest->q)
        << ") at t_s = " << csv::format(lowest->t) << "\n";
    for (const auto& c : burst_cycles(traj, cfg.model.cavity.t0)) {
        err << "masing " << csv::format(c.masing.t_begin) << " .. " << csv::format(c.masing.t_end) << " s";
        if (c.cooling)
            err << ", cooling " << csv::format(c.cooling->t_begin) << " .. " << csv::format(c.cooling->t_end)
                << " s" << (c.cut_by_next_burst ? " (cut by next burst)" : "");
        err << "\n";
    }
    return kOk;
}

struct CalibrateArgs {
    std::string config, out, grid = "1:290:290";
};

inline std::vector<double> parse_grid(const std::string& text) {
    const auto v = detail::parse_list(text, ':', 3, "--grid lo:hi:n");
    const double n = v[2];
    if (!(n >= 2.0) || n != std::floor(n)) throw config_error("--grid: n must be an integer >= 2");
    if (!(v[1] > v[0])) throw config_error("--grid: hi must exceed lo");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = v[0] + (v[1] - v[0]) * static_cast<double>(i) / (n - 1.0);
    g.back() = v[1];
    return g;
}

inline int run_calibrate(const CalibrateArgs& a, std::ostream& out, std::ostream&) {
    const Config cfg = detail::config_from(a.config);
    const auto grid = parse_grid(a.grid);
    detail::Sink sink(a.out, out);
    csv::write_calibration(*sink, calibration_curve(cfg.model.receiver, grid));
    return kOk;
}

struct FitArgs {
    std::string config, signal, out, curve, trace = "fit_trace.csv", t_range;
    bool unweighted = false, no_offset = false;
    int bootstrap = 0;
    std::uint64_t seed = 1;
};

inline nlohmann::json fit_report(const Config& cfg, const SignalSeries& s, const BiexpFit& fit,
                                 const FitMinimum& m) {
    using nlohmann::json;
    json r;
    r["model"] = fit.with_offset ? "a1*exp(-t/tau1) + a2*exp(-t/tau2) + c" : "a1*exp(-t/tau1) + a2*exp(-t/tau2)";
    r["weighted"] = fit.weighted;
    r["samples"] = s.size();
    r["iterations"] = fit.iterations;
    r["sse"] = fit.sse;
    r["single_exponential"] = fit.single_exponential;
    const char* names[] = {"a1", "tau1_s", "a2", "tau2_s", "c_dB"};
    const BiexpParams p = fit.params();
    for (int i = 0; i < 5; ++i) {
        r["parameters"][names[i]] = p[i];
        r["standard_errors"][names[i]] = std::sqrt(std::max(0.0, fit.covariance(i, i)));
    }
    json cov = json::array();
    for (int i = 0; i < 5; ++i) {
        json row = json::array();
        for (int j = 0; j < 5; ++j) row.push_back(fit.covariance(i, j));
        cov.push_back(row);
    }
    r["covariance"] = cov;
    r["minimum"] = {{"t_s", m.t_min},
                    {"dp_dB", m.y_min},
                    {"lower_dB", m.y_lower},
                    {"upper_dB", m.y_upper},
                    {"at_boundary", m.at_boundary}};

    const ReceiverChain& rx = cfg.model.receiver;
    const double floor_db = delta_p_floor(rx);
    json inf;
    inf["floor_dB"] = floor_db;
    if (m.y_min > 0.0) {
        inf["status"] = "above_reference";
    } else if (m.y_min <= floor_db) {
        inf["status"] = "below_noise_floor";
    } else {
        const Inversion v = invert_delta_p(rx, m.y_min, {std::max(m.y_upper, m.y_min), std::min(m.y_lower, m.y_min)});
        inf["status"] = "ok";
        inf["T_mode_K"] = v.t_mode;
        inf["T_upper_K"] = v.upper;
        inf["T_lower_K"] = v.lower;
        inf["plus_K"] = v.upper - v.t_mode;
        inf["minus_K"] = v.t_mode - v.lower;
        inf["lower_at_floor"] = v.lower_at_floor;
        inf["upper_at_reference"] = v.upper_at_reference;
    }
    r["inference"] = inf;
    return r;
}

inline int run_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    const Config cfg = detail::config_from(a.config);
    auto in = detail::open_input(a.signal);
    const SignalSeries s = csv::read_signal(in);
    if (s.size() < 2) throw domain_error("signal CSV has fewer than 2 rows");

    BiexpOptions opt;
    opt.weighted = !a.unweighted;
    opt.with_offset = !a.no_offset;
    BiexpFit fit;
    try {
        fit = biexp_fit(s, opt);
    } catch (const fit_error& e) {
        std::ofstream trace(a.trace);
        trace << "iteration,sse,a1,tau1_s,a2,tau2_s,c_dB\n";
        for (std::size_t i = 0; i < e.trace().size(); ++i) {
            trace << i + 1 << ',' << csv::format(e.trace()[i]);
            if (i < e.parameter_trace().size())
                for (double v : e.parameter_trace()[i]) trace << ',' << csv::format(v);
            trace << '\n';
        }
        err << "error: " << e.what() << "; final residual " << csv::format(e.residual()) << "; trace written to "
            << a.trace << "\n";
        return kFit;
    }

    double lo = s.t.front(), hi = s.t.back();
    if (!a.t_range.empty()) {
        const auto v = detail::parse_list(a.t_range, ':', 2, "--t-range lo:hi");
        lo = v[0];
        hi = v[1];
    }
    const FitMinimum m = fit_minimum(fit, lo, hi);
    nlohmann::json report = fit_report(cfg, s, fit, m);
    if (a.bootstrap > 0) {
        const auto band = bootstrap_band(s, fit, a.bootstrap, a.seed);
        const auto nearest = static_cast<std::size_t>(
            std::lower_bound(s.t.begin(), s.t.end(), m.t_min) - s.t.begin());
        const std::size_t i = std::min(nearest, s.size() - 1);
        report["bootstrap"] = {{"resamples", a.bootstrap}, {"seed", a.seed}, {"t_s", s.t[i]},
                               {"lower_dB", band[i].lower}, {"upper_dB", band[i].upper}};
    }
    if (!a.curve.empty()) {
        detail::Sink curve(a.curve, out);
        csv::write_fit_curve(*curve, s, fit);
    }
    detail::Sink sink(a.out, out);
    *sink << report.dump(2) << "\n";
    return kOk;
}

struct SpinTempArgs {
    std::string config;
    double nx = 0, nz = 0;
    std::optional<double> f;
};

inline int run_spin_temp(const SpinTempArgs& a, std::ostream& out, std::ostream&) {
    const Config cfg = detail::config_from(a.config);
    const SpinTemperatureResult r = spin_temperature(a.nx, a.nz, a.f.value_or(cfg.model.cavity.f_mode));
    out << "T_XZ_K = " << csv::format_signed(r.temperature) << "\n";
    out << "delta_n_over_n = " << csv::format(r.delta_n_over_n) << "\n";
    return kOk;
}

struct SynthPumpArgs {
    std::string out, train = "3,150e-6,500e-6,2.4";
    std::optional<double> rise;
};

inline int run_synth_pump(const SynthPumpArgs& a, std::ostream& out, std::ostream& err) {
    const PumpProfile p = synth_pump(detail::parse_train(a.train, a.rise));
    detail::Sink sink(a.out, out);
    csv::write_pump(*sink, p);
    err << "energy_J = " << csv::format(p.energy()) << ", peak_W = " << csv::format(p.peak()) << "\n";
    return kOk;
}

/// Parse and dispatch. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Triplet spin refrigerator: simulation, receiver calibration and signal fitting"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "integrate the coupled spin-photon model, write trajectory CSV");
    c_sim->add_option("--config", sim.config, "config file (JSON)");
    c_sim->add_option("--out", sim.out, "output CSV (default stdout)");
    auto* o_pump = c_sim->add_option("--pump", sim.pump, "pump CSV with columns t_s,P_W");
    c_sim->add_option("--train", sim.train, "synthetic train n,duration,interval,energy")
        ->capture_default_str()
        ->excludes(o_pump);
    c_sim->add_option("--rise", sim.rise, "trapezoid rise time (s) for --train");
    c_sim->add_option("--t-end", sim.t_end, "override integration.t_end (s)");
    c_sim->add_option("--stride", sim.stride, "override integration.stride");
    c_sim->add_flag("--time-offset", sim.time_offset, "shift output timestamps by +150 us");

    CalibrateArgs cal;
    auto* c_cal = app.add_subcommand("calibrate", "receiver power change versus mode temperature");
    c_cal->add_option("--config", cal.config, "config file (JSON)");
    c_cal->add_option("--out", cal.out, "output CSV (default stdout)");
    c_cal->add_option("--grid", cal.grid, "temperature grid lo:hi:n in K")->capture_default_str();

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "bi-exponential fit of a signal CSV and mode-temperature inference");
    c_fit->add_option("--config", fit.config, "config file (JSON)");
    c_fit->add_option("signal,--signal", fit.signal, "signal CSV t_s,dp_dB[,sigma_dB]")->required();
    c_fit->add_option("--out", fit.out, "JSON report (default stdout)");
    c_fit->add_option("--curve", fit.curve, "write fitted curve and band CSV");
    c_fit->add_option("--trace", fit.trace, "residual trace written on non-convergence")->capture_default_str();
    c_fit->add_option("--t-range", fit.t_range, "minimum search range lo:hi (s)");
    c_fit->add_flag("--unweighted", fit.unweighted, "ignore sigma_dB");
    c_fit->add_flag("--no-offset", fit.no_offset, "fix the constant offset at zero");
    c_fit->add_option("--bootstrap", fit.bootstrap, "residual-bootstrap resamples for a band check");
    c_fit->add_option("--seed", fit.seed, "bootstrap seed")->capture_default_str();

    SpinTempArgs st;
    auto* c_st = app.add_subcommand("spin-temp", "spin temperature of the X-Z pair");
    c_st->add_option("--config", st.config, "config file (JSON)");
    c_st->add_option("--nx", st.nx, "population of |X>")->required();
    c_st->add_option("--nz", st.nz, "population of |Z>")->required();
    c_st->add_option("--f", st.f, "transition frequency (Hz), default cavity.f_mode");

    SynthPumpArgs sp;
    auto* c_sp = app.add_subcommand("synth-pump", "write a synthetic pulse-train pump CSV");
    c_sp->add_option("--out", sp.out, "output CSV (default stdout)");
    c_sp->add_option("--train", sp.train, "n,duration,interval,energy")->capture_default_str();
    c_sp->add_option("--rise", sp.rise, "trapezoid rise time (s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        if (e.get_exit_code() == 0) return kOk;
        return kUsage;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim, out, err);
        if (c_cal->parsed()) return run_calibrate(cal, out, err);
        if (c_fit->parsed()) return run_fit(fit, out, err);
        if (c_st->parsed()) return run_spin_temp(st, out, err);
        if (c_sp->parsed()) return run_synth_pump(sp, out, err);
    } catch (const fit_error& e) {
        err << "error: " << e.what() << "\n";
        return kFit;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kDomain;
    }
    return kUsage;
}

}  // namespace masar::cli

#endif
