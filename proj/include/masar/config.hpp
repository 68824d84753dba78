#ifndef MASAR_CONFIG_HPP
#define MASAR_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

#include "masar/constants.hpp"
#include "masar/error.hpp"
#include "masar/integrator.hpp"

namespace masar {

// ---------------------------------------------------------------------------
// Sample geometry and composition
// ---------------------------------------------------------------------------

namespace sample {
inline constexpr double doping = 1e-3;             // pentacene : p-terphenyl mole fraction
inline constexpr double host_density = 1.23e6;     // g m^-3
inline constexpr double host_molar_mass = 230.3;   // g mol^-1
inline constexpr double prism_semi_a = 1.0e-3;     // m
inline constexpr double prism_semi_b = 0.6e-3;     // m
inline constexpr double prism_length = 4.0e-3;     // m
}  // namespace sample

/// Pentacene molecules per m^3.
inline double pentacene_number_density() {
    return sample::doping * sample::host_density / sample::host_molar_mass * constants::avogadro;
}

/// Every pentacene molecule in the pumped elliptical prism. An upper bound on the
/// number of spins that see both the pump and the mode.
inline double geometric_n_tot_estimate() {
    const double volume = constants::pi * sample::prism_semi_a * sample::prism_semi_b * sample::prism_length;
    return pentacene_number_density() * volume;
}

/// Small-signal absorption coefficient of the doped crystal at the pump wavelength (m^-1).
inline double pentacene_absorption(double sigma_a) { return sigma_a * pentacene_number_density(); }

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

inline constexpr int config_schema_version = 1;

struct Config {
    SimulationModel model;
    IntegrationOptions integration;
    Hold pump_hold = Hold::linear;  // interpolation for pump files
};

inline Config default_config() {
    Config c;
    c.model.pump.alpha = pentacene_absorption(c.model.pump.sigma_a);
    return c;
}

inline void validate(const Config& c) {
    validate(c.model.triplet);
    validate(c.model.cavity);
    validate(c.model.pump);
    validate(c.model.receiver);
    if (!(c.model.n_tot > 0.0)) throw config_error("n_tot must be > 0");
    if (!(c.model.t_spin >= 0.0)) throw config_error("integration.t_spin must be >= 0");
    const auto& o = c.integration;
    if (!(o.h > 0.0)) throw config_error("integration.h must be > 0");
    if (!(o.t_end > o.t_start)) throw config_error("integration.t_end must be after integration.t_start");
    if (o.stride < 1) throw config_error("integration.stride must be >= 1");
}

namespace detail {

using json = nlohmann::json;

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw config_error(where() + "expected an object");
    }

    void reject_unknown(std::initializer_list<const char*> known) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; });
            if (!ok) throw config_error("unknown key '" + join(it.key()) + "'");
        }
    }

    void number(const char* key, double& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) throw config_error(join(key) + ": expected a number");
        out = v.get<double>();
    }

    void integer(const char* key, int& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw config_error(join(key) + ": expected an integer");
        out = v.get<int>();
    }

    void boolean(const char* key, bool& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw config_error(join(key) + ": expected true or false");
        out = v.get<bool>();
    }

    void text(const char* key, std::string& out) const {
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) throw config_error(join(key) + ": expected a string");
        out = v.get<std::string>();
    }

    bool has(const char* key) const { return j_.contains(key); }
    Reader child(const char* key) const { return Reader(j_.at(key), join(key)); }
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

    const json& j_;
    std::string path_;
};

inline int line_of_offset(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace detail

/// Parse a config document. Missing keys keep their defaults; unknown keys are errors.
inline Config parse_config(const std::string& text) {
    Config c = default_config();
    if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) return c;

    detail::json doc;
    try {
        doc = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        throw config_error("parse error at line " + std::to_string(detail::line_of_offset(text, e.byte)) + ": " +
                           e.what());
    }
    const detail::Reader root(doc, "");
    root.reject_unknown({"schema_version", "n_tot", "triplet", "cavity", "receiver", "pump", "integration"});
    int version = config_schema_version;
    root.integer("schema_version", version);
    if (version != config_schema_version)
        throw config_error("schema_version: unsupported value " + std::to_string(version));
    root.number("n_tot", c.model.n_tot);

    if (root.has("triplet")) {
        const auto r = root.child("triplet");
        r.reject_unknown({"k_sp", "k_isc", "p_x", "p_y", "p_z", "gamma_xy", "gamma_yz", "gamma_xz", "k_x", "k_y",
                          "k_z"});
        auto& t = c.model.triplet;
        r.number("k_sp", t.k_sp);
        r.number("k_isc", t.k_isc);
        r.number("p_x", t.p_x);
        r.number("p_y", t.p_y);
        r.number("p_z", t.p_z);
        r.number("gamma_xy", t.gamma_xy);
        r.number("gamma_yz", t.gamma_yz);
        r.number("gamma_xz", t.gamma_xz);
        r.number("k_x", t.k_x);
        r.number("k_y", t.k_y);
        r.number("k_z", t.k_z);
    }
    if (root.has("cavity")) {
        const auto r = root.child("cavity");
        r.reject_unknown({"f_mode", "q0", "q_ex", "v_mode", "t2", "gamma_gyro", "sigma_sq", "t0"});
        auto& m = c.model.cavity;
        r.number("f_mode", m.f_mode);
        r.number("q0", m.q0);
        r.number("q_ex", m.q_ex);
        r.number("v_mode", m.v_mode);
        r.number("t2", m.t2);
        r.number("gamma_gyro", m.gamma_gyro);
        r.number("sigma_sq", m.sigma_sq);
        r.number("t0", m.t0);
    }
    c.model.receiver.t0 = c.model.cavity.t0;
    if (root.has("receiver")) {
        const auto r = root.child("receiver");
        r.reject_unknown({"t_min", "rn_over_z0", "gamma_opt_re", "gamma_opt_im", "g_lna", "b_saw", "f_rec", "g_rec"});
        auto& rx = c.model.receiver;
        r.number("t_min", rx.lna.t_min);
        r.number("rn_over_z0", rx.lna.rn_over_z0);
        double re = rx.lna.gamma_opt.real(), im = rx.lna.gamma_opt.imag();
        r.number("gamma_opt_re", re);
        r.number("gamma_opt_im", im);
        rx.lna.gamma_opt = {re, im};
        r.number("g_lna", rx.lna.g_lna);
        r.number("b_saw", rx.b_saw);
        r.number("f_rec", rx.f_rec);
        r.number("g_rec", rx.g_rec);
    }
    if (root.has("pump")) {
        const auto r = root.child("pump");
        r.reject_unknown({"lambda_p", "sigma_a", "area_p", "length_l", "alpha", "bleached"});
        auto& p = c.model.pump;
        r.number("lambda_p", p.lambda_p);
        r.number("sigma_a", p.sigma_a);
        r.number("area_p", p.area_p);
        r.number("length_l", p.length_l);
        double alpha = *p.alpha;
        r.number("alpha", alpha);
        p.alpha = alpha;
        r.boolean("bleached", p.bleached);
    }
    if (root.has("integration")) {
        const auto r = root.child("integration");
        r.reject_unknown({"h", "t_start", "t_end", "stride", "t_spin", "pump_hold"});
        auto& o = c.integration;
        r.number("h", o.h);
        r.number("t_start", o.t_start);
        r.number("t_end", o.t_end);
        r.integer("stride", o.stride);
        r.number("t_spin", c.model.t_spin);
        std::string hold = c.pump_hold == Hold::linear ? "linear" : "zero";
        r.text("pump_hold", hold);
        if (hold == "linear")
            c.pump_hold = Hold::linear;
        else if (hold == "zero")
            c.pump_hold = Hold::zero;
        else
            throw config_error("integration.pump_hold: expected \"linear\" or \"zero\", got \"" + hold + "\"");
    }
    validate(c);
    return c;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

inline nlohmann::json to_json(const Config& c) {
    const auto& t = c.model.triplet;
    const auto& m = c.model.cavity;
    const auto& rx = c.model.receiver;
    const auto& p = c.model.pump;
    const auto& o = c.integration;
    nlohmann::json j;
    j["schema_version"] = config_schema_version;
    j["n_tot"] = c.model.n_tot;
    j["triplet"] = {{"k_sp", t.k_sp},         {"k_isc", t.k_isc},       {"p_x", t.p_x},
                    {"p_y", t.p_y},           {"p_z", t.p_z},           {"gamma_xy", t.gamma_xy},
                    {"gamma_yz", t.gamma_yz}, {"gamma_xz", t.gamma_xz}, {"k_x", t.k_x},
                    {"k_y", t.k_y},           {"k_z", t.k_z}};
    j["cavity"] = {{"f_mode", m.f_mode}, {"q0", m.q0},   {"q_ex", m.q_ex},           {"v_mode", m.v_mode},
                   {"t2", m.t2},         {"t0", m.t0},   {"gamma_gyro", m.gamma_gyro}, {"sigma_sq", m.sigma_sq}};
    j["receiver"] = {{"t_min", rx.lna.t_min},
                     {"rn_over_z0", rx.lna.rn_over_z0},
                     {"gamma_opt_re", rx.lna.gamma_opt.real()},
                     {"gamma_opt_im", rx.lna.gamma_opt.imag()},
                     {"g_lna", rx.lna.g_lna},
                     {"b_saw", rx.b_saw},
                     {"f_rec", rx.f_rec},
                     {"g_rec", rx.g_rec}};
    j["pump"] = {{"lambda_p", p.lambda_p}, {"sigma_a", p.sigma_a}, {"area_p", p.area_p},
                 {"length_l", p.length_l}, {"bleached", p.bleached}};
    if (p.alpha) j["pump"]["alpha"] = *p.alpha;
    j["integration"] = {{"h", o.h},           {"t_start", o.t_start},       {"t_end", o.t_end},
                        {"stride", o.stride}, {"t_spin", c.model.t_spin},
                        {"pump_hold", c.pump_hold == Hold::linear ? "linear" : "zero"}};
    return j;
}

inline std::string serialize_config(const Config& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace masar

#endif
