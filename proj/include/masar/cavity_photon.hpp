#ifndef MASAR_CAVITY_PHOTON_HPP
#define MASAR_CAVITY_PHOTON_HPP

#include <cmath>
#include <string>

#include "masar/constants.hpp"
#include "masar/error.hpp"

namespace masar {

/// TE01-delta mode of the STO-loaded cavity and the X-Z spin transition it couples to.
/// Defaults: critically coupled (Q0 = Qex = 7200, Q_L = 3600) at 1.4495 GHz.
struct CavityMode {
    double f_mode = 1.4495e9;                       // Hz
    double q0 = 7200.0;                             // intrinsic quality factor
    double q_ex = 7200.0;                           // external quality factor
    double v_mode = 0.32e-6;                        // m^3 (0.32 cm^3)
    double t2 = 2.9e-6;                             // s
    double gamma_gyro = constants::two_pi * 28e9;   // rad s^-1 T^-1
    double sigma_sq = 0.5;                          // <sigma^2>
    double t0 = 290.0;                              // K

    double omega() const { return constants::two_pi * f_mode; }
    double loaded_q() const { return 1.0 / (1.0 / q0 + 1.0 / q_ex); }
    /// Energy decay rate of the loaded cavity, omega / Q_L (rad/s).
    double kappa_c() const { return omega() / loaded_q(); }
    /// Static coupling coefficient Q0 / Qex (1 at critical coupling).
    double coupling() const { return q0 / q_ex; }

    friend bool operator==(const CavityMode&, const CavityMode&) = default;
};

inline void validate(const CavityMode& m) {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw config_error(std::string("cavity.") + name + " must be > 0, got " + std::to_string(v));
    };
    positive(m.f_mode, "f_mode");
    positive(m.q0, "q0");
    positive(m.q_ex, "q_ex");
    positive(m.v_mode, "v_mode");
    positive(m.t2, "t2");
    positive(m.t0, "t0");
    if (!(m.gamma_gyro >= 0.0))
        throw config_error("cavity.gamma_gyro must be >= 0, got " + std::to_string(m.gamma_gyro));
    if (!(m.sigma_sq > 0.0 && m.sigma_sq <= 1.0))
        throw config_error("cavity.sigma_sq must lie in (0, 1], got " + std::to_string(m.sigma_sq));
}

/// Photons per kelvin, k_B / (h f).
inline double photons_per_kelvin(double f_mode) {
    return constants::boltzmann / (constants::planck * f_mode);
}

/// Einstein B coefficient of the X-Z transition in the mode, s^-1 per photon per molecule.
inline double einstein_b(const CavityMode& mode) {
    if (!(mode.sigma_sq > 0.0 && mode.sigma_sq <= 1.0))
        throw domain_error("sigma_sq must lie in (0, 1], got " + std::to_string(mode.sigma_sq));
    if (!(mode.v_mode > 0.0)) throw domain_error("v_mode must be > 0");
    using namespace constants;
    return vacuum_permeability * mode.gamma_gyro * mode.gamma_gyro * planck * mode.f_mode * mode.t2 *
           mode.sigma_sq / (2.0 * mode.v_mode);
}

inline double stimulated_rate(double b, double q) {
    if (!(b >= 0.0)) throw domain_error("B must be >= 0, got " + std::to_string(b));
    if (!(q >= 0.0)) throw domain_error("photon number must be >= 0, got " + std::to_string(q));
    return b * q;
}

/// eta_bar = Q0 B (N_Z - N_X) / omega. Positive when the spins absorb.
inline double magnetic_loss(const CavityMode& mode, double b, double n_z, double n_x) {
    return mode.q0 * b * (n_z - n_x) / mode.omega();
}

/// dq/dt: relaxation of both loss channels towards the bath plus the spin exchange term.
inline double photon_derivative(double q, const CavityMode& mode, double b, double n_x, double n_z,
                                double t_spin = 0.0) {
    const double eps = photons_per_kelvin(mode.f_mode);
    return -mode.omega() * (1.0 / mode.q0 + 1.0 / mode.q_ex) * (q - eps * mode.t0) +
           b * (n_x - n_z) * (q - eps * t_spin);
}

/// Equipartition mode temperature T = q / eps.
inline double mode_temperature(double q, double f_mode) {
    if (!(q >= 0.0)) throw domain_error("photon number must be >= 0, got " + std::to_string(q));
    return q / photons_per_kelvin(f_mode);
}

inline double photons_of_temperature(double t, double f_mode) {
    if (!(t >= 0.0)) throw domain_error("temperature must be >= 0, got " + std::to_string(t));
    return t * photons_per_kelvin(f_mode);
}

/// Bose-Einstein mean occupancy; reporting only (dynamics use equipartition).
inline double bose_occupancy(double t, double f) {
    if (!(t > 0.0)) throw domain_error("temperature must be > 0, got " + std::to_string(t));
    return 1.0 / std::expm1(constants::planck * f / (constants::boltzmann * t));
}

/// Reflection coefficient of the critically coupled cavity loaded by the spins.
inline double reflection_from_loss(double eta_bar) {
    if (!(eta_bar > -2.0)) throw threshold_error(eta_bar);
    return -eta_bar / (2.0 + eta_bar);
}

/// Reflection coefficient at a cooling nadir, in terms of the mode temperature.
inline double reflection_from_temperature(double t_mode, double t0) {
    if (!(t0 > 0.0)) throw domain_error("t0 must be > 0");
    if (!(t_mode > 0.0 && t_mode <= t0))
        throw domain_error("t_mode must lie in (0, t0], got " + std::to_string(t_mode));
    return t_mode / t0 - 1.0;
}

inline double coupling_from_reflection(double gamma_c) {
    if (!(gamma_c < 1.0)) throw domain_error("gamma_c must be < 1, got " + std::to_string(gamma_c));
    return (1.0 + gamma_c) / (1.0 - gamma_c);
}

/// Steady-state (dq/dt = 0) mode temperature for magnetic loss eta_bar.
inline double mode_temperature_from_loss(double eta_bar, double t0, double t_spin = 0.0) {
    if (!(eta_bar > -2.0)) throw threshold_error(eta_bar);
    return (2.0 * t0 + eta_bar * t_spin) / (2.0 + eta_bar);
}

/// Out-coupled power q h f kappa_c k / (1 + k).
inline double maser_output_power(double q, const CavityMode& mode, double kappa_c, double k) {
    if (!(q >= 0.0) || !(kappa_c >= 0.0) || !(k >= 0.0))
        throw domain_error("maser_output_power: q, kappa_c and k must be >= 0");
    return q * constants::planck * mode.f_mode * kappa_c * k / (1.0 + k);
}

}  // namespace masar

#endif
