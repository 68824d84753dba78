#ifndef MASAR_SPIN_DYNAMICS_HPP
#define MASAR_SPIN_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Core>

#include "masar/constants.hpp"
#include "masar/error.hpp"

namespace masar {

using SpinVector = Eigen::Matrix<double, 5, 1>;
using RateMatrix = Eigen::Matrix<double, 5, 5>;

/// Index of each level in SpinVector / RateMatrix.
enum Level : int { kS0 = 0, kS1 = 1, kNX = 2, kNY = 3, kNZ = 4 };

/// Photophysical rates of pentacene in p-terphenyl at room temperature (s^-1).
/// Defaults are the tabulated best estimates.
struct TripletRates {
    double k_sp = 4.2e7;    // S1 -> S0 fluorescence
    double k_isc = 6.9e7;   // S1 -> T1 intersystem crossing
    double p_x = 0.76;      // ISC splitting ratios into |X>, |Y>, |Z>
    double p_y = 0.16;
    double p_z = 0.08;
    double gamma_xy = 0.4e4;  // spin-lattice relaxation
    double gamma_yz = 2.2e4;
    double gamma_xz = 1.1e4;
    double k_x = 2.8e4;  // triplet sub-level decay to S0
    double k_y = 0.6e4;
    double k_z = 0.2e4;

    friend bool operator==(const TripletRates&, const TripletRates&) = default;
};

/// Throws config_error naming the offending field.
inline void validate(const TripletRates& r) {
    const auto non_negative = [](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw config_error(std::string("triplet.") + name + " must be a finite rate >= 0, got " +
                               std::to_string(v));
    };
    non_negative(r.k_sp, "k_sp");
    non_negative(r.k_isc, "k_isc");
    non_negative(r.p_x, "p_x");
    non_negative(r.p_y, "p_y");
    non_negative(r.p_z, "p_z");
    non_negative(r.gamma_xy, "gamma_xy");
    non_negative(r.gamma_yz, "gamma_yz");
    non_negative(r.gamma_xz, "gamma_xz");
    non_negative(r.k_x, "k_x");
    non_negative(r.k_y, "k_y");
    non_negative(r.k_z, "k_z");
    const double sum = r.p_x + r.p_y + r.p_z;
    if (std::abs(sum - 1.0) > 1e-12)
        throw config_error("normalization error: triplet.p_x + p_y + p_z = " + std::to_string(sum) +
                           ", expected 1");
}

/// Level populations in absolute molecule counts.
struct SpinState {
    double s0 = 0.0;
    double s1 = 0.0;
    double n_x = 0.0;
    double n_y = 0.0;
    double n_z = 0.0;

    double total() const { return s0 + s1 + n_x + n_y + n_z; }

    SpinVector as_vector() const {
        SpinVector v;
        v << s0, s1, n_x, n_y, n_z;
        return v;
    }

    static SpinState from_vector(const SpinVector& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

    static SpinState ground(double n_tot) { return {n_tot, 0.0, 0.0, 0.0, 0.0}; }

    friend bool operator==(const SpinState&, const SpinState&) = default;
};

/// Optical pump geometry. With `bleached` set the optically-thin limit is used and
/// `alpha` is ignored.
struct PumpParams {
    double lambda_p = 590e-9;    // m
    double sigma_a = 2e-21;      // m^2 (2e-17 cm^2)
    double area_p = 1.9e-6;      // m^2
    double length_l = 4e-3;      // m
    std::optional<double> alpha; // m^-1
    bool bleached = true;

    friend bool operator==(const PumpParams&, const PumpParams&) = default;
};

inline void validate(const PumpParams& p) {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw config_error(std::string("pump.") + name + " must be > 0, got " + std::to_string(v));
    };
    positive(p.lambda_p, "lambda_p");
    positive(p.sigma_a, "sigma_a");
    positive(p.area_p, "area_p");
    positive(p.length_l, "length_l");
    if (p.alpha && !(*p.alpha > 0.0))
        throw config_error("pump.alpha must be > 0, got " + std::to_string(*p.alpha));
    if (!p.bleached && !p.alpha)
        throw config_error("pump.alpha is required when pump.bleached is false");
}

/// Optical pumping parameter xi (s^-1) for instantaneous pump power `power` (W).
inline double pump_rate(const PumpParams& pump, double power) {
    if (!(power >= 0.0)) throw domain_error("pump power must be >= 0, got " + std::to_string(power));
    if (!pump.bleached && !pump.alpha)
        throw config_error("pump.alpha is required when pump.bleached is false");

    using constants::planck;
    using constants::speed_of_light;
    const double thin = pump.lambda_p * pump.sigma_a * power / (planck * speed_of_light * pump.area_p);
    if (pump.bleached) return thin;

    // (1 - exp(-l a)) / (l a) -> 1 as a -> 0; expm1 keeps that limit accurate.
    const double la = pump.length_l * *pump.alpha;
    return thin * (-std::expm1(-la) / la);
}

/// Five-level rate matrix in the order (S0, S1, N_X, N_Y, N_Z); d/dt pops = M * pops.
/// Only the X-Z transition is driven, at rate `w_xz`.
inline RateMatrix rate_matrix(const TripletRates& r, double xi, double w_xz) {
    if (!(xi >= 0.0)) throw domain_error("xi must be >= 0, got " + std::to_string(xi));
    if (!(w_xz >= 0.0)) throw domain_error("w_xz must be >= 0, got " + std::to_string(w_xz));

    const double g_xz = r.gamma_xz + w_xz;
    RateMatrix m;
    // clang-format off
    m <<  -xi,  xi + r.k_sp,                 r.k_x,                               r.k_y,                         r.k_z,
           xi, -(xi + r.k_sp + r.k_isc),     0.0,                                 0.0,                           0.0,
          0.0,  r.p_x * r.k_isc,            -(r.k_x + r.gamma_xy + g_xz),         r.gamma_xy,                    g_xz,
          0.0,  r.p_y * r.k_isc,             r.gamma_xy,                         -(r.k_y + r.gamma_xy + r.gamma_yz), r.gamma_yz,
          0.0,  r.p_z * r.k_isc,             g_xz,                                r.gamma_yz,                  -(r.k_z + g_xz + r.gamma_yz);
    // clang-format on
    return m;
}

/// Largest magnitude entry of the rate matrix; sets the explicit step-size limit.
inline double max_rate(const TripletRates& r, double xi, double w_xz) {
    return rate_matrix(r, xi, w_xz).cwiseAbs().maxCoeff();
}

inline SpinState spin_derivative(const SpinState& state, const RateMatrix& m) {
    return SpinState::from_vector(m * state.as_vector());
}

}  // namespace masar

#endif
