#ifndef MASAR_RECEIVER_NOISE_HPP
#define MASAR_RECEIVER_NOISE_HPP

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "masar/constants.hpp"
#include "masar/error.hpp"

namespace masar {

/// Noise parameters of the front-end LNA (datasheet values by default).
struct LnaNoiseParams {
    double t_min = 17.4;                              // K
    double rn_over_z0 = 0.022;
    std::complex<double> gamma_opt{-0.131, 0.189};
    double g_lna = 32.5;                              // linear power gain

    friend bool operator==(const LnaNoiseParams&, const LnaNoiseParams&) = default;
};

/// Heterodyne receiver: front-end LNA followed by the rest of the chain lumped into
/// one noise factor and gain.
struct ReceiverChain {
    LnaNoiseParams lna;
    double b_saw = 50e3;  // Hz
    double f_rec = 1.15;
    double g_rec = 1.0;   // cancels in delta_p
    double t0 = 290.0;    // K

    double t_rec() const { return (f_rec - 1.0) * t0; }

    friend bool operator==(const ReceiverChain&, const ReceiverChain&) = default;
};

inline void validate(const ReceiverChain& c) {
    const auto fail = [](const char* name, double v, const char* what) {
        throw config_error(std::string("receiver.") + name + " " + what + ", got " + std::to_string(v));
    };
    if (!(c.lna.t_min >= 0.0)) fail("t_min", c.lna.t_min, "must be >= 0");
    if (!(c.lna.rn_over_z0 >= 0.0)) fail("rn_over_z0", c.lna.rn_over_z0, "must be >= 0");
    if (!(std::abs(c.lna.gamma_opt) < 1.0)) fail("gamma_opt", std::abs(c.lna.gamma_opt), "magnitude must be < 1");
    if (!(c.lna.g_lna > 0.0)) fail("g_lna", c.lna.g_lna, "must be > 0");
    if (!(c.b_saw > 0.0)) fail("b_saw", c.b_saw, "must be > 0");
    if (!(c.f_rec >= 1.0)) fail("f_rec", c.f_rec, "must be >= 1");
    if (!(c.g_rec > 0.0)) fail("g_rec", c.g_rec, "must be > 0");
    if (!(c.t0 > 0.0)) fail("t0", c.t0, "must be > 0");
}

namespace detail {

/// 4 T0 (Rn/Z0) |gc - gopt|^2 / |1 + gopt|^2, the mismatch part of the LNA noise
/// with the (1 - |gc|^2) denominator already cancelled against the source factor.
inline double mismatch_noise(const LnaNoiseParams& lna, std::complex<double> gamma_c, double t0) {
    return 4.0 * t0 * lna.rn_over_z0 * std::norm(gamma_c - lna.gamma_opt) /
           std::norm(1.0 + lna.gamma_opt);
}

}  // namespace detail

/// Noise temperature of the LNA for source reflection gamma_c.
inline double t_lna(const LnaNoiseParams& lna, std::complex<double> gamma_c, double t0) {
    const double mag2 = std::norm(gamma_c);
    if (!(mag2 < 1.0))
        throw domain_error("|gamma_c| must be < 1, got " + std::to_string(std::sqrt(mag2)));
    return lna.t_min + detail::mismatch_noise(lna, gamma_c, t0) / (1.0 - mag2);
}

/// Image-band noise with the cavity seen as a short (gamma_c = -1).
inline double t_image(const LnaNoiseParams& lna, double t0) {
    return detail::mismatch_noise(lna, {-1.0, 0.0}, t0);
}

struct Stage {
    double gain;          // linear
    double noise_factor;  // linear, >= 1
};

/// Cascade noise factor F1 + (F2 - 1)/G1 + (F3 - 1)/(G1 G2) + ...
inline double friis_noise_factor(std::span<const Stage> stages) {
    if (stages.empty()) throw config_error("friis_noise_factor: empty stage list");
    double f = 0.0;
    double gain = 1.0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const Stage& s = stages[i];
        if (!(s.gain > 0.0)) throw config_error("stage gain must be > 0");
        if (!(s.noise_factor >= 1.0)) throw config_error("stage noise factor must be >= 1");
        f += (i == 0) ? s.noise_factor : (s.noise_factor - 1.0) / gain;
        gain *= s.gain;
    }
    return f;
}

inline double noise_temperature_of_factor(double f, double t0) { return (f - 1.0) * t0; }

namespace detail {

// G_REC k_B B_SAW cancel in the ratio; dropping them keeps delta_p independent of g_rec bit for bit.
inline double relative_power(const ReceiverChain& chain, double t_mode, double gamma_c) {
    const LnaNoiseParams& lna = chain.lna;
    const double front_end = (lna.t_min + t_mode) * (1.0 - gamma_c * gamma_c) +
                             mismatch_noise(lna, {gamma_c, 0.0}, chain.t0) + t_image(lna, chain.t0);
    return lna.g_lna * front_end + chain.t_rec();
}

}  // namespace detail

/// Receiver output noise power (W) for mode temperature t_mode seen through reflection gamma_c.
inline double receiver_output_power(const ReceiverChain& chain, double t_mode, double gamma_c) {
    if (!(t_mode >= 0.0)) throw domain_error("t_mode must be >= 0, got " + std::to_string(t_mode));
    if (!(std::abs(gamma_c) <= 1.0))
        throw domain_error("|gamma_c| must be <= 1, got " + std::to_string(gamma_c));
    return chain.g_rec * constants::boltzmann * chain.b_saw *
           detail::relative_power(chain, t_mode, gamma_c);
}

namespace detail {

inline double delta_p_unchecked(const ReceiverChain& chain, double t_mode) {
    const double gamma_c = t_mode / chain.t0 - 1.0;
    return 10.0 * std::log10(relative_power(chain, t_mode, gamma_c) /
                             relative_power(chain, chain.t0, 0.0));
}

}  // namespace detail

/// Power change (dB) relative to the unpumped, critically coupled cavity at T0, on the
/// cooling branch where gamma_c = T_mode/T0 - 1.
inline double delta_p(const ReceiverChain& chain, double t_mode) {
    if (!(t_mode > 0.0 && t_mode <= chain.t0))
        throw domain_error("t_mode must lie in (0, " + std::to_string(chain.t0) + "] K, got " +
                           std::to_string(t_mode));
    return detail::delta_p_unchecked(chain, t_mode);
}

/// T_mode -> 0 limit of delta_p.
inline double delta_p_floor(const ReceiverChain& chain) { return detail::delta_p_unchecked(chain, 0.0); }

struct CalibrationPoint {
    double t_mode;
    double delta_p_db;
};

/// Lowest point of delta_p on [0, T0]. For front ends whose mismatch noise falls faster than
/// the source term grows near gamma_c = -1 this sits slightly below the T_mode -> 0 limit.
inline CalibrationPoint delta_p_minimum(const ReceiverChain& chain, double tol_k = 1e-9) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = 0.0, b = chain.t0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = detail::delta_p_unchecked(chain, c), fd = detail::delta_p_unchecked(chain, d);
    while (b - a > tol_k) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - inv_phi * (b - a);
            fc = detail::delta_p_unchecked(chain, c);
        } else {
            a = c, c = d, fc = fd;
            d = a + inv_phi * (b - a);
            fd = detail::delta_p_unchecked(chain, d);
        }
    }
    const double t = 0.5 * (a + b);
    const double dp = detail::delta_p_unchecked(chain, t);
    const double at_zero = delta_p_floor(chain);
    return dp < at_zero ? CalibrationPoint{t, dp} : CalibrationPoint{0.0, at_zero};
}

inline std::vector<CalibrationPoint> calibration_curve(const ReceiverChain& chain,
                                                       std::span<const double> t_grid) {
    std::vector<CalibrationPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) out.push_back({t, delta_p(chain, t)});
    return out;
}

/// Quoted asymmetric bounds on a measured delta_p: upper_db >= dp >= lower_db.
struct DeltaPBounds {
    double upper_db;
    double lower_db;
};

struct Inversion {
    double t_mode;
    double lower;   // from lower_db
    double upper;   // from upper_db
    bool lower_at_floor = false;  // lower_db was below the floor; lower pinned to 0 K
    bool upper_at_reference = false;  // upper_db was above 0 dB; upper pinned to T0
};

namespace detail {

inline double bisect_delta_p(const ReceiverChain& chain, double dp, double tol_k) {
    double lo = 0.0;
    double hi = chain.t0;
    while (hi - lo > tol_k) {
        const double mid = 0.5 * (lo + hi);
        if (delta_p_unchecked(chain, mid) < dp)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Mode temperature for a measured power reduction, by bisection on the monotonic
/// calibration curve. Throws below_floor_error if dp is not above the floor.
inline Inversion invert_delta_p(const ReceiverChain& chain, double dp, DeltaPBounds bounds,
                                double tol_k = 0.01) {
    const double floor_db = delta_p_floor(chain);
    if (!(dp <= 0.0)) throw domain_error("delta_p must be <= 0 dB on the cooling branch, got " + std::to_string(dp));
    if (!(dp > floor_db)) throw below_floor_error(dp, floor_db);
    if (!(bounds.upper_db >= dp && bounds.lower_db <= dp))
        throw domain_error("uncertainty bounds must bracket delta_p");

    Inversion r{};
    r.t_mode = dp == 0.0 ? chain.t0 : detail::bisect_delta_p(chain, dp, tol_k);
    if (bounds.lower_db <= floor_db) {
        r.lower = 0.0;
        r.lower_at_floor = true;
    } else {
        r.lower = detail::bisect_delta_p(chain, bounds.lower_db, tol_k);
    }
    if (bounds.upper_db >= 0.0) {
        r.upper = chain.t0;
        r.upper_at_reference = true;
    } else {
        r.upper = detail::bisect_delta_p(chain, bounds.upper_db, tol_k);
    }
    return r;
}

inline Inversion invert_delta_p(const ReceiverChain& chain, double dp, double tol_k = 0.01) {
    return invert_delta_p(chain, dp, {dp, dp}, tol_k);
}

}  // namespace masar

#endif
