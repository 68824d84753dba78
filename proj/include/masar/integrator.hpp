#ifndef MASAR_INTEGRATOR_HPP
#define MASAR_INTEGRATOR_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "masar/cavity_photon.hpp"
#include "masar/error.hpp"
#include "masar/pump.hpp"
#include "masar/receiver_noise.hpp"
#include "masar/spin_dynamics.hpp"

namespace masar {

namespace detail {

template <typename State>
bool all_finite(const State& y) {
    if constexpr (std::is_arithmetic_v<State>)
        return std::isfinite(y);
    else
        return y.allFinite();
}

}  // namespace detail

/// One classical fourth-order Runge-Kutta step of dy/dt = f(t, y).
template <typename State, typename Derivative>
State rk4_step(Derivative&& f, double t, const State& y, double h) {
    if (!(h > 0.0)) throw domain_error("rk4_step: h must be > 0");
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = f(t + h, State(y + h * k3));
    if (!detail::all_finite(k1) || !detail::all_finite(k2) || !detail::all_finite(k3) ||
        !detail::all_finite(k4))
        throw numerical_error("non-finite derivative", t);
    return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Five spin populations followed by the photon number.
using SystemVector = Eigen::Matrix<double, 6, 1>;

/// Everything the coupled model needs besides the pump waveform.
struct SimulationModel {
    TripletRates triplet;
    CavityMode cavity;
    PumpParams pump;
    ReceiverChain receiver;
    double n_tot = 7.0e15;
    double t_spin = 0.0;  // K; the spin term's target temperature in dq/dt
};

struct IntegrationOptions {
    double h = 0.5e-9;
    double t_start = 0.0;
    double t_end = 3e-3;
    int stride = 100;
    bool cavity_coupled = true;  // false: W_XZ = 0 and q frozen (TR-EPR)
    std::optional<double> q_initial;  // default: thermal value eps * T0
};

struct TrajectorySample {
    double t = 0.0;
    SpinState spins;
    double q = 0.0;
    double t_mode = 0.0;
    double eta_bar = 0.0;
    double gamma_c = 0.0;     // NaN above the maser threshold
    double delta_p_db = 0.0;  // NaN outside the cooling branch
    double p_maser = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double h = 0.0;
    int stride = 1;
};

/// Fill the derived channels of a sample from (t, spins, q).
inline void derive_channels(TrajectorySample& s, const SimulationModel& m) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const CavityMode& c = m.cavity;
    const double b = einstein_b(c);
    s.t_mode = mode_temperature(s.q, c.f_mode);
    s.eta_bar = magnetic_loss(c, b, s.spins.n_z, s.spins.n_x);
    s.gamma_c = s.eta_bar > -2.0 ? reflection_from_loss(s.eta_bar) : nan;
    // equilibrium round-off (q/eps a few ulp above T0) still belongs to the reference point
    const double t0 = m.receiver.t0;
    if (s.t_mode > 0.0 && s.t_mode <= t0 * (1.0 + 1e-9))
        s.delta_p_db = delta_p(m.receiver, std::min(s.t_mode, t0));
    else
        s.delta_p_db = nan;
    s.p_maser = maser_output_power(s.q, c, c.kappa_c(), c.coupling());
}

namespace detail {

inline const char* level_name(int i) {
    static const char* names[] = {"S0", "S1", "NX", "NY", "NZ"};
    return names[i];
}

/// Enforce h <= 1 / (10 * fastest rate), naming the limiting rate.
inline void check_step(const SimulationModel& m, const PumpProfile& pump, const IntegrationOptions& o) {
    if (!(o.h > 0.0)) throw config_error("integration.h must be > 0");
    const double xi_peak = pump_rate(m.pump, pump.peak());
    const RateMatrix mat = rate_matrix(m.triplet, xi_peak, 0.0).cwiseAbs();
    Eigen::Index row = 0, col = 0;
    double limit = mat.maxCoeff(&row, &col);
    std::string name = std::string("rate matrix entry (") + level_name(static_cast<int>(row)) + "," +
                       level_name(static_cast<int>(col)) + ") at peak xi = " + std::to_string(xi_peak) +
                       " s^-1";
    if (o.cavity_coupled && m.cavity.kappa_c() > limit) {
        limit = m.cavity.kappa_c();
        name = "cavity decay rate omega/Q_L";
    }
    if (o.h * 10.0 * limit > 1.0) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "integration.h = %.3g s exceeds 1/(10 x %.4g s^-1) = %.3g s; limiting rate: ",
                      o.h, limit, 1.0 / (10.0 * limit));
        throw config_error(buf + name);
    }
}

}  // namespace detail

/// Integrate the coupled spin + photon equations from the unpumped state
/// (S0 = n_tot, q = eps*T0) with fixed-step RK4. Output is decimated by `stride`.
inline Trajectory integrate(const SimulationModel& m, const PumpProfile& pump, const IntegrationOptions& o) {
    validate(m.triplet);
    validate(m.cavity);
    validate(m.pump);
    if (!(m.n_tot > 0.0)) throw config_error("n_tot must be > 0");
    if (!(o.t_end > o.t_start)) throw config_error("integration.t_end must be after t_start");
    if (o.stride < 1) throw config_error("integration.stride must be >= 1");
    detail::check_step(m, pump, o);

    const CavityMode& cav = m.cavity;
    const double b = einstein_b(cav);
    const double eps = photons_per_kelvin(cav.f_mode);

    auto f = [&](double t, const SystemVector& y) -> SystemVector {
        const double xi = pump_rate(m.pump, pump.power(t));
        const double q = y[5];
        const double w = o.cavity_coupled ? b * q : 0.0;
        SystemVector d;
        d.head<5>() = rate_matrix(m.triplet, xi, w < 0.0 ? 0.0 : w) * y.head<5>();
        d[5] = o.cavity_coupled ? photon_derivative(q, cav, b, y[kNX], y[kNZ], m.t_spin) : 0.0;
        return d;
    };

    SystemVector y;
    y << m.n_tot, 0.0, 0.0, 0.0, 0.0, o.q_initial.value_or(eps * cav.t0);
    if (!(y[5] >= 0.0)) throw config_error("initial photon number must be >= 0");

    const auto n_steps = static_cast<long long>(std::llround((o.t_end - o.t_start) / o.h));
    Trajectory traj;
    traj.h = o.h;
    traj.stride = o.stride;
    traj.samples.reserve(static_cast<std::size_t>(n_steps / o.stride + 1));

    auto record = [&](double t) {
        TrajectorySample s;
        s.t = t;
        s.spins = SpinState::from_vector(y.head<5>());
        s.q = y[5];
        derive_channels(s, m);
        traj.samples.push_back(s);
    };

    for (long long i = 0; i <= n_steps; ++i) {
        const double t = o.t_start + static_cast<double>(i) * o.h;
        if (i % o.stride == 0) record(t);
        if (i == n_steps) break;
        y = rk4_step(f, t, y, o.h);
        if (!y.allFinite()) throw numerical_error("state overflow / NaN", t + o.h);
        if (y[5] < 0.0) throw numerical_error("photon number went negative", t + o.h);
    }
    return traj;
}

}  // namespace masar

#endif
