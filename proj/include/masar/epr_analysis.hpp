#ifndef MASAR_EPR_ANALYSIS_HPP
#define MASAR_EPR_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "masar/constants.hpp"
#include "masar/error.hpp"
#include "masar/integrator.hpp"

namespace masar {

// ---------------------------------------------------------------------------
// Spin temperature of the X-Z pair
// ---------------------------------------------------------------------------

struct SpinTemperatureResult {
    double temperature;     // K; +inf when the pair is unpolarized
    double delta_n_over_n;  // (N_Z - N_X) / (N_Z + N_X)
};

/// Boltzmann-equivalent temperature of the X-Z transition, negative when N_X > N_Z.
/// Evaluated as h f / (k_B ln(N_Z/N_X)), which equals h f / (2 k_B atanh(dN/N))
/// but stays exact when the polarization rounds to +-1.
inline SpinTemperatureResult spin_temperature(double n_x, double n_z, double f_xz) {
    if (!(n_x >= 0.0) || !(n_z >= 0.0))
        throw domain_error("spin_temperature: populations must be >= 0");
    if (n_x == 0.0 && n_z == 0.0) throw domain_error("spin_temperature undefined: both populations are zero");
    const double r = (n_z - n_x) / (n_z + n_x);
    if (n_x == n_z) return {std::numeric_limits<double>::infinity(), 0.0};
    const double hf_k = constants::planck * f_xz / constants::boltzmann;
    const double log_ratio = std::log(n_z) - std::log(n_x);
    return {hf_k / log_ratio, r};
}

/// The same relation written directly in the polarization dN/N.
inline double spin_temperature_from_polarization(double delta_n_over_n, double f_xz) {
    if (!(std::abs(delta_n_over_n) < 1.0)) throw domain_error("|dN/N| must be < 1");
    if (delta_n_over_n == 0.0) return std::numeric_limits<double>::infinity();
    return constants::planck * f_xz / (2.0 * constants::boltzmann * std::atanh(delta_n_over_n));
}

/// Inverse of spin_temperature_from_polarization: tanh(h f / (2 k_B T)).
inline double polarization_of_temperature(double t, double f_xz) {
    if (t == 0.0) throw domain_error("temperature must be non-zero");
    return std::tanh(constants::planck * f_xz / (2.0 * constants::boltzmann * t));
}

// ---------------------------------------------------------------------------
// TR-EPR (cavity decoupled)
// ---------------------------------------------------------------------------

struct TrEprPoint {
    double t;
    double delta_n;  // N_Z - N_X
    double n;        // N_Z + N_X
    double t_xz;     // K; NaN when n == 0
};

struct TrEprResult {
    std::vector<TrEprPoint> points;
    std::optional<double> crossover_time;  // first emissive -> absorptive sign change
    std::optional<TrEprPoint> emissive_peak;    // most negative delta_n
    std::optional<TrEprPoint> absorptive_peak;  // most positive delta_n
};

/// Triplet kinetics with no microwave field (W_XZ = 0), as seen by zero-field TR-EPR.
inline TrEprResult tr_epr_simulate(const SimulationModel& model, const PumpProfile& pump,
                                   IntegrationOptions opts) {
    opts.cavity_coupled = false;
    const Trajectory traj = integrate(model, pump, opts);
    const double f = model.cavity.f_mode;

    TrEprResult r;
    r.points.reserve(traj.samples.size());
    bool seen_emissive = false;
    for (const auto& s : traj.samples) {
        TrEprPoint p{s.t, s.spins.n_z - s.spins.n_x, s.spins.n_z + s.spins.n_x,
                     std::numeric_limits<double>::quiet_NaN()};
        if (p.n > 0.0) p.t_xz = spin_temperature(s.spins.n_x, s.spins.n_z, f).temperature;
        if (p.delta_n < 0.0) seen_emissive = true;
        if (seen_emissive && !r.crossover_time && p.delta_n >= 0.0 && p.n > 0.0) r.crossover_time = p.t;
        if (p.delta_n < 0.0 && (!r.emissive_peak || p.delta_n < r.emissive_peak->delta_n)) r.emissive_peak = p;
        if (p.delta_n > 0.0 && (!r.absorptive_peak || p.delta_n > r.absorptive_peak->delta_n))
            r.absorptive_peak = p;
        r.points.push_back(p);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bi-exponential fit  y = a1 exp(-t/tau1) + a2 exp(-t/tau2) + c
// ---------------------------------------------------------------------------

struct SignalSeries {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> sigma;  // empty: unweighted

    std::size_t size() const { return t.size(); }
};

using BiexpParams = Eigen::Matrix<double, 5, 1>;  // a1, tau1, a2, tau2, c
using Matrix5 = Eigen::Matrix<double, 5, 5>;

inline double biexp_value(const BiexpParams& p, double t) {
    return p[0] * std::exp(-t / p[1]) + p[2] * std::exp(-t / p[3]) + p[4];
}

inline BiexpParams biexp_gradient(const BiexpParams& p, double t) {
    const double e1 = std::exp(-t / p[1]);
    const double e2 = std::exp(-t / p[3]);
    BiexpParams g;
    g << e1, p[0] * e1 * t / (p[1] * p[1]), e2, p[2] * e2 * t / (p[3] * p[3]), 1.0;
    return g;
}

struct BandPoint {
    double lower;
    double upper;
};

struct BiexpFit {
    double a1 = 0, tau1 = 0, a2 = 0, tau2 = 0, offset = 0;
    Matrix5 covariance = Matrix5::Zero();  // order a1, tau1, a2, tau2, c
    std::vector<BandPoint> band;           // at each input sample, 95 %
    double sse = 0;                        // weighted when sigma was used
    int iterations = 0;
    bool weighted = false;
    bool with_offset = true;
    bool single_exponential = false;  // tau1 ~ tau2
    std::vector<double> trace;        // SSE after each iteration
    std::vector<std::vector<double>> parameter_trace;  // a1, tau1, a2, tau2, c after each iteration

    BiexpParams params() const {
        BiexpParams p;
        p << a1, tau1, a2, tau2, offset;
        return p;
    }
    double value(double t) const { return biexp_value(params(), t); }
    /// Standard error of the fitted curve at t from the linearized covariance.
    double stderr_at(double t) const {
        const BiexpParams g = biexp_gradient(params(), t);
        return std::sqrt(std::max(0.0, g.dot(covariance * g)));
    }
    BandPoint band_at(double t, double z = 1.959963984540054) const {
        const double v = value(t);
        const double s = z * stderr_at(t);
        return {v - s, v + s};
    }
};

struct BiexpOptions {
    bool weighted = true;     // use sigma when the series has it
    bool with_offset = true;  // false fixes c = 0
    int max_iterations = 500;
    double rel_tol = 1e-8;
    std::optional<BiexpParams> initial;  // skip the heuristic
};

inline double weighted_sse(const BiexpParams& p, const SignalSeries& s, bool weighted = true) {
    const bool w = weighted && !s.sigma.empty();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double r = s.y[i] - biexp_value(p, s.t[i]);
        if (w) r /= s.sigma[i];
        sum += r * r;
    }
    return sum;
}

namespace detail {

/// Least-squares line through (x, y); returns {slope, intercept}.
inline std::pair<double, double> line_fit(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

/// Fit a e^{-t/tau} to z on [lo, hi) in log space. Returns nullopt when the segment does not decay.
inline std::optional<std::pair<double, double>> log_linear_segment(std::span<const double> t,
                                                                   std::span<const double> z) {
    double mean = std::accumulate(z.begin(), z.end(), 0.0);
    const double sign = mean >= 0.0 ? 1.0 : -1.0;
    std::vector<double> xs, ls;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (sign * z[i] > 0.0) {
            xs.push_back(t[i]);
            ls.push_back(std::log(sign * z[i]));
        }
    }
    if (xs.size() < 3) return std::nullopt;
    const auto [slope, intercept] = line_fit(xs, ls);
    if (!(slope < 0.0)) return std::nullopt;
    return std::make_pair(sign * std::exp(intercept), -1.0 / slope);
}

/// Two-segment log-linear start: the tail fixes (a2, tau2), the early residual (a1, tau1).
inline BiexpParams biexp_initial_guess(const SignalSeries& s, bool with_offset) {
    const std::size_t n = s.size();
    const double span_t = s.t.back() - s.t.front();
    double c = 0.0;
    if (with_offset) {
        const std::size_t k = std::max<std::size_t>(3, n / 10);
        c = std::accumulate(s.y.end() - static_cast<long>(k), s.y.end(), 0.0) / static_cast<double>(k);
    }
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = s.y[i] - c;

    const std::size_t half = n / 2;
    // stop before the offset estimate swallows the tail
    const std::size_t tail_end = with_offset ? n - std::max<std::size_t>(3, n / 10) : n;
    double a2 = z[half], tau2 = span_t / 3.0;
    if (tail_end > half + 3) {
        if (auto seg = log_linear_segment(std::span(s.t).subspan(half, tail_end - half),
                                          std::span<const double>(z).subspan(half, tail_end - half))) {
            a2 = seg->first;
            tau2 = seg->second;
        }
    }
    const std::size_t early = std::max<std::size_t>(4, n / 3);
    std::vector<double> resid(early);
    for (std::size_t i = 0; i < early; ++i) resid[i] = z[i] - a2 * std::exp(-s.t[i] / tau2);
    double a1 = resid[0], tau1 = tau2 / 4.0;
    if (auto seg = log_linear_segment(std::span(s.t).first(early), resid)) {
        a1 = seg->first;
        tau1 = seg->second;
    }
    if (std::abs(tau1 - tau2) < 1e-3 * tau2) tau1 = tau2 / 4.0;

    BiexpParams p;
    p << a1, tau1, a2, tau2, c;
    return p;
}

/// (J^T W J)^-1 via diagonal scaling and a rank-revealing decomposition.
inline Matrix5 covariance_from_normal(const Matrix5& a, const std::array<bool, 5>& active) {
    Eigen::Matrix<double, 5, 1> d;
    for (int i = 0; i < 5; ++i) d[i] = active[i] && a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 0.0;
    Matrix5 as = d.asDiagonal() * a * d.asDiagonal();
    for (int i = 0; i < 5; ++i)
        if (!active[i]) as(i, i) = 1.0;
    Matrix5 inv = as.completeOrthogonalDecomposition().pseudoInverse();
    Matrix5 cov = d.asDiagonal() * inv * d.asDiagonal();
    for (int i = 0; i < 5; ++i)
        if (!active[i]) cov.row(i).setZero(), cov.col(i).setZero();
    return cov;
}

}  // namespace detail

/// Weighted Levenberg-Marquardt fit of the bi-exponential model. Converges when an accepted
/// step moves every parameter by less than rel_tol (relative, with 1e-9 of the data scale as the
/// floor for parameters near zero); throws fit_error otherwise.
inline BiexpFit biexp_fit(const SignalSeries& s, const BiexpOptions& opt = {}) {
    const std::size_t n = s.size();
    if (n < 10) throw domain_error("biexp_fit needs at least 10 samples");
    if (s.y.size() != n || (!s.sigma.empty() && s.sigma.size() != n))
        throw domain_error("biexp_fit: column lengths differ");
    for (double sg : s.sigma)
        if (!(sg > 0.0)) throw domain_error("biexp_fit: sigma must be > 0");
    for (std::size_t i = 1; i < n; ++i)
        if (!(s.t[i] > s.t[i - 1])) throw domain_error("biexp_fit: times must be strictly increasing");

    const bool weighted = opt.weighted && !s.sigma.empty();
    const std::array<bool, 5> active{true, true, true, true, opt.with_offset};
    const int n_active = opt.with_offset ? 5 : 4;

    BiexpParams p;
    if (opt.initial) {
        p = *opt.initial;
    } else {
        p = detail::biexp_initial_guess(s, opt.with_offset);
    }
    if (!opt.with_offset) p[4] = 0.0;

    auto normal_equations = [&](const BiexpParams& q, Matrix5& a, BiexpParams& g) {
        a.setZero();
        g.setZero();
        for (std::size_t i = 0; i < n; ++i) {
            const double w = weighted ? 1.0 / (s.sigma[i] * s.sigma[i]) : 1.0;
            BiexpParams j = biexp_gradient(q, s.t[i]);
            if (!opt.with_offset) j[4] = 0.0;
            const double r = s.y[i] - biexp_value(q, s.t[i]);
            a.noalias() += w * j * j.transpose();
            g += w * r * j;
        }
    };

    // a parameter sitting at zero is judged against the data scale instead
    double y_scale = 0.0;
    for (double y : s.y) y_scale = std::max(y_scale, std::abs(y));
    const double t_span = s.t.back() - s.t.front();
    const std::array<double, 5> floor_scale{1e-9 * y_scale, 1e-9 * t_span, 1e-9 * y_scale, 1e-9 * t_span,
                                            1e-9 * y_scale};

    BiexpFit fit;
    fit.weighted = weighted;
    fit.with_offset = opt.with_offset;
    double sse = weighted_sse(p, s, weighted);
    double lambda = 1e-3;
    bool converged = false;
    int it = 0;
    Matrix5 a;
    BiexpParams g;
    for (; it < opt.max_iterations && !converged; ++it) {
        normal_equations(p, a, g);
        // Marquardt scaling: damp each direction by its own curvature
        Eigen::Matrix<double, 5, 1> d;
        for (int i = 0; i < 5; ++i) d[i] = a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 0.0;
        const Matrix5 as = d.asDiagonal() * a * d.asDiagonal();
        const BiexpParams gs = d.asDiagonal() * g;

        bool accepted = false;
        while (!accepted) {
            Matrix5 damped = as;
            for (int i = 0; i < 5; ++i) damped(i, i) = active[i] ? damped(i, i) * (1.0 + lambda) : 1.0;
            const BiexpParams step = d.asDiagonal() * damped.ldlt().solve(gs);
            BiexpParams trial = p + step;
            if (!opt.with_offset) trial[4] = 0.0;
            const bool valid = trial.allFinite() && trial[1] > 0.0 && trial[3] > 0.0;
            const double trial_sse = valid ? weighted_sse(trial, s, weighted) : std::numeric_limits<double>::infinity();
            if (valid && trial_sse <= sse) {
                double rel = 0.0;
                for (int i = 0; i < 5; ++i)
                    if (active[i]) rel = std::max(rel, std::abs(step[i]) / std::max(std::abs(trial[i]), floor_scale[i]));
                p = trial;
                sse = trial_sse;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (rel < opt.rel_tol) converged = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // no descent direction left at working precision: stationary point
                    accepted = true;
                    converged = true;
                }
            }
        }
        fit.trace.push_back(sse);
        fit.parameter_trace.emplace_back(p.data(), p.data() + 5);
    }
    fit.iterations = it;
    if (!converged)
        throw fit_error("biexp_fit did not converge in " + std::to_string(opt.max_iterations) + " iterations",
                        sse, fit.trace, fit.parameter_trace);

    // canonical order tau1 <= tau2
    if (p[1] > p[3]) {
        std::swap(p[0], p[2]);
        std::swap(p[1], p[3]);
    }
    fit.a1 = p[0];
    fit.tau1 = p[1];
    fit.a2 = p[2];
    fit.tau2 = p[3];
    fit.offset = p[4];
    fit.sse = sse;
    fit.single_exponential = std::abs(p[3] - p[1]) <= 1e-6 * p[3];

    normal_equations(p, a, g);
    fit.covariance = detail::covariance_from_normal(a, active);
    if (!weighted) {
        const double dof = static_cast<double>(n) - n_active;
        fit.covariance *= sse / dof;
    }
    fit.band.reserve(n);
    for (double t : s.t) fit.band.push_back(fit.band_at(t));
    return fit;
}

/// Residual-bootstrap 95 % band (percentile), for validating the linearized band.
inline std::vector<BandPoint> bootstrap_band(const SignalSeries& s, const BiexpFit& fit, int resamples,
                                             std::uint64_t seed) {
    const std::size_t n = s.size();
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = s.y[i] - fit.value(s.t[i]);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::vector<double>> curves(n);
    BiexpOptions opt;
    opt.weighted = fit.weighted;
    opt.with_offset = fit.with_offset;
    opt.initial = fit.params();
    SignalSeries boot = s;
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) boot.y[i] = fit.value(s.t[i]) + resid[pick(rng)];
        try {
            const BiexpFit f = biexp_fit(boot, opt);
            for (std::size_t i = 0; i < n; ++i) curves[i].push_back(f.value(s.t[i]));
        } catch (const fit_error&) {
        }
    }
    std::vector<BandPoint> band(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& c = curves[i];
        if (c.empty()) throw fit_error("bootstrap: every resample failed", fit.sse, {});
        std::sort(c.begin(), c.end());
        const auto at = [&](double q) { return c[static_cast<std::size_t>(q * static_cast<double>(c.size() - 1))]; };
        band[i] = {at(0.025), at(0.975)};
    }
    return band;
}

struct FitMinimum {
    double t_min;
    double y_min;
    double y_lower;
    double y_upper;
    bool at_boundary = false;  // curve monotone on the range
};

/// Global minimum of the fitted curve on [t_lo, t_hi]: grid scan, then golden-section refinement.
inline FitMinimum fit_minimum(const BiexpFit& fit, double t_lo, double t_hi, double rel_tol = 1e-9) {
    if (!(t_hi > t_lo)) throw domain_error("fit_minimum: empty range");
    constexpr int grid = 2000;
    const double dt = (t_hi - t_lo) / grid;
    int best = 0;
    double best_y = fit.value(t_lo);
    for (int i = 1; i <= grid; ++i) {
        const double y = fit.value(t_lo + i * dt);
        if (y < best_y) best_y = y, best = i;
    }
    FitMinimum m{};
    if (best == 0 || best == grid) {
        m.t_min = best == 0 ? t_lo : t_hi;
        m.at_boundary = true;
    } else {
        constexpr double inv_phi = 0.6180339887498949;
        double a = t_lo + (best - 1) * dt;
        double b = t_lo + (best + 1) * dt;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = fit.value(c), fd = fit.value(d);
        while (b - a > rel_tol * std::max(std::abs(a + b) * 0.5, dt)) {
            if (fc < fd) {
                b = d, d = c, fd = fc;
                c = b - inv_phi * (b - a);
                fc = fit.value(c);
            } else {
                a = c, c = d, fc = fd;
                d = a + inv_phi * (b - a);
                fd = fit.value(d);
            }
        }
        m.t_min = 0.5 * (a + b);
    }
    m.y_min = fit.value(m.t_min);
    const BandPoint band = fit.band_at(m.t_min);
    m.y_lower = band.lower;
    m.y_upper = band.upper;
    return m;
}

}  // namespace masar

#endif
