#ifndef MASAR_PUMP_HPP
#define MASAR_PUMP_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "masar/error.hpp"

namespace masar {

enum class Hold {
    linear,  // piecewise-linear between samples
    zero,    // zero-order hold: sample value until the next sample time
};

/// Sampled optical pump power. Zero outside [first sample, last sample].
class PumpProfile {
public:
    struct Sample {
        double t;  // s
        double p;  // W
    };

    PumpProfile() = default;

    PumpProfile(std::vector<Sample> samples, Hold hold = Hold::linear)
        : samples_(std::move(samples)), hold_(hold) {
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!(samples_[i].p >= 0.0) || !std::isfinite(samples_[i].p))
                throw config_error("pump sample " + std::to_string(i) + ": power must be >= 0");
            if (!std::isfinite(samples_[i].t))
                throw config_error("pump sample " + std::to_string(i) + ": time must be finite");
            // two samples may share an instant, which encodes a step
            if (i > 0 && !(samples_[i].t >= samples_[i - 1].t))
                throw config_error("pump sample " + std::to_string(i) + ": times must be non-decreasing");
            if (i > 1 && samples_[i].t == samples_[i - 2].t)
                throw config_error("pump sample " + std::to_string(i) + ": more than two samples at one instant");
        }
    }

    static PumpProfile zero() { return {}; }

    const std::vector<Sample>& samples() const { return samples_; }
    Hold hold() const { return hold_; }
    bool empty() const { return samples_.empty(); }

    double power(double t) const {
        if (samples_.empty() || t < samples_.front().t || t > samples_.back().t) return 0.0;
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const Sample& s) { return v < s.t; });
        if (it == samples_.end()) return hold_ == Hold::linear ? samples_.back().p : 0.0;
        const Sample& b = *it;
        const Sample& a = *(it - 1);
        if (hold_ == Hold::zero) return a.p;
        return a.p + (b.p - a.p) * (t - a.t) / (b.t - a.t);
    }

    double peak() const {
        double m = 0.0;
        for (const auto& s : samples_) m = std::max(m, s.p);
        return m;
    }

    /// Exact time integral of the interpolated profile (J).
    double energy() const {
        double e = 0.0;
        for (std::size_t i = 1; i < samples_.size(); ++i) {
            const double dt = samples_[i].t - samples_[i - 1].t;
            e += hold_ == Hold::linear ? 0.5 * (samples_[i].p + samples_[i - 1].p) * dt
                                       : samples_[i - 1].p * dt;
        }
        return e;
    }

private:
    std::vector<Sample> samples_;
    Hold hold_ = Hold::linear;
};

struct Rectangular {};
struct Trapezoid {
    double rise;  // s, ramp time at each edge
};

/// Train of identical pulses; `interval` is start-to-start.
struct PulseTrainSpec {
    int n_pulses = 3;
    double duration = 150e-6;
    double interval = 500e-6;
    double total_energy = 2.4;
    std::variant<Rectangular, Trapezoid> shape = Rectangular{};
    double start = 0.0;
};

inline void validate(const PulseTrainSpec& s) {
    if (s.n_pulses < 1) throw config_error("pulse train: n_pulses must be >= 1");
    if (!(s.duration > 0.0)) throw config_error("pulse train: duration must be > 0");
    if (!(s.total_energy > 0.0)) throw config_error("pulse train: total_energy must be > 0");
    if (s.n_pulses > 1 && !(s.duration < s.interval))
        throw config_error("pulse train: duration must be shorter than the interval");
    if (const auto* tr = std::get_if<Trapezoid>(&s.shape)) {
        if (!(tr->rise > 0.0 && 2.0 * tr->rise <= s.duration))
            throw config_error("pulse train: trapezoid rise must lie in (0, duration/2]");
    }
}

/// Synthetic pump waveform whose integral is exactly `total_energy`.
inline PumpProfile synth_pump(const PulseTrainSpec& spec) {
    validate(spec);
    std::vector<PumpProfile::Sample> samples;
    if (std::holds_alternative<Rectangular>(spec.shape)) {
        const double p = spec.total_energy / (spec.n_pulses * spec.duration);
        for (int i = 0; i < spec.n_pulses; ++i) {
            const double t0 = spec.start + i * spec.interval;
            samples.push_back({t0, 0.0});
            samples.push_back({t0, p});
            samples.push_back({t0 + spec.duration, p});
            samples.push_back({t0 + spec.duration, 0.0});
        }
        return PumpProfile(std::move(samples), Hold::linear);
    }

    const double rise = std::get<Trapezoid>(spec.shape).rise;
    const double p = spec.total_energy / (spec.n_pulses * (spec.duration - rise));
    for (int i = 0; i < spec.n_pulses; ++i) {
        const double t0 = spec.start + i * spec.interval;
        const double t1 = t0 + spec.duration;
        samples.push_back({t0, 0.0});
        samples.push_back({t0 + rise, p});
        // a triangle has a single apex
        if (t1 - rise > t0 + rise) samples.push_back({t1 - rise, p});
        samples.push_back({t1, 0.0});
    }
    return PumpProfile(std::move(samples), Hold::linear);
}

}  // namespace masar

#endif
