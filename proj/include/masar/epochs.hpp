#ifndef MASAR_EPOCHS_HPP
#define MASAR_EPOCHS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "masar/integrator.hpp"

namespace masar {

/// Contiguous run of trajectory samples [begin, end).
struct Epoch {
    std::size_t begin = 0;
    std::size_t end = 0;
    double t_begin = 0.0;
    double t_end = 0.0;  // time of the first sample past the run (or of the last sample)

    double duration() const { return t_end - t_begin; }
};

inline std::vector<Epoch> find_epochs(const Trajectory& traj,
                                      const std::function<bool(const TrajectorySample&)>& pred) {
    std::vector<Epoch> out;
    const auto& s = traj.samples;
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::size_t open = none;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool in = pred(s[i]);
        if (in && open == none) open = i;
        if (!in && open != none) {
            out.push_back({open, i, s[open].t, s[i].t});
            open = none;
        }
    }
    if (open != none) out.push_back({open, s.size(), s[open].t, s.back().t});
    return out;
}

/// Runs with more photons than the thermal bath supplies (maser gain).
inline std::vector<Epoch> masing_epochs(const Trajectory& traj, double t0, double rel_tol = 1e-6) {
    return find_epochs(traj, [=](const TrajectorySample& s) { return s.t_mode > t0 * (1.0 + rel_tol); });
}

/// Runs where T_mode < fraction * T0. The default half-depth threshold is eta_bar > 2 at
/// steady state, i.e. spin absorption outpacing the loaded-cavity loss.
inline std::vector<Epoch> cooling_epochs(const Trajectory& traj, double t0, double fraction = 0.5) {
    return find_epochs(traj, [=](const TrajectorySample& s) { return s.t_mode < fraction * t0; });
}

/// A masing burst together with the cooling epoch that follows it (if any).
struct BurstCycle {
    Epoch masing;
    std::optional<Epoch> cooling;
    bool cut_by_next_burst = false;  // cooling ended because the next burst started
};

/// Pair every masing epoch with the first cooling epoch starting before the next burst.
/// `cut_gap` is how close the cooling end must be to the next burst onset to count as cut off.
inline std::vector<BurstCycle> burst_cycles(const Trajectory& traj, double t0, double fraction = 0.5,
                                            double cut_gap = 10e-6) {
    const auto mas = masing_epochs(traj, t0);
    const auto cool = cooling_epochs(traj, t0, fraction);
    std::vector<BurstCycle> out;
    for (std::size_t i = 0; i < mas.size(); ++i) {
        BurstCycle c{mas[i], std::nullopt, false};
        const double next = i + 1 < mas.size() ? mas[i + 1].t_begin : traj.samples.back().t + 1.0;
        for (const auto& e : cool) {
            if (e.t_begin >= mas[i].t_end && e.t_begin < next) {
                c.cooling = e;
                c.cut_by_next_burst = i + 1 < mas.size() && next - e.t_end < cut_gap;
                break;
            }
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace masar

#endif
