#pragma once

// Run orchestration: initial condition, fixed-step RK4 loop, energy series,
// and in-memory snapshot collection. File layout is the caller's business.

#include "lerayflux/config.hpp"
#include "lerayflux/energy.hpp"

namespace lerayflux {

struct StoredState {
    long long step = 0;
    ModelState state;
};

struct SimulationOutput {
    EnergySeries series;
    std::vector<StoredState> snapshots;
    ModelState final_state;
    double dt = 0.0;
    long long steps = 0;
    double drift = 0.0; // max_t |E(t) - E(0)| / E(0)

    SimulationOutput(const Grid& g) : final_state(g) {}
};

/// Optional per-state hook (e.g. extra storage); may be null.
using SnapshotHook = void (*)(const ModelState&, long long step, void* ctx);

inline SimulationOutput run_simulation(const RunConfig& rc, SnapshotHook hook = nullptr,
                                       void* hook_ctx = nullptr) {
    Grid grid(rc.dim, rc.n);
    SimulationOutput out(grid);
    ModelState state = initial_condition(rc.ic.kind, grid, rc.params, rc.ic);

    double dt = rc.dt > 0.0 ? rc.dt : cfl_dt(state, rc.cfl_safety);
    long long steps = static_cast<long long>(std::ceil(rc.t_end / dt - 1e-9));
    if (steps < 1) steps = 1;
    // Land on t_end exactly when it is a near-multiple of dt; otherwise the
    // final step is shortened.
    out.dt = dt;
    out.steps = steps;

    auto record = [&](long long step) {
        if (step % rc.series_every == 0 || step == steps)
            out.series.push_back(sample_energy(state));
        if (rc.snapshot_every > 0 && (step % rc.snapshot_every == 0 || step == steps)) {
            out.snapshots.push_back({step, state});
            if (hook) hook(state, step, hook_ctx);
        }
    };
    record(0);

    for (long long step = 1; step <= steps; ++step) {
        const double remaining = rc.t_end - state.t;
        const double h = step == steps ? std::max(remaining, 1e-12 * dt) : dt;
        state = step_rk4(state, rc.params, h, rc.variant);
        record(step);
    }
    out.final_state = state;

    const double e0 = out.series.front().E_total;
    for (const auto& s : out.series)
        out.drift = std::max(out.drift, std::abs(s.E_total - e0) / std::max(e0, 1e-300));
    return out;
}

/// Enstrophy (2 pi)^d sum |k|^2 |fhat|^2 over all components.
inline double enstrophy(const SpectralField& f) {
    double s = 0.0;
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        for (int c = 0; c < f.components(); ++c) s += k2 * std::norm(f.at(c, m));
    });
    return s * f.grid().volume();
}

} // namespace lerayflux
