#pragma once

// The inviscid Leray-alpha reactive system and its viscous variant on the
// torus: u is the evolved (filtered) velocity, v = (1 + alpha^2 |k|^2)^{-1} u
// per mode, Z a transported reactant fraction. Pressure is eliminated through
// the Leray projector during evolution and reconstructed spectrally for
// diagnostics.

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "lerayflux/mollifier.hpp"
#include "lerayflux/spectral_ops.hpp"

namespace lerayflux {

enum class Variant { Inviscid, Viscous };

struct ModelParams {
    double alpha = 0.25;    // Helmholtz filter length
    double nu = 0.0;        // kinematic viscosity (viscous variant)
    double diff_d = 0.0;    // species diffusion (viscous variant)
    double K = 0.0;         // reaction rate constant
    double A = 1.0;         // Arrhenius activation temperature
    double theta_i = 1.0;   // ignition temperature
    double theta_bar = 0.0; // constant background temperature

    void validate() const {
        if (alpha < 0.0 || nu < 0.0 || diff_d < 0.0 || K < 0.0)
            throw std::invalid_argument("ModelParams: alpha, nu, diff_d, K must be >= 0");
        if (!(A > 0.0)) throw std::invalid_argument("ModelParams: A must be > 0");
        if (!(theta_i > 0.0)) throw std::invalid_argument("ModelParams: theta_i must be > 0");
        if (theta_bar < 0.0) throw std::invalid_argument("ModelParams: theta_bar must be >= 0");
    }
};

/// Arrhenius ignition law: zero up to the ignition temperature, exp(-A/theta)
/// above it.
inline double arrhenius_phi(double theta, const ModelParams& p) {
    if (theta < 0.0) throw std::invalid_argument("arrhenius_phi: negative temperature");
    if (theta <= p.theta_i) return 0.0;
    return std::exp(-p.A / theta);
}

struct ModelState {
    SpectralField u; // filtered velocity (evolved)
    SpectralField v; // unfiltered velocity, v = helmholtz^{-1} u
    SpectralField Z; // reactant mass fraction
    double t = 0.0;

    ModelState(const Grid& g)
        : u(g, g.dim()), v(g, g.dim()), Z(g, 1) {}

    const Grid& grid() const { return u.grid(); }

    /// Largest pointwise |div u|; zero to rounding for projected states.
    double max_divergence() const { return max_pointwise_magnitude(divergence(u)); }
};

/// Rebuild v from u; exact since the filter is diagonal in Fourier space.
inline void refresh_filtered_pair(ModelState& s, const ModelParams& p) {
    s.v = helmholtz(s.u, p.alpha, HelmholtzDirection::Invert);
}

/// Zero-mean pressure from -lap p = d_j d_i (v_i u_j); residual at rounding
/// level by construction (per-mode division).
inline SpectralField pressure_solve(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u.grid(), v.grid(), "pressure_solve");
    const Grid& g = u.grid();
    if (u.components() != g.dim() || v.components() != g.dim())
        throw std::invalid_argument("pressure_solve: vector fields required");

    // |k|^2 phat(k) = -k_i k_j (v_i u_j)hat(k); products alias-exact via padding.
    SpectralField p(g, 1);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) {
            SpectralField vi(g, 1), uj(g, 1);
            std::copy(v.component(i).begin(), v.component(i).end(), vi.component(0).begin());
            std::copy(u.component(j).begin(), u.component(j).end(), uj.component(0).begin());
            SpectralField prod = product_spectral(vi, uj, 2);
            for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
                p.at(0, m) -= static_cast<double>(k[i]) * static_cast<double>(k[j]) * prod.at(0, m);
            });
        }
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        p.at(0, m) = k2 == 0.0 ? std::complex<double>{0.0, 0.0} : p.at(0, m) / k2;
    });
    return p;
}

struct StateDerivative {
    SpectralField du;
    SpectralField dZ;
};

/// Right-hand side of the evolution:
///   du/dt = -P[(v.grad)u] (+ nu lap u),   dZ/dt = -div(Z u) - K phi(theta_bar) Z (+ d lap Z)
/// Quadratic products are formed on the grid and dealiased, so the retained
/// coefficients are exact Galerkin values and the discrete energy production
/// of the transport terms vanishes identically.
inline StateDerivative rhs(const ModelState& s, const ModelParams& p, Variant variant) {
    const Grid& g = s.grid();
    require_same_grid(s.u.grid(), s.Z.grid(), "rhs");

    PhysicalField v_phys = inverse_transform(s.v);
    PhysicalField conv(g, g.dim());
    for (int j = 0; j < g.dim(); ++j) {
        for (int i = 0; i < g.dim(); ++i) {
            SpectralField duj_di = partial_derivative(s.u, i);
            SpectralField comp(g, 1);
            std::copy(duj_di.component(j).begin(), duj_di.component(j).end(),
                      comp.component(0).begin());
            PhysicalField dphys = inverse_transform(comp);
            auto dst = conv.component(j);
            auto vi = v_phys.component(i);
            auto dd = dphys.component(0);
            for (std::size_t m = 0; m < dst.size(); ++m) dst[m] += vi[m] * dd[m];
        }
    }
    SpectralField du = leray_project(dealias(transform(conv)));
    scale(du, -1.0);

    // Z transport: -div(Z u) with pointwise products, dealiased.
    PhysicalField z_phys = inverse_transform(s.Z);
    PhysicalField u_phys = inverse_transform(s.u);
    PhysicalField zu(g, g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        auto dst = zu.component(i);
        auto zz = z_phys.component(0);
        auto ui = u_phys.component(i);
        for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = zz[m] * ui[m];
    }
    SpectralField dZ = divergence(dealias(transform(zu)));
    scale(dZ, -1.0);

    const double react = p.K * arrhenius_phi(p.theta_bar, p);
    if (react != 0.0) axpy(dZ, -react, s.Z);

    if (variant == Variant::Viscous) {
        if (p.nu > 0.0) axpy(du, p.nu, laplacian(s.u));
        if (p.diff_d > 0.0) axpy(dZ, p.diff_d, laplacian(s.Z));
    }
    return {std::move(du), std::move(dZ)};
}

struct CflError : std::runtime_error {
    double limit;
    CflError(double dt, double lim)
        : std::runtime_error("step_rk4: dt " + std::to_string(dt) +
                             " exceeds CFL limit " + std::to_string(lim)),
          limit(lim) {}
};

/// Advective CFL estimate safety * dx / max|v|, with a tiny floor so a
/// quiescent state still returns a finite step.
inline double cfl_dt(const ModelState& s, double safety) {
    if (!(safety > 0.0) || safety > 1.0)
        throw std::invalid_argument("cfl_dt: safety must be in (0, 1]");
    const double vmax = std::max(max_pointwise_magnitude(s.v), 1e-30);
    return safety * s.grid().spacing() / vmax;
}

/// Classical RK4 step; v is re-derived from u after the update. Rejects dt
/// beyond the unscaled CFL limit.
inline ModelState step_rk4(const ModelState& s, const ModelParams& p, double dt, Variant variant) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_rk4: dt must be > 0");
    const double limit = cfl_dt(s, 1.0);
    if (dt > limit) throw CflError(dt, limit);

    auto stage_state = [&](const StateDerivative& d, double c) {
        ModelState st(s.grid());
        st.u = s.u;
        axpy(st.u, c * dt, d.du);
        st.Z = s.Z;
        axpy(st.Z, c * dt, d.dZ);
        refresh_filtered_pair(st, p);
        st.t = s.t + c * dt;
        return st;
    };

    StateDerivative k1 = rhs(s, p, variant);
    ModelState s2 = stage_state(k1, 0.5);
    StateDerivative k2 = rhs(s2, p, variant);
    ModelState s3 = stage_state(k2, 0.5);
    StateDerivative k3 = rhs(s3, p, variant);
    ModelState s4 = stage_state(k3, 1.0);
    StateDerivative k4 = rhs(s4, p, variant);

    ModelState out(s.grid());
    out.u = s.u;
    out.Z = s.Z;
    const double w = dt / 6.0;
    axpy(out.u, w, k1.du);
    axpy(out.u, 2.0 * w, k2.du);
    axpy(out.u, 2.0 * w, k3.du);
    axpy(out.u, w, k4.du);
    axpy(out.Z, w, k1.dZ);
    axpy(out.Z, 2.0 * w, k2.dZ);
    axpy(out.Z, 2.0 * w, k3.dZ);
    axpy(out.Z, w, k4.dZ);
    refresh_filtered_pair(out, p);
    out.t = s.t + dt;
    return out;
}

enum class InitialConditionKind { TaylorGreen, SingleMode, RandomDivFree, BurgersShock };

struct InitialConditionSpec {
    InitialConditionKind kind = InitialConditionKind::TaylorGreen;
    double amplitude = 1.0;   // U0 for velocity kinds, jump sigma for the shock
    double z_amplitude = 0.5; // reactant amplitude (velocity kinds)
    unsigned long long seed = 1;
    double slope = 2.0;       // per-mode |coef| ~ |k|^{-slope} for random kind
};

inline InitialConditionKind parse_ic_kind(const std::string& s) {
    if (s == "taylor_green") return InitialConditionKind::TaylorGreen;
    if (s == "single_mode") return InitialConditionKind::SingleMode;
    if (s == "random_div_free") return InitialConditionKind::RandomDivFree;
    if (s == "burgers_shock") return InitialConditionKind::BurgersShock;
    throw std::invalid_argument("unknown initial condition kind '" + s + "'");
}

namespace detail {

inline SpectralField random_div_free_field(const Grid& g, unsigned long long seed, double slope,
                                           double amplitude) {
    SpectralField u(g, g.dim());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, two_pi);
    const int band = dealias_band(g);
    // Canonical half-lattice ordering keeps the draw deterministic and the
    // conjugate symmetry exact.
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        const bool canonical = k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] > 0)));
        if (!canonical) return;
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        if (k2 == 0.0) return;
        if (std::abs(k[0]) > band || std::abs(k[1]) > band || std::abs(k[2]) > band) return;
        const double mag = std::pow(std::sqrt(k2), -slope);
        // index of -k
        std::array<int, 3> idx{};
        for (int a = 0; a < g.dim(); ++a) idx[a] = -k[a] >= 0 ? -k[a] : -k[a] + g.n();
        const std::size_t mneg = g.flatten(idx);
        for (int c = 0; c < g.dim(); ++c) {
            const double ph = unif(rng);
            const std::complex<double> val = mag * std::complex<double>(std::cos(ph), std::sin(ph));
            u.at(c, m) = val;
            u.at(c, mneg) = std::conj(val);
        }
    });
    u = dealias(leray_project(u));
    const double norm = std::sqrt(l2_norm_squared(u));
    if (norm > 0.0) scale(u, amplitude / norm);
    return u;
}

} // namespace detail

/// Build a state for one of the benchmark fields. Velocity kinds require a
/// 3D grid; the Burgers sawtooth requires 1D and is meant for static
/// analysis, not evolution.
inline ModelState initial_condition(InitialConditionKind kind, const Grid& g,
                                    const ModelParams& p, const InitialConditionSpec& spec) {
    ModelState s(g);
    switch (kind) {
    case InitialConditionKind::TaylorGreen: {
        if (g.dim() != 3) throw std::invalid_argument("taylor_green requires dim = 3");
        PhysicalField up(g, 3), zp(g, 1);
        for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
            up.at(0, m) = spec.amplitude * std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]);
            up.at(1, m) = -spec.amplitude * std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]);
            up.at(2, m) = 0.0;
            zp.at(0, m) = spec.z_amplitude * std::cos(x[0]) * std::cos(x[1]) * std::cos(x[2]);
        });
        s.u = dealias(leray_project(transform(up)));
        s.Z = dealias(transform(zp));
        break;
    }
    case InitialConditionKind::SingleMode: {
        if (g.dim() != 3) throw std::invalid_argument("single_mode requires dim = 3");
        PhysicalField up(g, 3), zp(g, 1);
        for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
            up.at(1, m) = spec.amplitude * std::sin(x[0]);
            zp.at(0, m) = spec.z_amplitude * std::sin(x[0]);
        });
        s.u = dealias(leray_project(transform(up)));
        s.Z = dealias(transform(zp));
        break;
    }
    case InitialConditionKind::RandomDivFree: {
        if (g.dim() != 3) throw std::invalid_argument("random_div_free requires dim = 3");
        s.u = detail::random_div_free_field(g, spec.seed, spec.slope, spec.amplitude);
        // Scalar with the same spectral law, separate stream.
        SpectralField zvec = detail::random_div_free_field(g, spec.seed + 1, spec.slope, 1.0);
        SpectralField z(g, 1);
        std::copy(zvec.component(0).begin(), zvec.component(0).end(), z.component(0).begin());
        const double norm = std::sqrt(l2_norm_squared(z));
        if (norm > 0.0) scale(z, spec.z_amplitude / norm);
        s.Z = std::move(z);
        break;
    }
    case InitialConditionKind::BurgersShock: {
        if (g.dim() != 1) throw std::invalid_argument("burgers_shock requires dim = 1");
        PhysicalField up(g, 1);
        for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
            // Sawtooth sigma*(pi - x)/(2 pi) with the jump at x = 0 sampled
            // at its midpoint value.
            up.at(0, m) = m == 0 ? 0.0
                                 : spec.amplitude * (0.5 * two_pi - x[0]) / two_pi;
        });
        s.u = transform(up);
        break;
    }
    }
    refresh_filtered_pair(s, p);
    s.t = 0.0;
    return s;
}

} // namespace lerayflux
