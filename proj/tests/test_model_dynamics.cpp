#include <catch2/catch_amalgamated.hpp>

#include "lerayflux/simulate.hpp"
#include "oracles.hpp"

using namespace lerayflux;
using Catch::Approx;

namespace {

ModelState make_state(const Grid& g, const ModelParams& p, InitialConditionKind kind,
                      double amplitude = 1.0, double z_amplitude = 0.5) {
    InitialConditionSpec spec;
    spec.kind = kind;
    spec.amplitude = amplitude;
    spec.z_amplitude = z_amplitude;
    return initial_condition(kind, g, p, spec);
}

} // namespace

TEST_CASE("model parameter validation") {
    ModelParams p;
    p.validate();
    p.nu = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.nu = 0.0;
    p.theta_i = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("Arrhenius ignition law") {
    ModelParams p;
    p.A = 2.0;
    p.theta_i = 1.0;

    CHECK(arrhenius_phi(0.0, p) == 0.0);
    CHECK(arrhenius_phi(p.theta_i, p) == 0.0);
    CHECK(arrhenius_phi(0.5, p) == 0.0);
    // theta = A with A > theta_i -> exp(-1)
    CHECK(arrhenius_phi(2.0, p) == Approx(std::exp(-1.0)).epsilon(1e-14));
    // nondecreasing above ignition
    double prev = 0.0;
    for (double th = 1.01; th < 5.0; th += 0.13) {
        const double v = arrhenius_phi(th, p);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(arrhenius_phi(-0.1, p), std::invalid_argument);
}

TEST_CASE("pressure solve") {
    SECTION("zero fields give zero pressure") {
        Grid g(3, 8);
        SpectralField zero(g, 3);
        CHECK(oracles::max_abs(pressure_solve(zero, zero)) == 0.0);
    }

    SECTION("Taylor-Green closed form, zero mean, and residual") {
        Grid g(3, 16);
        ModelParams p;
        p.alpha = 0.0;
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen);
        SpectralField press = pressure_solve(s.u, s.v);

        CHECK(std::abs(press.at(0, 0)) == 0.0); // exact zero mean

        PhysicalField pp = inverse_transform(press);
        for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
            const double want =
                (std::cos(2 * x[0]) + std::cos(2 * x[1])) * (std::cos(2 * x[2]) + 2.0) / 16.0;
            CHECK(pp.at(0, m) == Approx(want).margin(1e-12));
        });

        // Poisson residual -lap p = d_j d_i (v_i u_j), with the products
        // formed pointwise (exact here: Taylor-Green modes stay well inside
        // the lattice).
        PhysicalField up = inverse_transform(s.u);
        SpectralField rhs_hat(g, 1);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                PhysicalField prod(g, 1);
                for (std::size_t m = 0; m < prod.points(); ++m)
                    prod.at(0, m) = up.at(i, m) * up.at(j, m);
                SpectralField dd = partial_derivative(partial_derivative(transform(prod), i), j);
                axpy(rhs_hat, 1.0, dd);
            }
        SpectralField residual = laplacian(press);
        axpy(residual, 1.0, rhs_hat);
        CHECK(std::sqrt(l2_norm_squared(residual)) < 1e-10);
    }

    SECTION("per-mode division oracle on 8^3 with random divergence-free fields") {
        Grid g(3, 8);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 7, 2.9));
        SpectralField v = helmholtz(u, 0.25, HelmholtzDirection::Invert);
        SpectralField press = pressure_solve(u, v);
        for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
            // Products of band-2 fields reach the 8^3 Nyquist row, where the
            // lattice stores the folded pair; compare interior modes.
            if (std::abs(k[0]) == 4 || std::abs(k[1]) == 4 || std::abs(k[2]) == 4) return;
            const double k2 = static_cast<double>(k[0]) * k[0] + k[1] * k[1] + k[2] * k[2];
            std::complex<double> want{0.0, 0.0};
            if (k2 > 0) {
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        want -= static_cast<double>(k[i]) * static_cast<double>(k[j]) *
                                oracles::convolve_at(v, i, u, j, k);
                want /= k2;
            }
            CHECK(std::abs(press.at(0, m) - want) < 1e-12);
        });
    }
}

TEST_CASE("right-hand side") {
    Grid g(3, 16);
    ModelParams p;

    SECTION("no advection: dZ/dt reduces to diffusion or zero") {
        ModelState s(g);
        s.Z = dealias(transform(oracles::random_physical(g, 1, 3)));
        StateDerivative inviscid = rhs(s, p, Variant::Inviscid);
        CHECK(oracles::max_abs(inviscid.du) == 0.0);
        CHECK(oracles::max_abs(inviscid.dZ) == 0.0);

        ModelParams pv = p;
        pv.diff_d = 0.7;
        StateDerivative viscous = rhs(s, pv, Variant::Viscous);
        SpectralField want = laplacian(s.Z);
        scale(want, pv.diff_d);
        CHECK(oracles::max_abs_diff(viscous.dZ, want) < 1e-13);
    }

    SECTION("single-mode self-advection vanishes") {
        ModelParams p0;
        p0.alpha = 0.0;
        ModelState s = make_state(g, p0, InitialConditionKind::SingleMode, 1.0, 0.0);
        StateDerivative d = rhs(s, p0, Variant::Inviscid);
        CHECK(oracles::max_abs(d.du) < 1e-13);
    }

    SECTION("discrete energy production vanishes in the inviscid reaction-off case") {
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen);
        StateDerivative d = rhs(s, p, Variant::Inviscid);
        const double production = inner_product(s.u, d.du) + inner_product(s.Z, d.dZ);
        const double scale_ref = std::sqrt(l2_norm_squared(s.u) * l2_norm_squared(d.du)) +
                                 std::sqrt(l2_norm_squared(s.Z) * l2_norm_squared(d.dZ));
        CHECK(std::abs(production) <= 1e-11 * std::max(scale_ref, 1.0));
        CHECK(oracles::max_abs(divergence(d.du)) < 1e-12);
    }

    SECTION("grid mismatch rejected") {
        ModelState s(g);
        s.Z = SpectralField(Grid(3, 8), 1);
        CHECK_THROWS_AS(rhs(s, p, Variant::Inviscid), std::invalid_argument);
    }
}

TEST_CASE("RK4 stepping") {
    ModelParams p;

    SECTION("zero state is a fixed point") {
        Grid g(3, 8);
        ModelState s(g);
        ModelState next = step_rk4(s, p, 0.01, Variant::Inviscid);
        CHECK(oracles::max_abs(next.u) == 0.0);
        CHECK(oracles::max_abs(next.Z) == 0.0);
        CHECK(next.t == Approx(0.01));
    }

    SECTION("single-mode viscous decay matches the exponential to O(dt^5)") {
        Grid g(3, 16);
        ModelParams pv;
        pv.alpha = 0.0;
        pv.nu = 1.0;
        ModelState s = make_state(g, pv, InitialConditionKind::SingleMode, 1.0, 0.0);
        const double dt = 0.1;
        ModelState next = step_rk4(s, pv, dt, Variant::Viscous);
        const double ratio = std::sqrt(l2_norm_squared(next.u) / l2_norm_squared(s.u));
        const double exact = std::exp(-pv.nu * 1.0 * dt); // |k|^2 = 1
        CHECK(std::abs(ratio - exact) < 2.0 * std::pow(pv.nu * dt, 5) / 120.0);
    }

    SECTION("Richardson self-convergence order on Taylor-Green is >= 3.8") {
        Grid g(3, 16);
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen);
        const double T = 0.2;
        auto advance = [&](int steps) {
            ModelState st = s;
            const double dt = T / steps;
            for (int i = 0; i < steps; ++i) st = step_rk4(st, p, dt, Variant::Inviscid);
            return st;
        };
        ModelState a = advance(2), b = advance(4), c = advance(8);
        SpectralField d1 = linear_combination(a.u, 1.0, b.u, -1.0);
        SpectralField d2 = linear_combination(b.u, 1.0, c.u, -1.0);
        const double order = std::log2(std::sqrt(l2_norm_squared(d1) / l2_norm_squared(d2)));
        CHECK(order >= 3.8);
    }

    SECTION("CFL violation is rejected with the computed limit") {
        Grid g(3, 16);
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen);
        const double limit = cfl_dt(s, 1.0);
        CHECK_THROWS_AS(step_rk4(s, p, 10.0 * limit, Variant::Inviscid), CflError);
        try {
            step_rk4(s, p, 10.0 * limit, Variant::Inviscid);
        } catch (const CflError& e) {
            CHECK(e.limit == Approx(limit));
        }
    }
}

TEST_CASE("CFL estimate") {
    Grid g(3, 32);
    ModelParams p;
    p.alpha = 0.0;

    SECTION("quiescent state gives a large but finite step") {
        ModelState s(g);
        const double dt = cfl_dt(s, 1.0);
        CHECK(std::isfinite(dt));
        CHECK(dt > 1.0);
    }

    SECTION("doubling the velocity halves the step") {
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen, 1.0, 0.0);
        ModelState s2 = s;
        scale(s2.u, 2.0);
        refresh_filtered_pair(s2, p);
        CHECK(cfl_dt(s2, 0.5) == Approx(0.5 * cfl_dt(s, 0.5)).epsilon(1e-12));
    }

    SECTION("Taylor-Green value") {
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen, 1.0, 0.0);
        CHECK(cfl_dt(s, 0.5) == Approx(0.5 * (two_pi / 32) / 1.0).epsilon(1e-12));
    }

    CHECK_THROWS_AS(cfl_dt(ModelState(g), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(cfl_dt(ModelState(g), 1.5), std::invalid_argument);
}

TEST_CASE("initial conditions") {
    ModelParams p;

    SECTION("Taylor-Green energy is 2 pi^3") {
        Grid g(3, 32);
        ModelState s = make_state(g, p, InitialConditionKind::TaylorGreen, 1.0, 0.0);
        const double Eu = l2_norm_squared(inverse_transform(s.u));
        CHECK(Eu == Approx(2.0 * std::pow(0.5 * two_pi, 3)).epsilon(1e-12));
    }

    SECTION("velocity kinds are divergence-free and satisfy the filter invariant") {
        Grid g(3, 16);
        for (auto kind : {InitialConditionKind::TaylorGreen, InitialConditionKind::SingleMode,
                          InitialConditionKind::RandomDivFree}) {
            ModelState s = make_state(g, p, kind);
            CHECK(s.max_divergence() <= 1e-10);
            CHECK(max_pointwise_magnitude(divergence(s.v)) <= 1e-10);
            SpectralField filtered = helmholtz(s.v, p.alpha, HelmholtzDirection::Apply);
            CHECK(oracles::max_abs_diff(filtered, s.u) < 1e-10);
        }
    }

    SECTION("random fields are bit-identical per seed") {
        Grid g(3, 16);
        InitialConditionSpec spec;
        spec.kind = InitialConditionKind::RandomDivFree;
        spec.seed = 42;
        ModelState a = initial_condition(spec.kind, g, p, spec);
        ModelState b = initial_condition(spec.kind, g, p, spec);
        CHECK(a.u.raw() == b.u.raw());
        CHECK(a.Z.raw() == b.Z.raw());
        spec.seed = 43;
        ModelState c = initial_condition(spec.kind, g, p, spec);
        CHECK(a.u.raw() != c.u.raw());
    }

    SECTION("Burgers sawtooth samples and dimensional guards") {
        Grid g1(1, 1024);
        InitialConditionSpec spec;
        spec.kind = InitialConditionKind::BurgersShock;
        spec.amplitude = 2.0;
        ModelState s = initial_condition(spec.kind, g1, p, spec);
        PhysicalField u = inverse_transform(s.u);
        CHECK(u.at(0, 0) == Approx(0.0).margin(1e-12));
        for_each_point(g1, [&](std::size_t m, const std::array<double, 3>& x) {
            if (m == 0) return;
            CHECK(u.at(0, m) == Approx(2.0 * (0.5 * two_pi - x[0]) / two_pi).margin(1e-12));
        });

        CHECK_THROWS_AS(initial_condition(InitialConditionKind::BurgersShock, Grid(3, 8), p, spec),
                        std::invalid_argument);
        CHECK_THROWS_AS(initial_condition(InitialConditionKind::TaylorGreen, g1, p, spec),
                        std::invalid_argument);
    }
}

TEST_CASE("run-level invariants") {
    SECTION("inviscid reaction-off run conserves E; Z mean conserved") {
        RunConfig rc;
        rc.n = 16;
        rc.t_end = 0.5;
        rc.dt = 5e-3;
        SimulationOutput out = run_simulation(rc);
        CHECK(out.drift <= 1e-8);
        for (const auto& s : out.series) CHECK(s.max_div <= 1e-10);

        ModelState s0 = initial_condition(rc.ic.kind, Grid(rc.dim, rc.n), rc.params, rc.ic);
        const double zmean0 = mean(inverse_transform(s0.Z));
        const double zmean1 = mean(inverse_transform(out.final_state.Z));
        CHECK(std::abs(zmean1 - zmean0) <= 1e-11 * static_cast<double>(out.steps) + 1e-13);
    }

    SECTION("viscous runs decrease E monotonically") {
        RunConfig rc;
        rc.n = 16;
        rc.t_end = 0.3;
        rc.dt = 5e-3;
        rc.variant = Variant::Viscous;
        rc.params.nu = 0.05;
        rc.params.diff_d = 0.05;
        SimulationOutput out = run_simulation(rc);
        for (std::size_t i = 1; i < out.series.size(); ++i)
            CHECK(out.series[i].E_total <= out.series[i - 1].E_total + 1e-12);
    }

    SECTION("reaction-on decay matches d||Z||^2/dt = -2 K phi ||Z||^2 within 1%") {
        RunConfig rc;
        rc.n = 16;
        rc.t_end = 1.0;
        rc.dt = 5e-3;
        rc.params.K = 1.0;
        rc.params.A = 1.0;
        rc.params.theta_i = 1.0;
        rc.params.theta_bar = 2.0; // above ignition
        SimulationOutput out = run_simulation(rc);
        const double phi = std::exp(-rc.params.A / rc.params.theta_bar);
        const double expected = out.series.front().E_Z * std::exp(-2.0 * rc.params.K * phi * 1.0);
        CHECK(out.series.back().E_Z == Approx(expected).epsilon(0.01));
    }
}
