#include <catch2/catch_amalgamated.hpp>

#include "lerayflux/besov.hpp"
#include "lerayflux/simulate.hpp"
#include "oracles.hpp"

using namespace lerayflux;
using Catch::Approx;

namespace {

ModelState taylor_green_state(const Grid& g, double alpha, double z_amplitude = 0.5) {
    ModelParams p;
    p.alpha = alpha;
    InitialConditionSpec spec;
    spec.kind = InitialConditionKind::TaylorGreen;
    spec.z_amplitude = z_amplitude;
    return initial_condition(spec.kind, g, p, spec);
}

SpectralField sawtooth(int n, double sigma) {
    Grid g(1, n);
    InitialConditionSpec spec;
    spec.kind = InitialConditionKind::BurgersShock;
    spec.amplitude = sigma;
    ModelParams p;
    return initial_condition(spec.kind, g, p, spec).u;
}

} // namespace

TEST_CASE("total energy") {
    Grid g(3, 16);

    ModelState zero(g);
    EnergyBreakdown e0 = total_energy(zero);
    CHECK(e0.E_u == 0.0);
    CHECK(e0.E_Z == 0.0);
    CHECK(e0.E_total == 0.0);

    ModelState s(g);
    PhysicalField z(g, 1);
    for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
        z.at(0, m) = std::sin(x[0]);
    });
    s.Z = transform(z);
    const double pi = 0.5 * two_pi;
    CHECK(total_energy(s).E_Z == Approx(4.0 * pi * pi * pi).epsilon(1e-12));

    ModelState tg = taylor_green_state(Grid(3, 16), 0.0, 0.0);
    CHECK(total_energy(tg).E_u == Approx(2.0 * pi * pi * pi).epsilon(1e-12));

    // quadrature equals the Parseval sum
    ModelState r(g);
    r.u = transform(oracles::random_physical(g, 3, 17));
    CHECK(total_energy(r).E_u == Approx(l2_norm_squared(r.u)).epsilon(1e-12));
}

TEST_CASE("energy equality check") {
    EnergySeries series;
    for (int i = 0; i <= 10; ++i) series.push_back({0.1 * i, 1.0, 0.5, 1.5, 0.0});
    CHECK(energy_equality_check(series, 0.3, 0.3) == 0.0);
    CHECK(energy_equality_check(series, 0.15, 0.85) == 0.0);
    CHECK_THROWS_AS(energy_equality_check(series, -0.1, 0.5), std::out_of_range);
    CHECK_THROWS_AS(energy_equality_check(series, 0.0, 1.1), std::out_of_range);
}

TEST_CASE("spectral flux") {
    SECTION("constant velocity gives a zero flux density field") {
        Grid g(3, 8);
        PhysicalField c(g, 3);
        for (auto& v : c.raw()) v = 0.7;
        SpectralField u = transform(c);
        PhysicalField pi = flux_density(u, 2.0);
        for (double v : pi.component(0)) CHECK(std::abs(v) < 1e-13);
    }

    SECTION("single mode: zero flux at every cutoff") {
        Grid g(3, 16);
        PhysicalField up(g, 3);
        for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
            up.at(1, m) = std::sin(x[0]);
        });
        SpectralField u = transform(up);
        for (double kappa : {0.5, 1.0, 1.5, 2.0, 3.0})
            CHECK(std::abs(flux_pi(u, kappa)) < 1e-12);
    }

    SECTION("random divergence-free field matches the convolution oracle on 8^3") {
        Grid g(3, 8);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 23, 2.9));
        for (double kappa : {1.0, 2.0}) {
            const double fft_path = flux_pi(u, kappa);
            const double oracle = oracles::flux_pi_oracle(u, kappa);
            CHECK(std::abs(fft_path - oracle) < 1e-10);
        }
    }

    SECTION("Taylor-Green at t=0 matches the oracle for kappa in {1,2,3}") {
        ModelState tg = taylor_green_state(Grid(3, 8), 0.0, 0.0);
        for (double kappa : {1.0, 2.0, 3.0})
            CHECK(std::abs(flux_pi(tg.u, kappa) - oracles::flux_pi_oracle(tg.u, kappa)) < 1e-10);
    }

    SECTION("flux density integral agrees with the spectral pairing") {
        // Band-1 field: the cubic density fits the 8^3 quadrature exactly.
        ModelState tg = taylor_green_state(Grid(3, 8), 0.0, 0.0);
        const double kappa = 1.0;
        CHECK(integral(flux_density(tg.u, kappa)) == Approx(flux_pi(tg.u, kappa)).margin(1e-12));
    }

    SECTION("zero beyond the band limit; padding invariance") {
        Grid g(3, 16);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 29, 4.0));
        CHECK(std::abs(flux_pi(u, 5.0)) < 1e-12);
        CHECK(std::abs(flux_pi(u, 8.5)) < 1e-12);
        const double p2 = flux_pi(u, 3.0, 2);
        const double p3 = flux_pi(u, 3.0, 3);
        CHECK(std::abs(p2 - p3) < 1e-12);
    }

    SECTION("flux report validation and fitted decay") {
        Grid g(3, 16);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 31, 5.0));
        CHECK_THROWS_AS(flux_spectrum(u, {}), std::invalid_argument);
        CHECK_THROWS_AS(flux_spectrum(u, {2.0, 1.0}), std::invalid_argument);
        FluxReport rep = flux_spectrum(u, {1, 2, 3, 4}, 2, 1.0, 4.0);
        CHECK(rep.Pi.size() == 4);
        CHECK(rep.decay_fit.has_value());
    }
}

TEST_CASE("defect forms") {
    SECTION("constant fields give zero for both forms") {
        Grid g(3, 8);
        PhysicalField c(g, 3);
        for (auto& v : c.raw()) v = 1.3;
        SpectralField u = transform(c);
        PhysicalField cz(g, 1);
        for (auto& v : cz.raw()) v = -0.4;
        SpectralField z = transform(cz);
        DefectEntry e = defect(u, u, &z, 0.5, {});
        CHECK(e.d1_increment.abs < 1e-13);
        CHECK(e.d1_algebraic.abs < 1e-13);
        CHECK(e.d2_increment.abs < 1e-13);
        CHECK(e.d2_algebraic.abs < 1e-13);
    }

    SECTION("epsilon validation") {
        Grid g(3, 8);
        SpectralField u(g, 3);
        CHECK_THROWS_AS(defect(u, u, nullptr, 0.0, {}), std::invalid_argument);
        CHECK_THROWS_AS(defect(u, u, nullptr, 3.5, {}), std::invalid_argument);
    }

    SECTION("smooth fields: integrals vanish with order >= 1.5 in eps") {
        Grid g(3, 16);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 37, 4.0));
        SpectralField z = oracles::random_band_limited(g, 1, 38, 4.0);
        DefectOptions opt;
        opt.form = DefectForm::Algebraic;
        std::vector<double> eps{0.4, 0.2, 0.1}, d1, d2;
        for (double e : eps) {
            DefectEntry entry = defect(u, u, &z, e, opt);
            d1.push_back(entry.d1_algebraic.abs);
            d2.push_back(entry.d2_algebraic.abs);
        }
        CHECK(d1[0] > d1[1]);
        CHECK(d1[1] > d1[2]);
        CHECK(d2[0] > d2[1]);
        CHECK(d2[1] > d2[2]);
        CHECK(fit_loglog(eps, d1).slope >= 1.5);
        CHECK(fit_loglog(eps, d2).slope >= 1.5);
    }

    SECTION("increment and algebraic forms agree at the default quadrature") {
        Grid g(3, 16);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 41, 5.0));
        SpectralField v = helmholtz(u, 0.25, HelmholtzDirection::Invert);
        SpectralField z = oracles::random_band_limited(g, 1, 42, 5.0);
        DefectEntry e = defect(v, u, &z, 0.3, {});
        CHECK(e.d1_discrepancy <= 1e-2);
        CHECK(e.d2_discrepancy <= 1e-2);
    }

    SECTION("discrepancy at least halves per quadrature doubling (1D)") {
        Grid g(1, 64);
        SpectralField u = oracles::random_band_limited(g, 1, 43, 8.0);
        SpectralField v = helmholtz(u, 0.1, HelmholtzDirection::Invert);
        double prev = std::numeric_limits<double>::infinity();
        for (int pts : {9, 17, 33}) {
            DefectOptions opt;
            opt.quad_points = pts;
            DefectEntry e = defect(v, u, nullptr, 0.4, opt);
            if (std::isfinite(prev))
                CHECK((e.d1_discrepancy <= 0.5 * prev || e.d1_discrepancy < 1e-10));
            prev = e.d1_discrepancy;
        }
    }
}

TEST_CASE("increment curves") {
    SECTION("zero fields give zeros") {
        Grid g(3, 8);
        SpectralField zero(g, 3), zs(g, 1);
        IncrementCurve c = increment_curve(zero, zero, &zs, {0.1, 0.2});
        for (double v : c.I1) CHECK(v == 0.0);
        for (double v : c.I2) CHECK(v == 0.0);
    }

    SECTION("band-limited fields scale as |xi|^3") {
        Grid g(3, 16);
        SpectralField u = leray_project(oracles::random_band_limited(g, 3, 47, 3.0));
        SpectralField v = helmholtz(u, 0.25, HelmholtzDirection::Invert);
        SpectralField z = oracles::random_band_limited(g, 1, 48, 3.0);
        std::vector<double> xis{0.02, 0.032, 0.05, 0.08, 0.126, 0.2};
        IncrementCurve c = increment_curve(v, u, &z, xis);
        CHECK(fit_loglog(c.xi, c.I1).slope == Approx(3.0).margin(0.1));
        CHECK(fit_loglog(c.xi, c.I2).slope == Approx(3.0).margin(0.1));
        // sigma profiles normalized at the largest separation
        CHECK(c.sigma1.back() == Approx(1.0));
        for (double s : c.sigma1) CHECK(s >= 0.0);
    }

    SECTION("Burgers sawtooth: cubic increment integral scales like |xi|") {
        SpectralField u = sawtooth(2048, 1.0);
        const double h = u.grid().spacing();
        std::vector<double> xis;
        for (int m = 16; m <= 256; m *= 2) xis.push_back(m * h);
        IncrementCurve c = increment_curve(u, u, nullptr, xis);
        CHECK(fit_loglog(c.xi, c.I1).slope == Approx(1.0).margin(0.05));
    }

    SECTION("magnitude validation") {
        Grid g(3, 8);
        SpectralField u(g, 3);
        CHECK_THROWS_AS(increment_curve(u, u, nullptr, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(increment_curve(u, u, nullptr, {3.5}), std::invalid_argument);
    }
}

TEST_CASE("balance residual") {
    ModelParams params;
    params.alpha = 0.0;

    SECTION("zero trajectory gives zero") {
        Grid g(3, 8);
        ModelState a(g), b(g), c(g);
        a.t = 0.0;
        b.t = 0.1;
        c.t = 0.2;
        SpectralField chi = default_test_weight(g);
        CHECK(balance_residual(a, b, c, params, 0.4, 9, chi) == Approx(0.0).margin(1e-14));
    }

    SECTION("steady single-mode state: spatial algebra cancels to rounding") {
        Grid g(3, 16);
        InitialConditionSpec spec;
        spec.kind = InitialConditionKind::SingleMode;
        spec.z_amplitude = 0.0;
        ModelState s = initial_condition(spec.kind, g, params, spec);
        ModelState a = s, b = s, c = s;
        a.t = 0.0;
        b.t = 0.05;
        c.t = 0.1;
        SpectralField chi = default_test_weight(g);
        const double r = balance_residual(a, b, c, params, 0.3, 17, chi);
        CHECK(std::abs(r) < 1e-12);
    }

    SECTION("nonuniform snapshot spacing is rejected") {
        Grid g(3, 8);
        ModelState a(g), b(g), c(g);
        a.t = 0.0;
        b.t = 0.1;
        c.t = 0.25;
        SpectralField chi = default_test_weight(g);
        CHECK_THROWS_AS(balance_residual(a, b, c, params, 0.4, 9, chi), std::invalid_argument);
    }

    SECTION("refining dt and eps together shrinks the Taylor-Green residual") {
        RunConfig rc;
        rc.n = 16;
        rc.dt = 5e-3;
        rc.t_end = 0.4;
        Grid g(rc.dim, rc.n);
        ModelState state = initial_condition(rc.ic.kind, g, rc.params, rc.ic);
        std::map<long long, ModelState> keep;
        const long long mid = 40, coarse = 20, fine = 10;
        for (long long step = 0; step <= mid + coarse; ++step) {
            for (long long want : {mid - coarse, mid - fine, mid, mid + fine, mid + coarse})
                if (step == want) keep.emplace(step, state);
            if (step == mid + coarse) break;
            state = step_rk4(state, rc.params, rc.dt, rc.variant);
        }
        SpectralField chi = default_test_weight(g);
        const double r_coarse = balance_residual(keep.at(mid - coarse), keep.at(mid),
                                                 keep.at(mid + coarse), rc.params, 0.4, 17, chi);
        const double r_fine = balance_residual(keep.at(mid - fine), keep.at(mid),
                                               keep.at(mid + fine), rc.params, 0.2, 17, chi);
        CHECK(std::abs(r_fine) < std::abs(r_coarse));
    }
}

TEST_CASE("Burgers shock functional") {
    SECTION("sawtooth dissipation extrapolates to sigma^3/12") {
        SpectralField u = sawtooth(4096, 1.0);
        const double h = u.grid().spacing();
        std::vector<double> eps{0.2, 0.1, 0.05}, totals;
        for (double e : eps) totals.push_back(burgers_defect_total(u, e, 33, h));
        RichardsonResult r = richardson_extrapolate(eps, totals);
        CHECK(std::abs(r.extrapolated) == Approx(1.0 / 12.0).epsilon(0.02));
    }

    SECTION("dissipation is cubic in the jump size") {
        SpectralField u1 = sawtooth(4096, 1.0);
        SpectralField u2 = sawtooth(4096, 2.0);
        const double h = u1.grid().spacing();
        std::vector<double> eps{0.2, 0.1, 0.05}, t1, t2;
        for (double e : eps) {
            t1.push_back(burgers_defect_total(u1, e, 33, h));
            t2.push_back(burgers_defect_total(u2, e, 33, h));
        }
        const double d1 = richardson_extrapolate(eps, t1).extrapolated;
        const double d2 = richardson_extrapolate(eps, t2).extrapolated;
        CHECK(d2 / d1 == Approx(8.0).epsilon(0.02));
    }

    SECTION("richardson ladder validation") {
        CHECK_THROWS_AS(richardson_extrapolate({0.4, 0.2}, {1.0, 2.0}), std::invalid_argument);
        CHECK_THROWS_AS(richardson_extrapolate({0.4, 0.3, 0.25}, {1.0, 2.0, 3.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("flux bound sanity against measured regularity") {
    // Random-phase field with per-mode amplitude |k|^{-(h + 3/2)}, h = 1/3:
    // the fitted flux decay should respect the kappa^{1-3s} envelope.
    Grid g(3, 32);
    InitialConditionSpec spec;
    spec.kind = InitialConditionKind::RandomDivFree;
    spec.seed = 7;
    spec.slope = 1.0 / 3.0 + 1.5;
    ModelParams params;
    ModelState s = initial_condition(spec.kind, g, params, spec);

    std::vector<double> xis{0.2, 0.3, 0.45, 0.67, 1.0};
    StructureCurve curve = structure_function(s.u, 3.0, xis);
    const double s_meas = regularity_fit(curve).exponent;
    CHECK(s_meas == Approx(1.0 / 3.0).margin(0.15));

    std::vector<double> kappas{2, 3, 4, 6, 8};
    FluxReport rep = flux_spectrum(s.u, kappas, 2, 2.0, 8.0);
    REQUIRE(rep.decay_fit.has_value());
    CHECK(rep.decay_fit->slope <= (1.0 - 3.0 * s_meas) + 0.3);
}
