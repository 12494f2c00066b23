#pragma once

// Energy bookkeeping and the quantitative flux/defect machinery: total
// energy, spectral flux through sharp cutoffs, the two Duchon-Robert defect
// forms (increment quadrature vs algebraic mollified products), increment
// curves, the local energy-balance residual, and the 1D shock functional.
//
// Defect and balance mollifications use the analytic bump evaluated on the
// ball quadrature (BallQuadrature), so the epsilon ladder stays meaningful
// below the grid spacing where a grid-sampled bump would degenerate to the
// identity. mollify() keeps its own grid-sampled contract.

#include <optional>

#include "lerayflux/fit.hpp"
#include "lerayflux/model.hpp"

namespace lerayflux {

// ---------------------------------------------------------------------------
// Total energy and the run series.
// ---------------------------------------------------------------------------

struct EnergyBreakdown {
    double E_u = 0.0;
    double E_Z = 0.0;
    double E_total = 0.0;
};

/// ||u||_L2^2 and ||Z||_L2^2 by grid quadrature (no 1/2 factor, matching the
/// balance convention).
inline EnergyBreakdown total_energy(const ModelState& s) {
    EnergyBreakdown e;
    e.E_u = l2_norm_squared(inverse_transform(s.u));
    e.E_Z = l2_norm_squared(inverse_transform(s.Z));
    e.E_total = e.E_u + e.E_Z;
    return e;
}

struct EnergySample {
    double t = 0.0;
    double E_u = 0.0;
    double E_Z = 0.0;
    double E_total = 0.0;
    double max_div = 0.0;
};
using EnergySeries = std::vector<EnergySample>;

inline EnergySample sample_energy(const ModelState& s) {
    EnergyBreakdown e = total_energy(s);
    return {s.t, e.E_u, e.E_Z, e.E_total, s.max_divergence()};
}

/// |E(t1) - E(t2)| / max(E(t1), floor) with linear interpolation in t.
inline double energy_equality_check(const EnergySeries& series, double t1, double t2,
                                    double floor = 1e-300) {
    if (series.empty()) throw std::invalid_argument("energy_equality_check: empty series");
    auto eval = [&](double t) {
        if (t < series.front().t || t > series.back().t)
            throw std::out_of_range("energy_equality_check: time outside series");
        for (std::size_t i = 1; i < series.size(); ++i) {
            if (t <= series[i].t) {
                const double t0 = series[i - 1].t, t1s = series[i].t;
                const double w = t1s == t0 ? 0.0 : (t - t0) / (t1s - t0);
                return (1.0 - w) * series[i - 1].E_total + w * series[i].E_total;
            }
        }
        return series.back().E_total;
    };
    const double e1 = eval(t1), e2 = eval(t2);
    return std::abs(e1 - e2) / std::max(e1, floor);
}

// ---------------------------------------------------------------------------
// Spectral flux through sharp cutoffs.
// ---------------------------------------------------------------------------

/// Unique components of the symmetric tensor u (x) u as alias-exact lattice
/// coefficients (pair order: (0,0),(0,1),...,(d-1,d-1) upper triangle).
/// Precompute once when scanning a kappa list.
inline std::vector<SpectralField> velocity_tensor(const SpectralField& u, int pad_factor = 2) {
    const Grid& g = u.grid();
    PhysicalField up = to_physical_padded(u, pad_factor);
    std::vector<SpectralField> t;
    for (int i = 0; i < g.dim(); ++i)
        for (int j = i; j < g.dim(); ++j) {
            PhysicalField prod(up.grid(), 1);
            auto a = up.component(i);
            auto b = up.component(j);
            auto dst = prod.component(0);
            for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = a[m] * b[m];
            t.push_back(truncate_spectral(transform(prod), g.n()));
        }
    return t;
}

namespace detail {
inline int triangle_index(int dim, int i, int j) {
    if (i > j) std::swap(i, j);
    int idx = 0;
    for (int a = 0; a < i; ++a) idx += dim - a;
    return idx + (j - i);
}
} // namespace detail

/// Flux density pi_kappa = (P_<=k(u(x)u) - P_<=k u (x) P_<=k u) : grad P_<=k u,
/// returned as exact samples on the base grid (contracted on the padded grid).
inline PhysicalField flux_density(const SpectralField& u, double kappa, int pad_factor = 2) {
    const Grid& g = u.grid();
    if (u.components() != g.dim())
        throw std::invalid_argument("flux_density: vector field required");

    std::vector<SpectralField> tensor = velocity_tensor(u, pad_factor);
    SpectralField ul = lowpass_sharp(u, kappa);
    PhysicalField ulp = to_physical_padded(ul, pad_factor);

    Grid fine(g.dim(), g.n() * pad_factor);
    PhysicalField pi_fine(fine, 1);
    auto acc = pi_fine.component(0);
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) {
            // A_ij = P_<=k (u_i u_j) - (P_<=k u)_i (P_<=k u)_j on the fine grid.
            SpectralField a = lowpass_sharp(tensor[detail::triangle_index(g.dim(), i, j)], kappa);
            PhysicalField ap = to_physical_padded(a, pad_factor);
            // B_ij = d_i (P_<=k u_j)
            SpectralField bj(g, 1);
            std::copy(ul.component(j).begin(), ul.component(j).end(), bj.component(0).begin());
            PhysicalField bp = to_physical_padded(partial_derivative(bj, i), pad_factor);
            auto av = ap.component(0);
            auto bv = bp.component(0);
            auto ui = ulp.component(i);
            auto uj = ulp.component(j);
            for (std::size_t m = 0; m < acc.size(); ++m)
                acc[m] += (av[m] - ui[m] * uj[m]) * bv[m];
        }
    return subsample(pi_fine, pad_factor);
}

/// Pi_kappa from precomputed tensor coefficients: exact spectral pairing
/// (2 pi)^d sum_k A_ij conj(B_ij).
inline double flux_pi_with_tensor(const SpectralField& u, const std::vector<SpectralField>& tensor,
                                  double kappa, int pad_factor = 2) {
    const Grid& g = u.grid();
    SpectralField ul = lowpass_sharp(u, kappa);
    double total = 0.0;
    for (int i = 0; i < g.dim(); ++i)
        for (int j = 0; j < g.dim(); ++j) {
            SpectralField a = lowpass_sharp(tensor[detail::triangle_index(g.dim(), i, j)], kappa);
            SpectralField uli(g, 1), ulj(g, 1);
            std::copy(ul.component(i).begin(), ul.component(i).end(), uli.component(0).begin());
            std::copy(ul.component(j).begin(), ul.component(j).end(), ulj.component(0).begin());
            SpectralField low = product_spectral(uli, ulj, pad_factor);
            axpy(a, -1.0, low);
            SpectralField b = partial_derivative(ulj, i);
            total += inner_product(a, b);
        }
    return total;
}

/// Total flux Pi_kappa = int pi_kappa dx via the exact spectral pairing.
inline double flux_pi(const SpectralField& u, double kappa, int pad_factor = 2) {
    if (u.components() != u.grid().dim())
        throw std::invalid_argument("flux_pi: vector field required");
    return flux_pi_with_tensor(u, velocity_tensor(u, pad_factor), kappa, pad_factor);
}

struct FluxReport {
    std::vector<double> kappas;
    std::vector<double> Pi;
    std::optional<LineFit> decay_fit; // log|Pi| vs log kappa over the fit window
};

inline FluxReport flux_spectrum(const SpectralField& u, const std::vector<double>& kappas,
                                int pad_factor = 2, double fit_lo = 0.0, double fit_hi = 0.0) {
    if (kappas.empty()) throw std::invalid_argument("flux_spectrum: empty kappa list");
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (kappas[i] <= kappas[i - 1])
            throw std::invalid_argument("flux_spectrum: kappas must be increasing");
    FluxReport r;
    r.kappas = kappas;
    std::vector<SpectralField> tensor = velocity_tensor(u, pad_factor);
    for (double k : kappas)
        r.Pi.push_back(flux_pi_with_tensor(u, tensor, k, pad_factor));
    if (fit_lo > 0.0 || fit_hi > 0.0) {
        try {
            r.decay_fit = fit_loglog(r.kappas, r.Pi, fit_lo, fit_hi);
        } catch (const std::invalid_argument&) {
            r.decay_fit.reset();
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Duchon-Robert defects.
// ---------------------------------------------------------------------------

enum class DefectForm { Increment, Algebraic, Both };

struct DefectOptions {
    int quad_points = 17;          // tensor nodes per axis over [-eps, eps]
    DefectForm form = DefectForm::Both;
    int pad_factor = 2;            // alias-exact padding for the algebraic form
    double grid_align_spacing = 0; // > 0 snaps quadrature nodes to this spacing
};

struct DefectValues {
    double abs = 0.0;    // int |D_eps| dx
    double net = 0.0;    // int D_eps dx (signed)
};

struct DefectEntry {
    double eps = 0.0;
    bool has_d2 = false;
    DefectValues d1_increment, d1_algebraic;
    DefectValues d2_increment, d2_algebraic;
    double d1_discrepancy = 0.0; // L1(inc - alg) / L1(alg), if both computed
    double d2_discrepancy = 0.0;
    std::optional<PhysicalField> d1_field, d2_field; // base-grid snapshots (algebraic form)

    const DefectValues& d1(DefectForm preferred = DefectForm::Algebraic) const {
        return preferred == DefectForm::Increment ? d1_increment : d1_algebraic;
    }
    const DefectValues& d2(DefectForm preferred = DefectForm::Algebraic) const {
        return preferred == DefectForm::Increment ? d2_increment : d2_algebraic;
    }
};

namespace detail {

inline DefectValues integrate_defect(const PhysicalField& d) {
    DefectValues v;
    const double w = d.grid().cell_volume();
    for (double x : d.component(0)) {
        v.abs += std::abs(x) * w;
        v.net += x * w;
    }
    return v;
}

/// D_{1,eps} samples on the padded grid via the algebraic mollified products
/// of Eq.-style composition; exact for dealiased inputs.
inline PhysicalField defect_d1_algebraic_fine(const SpectralField& v, const SpectralField& u,
                                              const BallQuadrature& quad, int pad_factor) {
    const Grid& g = u.grid();
    Grid fine(g.dim(), g.n() * pad_factor);
    const std::vector<double> phi = quad.symbol_on(fine);

    SpectralField uhat = pad_spectral(u, pad_factor);
    SpectralField vhat = pad_spectral(v, pad_factor);
    PhysicalField U = inverse_transform(uhat);
    PhysicalField V = inverse_transform(vhat);
    const std::size_t npts = fine.size();

    PhysicalField u2(fine, 1);
    {
        auto dst = u2.component(0);
        for (int j = 0; j < g.dim(); ++j) {
            auto uj = U.component(j);
            for (std::size_t m = 0; m < npts; ++m) dst[m] += uj[m] * uj[m];
        }
    }
    SpectralField u2hat = transform(u2);

    PhysicalField out(fine, 1);
    auto acc = out.component(0);

    // -1/2 d_i (v_i |u|^2)^eps
    {
        SpectralField div_term(fine, 1);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField prod(fine, 1);
            auto dst = prod.component(0);
            auto vi = V.component(i);
            auto uu = u2.component(0);
            for (std::size_t m = 0; m < npts; ++m) dst[m] = vi[m] * uu[m];
            SpectralField moll = apply_symbol(transform(prod), phi);
            axpy(div_term, 1.0, partial_derivative(moll, i));
        }
        PhysicalField dphys = inverse_transform(div_term);
        auto dv = dphys.component(0);
        for (std::size_t m = 0; m < npts; ++m) acc[m] -= 0.5 * dv[m];
    }
    // +1/2 v_i d_i (|u|^2)^eps
    {
        SpectralField mu2 = apply_symbol(u2hat, phi);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField dphys = inverse_transform(partial_derivative(mu2, i));
            auto dv = dphys.component(0);
            auto vi = V.component(i);
            for (std::size_t m = 0; m < npts; ++m) acc[m] += 0.5 * vi[m] * dv[m];
        }
    }
    // + u_j d_i (u_j v_i)^eps  and  - v_i u_j d_i u_j^eps
    for (int i = 0; i < g.dim(); ++i) {
        SpectralField ui_hat(fine, 1);
        std::copy(uhat.component(0).begin(), uhat.component(0).end(), ui_hat.component(0).begin());
        for (int j = 0; j < g.dim(); ++j) {
            PhysicalField prod(fine, 1);
            auto dst = prod.component(0);
            auto uj = U.component(j);
            auto vi = V.component(i);
            for (std::size_t m = 0; m < npts; ++m) dst[m] = uj[m] * vi[m];
            SpectralField moll = apply_symbol(transform(prod), phi);
            PhysicalField dphys = inverse_transform(partial_derivative(moll, i));
            auto dv = dphys.component(0);
            for (std::size_t m = 0; m < npts; ++m) acc[m] += uj[m] * dv[m];

            SpectralField ujhat(fine, 1);
            std::copy(uhat.component(j).begin(), uhat.component(j).end(),
                      ujhat.component(0).begin());
            PhysicalField duj =
                inverse_transform(partial_derivative(apply_symbol(ujhat, phi), i));
            auto dj = duj.component(0);
            for (std::size_t m = 0; m < npts; ++m) acc[m] -= vi[m] * uj[m] * dj[m];
        }
    }
    return out;
}

/// D_{2,eps} samples on the padded grid.
inline PhysicalField defect_d2_algebraic_fine(const SpectralField& u, const SpectralField& z,
                                              const BallQuadrature& quad, int pad_factor) {
    const Grid& g = u.grid();
    Grid fine(g.dim(), g.n() * pad_factor);
    const std::vector<double> phi = quad.symbol_on(fine);

    SpectralField uhat = pad_spectral(u, pad_factor);
    SpectralField zhat = pad_spectral(z, pad_factor);
    PhysicalField U = inverse_transform(uhat);
    PhysicalField Zs = inverse_transform(zhat);
    const std::size_t npts = fine.size();

    PhysicalField z2(fine, 1);
    {
        auto dst = z2.component(0);
        auto zz = Zs.component(0);
        for (std::size_t m = 0; m < npts; ++m) dst[m] = zz[m] * zz[m];
    }
    SpectralField z2hat = transform(z2);

    PhysicalField out(fine, 1);
    auto acc = out.component(0);

    // -1/2 div (Z^2 u)^eps
    {
        SpectralField div_term(fine, 1);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField prod(fine, 1);
            auto dst = prod.component(0);
            auto zz = z2.component(0);
            auto ui = U.component(i);
            for (std::size_t m = 0; m < npts; ++m) dst[m] = zz[m] * ui[m];
            SpectralField moll = apply_symbol(transform(prod), phi);
            axpy(div_term, 1.0, partial_derivative(moll, i));
        }
        PhysicalField dphys = inverse_transform(div_term);
        auto dv = dphys.component(0);
        for (std::size_t m = 0; m < npts; ++m) acc[m] -= 0.5 * dv[m];
    }
    // +1/2 u . grad (Z^2)^eps
    {
        SpectralField mz2 = apply_symbol(z2hat, phi);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField dphys = inverse_transform(partial_derivative(mz2, i));
            auto dv = dphys.component(0);
            auto ui = U.component(i);
            for (std::size_t m = 0; m < npts; ++m) acc[m] += 0.5 * ui[m] * dv[m];
        }
    }
    // - Z u . grad Z^eps
    {
        SpectralField mz = apply_symbol(zhat, phi);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField dphys = inverse_transform(partial_derivative(mz, i));
            auto dv = dphys.component(0);
            auto ui = U.component(i);
            auto zz = Zs.component(0);
            for (std::size_t m = 0; m < npts; ++m) acc[m] -= zz[m] * ui[m] * dv[m];
        }
    }
    // + Z div (Z u)^eps
    {
        SpectralField div_term(fine, 1);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField prod(fine, 1);
            auto dst = prod.component(0);
            auto zz = Zs.component(0);
            auto ui = U.component(i);
            for (std::size_t m = 0; m < npts; ++m) dst[m] = zz[m] * ui[m];
            SpectralField moll = apply_symbol(transform(prod), phi);
            axpy(div_term, 1.0, partial_derivative(moll, i));
        }
        PhysicalField dphys = inverse_transform(div_term);
        auto dv = dphys.component(0);
        auto zz = Zs.component(0);
        for (std::size_t m = 0; m < npts; ++m) acc[m] += zz[m] * dv[m];
    }
    return out;
}

struct IncrementDefectFields {
    PhysicalField d1;
    std::optional<PhysicalField> d2;
};

/// Increment-form defects 1/2 sum_q w grad(chi)(xi_q) . dv |du|^2 on the base
/// grid, sharing the shifted fields between D1 and D2.
inline IncrementDefectFields defect_increment_fields(const SpectralField& v,
                                                     const SpectralField& u,
                                                     const SpectralField* z,
                                                     const BallQuadrature& quad) {
    const Grid& g = u.grid();
    PhysicalField V0 = inverse_transform(v);
    PhysicalField U0 = inverse_transform(u);
    std::optional<PhysicalField> Z0;
    if (z) Z0 = inverse_transform(*z);

    IncrementDefectFields out{PhysicalField(g, 1), std::nullopt};
    if (z) out.d2 = PhysicalField(g, 1);
    const std::size_t npts = g.size();
    const double w = quad.weight();

    std::vector<double> dv(static_cast<std::size_t>(g.dim()) * npts);
    std::vector<double> du(static_cast<std::size_t>(g.dim()) * npts);
    for (const auto& node : quad.nodes()) {
        PhysicalField vs = inverse_transform(shift(v, node.xi));
        PhysicalField us = inverse_transform(shift(u, node.xi));
        for (int c = 0; c < g.dim(); ++c) {
            auto a = vs.component(c);
            auto b = V0.component(c);
            auto x = us.component(c);
            auto y = U0.component(c);
            for (std::size_t m = 0; m < npts; ++m) {
                dv[c * npts + m] = a[m] - b[m];
                du[c * npts + m] = x[m] - y[m];
            }
        }
        auto acc1 = out.d1.component(0);
        for (std::size_t m = 0; m < npts; ++m) {
            double gdv = 0.0, du2 = 0.0;
            for (int c = 0; c < g.dim(); ++c) {
                gdv += node.grad[c] * dv[c * npts + m];
                du2 += du[c * npts + m] * du[c * npts + m];
            }
            acc1[m] += 0.5 * w * gdv * du2;
        }
        if (z) {
            PhysicalField zs = inverse_transform(shift(*z, node.xi));
            auto acc2 = out.d2->component(0);
            auto zn = zs.component(0);
            auto z0 = Z0->component(0);
            for (std::size_t m = 0; m < npts; ++m) {
                double gdu = 0.0;
                for (int c = 0; c < g.dim(); ++c) gdu += node.grad[c] * du[c * npts + m];
                const double dz = zn[m] - z0[m];
                acc2[m] += 0.5 * w * gdu * dz * dz;
            }
        }
    }
    return out;
}

inline double l1_difference(const PhysicalField& a, const PhysicalField& b) {
    double s = 0.0;
    auto x = a.component(0);
    auto y = b.component(0);
    for (std::size_t m = 0; m < x.size(); ++m) s += std::abs(x[m] - y[m]);
    return s * a.grid().cell_volume();
}

} // namespace detail

/// One epsilon entry of the defect report. Pass Z to also compute D2.
inline DefectEntry defect(const SpectralField& v, const SpectralField& u, const SpectralField* z,
                          double eps, const DefectOptions& opt = {}) {
    require_same_grid(v.grid(), u.grid(), "defect");
    if (z) require_same_grid(u.grid(), z->grid(), "defect");
    if (!(eps > 0.0) || !(eps < 0.5 * two_pi))
        throw std::invalid_argument("defect: eps must lie in (0, pi)");

    BallQuadrature quad(eps, opt.quad_points, u.grid().dim(), opt.grid_align_spacing);
    DefectEntry entry;
    entry.eps = eps;
    entry.has_d2 = z != nullptr;

    const bool want_inc = opt.form != DefectForm::Algebraic;
    const bool want_alg = opt.form != DefectForm::Increment;

    std::optional<detail::IncrementDefectFields> inc;
    if (want_inc) {
        inc = detail::defect_increment_fields(v, u, z, quad);
        entry.d1_increment = detail::integrate_defect(inc->d1);
        if (z) entry.d2_increment = detail::integrate_defect(*inc->d2);
    }
    if (want_alg) {
        PhysicalField d1f = detail::defect_d1_algebraic_fine(v, u, quad, opt.pad_factor);
        entry.d1_algebraic = detail::integrate_defect(d1f);
        PhysicalField d1base = subsample(d1f, opt.pad_factor);
        if (want_inc)
            entry.d1_discrepancy =
                detail::l1_difference(inc->d1, d1base) / std::max(entry.d1_algebraic.abs, 1e-300);
        entry.d1_field = std::move(d1base);
        if (z) {
            PhysicalField d2f = detail::defect_d2_algebraic_fine(u, *z, quad, opt.pad_factor);
            entry.d2_algebraic = detail::integrate_defect(d2f);
            PhysicalField d2base = subsample(d2f, opt.pad_factor);
            if (want_inc)
                entry.d2_discrepancy = detail::l1_difference(*inc->d2, d2base) /
                                       std::max(entry.d2_algebraic.abs, 1e-300);
            entry.d2_field = std::move(d2base);
        }
    }
    return entry;
}

// ---------------------------------------------------------------------------
// Increment curves (Prop. 6.1 hypotheses).
// ---------------------------------------------------------------------------

struct IncrementCurve {
    std::vector<double> xi;
    std::vector<double> I1;     // avg over directions of int |dv| |du|^2 dx
    std::vector<double> I2;     // avg over directions of int |du| |dZ|^2 dx
    std::vector<double> sigma1; // (I1/xi) normalized by the largest-xi entry
    std::vector<double> sigma2;
};

inline IncrementCurve increment_curve(const SpectralField& v, const SpectralField& u,
                                      const SpectralField* z,
                                      const std::vector<double>& xi_magnitudes,
                                      int directions_per_shell = 0) {
    require_same_grid(v.grid(), u.grid(), "increment_curve");
    const Grid& g = u.grid();
    const auto dirs = direction_set(g.dim(), directions_per_shell);
    PhysicalField V0 = inverse_transform(v);
    PhysicalField U0 = inverse_transform(u);
    std::optional<PhysicalField> Z0;
    if (z) Z0 = inverse_transform(*z);

    IncrementCurve curve;
    const std::size_t npts = g.size();
    const double w = g.cell_volume();
    for (double r : xi_magnitudes) {
        if (!(r > 0.0) || !(r < 0.5 * two_pi))
            throw std::invalid_argument("increment_curve: magnitudes must lie in (0, pi)");
        double i1 = 0.0, i2 = 0.0;
        for (const auto& d : dirs) {
            const std::array<double, 3> xi{r * d[0], r * d[1], r * d[2]};
            PhysicalField vs = inverse_transform(shift(v, xi));
            PhysicalField us = inverse_transform(shift(u, xi));
            std::optional<PhysicalField> zs;
            if (z) zs = inverse_transform(shift(*z, xi));
            for (std::size_t m = 0; m < npts; ++m) {
                double dv2 = 0.0, du2 = 0.0;
                for (int c = 0; c < g.dim(); ++c) {
                    const double a = vs.at(c, m) - V0.at(c, m);
                    const double b = us.at(c, m) - U0.at(c, m);
                    dv2 += a * a;
                    du2 += b * b;
                }
                i1 += std::sqrt(dv2) * du2 * w;
                if (z) {
                    const double dz = zs->at(0, m) - Z0->at(0, m);
                    i2 += std::sqrt(du2) * dz * dz * w;
                }
            }
        }
        curve.xi.push_back(r);
        curve.I1.push_back(i1 / dirs.size());
        curve.I2.push_back(z ? i2 / dirs.size() : 0.0);
    }

    auto infer_sigma = [&](const std::vector<double>& vals) {
        std::vector<double> s(vals.size(), 0.0);
        std::size_t imax = 0;
        for (std::size_t i = 1; i < curve.xi.size(); ++i)
            if (curve.xi[i] > curve.xi[imax]) imax = i;
        const double ref = vals[imax] / curve.xi[imax];
        for (std::size_t i = 0; i < vals.size(); ++i)
            s[i] = ref > 0.0 ? (vals[i] / curve.xi[i]) / ref : 0.0;
        return s;
    };
    curve.sigma1 = infer_sigma(curve.I1);
    curve.sigma2 = infer_sigma(curve.I2);
    return curve;
}

// ---------------------------------------------------------------------------
// Local energy-balance residual (three uniformly spaced snapshots).
// ---------------------------------------------------------------------------

/// Smooth positive band-limited test weight, prod_i ((1 - cos x_i)/2)^2.
inline SpectralField default_test_weight(const Grid& g) {
    PhysicalField chi(g, 1);
    for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
        double v = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double c = 0.5 * (1.0 - std::cos(x[a]));
            v *= c * c;
        }
        chi.at(0, m) = v;
    });
    return transform(chi);
}

namespace detail {

/// Forward transform of fine-grid samples, truncated back to the base lattice.
inline SpectralField project_base(const PhysicalField& fine, int n_base) {
    return truncate_spectral(transform(fine), n_base);
}

/// u.u^eps + Z.Z^eps as fine-grid samples.
inline PhysicalField paired_energy_fine(const ModelState& s, const std::vector<double>& phi,
                                        int pad_factor) {
    const Grid& g = s.grid();
    Grid fine(g.dim(), g.n() * pad_factor);
    SpectralField uhat = pad_spectral(s.u, pad_factor);
    SpectralField zhat = pad_spectral(s.Z, pad_factor);
    PhysicalField U = inverse_transform(uhat);
    PhysicalField Um = inverse_transform(apply_symbol(uhat, phi));
    PhysicalField Zs = inverse_transform(zhat);
    PhysicalField Zm = inverse_transform(apply_symbol(zhat, phi));
    PhysicalField q(fine, 1);
    auto dst = q.component(0);
    for (std::size_t m = 0; m < q.points(); ++m) {
        double val = Zs.at(0, m) * Zm.at(0, m);
        for (int c = 0; c < g.dim(); ++c) val += U.at(c, m) * Um.at(c, m);
        dst[m] = val;
    }
    return q;
}

} // namespace detail

/// <R_eps, chi> for the mollified local balance at the middle snapshot, with
/// d/dt realized as a centered difference of the outer snapshots. For exact
/// solutions this vanishes; for simulated trajectories it shrinks as the
/// snapshot spacing and eps are refined.
inline double balance_residual(const ModelState& prev, const ModelState& mid,
                               const ModelState& next, const ModelParams& params, double eps,
                               int quad_points, const SpectralField& chi, int pad_factor = 2) {
    const Grid& g = mid.grid();
    require_same_grid(prev.grid(), g, "balance_residual");
    require_same_grid(next.grid(), g, "balance_residual");
    require_same_grid(chi.grid(), g, "balance_residual");
    const double dt1 = mid.t - prev.t, dt2 = next.t - mid.t;
    if (!(dt1 > 0.0) || std::abs(dt2 - dt1) > 1e-9 * std::max(dt1, dt2))
        throw std::invalid_argument("balance_residual: snapshots must be uniformly spaced");

    BallQuadrature quad(eps, quad_points, g.dim());
    Grid fine(g.dim(), g.n() * pad_factor);
    const std::vector<double> phi = quad.symbol_on(fine);
    const std::size_t npts = fine.size();

    SpectralField residual(g, 1);

    // d/dt (u.u^eps + Z.Z^eps), centered.
    {
        PhysicalField qn = detail::paired_energy_fine(next, phi, pad_factor);
        PhysicalField qp = detail::paired_energy_fine(prev, phi, pad_factor);
        auto a = qn.component(0);
        auto b = qp.component(0);
        PhysicalField dq(fine, 1);
        auto dst = dq.component(0);
        const double inv = 1.0 / (2.0 * dt1);
        for (std::size_t m = 0; m < npts; ++m) dst[m] = (a[m] - b[m]) * inv;
        axpy(residual, 1.0, detail::project_base(dq, g.n()));
    }

    SpectralField uhat = pad_spectral(mid.u, pad_factor);
    SpectralField vhat = pad_spectral(mid.v, pad_factor);
    SpectralField zhat = pad_spectral(mid.Z, pad_factor);
    PhysicalField U = inverse_transform(uhat);
    PhysicalField V = inverse_transform(vhat);
    PhysicalField Zs = inverse_transform(zhat);
    PhysicalField Um = inverse_transform(apply_symbol(uhat, phi));
    PhysicalField Zm = inverse_transform(apply_symbol(zhat, phi));

    // div(p^eps u + p u^eps)
    {
        SpectralField phat = pad_spectral(pressure_solve(mid.u, mid.v), pad_factor);
        PhysicalField P = inverse_transform(phat);
        PhysicalField Pm = inverse_transform(apply_symbol(phat, phi));
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField w(fine, 1);
            auto dst = w.component(0);
            for (std::size_t m = 0; m < npts; ++m)
                dst[m] = Pm.at(0, m) * U.at(i, m) + P.at(0, m) * Um.at(i, m);
            axpy(residual, 1.0, partial_derivative(detail::project_base(w, g.n()), i));
        }
    }

    // D_{1,eps} + 1/2 div((|u|^2 v)^eps - (|u|^2)^eps v) + div((u.u^eps) v)
    {
        axpy(residual, 1.0,
             detail::project_base(detail::defect_d1_algebraic_fine(mid.v, mid.u, quad, pad_factor),
                                  g.n()));
        PhysicalField u2(fine, 1);
        auto uu = u2.component(0);
        for (int c = 0; c < g.dim(); ++c)
            for (std::size_t m = 0; m < npts; ++m) uu[m] += U.at(c, m) * U.at(c, m);
        PhysicalField u2m = inverse_transform(apply_symbol(transform(u2), phi));
        PhysicalField udotum(fine, 1);
        auto ud = udotum.component(0);
        for (int c = 0; c < g.dim(); ++c)
            for (std::size_t m = 0; m < npts; ++m) ud[m] += U.at(c, m) * Um.at(c, m);
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField prod(fine, 1);
            auto dst = prod.component(0);
            for (std::size_t m = 0; m < npts; ++m) dst[m] = uu[m] * V.at(i, m);
            SpectralField mprod = apply_symbol(transform(prod), phi);
            PhysicalField mprod_phys = inverse_transform(mprod);
            PhysicalField w(fine, 1);
            auto wv = w.component(0);
            for (std::size_t m = 0; m < npts; ++m)
                wv[m] = 0.5 * (mprod_phys.at(0, m) - u2m.at(0, m) * V.at(i, m)) +
                        ud[m] * V.at(i, m);
            axpy(residual, 1.0, partial_derivative(detail::project_base(w, g.n()), i));
        }
    }

    // D_{2,eps} + 1/2 div((Z^2 u)^eps - (Z^2)^eps u) + div(Z Z^eps u)
    {
        axpy(residual, 1.0,
             detail::project_base(detail::defect_d2_algebraic_fine(mid.u, mid.Z, quad, pad_factor),
                                  g.n()));
        PhysicalField z2(fine, 1);
        auto zz = z2.component(0);
        for (std::size_t m = 0; m < npts; ++m) zz[m] = Zs.at(0, m) * Zs.at(0, m);
        PhysicalField z2m = inverse_transform(apply_symbol(transform(z2), phi));
        for (int i = 0; i < g.dim(); ++i) {
            PhysicalField prod(fine, 1);
            auto dst = prod.component(0);
            for (std::size_t m = 0; m < npts; ++m) dst[m] = zz[m] * U.at(i, m);
            PhysicalField mprod_phys = inverse_transform(apply_symbol(transform(prod), phi));
            PhysicalField w(fine, 1);
            auto wv = w.component(0);
            for (std::size_t m = 0; m < npts; ++m)
                wv[m] = 0.5 * (mprod_phys.at(0, m) - z2m.at(0, m) * U.at(i, m)) +
                        Zs.at(0, m) * Zm.at(0, m) * U.at(i, m);
            axpy(residual, 1.0, partial_derivative(detail::project_base(w, g.n()), i));
        }
    }

    // Reaction commutator K[(phi Z)^eps Z - (phi Z) Z]; zero below ignition.
    const double react = params.K * arrhenius_phi(params.theta_bar, params);
    if (react != 0.0) {
        PhysicalField w(fine, 1);
        auto dst = w.component(0);
        for (std::size_t m = 0; m < npts; ++m)
            dst[m] = react * (Zm.at(0, m) * Zs.at(0, m) - Zs.at(0, m) * Zs.at(0, m));
        axpy(residual, 1.0, detail::project_base(w, g.n()));
    }

    return inner_product(residual, chi);
}

// ---------------------------------------------------------------------------
// 1D Burgers shock functional.
// ---------------------------------------------------------------------------

/// Signed total of the classical Burgers defect, the distributional limit of
/// (1/12) int chi'_eps(xi) (du(xi;x))^3 dxi paired with the energy density
/// u^2/2. Entropy (downward) jumps give +|sigma|^3/12.
inline double burgers_defect_total(const SpectralField& u, double eps, int quad_points,
                                   double grid_align_spacing = 0.0) {
    if (u.grid().dim() != 1 || u.components() != 1)
        throw std::invalid_argument("burgers_defect_total: 1D scalar field required");
    BallQuadrature quad(eps, quad_points, 1, grid_align_spacing);
    PhysicalField U0 = inverse_transform(u);
    const std::size_t npts = u.grid().size();
    const double w = quad.weight();
    double total = 0.0;
    for (const auto& node : quad.nodes()) {
        PhysicalField us = inverse_transform(shift(u, node.xi));
        double s = 0.0;
        for (std::size_t m = 0; m < npts; ++m) {
            const double d = us.at(0, m) - U0.at(0, m);
            s += d * d * d;
        }
        total += node.grad[0] * w * s;
    }
    return total * u.grid().cell_volume() / 12.0;
}

struct RichardsonResult {
    std::vector<double> eps;
    std::vector<double> values;
    double observed_order = 0.0;
    double extrapolated = 0.0;
};

/// Richardson extrapolation over a geometric eps ladder with the convergence
/// order measured from the last three entries.
inline RichardsonResult richardson_extrapolate(const std::vector<double>& eps,
                                               const std::vector<double>& values) {
    if (eps.size() != values.size() || eps.size() < 3)
        throw std::invalid_argument("richardson_extrapolate: need >= 3 ladder entries");
    const std::size_t n = eps.size();
    const double r = eps[n - 1] / eps[n - 2];
    const double r_prev = eps[n - 2] / eps[n - 3];
    if (std::abs(r - r_prev) > 1e-9 * std::abs(r))
        throw std::invalid_argument("richardson_extrapolate: ladder must be geometric");
    RichardsonResult res;
    res.eps = eps;
    res.values = values;
    const double d1 = values[n - 2] - values[n - 3];
    const double d2 = values[n - 1] - values[n - 2];
    if (d1 == 0.0 || d2 == 0.0 || d2 / d1 <= 0.0) {
        res.observed_order = 0.0;
        res.extrapolated = values[n - 1];
        return res;
    }
    res.observed_order = std::log(d2 / d1) / std::log(r);
    const double rp = std::pow(r, res.observed_order);
    res.extrapolated = values[n - 1] + (values[n - 1] - values[n - 2]) * rp / (1.0 - rp);
    return res;
}

} // namespace lerayflux
