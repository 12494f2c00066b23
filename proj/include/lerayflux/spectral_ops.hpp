#pragma once

// Fourier-multiplier operators on the periodic lattice: derivatives, Leray
// projection, Helmholtz filtering, sharp truncation, dealiasing, sub-grid
// shifts, and alias-exact padded products.

#include <algorithm>
#include <cmath>
#include <complex>

#include "lerayflux/fft.hpp"
#include "lerayflux/field.hpp"

namespace lerayflux {

enum class DerivativeKind { Gradient, Divergence, Laplacian };
enum class HelmholtzDirection { Apply, Invert };

namespace detail {
/// Per-axis phase table exp(i * k * s) for every FFT index.
inline std::vector<std::complex<double>> phase_table(const Grid& g, double s) {
    std::vector<std::complex<double>> t(static_cast<std::size_t>(g.n()));
    for (int i = 0; i < g.n(); ++i) {
        const double a = g.wavenumber(i) * s;
        t[static_cast<std::size_t>(i)] = {std::cos(a), std::sin(a)};
    }
    return t;
}
} // namespace detail

/// d/dx_axis as the multiplier i*k_axis. The full lattice wavenumber is used,
/// including the Nyquist mode; evolution dealiases first, which removes it.
inline SpectralField partial_derivative(const SpectralField& f, int axis) {
    SpectralField out(f.grid(), f.components());
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        const std::complex<double> ik(0.0, static_cast<double>(k[axis]));
        for (int c = 0; c < f.components(); ++c) out.at(c, m) = ik * f.at(c, m);
    });
    return out;
}

inline SpectralField gradient(const SpectralField& f) {
    if (f.components() != 1)
        throw std::invalid_argument("gradient: scalar field required");
    const Grid& g = f.grid();
    SpectralField out(g, g.dim());
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        for (int a = 0; a < g.dim(); ++a)
            out.at(a, m) = std::complex<double>(0.0, static_cast<double>(k[a])) * f.at(0, m);
    });
    return out;
}

inline SpectralField divergence(const SpectralField& f) {
    const Grid& g = f.grid();
    if (f.components() != g.dim())
        throw std::invalid_argument("divergence: vector field required");
    SpectralField out(g, 1);
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        std::complex<double> s{0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a)
            s += std::complex<double>(0.0, static_cast<double>(k[a])) * f.at(a, m);
        out.at(0, m) = s;
    });
    return out;
}

inline SpectralField laplacian(const SpectralField& f) {
    SpectralField out(f.grid(), f.components());
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        for (int c = 0; c < f.components(); ++c) out.at(c, m) = -k2 * f.at(c, m);
    });
    return out;
}

inline SpectralField multiplier_derivative(const SpectralField& f, DerivativeKind kind) {
    switch (kind) {
    case DerivativeKind::Gradient: return gradient(f);
    case DerivativeKind::Divergence: return divergence(f);
    case DerivativeKind::Laplacian: return laplacian(f);
    }
    throw std::logic_error("multiplier_derivative: bad kind");
}

/// Orthogonal projection onto divergence-free fields, (I - k k^T / |k|^2)
/// per mode; the k = 0 mode is left untouched.
inline SpectralField leray_project(const SpectralField& f) {
    const Grid& g = f.grid();
    if (f.components() != g.dim())
        throw std::invalid_argument("leray_project: vector field required");
    SpectralField out = f;
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        if (k2 == 0.0) return;
        std::complex<double> kdotf{0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a) kdotf += static_cast<double>(k[a]) * f.at(a, m);
        kdotf /= k2;
        for (int a = 0; a < g.dim(); ++a) out.at(a, m) -= static_cast<double>(k[a]) * kdotf;
    });
    return out;
}

/// Helmholtz filter (1 + alpha^2 |k|^2), applied or inverted. alpha = 0 is
/// the identity either way.
inline SpectralField helmholtz(const SpectralField& f, double alpha, HelmholtzDirection dir) {
    if (alpha < 0.0) throw std::invalid_argument("helmholtz: alpha must be >= 0");
    SpectralField out(f.grid(), f.components());
    const double a2 = alpha * alpha;
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        const double sym = 1.0 + a2 * k2;
        const double w = dir == HelmholtzDirection::Apply ? sym : 1.0 / sym;
        for (int c = 0; c < f.components(); ++c) out.at(c, m) = w * f.at(c, m);
    });
    return out;
}

/// Sharp spectral cutoff keeping |k| <= kappa (Euclidean; ties kept). The
/// comparison carries a few-ulp slack so kappa = sqrt(integer) boundaries
/// behave like the exact tie; lattice |k|^2 values are integers, so no
/// neighboring mode can be absorbed by the slack.
inline SpectralField lowpass_sharp(const SpectralField& f, double kappa) {
    if (kappa <= 0.0) throw std::invalid_argument("lowpass_sharp: kappa must be > 0");
    SpectralField out = f;
    const double kap2 = kappa * kappa;
    const double bound = kap2 * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        if (k2 > bound)
            for (int c = 0; c < f.components(); ++c) out.at(c, m) = {0.0, 0.0};
    });
    return out;
}

/// Two-thirds rule: zero every mode with any |k_i| > n/3. Also removes the
/// Nyquist mode, so first derivatives of dealiased fields are unambiguous.
inline SpectralField dealias(const SpectralField& f) {
    SpectralField out = f;
    const int n = f.grid().n();
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        if (3 * std::abs(k[0]) > n || 3 * std::abs(k[1]) > n || 3 * std::abs(k[2]) > n)
            for (int c = 0; c < f.components(); ++c) out.at(c, m) = {0.0, 0.0};
    });
    return out;
}

/// Largest per-axis band kept by dealias() on this grid.
inline int dealias_band(const Grid& g) { return g.n() / 3; }

/// Translation f(. + xi) as the multiplier exp(i k.xi); exact for
/// band-limited fields, and exact sample rotation when xi is a multiple of
/// the grid spacing.
inline SpectralField shift(const SpectralField& f, const std::array<double, 3>& xi) {
    const Grid& g = f.grid();
    std::array<std::vector<std::complex<double>>, 3> phase;
    for (int a = 0; a < g.dim(); ++a) phase[a] = detail::phase_table(g, xi[a]);
    SpectralField out(g, f.components());
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < f.components(); ++c)
                out.at(c, static_cast<std::size_t>(i)) =
                    phase[0][static_cast<std::size_t>(i)] * f.at(c, static_cast<std::size_t>(i));
        return out;
    }
    std::size_t m = 0;
    for (int i3 = 0; i3 < n; ++i3)
        for (int i2 = 0; i2 < n; ++i2) {
            const std::complex<double> p23 =
                phase[2][static_cast<std::size_t>(i3)] * phase[1][static_cast<std::size_t>(i2)];
            for (int i1 = 0; i1 < n; ++i1, ++m) {
                const std::complex<double> p = p23 * phase[0][static_cast<std::size_t>(i1)];
                for (int c = 0; c < f.components(); ++c) out.at(c, m) = p * f.at(c, m);
            }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Lattice embedding / truncation and alias-exact products.
// ---------------------------------------------------------------------------

/// Embed into a lattice refined by `factor`. The source Nyquist coefficient is
/// split evenly over +-n/2 so real cosine content stays real on the fine grid.
inline SpectralField pad_spectral(const SpectralField& f, int factor) {
    if (factor < 1) throw std::invalid_argument("pad_spectral: factor must be >= 1");
    if (factor == 1) return f;
    const Grid& g = f.grid();
    Grid fine(g.dim(), g.n() * factor);
    SpectralField out(fine, f.components());
    const int nyq = g.nyquist();
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        int nnyq = 0;
        for (int a = 0; a < g.dim(); ++a)
            if (k[a] == nyq) ++nnyq;
        const double w = std::pow(0.5, nnyq);
        // Enumerate the 2^nnyq sign choices for Nyquist axes.
        for (int mask = 0; mask < (1 << g.dim()); ++mask) {
            std::array<int, 3> kk = k;
            bool valid = true;
            for (int a = 0; a < g.dim(); ++a) {
                if (mask & (1 << a)) {
                    if (k[a] != nyq) { valid = false; break; }
                    kk[a] = -nyq;
                }
            }
            if (!valid) continue;
            std::array<int, 3> idx{0, 0, 0};
            for (int a = 0; a < fine.dim(); ++a)
                idx[a] = kk[a] >= 0 ? kk[a] : kk[a] + fine.n();
            const std::size_t mf = fine.flatten(idx);
            for (int c = 0; c < f.components(); ++c) out.at(c, mf) += w * f.at(c, m);
        }
    });
    return out;
}

/// Restrict to a coarser lattice; +-Nyquist pairs of the coarse grid fold
/// into the single stored slot, so truncate(pad(f)) == f.
inline SpectralField truncate_spectral(const SpectralField& f, int n_coarse) {
    const Grid& g = f.grid();
    if (n_coarse > g.n() || n_coarse < 8 || n_coarse % 2 != 0)
        throw std::invalid_argument("truncate_spectral: bad target size");
    if (n_coarse == g.n()) return f;
    Grid coarse(g.dim(), n_coarse);
    SpectralField out(coarse, f.components());
    const int nyq = coarse.nyquist();
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) {
            if (k[a] > nyq || k[a] < -nyq) return;
            const int kk = k[a] == -nyq ? nyq : k[a];
            idx[a] = kk >= 0 ? kk : kk + n_coarse;
        }
        const std::size_t mc = coarse.flatten(idx);
        for (int c = 0; c < f.components(); ++c) out.at(c, mc) += f.at(c, m);
    });
    return out;
}

/// Samples of a spectral field on the grid refined by `factor` (exact values
/// of the band-limited interpolant).
inline PhysicalField to_physical_padded(const SpectralField& f, int factor) {
    return inverse_transform(pad_spectral(f, factor));
}

/// Alias-exact coefficients of the product a*b on the common base lattice,
/// computed on a grid refined by pad_factor (>= 2 is exact for quadratics).
inline SpectralField product_spectral(const SpectralField& a, const SpectralField& b,
                                      int pad_factor = 2) {
    require_same_grid(a.grid(), b.grid(), "product_spectral");
    if (a.components() != 1 || b.components() != 1)
        throw std::invalid_argument("product_spectral: scalar fields required");
    PhysicalField pa = to_physical_padded(a, pad_factor);
    PhysicalField pb = to_physical_padded(b, pad_factor);
    for (std::size_t i = 0; i < pa.raw().size(); ++i) pa.raw()[i] *= pb.raw()[i];
    return truncate_spectral(transform(pa), a.grid().n());
}

/// Take every factor-th sample of each axis (exact restriction of fine-grid
/// samples to the coarse grid).
inline PhysicalField subsample(const PhysicalField& fine, int factor) {
    const Grid& gf = fine.grid();
    if (gf.n() % factor != 0) throw std::invalid_argument("subsample: factor mismatch");
    Grid coarse(gf.dim(), gf.n() / factor);
    PhysicalField out(coarse, fine.components());
    for_each_point(coarse, [&](std::size_t m, const std::array<double, 3>&) {
        std::array<int, 3> idx = coarse.decompose(m);
        for (int a = 0; a < coarse.dim(); ++a) idx[a] *= factor;
        const std::size_t mf = gf.flatten(idx);
        for (int c = 0; c < fine.components(); ++c) out.at(c, m) = fine.at(c, mf);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature, norms, inner products.
// ---------------------------------------------------------------------------

/// Trapezoidal (equal-weight) quadrature of one component; spectrally
/// accurate for periodic data.
inline double integral(const PhysicalField& f, int comp = 0) {
    double s = 0.0;
    for (double v : f.component(comp)) s += v;
    return s * f.grid().cell_volume();
}

inline double mean(const PhysicalField& f, int comp = 0) {
    return integral(f, comp) / f.grid().volume();
}

/// L2 norm squared over all components by grid quadrature.
inline double l2_norm_squared(const PhysicalField& f) {
    double s = 0.0;
    for (double v : f.raw()) s += v * v;
    return s * f.grid().cell_volume();
}

/// Parseval route: (2*pi)^dim * sum_k |fhat_k|^2 over all components.
inline double l2_norm_squared(const SpectralField& f) {
    double s = 0.0;
    for (const auto& v : f.raw()) s += std::norm(v);
    return s * f.grid().volume();
}

/// L^p norm of one component (p >= 1; infinity for p = inf).
inline double lp_norm(const PhysicalField& f, double p, int comp = 0) {
    auto vals = f.component(comp);
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : vals) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (double v : vals) s += std::pow(std::abs(v), p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

/// L^p norm of the pointwise Euclidean magnitude over components.
inline double lp_norm_magnitude(const PhysicalField& f, double p) {
    const std::size_t npts = f.points();
    std::vector<double> mag(npts, 0.0);
    for (int c = 0; c < f.components(); ++c) {
        auto vals = f.component(c);
        for (std::size_t i = 0; i < npts; ++i) mag[i] += vals[i] * vals[i];
    }
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : mag) m = std::max(m, v);
        return std::sqrt(m);
    }
    double s = 0.0;
    for (double v : mag) s += std::pow(v, 0.5 * p);
    return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

/// Discrete L2 inner product over all components, (2*pi)^dim sum fhat.conj(ghat).
inline double inner_product(const SpectralField& f, const SpectralField& g) {
    require_same_grid(f.grid(), g.grid(), "inner_product");
    double s = 0.0;
    for (std::size_t i = 0; i < f.raw().size(); ++i)
        s += (f.raw()[i] * std::conj(g.raw()[i])).real();
    return s * f.grid().volume();
}

/// Largest pointwise magnitude of the inverse transform (used for CFL and
/// divergence checks).
inline double max_pointwise_magnitude(const SpectralField& f) {
    PhysicalField p = inverse_transform(f);
    const std::size_t npts = p.points();
    double m = 0.0;
    for (std::size_t i = 0; i < npts; ++i) {
        double s = 0.0;
        for (int c = 0; c < p.components(); ++c) s += p.at(c, i) * p.at(c, i);
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

/// Deterministic direction set for increment statistics: +-axes by default
/// (2 in 1D, 6 in 3D), the 12 icosahedral vertices when count == 12.
inline std::vector<std::array<double, 3>> direction_set(int dim, int count = 0) {
    std::vector<std::array<double, 3>> dirs;
    if (dim == 1) {
        dirs.push_back({1.0, 0.0, 0.0});
        dirs.push_back({-1.0, 0.0, 0.0});
        return dirs;
    }
    if (count == 12) {
        const double phi = 0.5 * (1.0 + std::sqrt(5.0));
        const double nrm = std::sqrt(1.0 + phi * phi);
        for (double s1 : {1.0, -1.0})
            for (double s2 : {1.0, -1.0}) {
                dirs.push_back({0.0, s1 / nrm, s2 * phi / nrm});
                dirs.push_back({s1 / nrm, s2 * phi / nrm, 0.0});
                dirs.push_back({s2 * phi / nrm, 0.0, s1 / nrm});
            }
        return dirs;
    }
    for (int a = 0; a < 3; ++a)
        for (double s : {1.0, -1.0}) {
            std::array<double, 3> d{0.0, 0.0, 0.0};
            d[a] = s;
            dirs.push_back(d);
        }
    return dirs;
}

/// Largest per-axis |k_i| carrying a coefficient above `floor` (band probe).
inline int per_axis_band(const SpectralField& f, double floor = 0.0) {
    int band = 0;
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        for (int c = 0; c < f.components(); ++c)
            if (std::abs(f.at(c, m)) > floor)
                band = std::max({band, std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
    });
    return band;
}

} // namespace lerayflux
