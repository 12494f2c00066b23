#pragma once

// Independent brute-force oracles for the spectral kernels. Everything here
// is deliberately naive (O(N^2) lattice loops, direct quadrature) and stays
// independent of the FFT implementation paths it checks.

#include <random>

#include "lerayflux/energy.hpp"

namespace oracles {

using namespace lerayflux;

/// Naive forward DFT: fhat_k = (1/N) sum_x f(x) exp(-i k.x).
inline SpectralField dft_forward(const PhysicalField& f) {
    const Grid& g = f.grid();
    SpectralField out(g, f.components());
    const double invn = 1.0 / static_cast<double>(g.size());
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        for (int c = 0; c < f.components(); ++c) {
            std::complex<double> s{0.0, 0.0};
            for_each_point(g, [&](std::size_t x, const std::array<double, 3>& xv) {
                const double phase = -(k[0] * xv[0] + k[1] * xv[1] + k[2] * xv[2]);
                s += f.at(c, x) * std::complex<double>(std::cos(phase), std::sin(phase));
            });
            out.at(c, m) = s * invn;
        }
    });
    return out;
}

/// Random real field with uniform [-1, 1] samples (Hermitian by construction
/// after transform). Band-limit with lowpass/dealias as needed.
inline PhysicalField random_physical(const Grid& g, int components, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    PhysicalField f(g, components);
    for (auto& v : f.raw()) v = unif(rng);
    return f;
}

inline SpectralField random_band_limited(const Grid& g, int components, unsigned seed,
                                         double band) {
    SpectralField f = transform(random_physical(g, components, seed));
    return lowpass_sharp(f, band);
}

inline bool in_lattice(const Grid& g, const std::array<int, 3>& k) {
    for (int a = 0; a < g.dim(); ++a)
        if (k[a] < -g.n() / 2 + 1 || k[a] > g.n() / 2) return false;
    return true;
}

inline std::size_t lattice_flat(const Grid& g, const std::array<int, 3>& k) {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) idx[a] = k[a] >= 0 ? k[a] : k[a] + g.n();
    return g.flatten(idx);
}

/// Exact convolution of lattice-supported coefficient sets:
/// (a * b)(k) = sum_{p + q = k} a_p b_q with p, q on the lattice.
inline std::complex<double> convolve_at(const SpectralField& a, int ca, const SpectralField& b,
                                        int cb, const std::array<int, 3>& k) {
    const Grid& g = a.grid();
    std::complex<double> s{0.0, 0.0};
    for_each_mode(g, [&](std::size_t mp, const std::array<int, 3>& p) {
        const std::array<int, 3> q{k[0] - p[0], k[1] - p[1], k[2] - p[2]};
        if (!in_lattice(g, q)) return;
        s += a.at(ca, mp) * b.at(cb, lattice_flat(g, q));
    });
    return s;
}

/// Direct Fourier-space convolution route for Pi_kappa on small grids.
inline double flux_pi_oracle(const SpectralField& u, double kappa) {
    const Grid& g = u.grid();
    SpectralField ul = lowpass_sharp(u, kappa);
    const double kap2 = kappa * kappa;
    double total = 0.0;
    for_each_mode(g, [&](std::size_t m, const std::array<int, 3>& k) {
        const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                          static_cast<double>(k[2]) * k[2];
        for (int i = 0; i < g.dim(); ++i)
            for (int j = 0; j < g.dim(); ++j) {
                std::complex<double> a{0.0, 0.0};
                if (k2 <= kap2) a = convolve_at(u, i, u, j, k);
                a -= convolve_at(ul, i, ul, j, k);
                const std::complex<double> b =
                    std::complex<double>(0.0, static_cast<double>(k[i])) * ul.at(j, m);
                total += (a * std::conj(b)).real();
            }
    });
    return total * g.volume();
}

/// Physical-space periodic convolution by direct quadrature:
/// (f * phi)(x) = cellvol * sum_y phi(y) f(x - y).
inline PhysicalField convolve_physical(const PhysicalField& f, const PhysicalField& phi) {
    const Grid& g = f.grid();
    PhysicalField out(g, f.components());
    const double w = g.cell_volume();
    const int n = g.n();
    for_each_point(g, [&](std::size_t mx, const std::array<double, 3>&) {
        const std::array<int, 3> ix = g.decompose(mx);
        for_each_point(g, [&](std::size_t my, const std::array<double, 3>&) {
            const std::array<int, 3> iy = g.decompose(my);
            std::array<int, 3> diff{0, 0, 0};
            for (int a = 0; a < g.dim(); ++a) diff[a] = ((ix[a] - iy[a]) % n + n) % n;
            const std::size_t md = g.flatten(diff);
            const double pv = phi.at(0, my);
            for (int c = 0; c < f.components(); ++c) out.at(c, mx) += w * pv * f.at(c, md);
        });
    });
    return out;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
    return m;
}

inline double max_abs_diff(const PhysicalField& a, const PhysicalField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i)
        m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
    return m;
}

inline double max_abs(const SpectralField& a) {
    double m = 0.0;
    for (const auto& v : a.raw()) m = std::max(m, std::abs(v));
    return m;
}

} // namespace oracles
