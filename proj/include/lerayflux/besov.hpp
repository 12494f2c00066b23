#pragma once

// Littlewood-Paley blocks on the lattice, inhomogeneous Besov norms, Bony
// paraproducts, and structure-function regularity estimation.
//
// The dyadic template is built from one C^inf bump primitive: chi(r) is a
// smoothed radial step equal to 1 on r <= 3/4 and 0 on r >= 4/3, and
// phi(xi) := chi(xi/2) - chi(xi). The partition-of-unity identity then
// telescopes to machine precision on every resolved mode. The 3/4 lower
// support bound is the standard dyadic choice.

#include <optional>

#include "lerayflux/fit.hpp"
#include "lerayflux/spectral_ops.hpp"

namespace lerayflux {

namespace detail {

/// Smooth decreasing transition H(t): 1 at t <= 0, 0 at t >= 1, built from
/// the cumulative integral of exp(-1/(s(1-s))).
inline double smooth_step_down(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    static const std::vector<double> cumulative = [] {
        constexpr int n = 4096;
        std::vector<double> c(n + 1, 0.0);
        auto b = [](double s) {
            if (s <= 0.0 || s >= 1.0) return 0.0;
            return std::exp(-1.0 / (s * (1.0 - s)));
        };
        const double h = 1.0 / n;
        for (int i = 1; i <= n; ++i)
            c[i] = c[i - 1] + 0.5 * h * (b((i - 1) * h) + b(i * h));
        return c;
    }();
    const int n = static_cast<int>(cumulative.size()) - 1;
    const double x = t * n;
    const int i = std::min(n - 1, static_cast<int>(x));
    const double frac = x - i;
    const double ct = cumulative[i] + frac * (cumulative[i + 1] - cumulative[i]);
    return 1.0 - ct / cumulative.back();
}

} // namespace detail

class DyadicPartition {
public:
    explicit DyadicPartition(const Grid& g) : grid_(g) {
        const double kmax = g.k_max();
        j_max_ = 0;
        while (std::ldexp(0.75, j_max_ + 1) < kmax) ++j_max_;
    }

    const Grid& grid() const { return grid_; }
    /// Highest annular block index; blocks run j = -1 (low pass) .. j_max.
    int j_max() const { return j_max_; }

    /// Low-frequency profile chi(|k|): 1 on |k| <= 3/4, 0 on |k| >= 4/3.
    static double chi(double kmag) {
        if (kmag <= 0.75) return 1.0;
        if (kmag >= 4.0 / 3.0) return 0.0;
        return detail::smooth_step_down((kmag - 0.75) / (4.0 / 3.0 - 0.75));
    }

    /// Block profile: chi for j = -1, phi(2^-j k) = chi(k/2^{j+1}) - chi(k/2^j)
    /// for j >= 0; supported in {3/4 2^j <= |k| <= 8/3 2^j}.
    static double block_weight(int j, double kmag) {
        if (j < -1) return 0.0;
        if (j == -1) return chi(kmag);
        return chi(std::ldexp(kmag, -(j + 1))) - chi(std::ldexp(kmag, -j));
    }

    /// Low-pass profile S_j = chi(2^-j k) = sum of blocks below j.
    static double lowpass_weight(int j, double kmag) { return chi(std::ldexp(kmag, -j)); }

private:
    Grid grid_;
    int j_max_;
};

namespace detail {
template <typename WeightFn>
SpectralField apply_radial(const SpectralField& f, WeightFn&& w) {
    SpectralField out(f.grid(), f.components());
    for_each_mode(f.grid(), [&](std::size_t m, const std::array<int, 3>& k) {
        const double kmag = std::sqrt(static_cast<double>(k[0]) * k[0] +
                                      static_cast<double>(k[1]) * k[1] +
                                      static_cast<double>(k[2]) * k[2]);
        const double weight = w(kmag);
        for (int c = 0; c < f.components(); ++c) out.at(c, m) = weight * f.at(c, m);
    });
    return out;
}
} // namespace detail

/// Frequency-localized piece Delta_j u (j = -1 is the chi(D) low pass).
inline SpectralField lp_block(const SpectralField& u, int j, const DyadicPartition& part) {
    if (j < -1) throw std::invalid_argument("lp_block: j must be >= -1");
    require_same_grid(u.grid(), part.grid(), "lp_block");
    return detail::apply_radial(u, [j](double kmag) { return DyadicPartition::block_weight(j, kmag); });
}

inline SpectralField lp_lowpass(const SpectralField& u, int j, const DyadicPartition& part) {
    require_same_grid(u.grid(), part.grid(), "lp_lowpass");
    return detail::apply_radial(u, [j](double kmag) { return DyadicPartition::lowpass_weight(j, kmag); });
}

/// ||Delta_j u||_{L^p} for j = -1 .. j_max (vector fields use the pointwise
/// Euclidean magnitude).
inline std::vector<double> besov_block_norms(const SpectralField& u, double p,
                                             const DyadicPartition& part) {
    std::vector<double> norms;
    for (int j = -1; j <= part.j_max(); ++j)
        norms.push_back(lp_norm_magnitude(inverse_transform(lp_block(u, j, part)), p));
    return norms;
}

/// Definition-formula combination of stored block norms (index 0 is j = -1):
/// (sum_j 2^{jsq} b_j^q)^{1/q}, sup_j 2^{js} b_j for q = inf.
inline double besov_norm_from_blocks(const std::vector<double>& block_norms, double s, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t i = 0; i < block_norms.size(); ++i) {
            const int j = static_cast<int>(i) - 1;
            m = std::max(m, std::pow(2.0, j * s) * block_norms[i]);
        }
        return m;
    }
    if (q < 1.0) throw std::invalid_argument("besov_norm_from_blocks: q must be >= 1");
    double sum = 0.0;
    for (std::size_t i = 0; i < block_norms.size(); ++i) {
        const int j = static_cast<int>(i) - 1;
        sum += std::pow(2.0, j * s * q) * std::pow(block_norms[i], q);
    }
    return std::pow(sum, 1.0 / q);
}

inline double besov_norm(const SpectralField& u, double s, double p, double q,
                         const DyadicPartition& part) {
    return besov_norm_from_blocks(besov_block_norms(u, p, part), s, q);
}

struct BesovReport {
    double s = 0.0, p = 0.0, q = 0.0;
    std::vector<int> j;
    std::vector<double> block_norms;
    double norm = 0.0;
    std::optional<LineFit> block_exponent; // slope of log2 b_j vs j, negated = regularity
};

inline BesovReport besov_report(const SpectralField& u, double s, double p, double q,
                                const DyadicPartition& part) {
    BesovReport r;
    r.s = s;
    r.p = p;
    r.q = q;
    r.block_norms = besov_block_norms(u, p, part);
    for (int j = -1; j <= part.j_max(); ++j) r.j.push_back(j);
    r.norm = besov_norm_from_blocks(r.block_norms, s, q);
    // Regularity from the dyadic decay over annular blocks: b_j ~ 2^{-j s}.
    std::vector<double> xs, ys;
    for (std::size_t i = 1; i < r.block_norms.size(); ++i)
        if (r.block_norms[i] > 0.0) {
            xs.push_back(static_cast<double>(r.j[i]));
            ys.push_back(std::log2(r.block_norms[i]));
        }
    if (xs.size() >= 2) {
        LineFit f = fit_line(xs, ys);
        f.slope = -f.slope; // report the decay exponent with positive sign
        r.block_exponent = f;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bony paraproducts.
// ---------------------------------------------------------------------------

struct Paraproduct {
    PhysicalField low_high;  // T_u v = sum_j S_{j-1}u Delta_j v
    PhysicalField high_low;  // T_v u
    PhysicalField remainder; // R(u, v) = sum_{|j-j'|<=1} Delta_j u Delta_{j'} v
};

/// Bony decomposition of the pointwise product of two scalars. The three
/// parts sum to u*v exactly at grid points: each piece multiplies exact
/// samples of band-limited factors, and the block sums telescope to u and v.
inline Paraproduct paraproduct(const SpectralField& u, const SpectralField& v,
                               const DyadicPartition& part) {
    if (u.components() != 1 || v.components() != 1)
        throw std::invalid_argument("paraproduct: scalar fields required (apply componentwise)");
    require_same_grid(u.grid(), v.grid(), "paraproduct");
    const Grid& g = u.grid();
    const int jm = part.j_max();
    const std::size_t npts = g.size();

    std::vector<PhysicalField> bu, bv; // Delta_j, index 0 <-> j = -1
    for (int j = -1; j <= jm; ++j) {
        bu.push_back(inverse_transform(lp_block(u, j, part)));
        bv.push_back(inverse_transform(lp_block(v, j, part)));
    }

    Paraproduct out{PhysicalField(g, 1), PhysicalField(g, 1), PhysicalField(g, 1)};
    // Running S_{j-1} sums built from the same block samples, so the index
    // bookkeeping (S_m = sum_{j' <= m-1} Delta_{j'}) is exact by telescoping.
    std::vector<double> su(npts, 0.0), sv(npts, 0.0);
    for (int j = 0; j <= jm; ++j) {
        // S_{j-1} = sum_{j' <= j-2}: accumulate block j-2 before using.
        if (j >= 1) {
            auto a = bu[static_cast<std::size_t>(j - 1)].component(0); // j' = j-2
            auto b = bv[static_cast<std::size_t>(j - 1)].component(0);
            for (std::size_t m = 0; m < npts; ++m) {
                su[m] += a[m];
                sv[m] += b[m];
            }
        }
        auto dv = bv[static_cast<std::size_t>(j + 1)].component(0);
        auto du = bu[static_cast<std::size_t>(j + 1)].component(0);
        auto lh = out.low_high.component(0);
        auto hl = out.high_low.component(0);
        for (std::size_t m = 0; m < npts; ++m) {
            lh[m] += su[m] * dv[m];
            hl[m] += sv[m] * du[m];
        }
    }
    auto rem = out.remainder.component(0);
    for (int j = -1; j <= jm; ++j)
        for (int jp = std::max(-1, j - 1); jp <= std::min(jm, j + 1); ++jp) {
            auto a = bu[static_cast<std::size_t>(j + 1)].component(0);
            auto b = bv[static_cast<std::size_t>(jp + 1)].component(0);
            for (std::size_t m = 0; m < npts; ++m) rem[m] += a[m] * b[m];
        }
    return out;
}

// ---------------------------------------------------------------------------
// Structure functions and regularity fits.
// ---------------------------------------------------------------------------

struct StructureCurve {
    std::vector<double> xi;
    std::vector<double> value; // direction-averaged ||u(.+xi) - u||_{L^p}
};

inline StructureCurve structure_function(const SpectralField& u, double p,
                                         const std::vector<double>& xi_magnitudes,
                                         int directions = 0) {
    const Grid& g = u.grid();
    const auto dirs = direction_set(g.dim(), directions);
    PhysicalField base = inverse_transform(u);
    StructureCurve curve;
    for (double r : xi_magnitudes) {
        if (!(r > 0.0) || !(r < 0.5 * two_pi))
            throw std::invalid_argument("structure_function: magnitudes must lie in (0, pi)");
        double acc = 0.0;
        for (const auto& d : dirs) {
            PhysicalField shifted =
                inverse_transform(shift(u, {r * d[0], r * d[1], r * d[2]}));
            for (std::size_t i = 0; i < shifted.raw().size(); ++i)
                shifted.raw()[i] -= base.raw()[i];
            acc += lp_norm_magnitude(shifted, p);
        }
        curve.xi.push_back(r);
        curve.value.push_back(acc / dirs.size());
    }
    return curve;
}

struct RegularityEstimate {
    double exponent = 0.0;
    double stderr_ = 0.0;
};

/// Least-squares slope of log S_p vs log |xi| inside the window.
inline RegularityEstimate regularity_fit(const StructureCurve& curve, double xi_lo = 0.0,
                                         double xi_hi = 0.0) {
    bool any = false;
    for (double v : curve.value)
        if (v != 0.0) any = true;
    if (!any) throw std::invalid_argument("regularity_fit: degenerate all-zero curve");
    LineFit f = fit_loglog(curve.xi, curve.value, xi_lo, xi_hi);
    return {f.slope, f.slope_stderr};
}

} // namespace lerayflux
