#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace lerayflux {

inline constexpr double two_pi = 6.283185307179586476925287;

/// Uniform periodic grid on [0, 2*pi)^dim with the integer wavenumber
/// lattice {-n/2+1, ..., n/2} per axis (single Nyquist mode at n/2).
/// Flat storage is x1-fastest for both sample and mode indices.
class Grid {
public:
    Grid(int dim, int n) : dim_(dim), n_(n) {
        if (dim != 1 && dim != 3)
            throw std::invalid_argument("Grid: dim must be 1 or 3");
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("Grid: n must be even and >= 8");
    }

    int dim() const { return dim_; }
    int n() const { return n_; }
    int nyquist() const { return n_ / 2; }
    double length() const { return two_pi; }
    double spacing() const { return two_pi / n_; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
        return s;
    }
    double cell_volume() const { return std::pow(spacing(), dim_); }
    double volume() const { return std::pow(two_pi, dim_); }

    /// FFT index -> signed wavenumber on this axis.
    int wavenumber(int index) const { return index <= n_ / 2 ? index : index - n_; }
    /// Largest |k| on the lattice (corner mode).
    double k_max() const { return 0.5 * n_ * std::sqrt(static_cast<double>(dim_)); }

    /// Sample coordinate of index i along one axis.
    double coord(int i) const { return spacing() * i; }

    std::array<int, 3> decompose(std::size_t flat) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = 0; a < dim_; ++a) {
            idx[a] = static_cast<int>(flat % n_);
            flat /= n_;
        }
        return idx;
    }
    std::size_t flatten(const std::array<int, 3>& idx) const {
        std::size_t f = 0;
        for (int a = dim_ - 1; a >= 0; --a)
            f = f * n_ + static_cast<std::size_t>(idx[a]);
        return f;
    }

    bool operator==(const Grid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int dim_;
    int n_;
};

/// Visit every lattice point; fn(flat, k) receives the flat index and the
/// signed wavevector (unused axes zero).
template <typename Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
    const int n = g.n();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i)
            fn(static_cast<std::size_t>(i), std::array<int, 3>{g.wavenumber(i), 0, 0});
        return;
    }
    std::size_t flat = 0;
    for (int i3 = 0; i3 < n; ++i3) {
        const int k3 = g.wavenumber(i3);
        for (int i2 = 0; i2 < n; ++i2) {
            const int k2 = g.wavenumber(i2);
            for (int i1 = 0; i1 < n; ++i1, ++flat)
                fn(flat, std::array<int, 3>{g.wavenumber(i1), k2, k3});
        }
    }
}

/// Visit every sample point; fn(flat, x) with x the physical coordinates.
template <typename Fn>
void for_each_point(const Grid& g, Fn&& fn) {
    const int n = g.n();
    const double h = g.spacing();
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i)
            fn(static_cast<std::size_t>(i), std::array<double, 3>{h * i, 0.0, 0.0});
        return;
    }
    std::size_t flat = 0;
    for (int i3 = 0; i3 < n; ++i3)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i1 = 0; i1 < n; ++i1, ++flat)
                fn(flat, std::array<double, 3>{h * i1, h * i2, h * i3});
}

} // namespace lerayflux
