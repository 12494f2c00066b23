#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "lerayflux/grid.hpp"

namespace lerayflux {

namespace detail {
inline void check_components(int components, int dim) {
    if (components != 1 && components != dim)
        throw std::invalid_argument("Field: components must be 1 (scalar) or dim (vector)");
}
} // namespace detail

/// Real samples at grid points, component-major, x-fastest within a component.
class PhysicalField {
public:
    PhysicalField(const Grid& grid, int components)
        : grid_(grid), components_(components),
          data_(grid.size() * static_cast<std::size_t>(components), 0.0) {
        detail::check_components(components, grid.dim());
    }

    const Grid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t points() const { return grid_.size(); }

    std::span<double> component(int c) {
        return {data_.data() + static_cast<std::size_t>(c) * points(), points()};
    }
    std::span<const double> component(int c) const {
        return {data_.data() + static_cast<std::size_t>(c) * points(), points()};
    }
    double& at(int c, std::size_t flat) { return data_[static_cast<std::size_t>(c) * points() + flat]; }
    double at(int c, std::size_t flat) const { return data_[static_cast<std::size_t>(c) * points() + flat]; }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    Grid grid_;
    int components_;
    std::vector<double> data_;
};

/// Fourier-series coefficients per lattice wavenumber, same layout as
/// PhysicalField. Convention: f(x) = sum_k fhat_k exp(i k.x); real fields
/// carry Hermitian symmetry fhat_{-k} = conj(fhat_k).
class SpectralField {
public:
    SpectralField(const Grid& grid, int components)
        : grid_(grid), components_(components),
          data_(grid.size() * static_cast<std::size_t>(components), {0.0, 0.0}) {
        detail::check_components(components, grid.dim());
    }

    const Grid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t modes() const { return grid_.size(); }

    std::span<std::complex<double>> component(int c) {
        return {data_.data() + static_cast<std::size_t>(c) * modes(), modes()};
    }
    std::span<const std::complex<double>> component(int c) const {
        return {data_.data() + static_cast<std::size_t>(c) * modes(), modes()};
    }
    std::complex<double>& at(int c, std::size_t flat) {
        return data_[static_cast<std::size_t>(c) * modes() + flat];
    }
    const std::complex<double>& at(int c, std::size_t flat) const {
        return data_[static_cast<std::size_t>(c) * modes() + flat];
    }

    std::vector<std::complex<double>>& raw() { return data_; }
    const std::vector<std::complex<double>>& raw() const { return data_; }

private:
    Grid grid_;
    int components_;
    std::vector<std::complex<double>> data_;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

// Small in-place helpers used throughout the kernels.

inline void axpy(SpectralField& y, double a, const SpectralField& x) {
    require_same_grid(y.grid(), x.grid(), "axpy");
    for (std::size_t i = 0; i < y.raw().size(); ++i) y.raw()[i] += a * x.raw()[i];
}

inline void scale(SpectralField& y, double a) {
    for (auto& v : y.raw()) v *= a;
}

inline SpectralField linear_combination(const SpectralField& x, double a,
                                        const SpectralField& y, double b) {
    require_same_grid(x.grid(), y.grid(), "linear_combination");
    SpectralField out(x.grid(), x.components());
    for (std::size_t i = 0; i < out.raw().size(); ++i)
        out.raw()[i] = a * x.raw()[i] + b * y.raw()[i];
    return out;
}

} // namespace lerayflux
