#pragma once

// Radial C_c^inf mollifier support: the grid-sampled bump behind mollify(),
// and the off-grid ball quadrature used by the Duchon-Robert defect and
// balance diagnostics. Both normalize mass by their own discrete rule so the
// mean is preserved exactly.

#include <cmath>
#include <complex>
#include <vector>

#include "lerayflux/spectral_ops.hpp"

namespace lerayflux {

namespace detail {
/// Unnormalized radial profile exp(-1/(1-r^2)) on r < 1, zero outside.
inline double bump_raw(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2));
}
/// d/dr of bump_raw.
inline double bump_raw_deriv(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    const double d = 1.0 - r2;
    return bump_raw(r) * (-2.0 * r / (d * d));
}
} // namespace detail

/// Radial bump c * exp(-1/(1 - |x/eps|^2)) on |x| < eps, with c fixed by the
/// discrete grid quadrature so the sampled mass is exactly 1.
class MollifierSpec {
public:
    explicit MollifierSpec(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon > 0.0)) throw std::invalid_argument("MollifierSpec: epsilon must be > 0");
        if (!(epsilon < pi())) throw std::invalid_argument("MollifierSpec: epsilon must be < pi");
    }

    double epsilon() const { return epsilon_; }
    static double pi() { return 0.5 * two_pi; }

    /// Bump sampled at grid points (minimum-image distance), unit discrete mass.
    PhysicalField sampled_bump(const Grid& g) const {
        PhysicalField out(g, 1);
        auto vals = out.component(0);
        for_each_point(g, [&](std::size_t m, const std::array<double, 3>& x) {
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                const double d = x[a] <= MollifierSpec::pi() ? x[a] : x[a] - two_pi;
                r2 += d * d;
            }
            vals[m] = detail::bump_raw(std::sqrt(r2) / epsilon_);
        });
        const double mass = integral(out);
        if (!(mass > 0.0)) throw std::runtime_error("MollifierSpec: empty sampled support");
        for (auto& v : out.raw()) v /= mass;
        return out;
    }

    /// Fourier multiplier of the sampled bump: Phi(k) = int phi(y) e^{-ik.y} dy
    /// by grid quadrature; Phi(0) = 1 exactly.
    std::vector<double> sampled_symbol(const Grid& g) const {
        SpectralField hat = transform(sampled_bump(g));
        std::vector<double> phi(g.size());
        const double vol = g.volume();
        for (std::size_t m = 0; m < g.size(); ++m) phi[m] = hat.at(0, m).real() * vol;
        return phi;
    }

private:
    double epsilon_;
};

/// Coefficient-wise multiplication by the sampled-bump transform. Preserves
/// the mean exactly and commutes with every other Fourier multiplier here.
inline SpectralField mollify(const SpectralField& f, const MollifierSpec& moll) {
    const std::vector<double> phi = moll.sampled_symbol(f.grid());
    SpectralField out(f.grid(), f.components());
    for (int c = 0; c < f.components(); ++c)
        for (std::size_t m = 0; m < f.grid().size(); ++m) out.at(c, m) = phi[m] * f.at(c, m);
    return out;
}

/// Tensor-product quadrature over [-eps, eps]^dim for increment integrals:
/// uniform nodes per axis, analytic bump weights, mass-normalized. Nodes can
/// optionally be snapped to a grid spacing so increments of non-smooth sampled
/// data stay exact (1D shock analysis).
class BallQuadrature {
public:
    struct Node {
        std::array<double, 3> xi;
        double value;                 // normalized mollifier value chi_eps(xi)
        std::array<double, 3> grad;   // normalized gradient of chi_eps at xi
    };

    BallQuadrature(double eps, int points_per_axis, int dim, double align_spacing = 0.0)
        : eps_(eps), dim_(dim) {
        if (!(eps > 0.0) || !(eps < 0.5 * two_pi))
            throw std::invalid_argument("BallQuadrature: eps out of range");
        if (points_per_axis < 3)
            throw std::invalid_argument("BallQuadrature: need >= 3 points per axis");

        if (align_spacing > 0.0) {
            const int mmax = static_cast<int>(std::floor(eps / align_spacing));
            if (mmax < 3) throw std::invalid_argument("BallQuadrature: eps unresolved by grid");
            step_ = align_spacing;
            for (int m = -mmax; m <= mmax; ++m) axis_.push_back(m * align_spacing);
        } else {
            step_ = 2.0 * eps / (points_per_axis - 1);
            for (int m = 0; m < points_per_axis; ++m) axis_.push_back(-eps + m * step_);
        }

        // Normalizing mass over the full tensor set (the bump vanishes
        // outside the ball, so no explicit restriction is needed).
        const double wcell = std::pow(step_, dim_);
        double mass = 0.0;
        visit_tensor([&](const std::array<double, 3>& xi, double r) {
            mass += wcell * detail::bump_raw(r / eps_);
        });
        if (!(mass > 0.0)) throw std::runtime_error("BallQuadrature: zero mass");
        mass_ = mass;

        visit_tensor([&](const std::array<double, 3>& xi, double r) {
            const double b = detail::bump_raw(r / eps_);
            if (b == 0.0) return;
            Node nd;
            nd.xi = xi;
            nd.value = b / mass_;
            const double db = detail::bump_raw_deriv(r / eps_) / (eps_ * mass_);
            for (int a = 0; a < 3; ++a)
                nd.grad[a] = r > 0.0 ? db * xi[a] / r : 0.0;
            nodes_.push_back(nd);
        });
    }

    double eps() const { return eps_; }
    int dim() const { return dim_; }
    /// Quadrature cell weight (uniform); sum_q weight()*value == 1 exactly.
    double weight() const { return std::pow(step_, dim_); }
    const std::vector<Node>& nodes() const { return nodes_; }

    /// Multiplier Phi(k) = sum_q w chi(xi_q) exp(-i k.xi_q) on a lattice,
    /// evaluated by per-axis factorization of the tensor sum.
    std::vector<double> symbol_on(const Grid& g) const {
        if (g.dim() != dim_) throw std::invalid_argument("BallQuadrature: dim mismatch");
        const std::size_t nn = static_cast<std::size_t>(g.n());
        const std::size_t p = axis_.size();
        const double wcell = weight();

        // phase[a][i*p + m] = exp(-i k_i t_m)
        std::vector<std::complex<double>> phase(nn * p);
        for (std::size_t i = 0; i < nn; ++i) {
            const double k = g.wavenumber(static_cast<int>(i));
            for (std::size_t m = 0; m < p; ++m) {
                const double a = -k * axis_[m];
                phase[i * p + m] = {std::cos(a), std::sin(a)};
            }
        }

        std::vector<double> phi(g.size());
        if (dim_ == 1) {
            for (std::size_t i = 0; i < nn; ++i) {
                std::complex<double> s{0.0, 0.0};
                for (std::size_t m = 0; m < p; ++m)
                    s += wcell * (detail::bump_raw(std::abs(axis_[m]) / eps_) / mass_) *
                         phase[i * p + m];
                phi[i] = s.real();
            }
            return phi;
        }

        // W(m1,m2,m3) partial sums: A[k1][m2][m3], then B[k1][k2][m3].
        std::vector<std::complex<double>> A(nn * p * p), B(nn * nn * p);
        for (std::size_t i1 = 0; i1 < nn; ++i1)
            for (std::size_t m2 = 0; m2 < p; ++m2)
                for (std::size_t m3 = 0; m3 < p; ++m3) {
                    std::complex<double> s{0.0, 0.0};
                    const double r23 = axis_[m2] * axis_[m2] + axis_[m3] * axis_[m3];
                    for (std::size_t m1 = 0; m1 < p; ++m1) {
                        const double r = std::sqrt(axis_[m1] * axis_[m1] + r23);
                        const double b = detail::bump_raw(r / eps_);
                        if (b != 0.0) s += b * phase[i1 * p + m1];
                    }
                    A[(i1 * p + m2) * p + m3] = s;
                }
        for (std::size_t i1 = 0; i1 < nn; ++i1)
            for (std::size_t i2 = 0; i2 < nn; ++i2)
                for (std::size_t m3 = 0; m3 < p; ++m3) {
                    std::complex<double> s{0.0, 0.0};
                    for (std::size_t m2 = 0; m2 < p; ++m2)
                        s += A[(i1 * p + m2) * p + m3] * phase[i2 * p + m2];
                    B[(i1 * nn + i2) * p + m3] = s;
                }
        const double scale = wcell / mass_;
        for (std::size_t i3 = 0; i3 < nn; ++i3)
            for (std::size_t i2 = 0; i2 < nn; ++i2)
                for (std::size_t i1 = 0; i1 < nn; ++i1) {
                    std::complex<double> s{0.0, 0.0};
                    for (std::size_t m3 = 0; m3 < p; ++m3)
                        s += B[(i1 * nn + i2) * p + m3] * phase[i3 * p + m3];
                    // x1-fastest flat order
                    phi[(i3 * nn + i2) * nn + i1] = scale * s.real();
                }
        return phi;
    }

private:
    template <typename Fn>
    void visit_tensor(Fn&& fn) const {
        const std::size_t p = axis_.size();
        if (dim_ == 1) {
            for (std::size_t m1 = 0; m1 < p; ++m1) {
                std::array<double, 3> xi{axis_[m1], 0.0, 0.0};
                fn(xi, std::abs(axis_[m1]));
            }
            return;
        }
        for (std::size_t m3 = 0; m3 < p; ++m3)
            for (std::size_t m2 = 0; m2 < p; ++m2)
                for (std::size_t m1 = 0; m1 < p; ++m1) {
                    std::array<double, 3> xi{axis_[m1], axis_[m2], axis_[m3]};
                    fn(xi, std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]));
                }
    }

    double eps_;
    int dim_;
    double step_ = 0.0;
    double mass_ = 0.0;
    std::vector<double> axis_;
    std::vector<Node> nodes_;
};

/// Apply a precomputed multiplier table to every component.
inline SpectralField apply_symbol(const SpectralField& f, const std::vector<double>& phi) {
    if (phi.size() != f.grid().size())
        throw std::invalid_argument("apply_symbol: table size mismatch");
    SpectralField out(f.grid(), f.components());
    for (int c = 0; c < f.components(); ++c)
        for (std::size_t m = 0; m < f.grid().size(); ++m) out.at(c, m) = phi[m] * f.at(c, m);
    return out;
}

} // namespace lerayflux
