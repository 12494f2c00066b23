#pragma once

// FFTW-backed transforms between PhysicalField and SpectralField.
//
// Forward:  fhat_k = (1/N) sum_x f(x) exp(-i k.x)   (Fourier-series amplitudes)
// Inverse:  f(x)   =       sum_k fhat_k exp(+i k.x)
//
// Plans are created once per (dim, n, direction) with FFTW_ESTIMATE and
// FFTW_UNALIGNED and reused via fftw_execute_dft, so repeated runs are
// bit-identical and execution is thread-safe.

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include <fftw3.h>

#include "lerayflux/field.hpp"

namespace lerayflux {

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int dim, int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(dim, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        std::size_t total = 1;
        for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
        std::vector<std::complex<double>> in(total), out(total);
        auto* fin = reinterpret_cast<fftw_complex*>(in.data());
        auto* fout = reinterpret_cast<fftw_complex*>(out.data());
        fftw_plan p = nullptr;
        // Storage is x1-fastest; FFTW's last dimension is the fastest one.
        if (dim == 1)
            p = fftw_plan_dft_1d(n, fin, fout, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        else
            p = fftw_plan_dft_3d(n, n, n, fin, fout, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fft: plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline void execute(fftw_plan plan, std::complex<double>* in, std::complex<double>* out) {
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace detail

/// Physical -> spectral. Rejects non-finite samples.
inline SpectralField transform(const PhysicalField& f) {
    for (double v : f.raw())
        if (!std::isfinite(v))
            throw std::invalid_argument("transform: non-finite sample");

    const Grid& g = f.grid();
    SpectralField out(g, f.components());
    fftw_plan plan = detail::PlanCache::instance().get(g.dim(), g.n(), FFTW_FORWARD);
    const double inv_n = 1.0 / static_cast<double>(g.size());
    std::vector<std::complex<double>> buf(g.size());
    for (int c = 0; c < f.components(); ++c) {
        auto in = f.component(c);
        for (std::size_t i = 0; i < in.size(); ++i) buf[i] = {in[i], 0.0};
        detail::execute(plan, buf.data(), out.component(c).data());
        for (auto& v : out.component(c)) v *= inv_n;
    }
    return out;
}

/// Spectral -> physical. Takes the real part; for Hermitian input the
/// imaginary residue is at rounding level.
inline PhysicalField inverse_transform(const SpectralField& f) {
    const Grid& g = f.grid();
    PhysicalField out(g, f.components());
    fftw_plan plan = detail::PlanCache::instance().get(g.dim(), g.n(), FFTW_BACKWARD);
    std::vector<std::complex<double>> in(g.size()), buf(g.size());
    for (int c = 0; c < f.components(); ++c) {
        auto coeff = f.component(c);
        std::copy(coeff.begin(), coeff.end(), in.begin());
        detail::execute(plan, in.data(), buf.data());
        auto dst = out.component(c);
        for (std::size_t i = 0; i < buf.size(); ++i) dst[i] = buf[i].real();
    }
    return out;
}

} // namespace lerayflux
