#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lerayflux {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

/// Ordinary least squares y = a + b x with the standard error of the slope.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t m = x.size();
    if (m != y.size() || m < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < m; ++i) { sx += x[i]; sy += y[i]; }
    const double xbar = sx / m, ybar = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = ybar - f.slope * xbar;
    if (m > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            ss += r * r;
        }
        f.slope_stderr = std::sqrt(ss / (static_cast<double>(m) - 2.0) / sxx);
    }
    return f;
}

/// Least squares of log|y| against log x, restricted to a window in x
/// (inclusive; pass 0/inf for no bound). Entries with y == 0 are skipped.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                          double x_lo = 0.0, double x_hi = 0.0) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] == 0.0) continue;
        if (x_lo > 0.0 && x[i] < x_lo) continue;
        if (x_hi > 0.0 && x[i] > x_hi) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(std::abs(y[i])));
    }
    if (lx.size() < 2) throw std::invalid_argument("fit_loglog: fewer than 2 usable points");
    return fit_line(lx, ly);
}

} // namespace lerayflux
