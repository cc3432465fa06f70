#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "common.hpp"

namespace qdl {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double residual_rms = 0;
};

// Ordinary least squares y = a + b x.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw FitError("line fit needs >= 2 paired points");
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0)) throw FitError("degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - f.intercept - f.slope * x[i];
        r += e * e;
    }
    f.residual_rms = std::sqrt(r / n);
    return f;
}

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    return fit_line(std::span<const double>(x), std::span<const double>(y));
}

// Slope of log y against log x; all values must be positive.
inline LineFit fit_loglog(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw FitError("log-log fit needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    return fit_loglog(std::span<const double>(x), std::span<const double>(y));
}

inline double decades(std::span<const double> t) {
    if (t.empty() || !(t.front() > 0)) return 0;
    return std::log10(t.back() / t.front());
}

}  // namespace qdl
