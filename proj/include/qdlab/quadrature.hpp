#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"

namespace qdl {

namespace detail {
// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr double gk_x[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_wk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double gk_wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(F& f, double a, double b, double& kron, double& err) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double k = fc * gk_wk[7], g = fc * gk_wg[3];
    for (int i = 0; i < 7; ++i) {
        double x = h * gk_x[i];
        double s = f(c - x) + f(c + x);
        k += gk_wk[i] * s;
        if (i % 2 == 1) g += gk_wg[i / 2] * s;
    }
    kron = k * h;
    err = std::abs((k - g) * h);
}

template <class F>
double gk_adapt(F& f, double a, double b, double tol, int depth, int& evals_left, bool& ok) {
    double k, e;
    gk15(f, a, b, k, e);
    evals_left -= 15;
    if (e <= tol || depth <= 0 || evals_left <= 0) {
        if (e > tol) ok = false;
        return k;
    }
    double m = 0.5 * (a + b);
    return gk_adapt(f, a, m, 0.5 * tol, depth - 1, evals_left, ok) +
           gk_adapt(f, m, b, 0.5 * tol, depth - 1, evals_left, ok);
}
}  // namespace detail

struct QuadResult {
    double value = 0;
    bool converged = true;
};

// Adaptive Gauss-Kronrod over [a, b], starting from `panels` equal panels; total absolute tolerance tol.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol, std::size_t panels = 1, int max_depth = 40,
                     int max_evals = 50000000) {
    if (panels < 1) panels = 1;
    QuadResult r;
    double h = (b - a) / static_cast<double>(panels);
    double ptol = tol / static_cast<double>(panels);
    std::vector<double> parts(panels);
    int left = max_evals;
    for (std::size_t p = 0; p < panels; ++p) {
        double lo = a + h * static_cast<double>(p);
        double hi = (p + 1 == panels) ? b : lo + h;
        parts[p] = detail::gk_adapt(f, lo, hi, ptol, max_depth, left, r.converged);
    }
    double s = 0;
    for (double v : parts) s += v;
    r.value = s;
    return r;
}

}  // namespace qdl
