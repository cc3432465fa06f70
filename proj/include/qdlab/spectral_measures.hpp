#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "fit.hpp"
#include "parallel.hpp"

namespace qdl {

struct Atom {
    double x;
    double w;
};

// Weighted point masses, positions ascending.
class SpectralMeasureApprox {
public:
    SpectralMeasureApprox() = default;
    explicit SpectralMeasureApprox(std::vector<Atom> atoms, bool merge_equal = true) : atoms_(std::move(atoms)) {
        for (const auto& a : atoms_)
            if (!(a.w >= 0) || !std::isfinite(a.x)) throw DomainError("atom weights must be >= 0, positions finite");
        std::stable_sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
        if (merge_equal && !atoms_.empty()) {
            std::vector<Atom> m{atoms_[0]};
            for (std::size_t i = 1; i < atoms_.size(); ++i) {
                if (atoms_[i].x == m.back().x)
                    m.back().w += atoms_[i].w;
                else
                    m.push_back(atoms_[i]);
            }
            atoms_ = std::move(m);
        }
        std::vector<double> w(atoms_.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = atoms_[i].w;
        total_mass_ = pairwise_sum(w);
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double total_mass() const { return total_mass_; }

private:
    std::vector<Atom> atoms_;
    double total_mass_ = 0;
};

// mu^(t) = sum_k w_k exp(-i t x_k); the pairwise tree matches total_mass, so t = 0 is exact.
inline std::complex<double> fs_transform(const SpectralMeasureApprox& m, double t) {
    const auto& a = m.atoms();
    std::vector<std::complex<double>> terms(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        double ph = t * a[k].x;
        terms[k] = {a[k].w * std::cos(ph), -a[k].w * std::sin(ph)};
    }
    return pairwise_sum(terms);
}

// Product measure of m1 and a copy of m2 scaled by theta: atoms x_i + theta y_j, weights w_i u_j.
inline SpectralMeasureApprox convolve(const SpectralMeasureApprox& m1, const SpectralMeasureApprox& m2, double theta,
                                      std::size_t atom_cap = 1000000) {
    std::size_t n = m1.size() * m2.size();
    if (n > atom_cap) throw SizeError("product measure has " + std::to_string(n) + " atoms, cap " + std::to_string(atom_cap));
    std::vector<Atom> out;
    out.reserve(n);
    for (const auto& a : m1.atoms())
        for (const auto& b : m2.atoms()) out.push_back({a.x + theta * b.x, a.w * b.w});
    return SpectralMeasureApprox(std::move(out));
}

// Gamma(u) truncated to `depth` factors cos(2 pi u / 3^j); arguments reduced mod 1 before the cosine.
inline double cantor_fs(double u, int depth) {
    if (depth < 1) throw DomainError("depth must be >= 1");
    double p = 1.0, d = 1.0;
    for (int j = 1; j <= depth; ++j) {
        d *= 3.0;
        double x = u / d;
        double r = x - std::nearbyint(x);
        p *= std::cos(2.0 * pi * r);
    }
    return p;
}

// 2^depth atoms at sum_j ±2 pi 3^-j, each of weight 2^-depth; its transform is cantor_fs(., depth).
inline SpectralMeasureApprox cantor_measure(int depth) {
    if (depth < 1 || depth > 24) throw DomainError("cantor depth must be in [1, 24]");
    std::vector<double> pos{0.0};
    double step = 2.0 * pi;
    for (int j = 1; j <= depth; ++j) {
        step /= 3.0;
        std::vector<double> next;
        next.reserve(pos.size() * 2);
        for (double p : pos) next.push_back(p - step);
        for (double p : pos) next.push_back(p + step);
        pos.swap(next);
    }
    double w = std::ldexp(1.0, -depth);
    std::vector<Atom> atoms(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) atoms[i] = {pos[i], w};
    return SpectralMeasureApprox(std::move(atoms));
}

// n equal atoms at the midpoints of a uniform partition of [a, b], total mass 1.
inline SpectralMeasureApprox uniform_density_measure(double a, double b, std::size_t n) {
    std::vector<Atom> atoms(n);
    double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) atoms[i] = {a + (static_cast<double>(i) + 0.5) * h, 1.0 / static_cast<double>(n)};
    return SpectralMeasureApprox(std::move(atoms));
}

struct CesaroReport {
    std::vector<double> T;
    std::vector<double> value;  // <|mu^|^2>_T
    double alpha_hat = 0;       // minus the fitted log-log slope
    double fit_rms = 0;
};

// T0 * 2^(k / per_octave), k = 0 .. octaves*per_octave; exact doublings so cesaro_decay can chain them.
inline std::vector<double> cesaro_grid(double T0, int octaves, int per_octave) {
    if (!(T0 > 0) || octaves < 1 || per_octave < 1) throw DomainError("bad cesaro grid parameters");
    std::vector<double> g;
    for (int k = 0; k <= octaves * per_octave; ++k) {
        int r = k % per_octave, m = k / per_octave;
        g.push_back(std::ldexp(T0 * std::exp2(static_cast<double>(r) / per_octave), m));
    }
    return g;
}

namespace detail {

struct Chain {
    double base;
    std::vector<std::size_t> slots;  // grid indices of base * 2^m, m = 0, 1, ...
};

inline std::vector<Chain> doubling_chains(const std::vector<double>& T) {
    std::vector<bool> used(T.size(), false);
    std::vector<Chain> chains;
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (used[i]) continue;
        Chain c{T[i], {i}};
        used[i] = true;
        double cur = T[i];
        for (;;) {
            double nxt = 2.0 * cur;
            auto it = std::find(T.begin(), T.end(), nxt);
            if (it == T.end()) break;
            auto j = static_cast<std::size_t>(it - T.begin());
            if (used[j]) break;
            used[j] = true;
            c.slots.push_back(j);
            cur = nxt;
        }
        chains.push_back(std::move(c));
    }
    return chains;
}

}  // namespace detail

// Closed-form time average per atom pair:
//   (1/T) int_0^T |mu^|^2 dt = sum_j w_j^2 + 2 sum_{j<k} w_j w_k sin(T D_jk) / (T D_jk).
// Grid points related by exact doubling share one sin/cos evaluation per pair (double-angle recurrence).
inline std::vector<double> cesaro_values(const SpectralMeasureApprox& m, const std::vector<double>& T,
                                         unsigned workers = 0) {
    for (double t : T)
        if (!(t > 0)) throw DomainError("cesaro times must be positive");
    const auto& a = m.atoms();
    const std::size_t n = a.size(), g = T.size();
    auto chains = detail::doubling_chains(T);
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, workers, [&](std::size_t j) {
        std::vector<double> acc(g, 0.0);
        const double wj = a[j].w;
        for (std::size_t k = j + 1; k < n; ++k) {
            const double ww = 2.0 * wj * a[k].w;
            const double d = a[k].x - a[j].x;
            if (d == 0) {
                for (std::size_t s = 0; s < g; ++s) acc[s] += ww;
                continue;
            }
            for (const auto& c : chains) {
                double th = c.base * d;
                double s = std::sin(th), co = std::cos(th);
                double inv = ww / th;
                for (std::size_t q = 0; q < c.slots.size(); ++q) {
                    acc[c.slots[q]] += s * inv;
                    double s2 = 2.0 * s * co;
                    co = (co - s) * (co + s);
                    s = s2;
                    inv *= 0.5;
                }
            }
        }
        for (std::size_t s = 0; s < g; ++s) acc[s] += wj * wj;
        rows[j] = std::move(acc);
    });
    std::vector<double> out(g), col(n);
    for (std::size_t s = 0; s < g; ++s) {
        for (std::size_t j = 0; j < n; ++j) col[j] = rows[j][s];
        out[s] = pairwise_sum(col);
    }
    return out;
}

inline CesaroReport cesaro_decay(const SpectralMeasureApprox& m, std::vector<double> T, unsigned workers = 0) {
    std::sort(T.begin(), T.end());
    if (T.size() < 3 || decades(T) < 2.0 - 1e-9) throw FitError("cesaro T grid must have >= 3 points spanning >= 2 decades");
    CesaroReport r;
    r.T = T;
    r.value = cesaro_values(m, T, workers);
    auto f = fit_loglog(r.T, r.value);
    r.alpha_hat = -f.slope;
    r.fit_rms = f.residual_rms;
    return r;
}

struct HolderScale {
    double scale;
    double constant;  // max over windows of mass(I) / |I|^alpha
};

struct HolderReport {
    double alpha = 0;
    double constant = 0;    // max over all scanned scales
    double grid_scale = 0;  // smallest scanned scale
    std::vector<HolderScale> per_scale;
    double growth_exponent = 0;  // slope of log constant against log(1/scale)
    bool bounded = true;         // growth_exponent < alpha / 2
};

inline HolderReport holder_constant(const SpectralMeasureApprox& m, double alpha, std::vector<double> scales) {
    if (!(alpha >= 0 && alpha <= 1)) throw DomainError("alpha must lie in [0, 1]");
    if (scales.empty()) throw DomainError("no scales given");
    for (double h : scales)
        if (!(h > 0 && h < 1)) throw DomainError("scales must lie in (0, 1)");
    std::sort(scales.begin(), scales.end());
    const auto& a = m.atoms();
    std::vector<double> prefix(a.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) prefix[i + 1] = prefix[i] + a[i].w;
    HolderReport r;
    r.alpha = alpha;
    r.grid_scale = scales.front();
    for (double h : scales) {
        double best = 0;
        std::size_t hi = 0;
        for (std::size_t lo = 0; lo < a.size(); ++lo) {
            if (hi < lo) hi = lo;
            while (hi < a.size() && a[hi].x <= a[lo].x + h) ++hi;
            best = std::max(best, prefix[hi] - prefix[lo]);
        }
        double c = best / std::pow(h, alpha);
        r.per_scale.push_back({h, c});
        r.constant = std::max(r.constant, c);
    }
    if (scales.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& s : r.per_scale)
            if (s.constant > 0) {
                x.push_back(-std::log(s.scale));
                y.push_back(std::log(s.constant));
            }
        if (x.size() >= 2) r.growth_exponent = fit_line(x, y).slope;
    }
    r.bounded = r.growth_exponent < alpha / 2.0 || alpha == 0;
    return r;
}

struct RajchmanReport {
    std::vector<double> window_start;
    std::vector<double> window_sup;
    double tail_slope = 0;  // log-log slope of window sups
    bool decaying = false;
    std::string note = "finite-scale heuristic: verdict refers only to the tested t range";
};

// Sup of |mu^| over log-equal windows of the t grid; "decaying" when the sups fall by more than half
// and the log-log slope is below -0.1.
inline RajchmanReport rajchman_test(const SpectralMeasureApprox& m, const std::vector<double>& t, int windows = 6) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw DomainError("t grid must be increasing");
    if (t.size() < 2 || !(t.front() > 0)) throw DomainError("t grid must be positive with >= 2 points");
    RajchmanReport r;
    double l0 = std::log(t.front()), l1 = std::log(t.back());
    double step = (l1 - l0) / windows;
    std::vector<double> centers;
    for (int w = 0; w < windows; ++w) {
        double lo = l0 + w * step, hi = (w + 1 == windows) ? l1 + 1e-12 : l0 + (w + 1) * step;
        double sup = -1;
        for (double tt : t) {
            double lt = std::log(tt);
            if (lt >= lo && lt < hi) sup = std::max(sup, std::abs(fs_transform(m, tt)));
        }
        if (sup < 0) continue;
        r.window_start.push_back(std::exp(lo));
        r.window_sup.push_back(sup);
        centers.push_back(std::exp(0.5 * (lo + hi)));
    }
    if (r.window_sup.size() >= 2) {
        std::vector<double> ys;
        for (double s : r.window_sup) ys.push_back(std::max(s, 1e-300));
        r.tail_slope = fit_loglog(centers, ys).slope;
        r.decaying = r.window_sup.back() < 0.5 * r.window_sup.front() && r.tail_slope < -0.1;
    }
    return r;
}

struct PlancherelReport {
    std::vector<double> T;
    std::vector<double> integral;  // sum |mu^(t)|^2 dt over [0, T]
    bool absolutely_continuous = false;
};

// Riemann sums of |mu^|^2 on [0, T] with spacing dt, T doubling; bounded growth reads as a.c.
inline PlancherelReport plancherel_check(const SpectralMeasureApprox& m, double T0, int doublings, double dt) {
    if (!(T0 > 0) || !(dt > 0) || doublings < 1) throw DomainError("bad Plancherel grid");
    PlancherelReport r;
    double acc = 0, t = 0;
    double T = T0;
    for (int k = 0; k <= doublings; ++k, T *= 2) {
        while (t < T) {
            acc += std::norm(fs_transform(m, t + 0.5 * dt)) * dt;
            t += dt;
        }
        r.T.push_back(T);
        r.integral.push_back(acc);
    }
    std::size_t n = r.integral.size();
    r.absolutely_continuous = r.integral[n - 1] < 1.25 * r.integral[n - 2];
    return r;
}

inline void write_measure_csv(std::ostream& os, const SpectralMeasureApprox& m) {
    os << "position,weight\n";
    os.precision(17);
    for (const auto& a : m.atoms()) os << a.x << "," << a.w << "\n";
}

inline SpectralMeasureApprox read_measure_csv(std::istream& is) {
    std::string line;
    std::vector<Atom> atoms;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.find_first_of("0123456789") == std::string::npos || line.find("position") != std::string::npos)
                continue;
        }
        auto c = line.find(',');
        if (c == std::string::npos) throw ConfigError("measure CSV line without comma: " + line);
        atoms.push_back({std::stod(line.substr(0, c)), std::stod(line.substr(c + 1))});
    }
    return SpectralMeasureApprox(std::move(atoms));
}

}  // namespace qdl
