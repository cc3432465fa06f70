#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "disorder.hpp"
#include "fit.hpp"

namespace qdl {

struct ProfileEntry {
    std::vector<int> offset;  // lattice offset k != 0
    double eps;               // epsilon(k) >= 0
};

struct EmchRadinSpec {
    int d = 1;
    std::vector<ProfileEntry> profile;
    std::optional<DistributionSpec> disorder;  // nullopt: nonrandom couplings J = 1
    double gamma = 1.0;
    double beta_coupling = 1.0;

    int z() const { return 2 * d; }

    // epsilon(k) = beta on the 2d unit offsets.
    static EmchRadinSpec nearest_neighbor(int d, double beta, std::optional<DistributionSpec> law, double gamma = 1.0) {
        EmchRadinSpec s;
        s.d = d;
        s.disorder = std::move(law);
        s.gamma = gamma;
        s.beta_coupling = beta;
        for (int a = 0; a < d; ++a)
            for (int sg : {-1, 1}) {
                std::vector<int> k(d, 0);
                k[a] = sg;
                s.profile.push_back({k, beta});
            }
        return s;
    }
};

struct DeltaCoefficient {
    double delta = 0;
    bool degenerate = false;  // delta == 0
};

// tr(sigma^x e^{-gamma sigma^x}) / tr(e^{-gamma sigma^x}); sigma^x = +1 carries weight e^{-gamma}.
inline DeltaCoefficient delta_coefficient(double gamma) {
    if (std::isnan(gamma)) throw DomainError("gamma is NaN");
    DeltaCoefficient r;
    r.delta = -std::tanh(gamma);
    r.degenerate = r.delta == 0.0;
    return r;
}

// chi(a) = Av cos(a J).
inline double cosine_moment(const std::optional<DistributionSpec>& law, double a) {
    if (!law) return std::cos(a);
    const auto& d = *law;
    switch (d.kind) {
        case Law::bernoulli: return std::cos(a * d.scale);
        case Law::uniform: {
            double x = a * d.scale;
            return x == 0 ? 1.0 : std::sin(x) / x;
        }
        case Law::gaussian: {
            double x = a * d.scale;
            return std::exp(-0.25 * x * x);
        }
        case Law::tabulated: {
            if (d.atoms.empty()) throw UnsupportedError("tabulated law without atoms");
            double s = 0;
            for (auto [v, p] : d.atoms) s += p * std::cos(a * v * d.scale);
            return s;
        }
    }
    throw ConfigError("unknown distribution kind");
}

inline double profile_l1(const EmchRadinSpec& s) {
    double a = 0;
    for (const auto& p : s.profile) a += std::abs(p.eps);
    return a;
}

// g(t) = prod_k chi(2 eps(k) t).
inline double exact_decay(const EmchRadinSpec& s, double t) {
    for (const auto& p : s.profile) {
        if (p.eps < 0 || !std::isfinite(p.eps)) throw DomainError("profile values must be finite and >= 0");
        bool zero = std::all_of(p.offset.begin(), p.offset.end(), [](int x) { return x == 0; });
        if (zero && p.eps != 0) throw DomainError("eps(0) must vanish");
    }
    if (!std::isfinite(profile_l1(s))) throw DomainError("non-integrable profile");
    double g = 1;
    for (const auto& p : s.profile) g *= cosine_moment(s.disorder, 2.0 * p.eps * t);
    return g;
}

// Closed forms in the printed normalization, for side-by-side reporting.
struct PrintedForms {
    double bernoulli;         // cos(2 beta t)^z
    double uniform_printed;   // (sin(2 beta t) / (2 t))^z
    double uniform_derived;   // (sin(2 beta t) / (2 beta t))^z
    double gaussian_printed;  // exp(-2 z t^2)
    double gaussian_derived;  // exp(-z beta^2 t^2)
};

inline PrintedForms printed_forms(int z, double beta, double t) {
    PrintedForms f{};
    double x = 2.0 * beta * t;
    f.bernoulli = std::pow(std::cos(x), z);
    f.uniform_printed = t == 0 ? std::pow(beta, z) : std::pow(std::sin(x) / (2.0 * t), z);
    f.uniform_derived = x == 0 ? 1.0 : std::pow(std::sin(x) / x, z);
    f.gaussian_printed = std::exp(-2.0 * z * t * t);
    f.gaussian_derived = std::exp(-z * beta * beta * t * t);
    return f;
}

struct StabilityFlags {
    std::string profile_class;  // "l1", "l2" or "none"
    bool couplings_bounded = true;
    bool stable_second_kind = false;  // l1 profile with bounded couplings
};

inline StabilityFlags stability_flags(const EmchRadinSpec& s) {
    StabilityFlags f;
    double l1 = 0, l2 = 0;
    for (const auto& p : s.profile) {
        l1 += std::abs(p.eps);
        l2 += p.eps * p.eps;
    }
    f.profile_class = std::isfinite(l1) ? "l1" : (std::isfinite(l2) ? "l2" : "none");
    f.couplings_bounded = !s.disorder || std::isfinite(s.disorder->sup_abs());
    f.stable_second_kind = f.profile_class == "l1" && f.couplings_bounded;
    return f;
}

struct DecayCurve {
    std::vector<double> times;
    std::vector<double> g;
    std::vector<double> std_error;  // zero for exact curves
    double delta = 0;
    StabilityFlags stability;
};

inline DecayCurve exact_curve(const EmchRadinSpec& s, const std::vector<double>& t) {
    DecayCurve c;
    c.times = t;
    c.delta = delta_coefficient(s.gamma).delta;
    c.stability = stability_flags(s);
    for (double x : t) c.g.push_back(exact_decay(s, x));
    c.std_error.assign(t.size(), 0.0);
    return c;
}

// Monte Carlo mean of prod_k cos(2 eps(k) J_k t) with fresh couplings per realization.
inline DecayCurve mc_decay(const EmchRadinSpec& s, const std::vector<double>& t, std::size_t n_samples,
                           std::uint64_t seed, unsigned workers = 0) {
    if (n_samples < 1000) throw DomainError("n_samples must be >= 1000");
    auto est = average_vector(
        [&](RealizationSeed rs) {
            Stream st(rs);
            std::vector<double> J(s.profile.size(), 1.0);
            if (s.disorder)
                for (auto& j : J) j = sample(*s.disorder, st);
            std::vector<double> v(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) {
                double p = 1;
                for (std::size_t k = 0; k < J.size(); ++k) p *= std::cos(2.0 * s.profile[k].eps * J[k] * t[i]);
                v[i] = p;
            }
            return v;
        },
        n_samples, seed, workers);
    DecayCurve c;
    c.times = t;
    c.delta = delta_coefficient(s.gamma).delta;
    c.stability = stability_flags(s);
    for (const auto& e : est) {
        c.g.push_back(e.mean);
        c.std_error.push_back(e.std_error);
    }
    return c;
}

enum class EnvelopeVerdict { no_decay_almost_periodic, power_law, gaussian_like, inconclusive };

inline std::string to_string(EnvelopeVerdict v) {
    switch (v) {
        case EnvelopeVerdict::no_decay_almost_periodic: return "no_decay_almost_periodic";
        case EnvelopeVerdict::power_law: return "power_law";
        case EnvelopeVerdict::gaussian_like: return "gaussian_like";
        case EnvelopeVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct EnvelopeReport {
    EnvelopeVerdict verdict = EnvelopeVerdict::inconclusive;
    double recurrence = 0;          // min of the window sups
    double limsup = 0;              // sup |g| over the last window
    double power_exponent = 0;      // slope of log envelope vs log t over the last four windows
    double power_residual = 0;
    double gaussian_rate = 0;       // -slope of log envelope vs t^2
    double gaussian_residual = 0;
    std::vector<double> window_start;
    std::vector<double> window_sup;
};

// Tail envelope sup_{s >= t} |g(s)| on the curve's own time grid (times ascending).
inline std::vector<double> upper_envelope(const DecayCurve& c) {
    std::vector<double> e(c.g.size());
    double m = 0;
    for (std::size_t i = c.g.size(); i-- > 0;) e[i] = m = std::max(m, std::abs(c.g[i]));
    return e;
}

// Envelope from sup |g| on the dyadic windows [t_max/2^(k+1), t_max/2^k], k < windows, of the positive times.
inline EnvelopeReport decay_envelope_classify(const DecayCurve& c, int windows = 5) {
    std::vector<double> t, a;
    for (std::size_t i = 0; i < c.times.size(); ++i)
        if (c.times[i] > 0) {
            t.push_back(c.times[i]);
            a.push_back(std::abs(c.g[i]));
        }
    if (t.size() < 4 || std::log10(*std::max_element(t.begin(), t.end()) / *std::min_element(t.begin(), t.end())) <
                            2.0 - 1e-9)
        throw FitError("decay curve must span >= 2 decades of positive t");
    const double tmin = *std::min_element(t.begin(), t.end()), tmax = *std::max_element(t.begin(), t.end());
    EnvelopeReport r;
    for (int k = windows - 1; k >= 0; --k) {
        double hi = std::ldexp(tmax, -k), lo = hi / 2;
        if (lo < tmin) continue;
        double sup = -1;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= lo && t[i] <= hi) sup = std::max(sup, a[i]);
        if (sup < 0) continue;
        r.window_start.push_back(lo);
        r.window_sup.push_back(sup);
    }
    if (r.window_sup.size() < 3) throw FitError("fewer than three populated windows");
    r.recurrence = *std::min_element(r.window_sup.begin(), r.window_sup.end());
    r.limsup = r.window_sup.back();
    if (r.recurrence > 0.99) {
        r.verdict = EnvelopeVerdict::no_decay_almost_periodic;
        return r;
    }
    std::vector<std::size_t> valid;
    for (std::size_t w = 0; w < r.window_sup.size(); ++w)
        if (r.window_sup[w] > 1e-250) valid.push_back(w);
    std::vector<double> lx, ly, qx, qy;
    for (std::size_t k = 0; k < valid.size(); ++k) {
        double s = r.window_sup[valid[k]], T = r.window_start[valid[k]];
        if (s < 0.999) {
            qx.push_back(T * T);
            qy.push_back(std::log(s));
        }
        if (k + 4 >= valid.size()) {
            lx.push_back(std::log(T));
            ly.push_back(std::log(s));
        }
    }
    double rp = 1e300, rg = 1e300;
    if (lx.size() >= 3) {
        auto f = fit_line(lx, ly);
        r.power_exponent = f.slope;
        r.power_residual = rp = f.residual_rms;
        if (!(f.slope < -0.1)) rp = 1e300;
    }
    if (qx.size() >= 3) {
        auto f = fit_line(qx, qy);
        r.gaussian_rate = -f.slope;
        r.gaussian_residual = rg = f.residual_rms;
        if (!(f.slope < 0)) rg = 1e300;
    }
    const double good = 0.25;
    if (rg < rp && rg < good)
        r.verdict = EnvelopeVerdict::gaussian_like;
    else if (rp <= rg && rp < good)
        r.verdict = EnvelopeVerdict::power_law;
    else
        r.verdict = EnvelopeVerdict::inconclusive;
    return r;
}

// eps(|n|) = 2^{-|n|-1} in d = 1, truncated where every dropped factor is within tail_tol of 1 on [0, t_max].
inline EmchRadinSpec geometric_profile_spec(double t_max, double tail_tol = 1e-12) {
    EmchRadinSpec s;
    s.d = 1;
    s.disorder = std::nullopt;
    for (int n = 1; n < 1000; ++n) {
        double eps = std::ldexp(1.0, -n - 1);
        double x = 2.0 * eps * t_max;
        if (0.5 * x * x < tail_tol && n > 4) break;
        s.profile.push_back({{n}, eps});
        s.profile.push_back({{-n}, eps});
    }
    return s;
}

inline DecayCurve nonrandom_profile_decay(const std::vector<double>& t, double gamma = 1.0) {
    double tmax = 0;
    for (double x : t) tmax = std::max(tmax, std::abs(x));
    auto s = geometric_profile_spec(std::max(tmax, 1.0));
    s.gamma = gamma;
    return exact_curve(s, t);
}

// ----- finite volume -----

// Coupling on the bond (i0, i0 + offset), a pure function of (seed, offset).
inline double bond_coupling(const EmchRadinSpec& s, const std::vector<int>& offset, std::uint64_t seed) {
    if (!s.disorder) return 1.0;
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (int x : offset) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(x)));
    Stream st(seed, {h});
    return sample(*s.disorder, st);
}

// Box {0..n-1}^d with i0 at the center; returns delta * prod_{k in V, k != i0} cos(2 eps(k - i0) J t).
inline double finite_volume_magnetization(const EmchRadinSpec& s, int n, double t, std::uint64_t seed,
                                          std::optional<std::vector<int>> i0 = std::nullopt) {
    if (n < 1) throw DomainError("volume side must be >= 1");
    std::vector<int> c = i0 ? *i0 : std::vector<int>(s.d, n / 2);
    for (int x : c)
        if (x < 0 || x >= n) throw DomainError("site outside V");
    double delta = delta_coefficient(s.gamma).delta;
    double p = 1;
    for (const auto& e : s.profile) {
        bool inside = true;
        for (int a = 0; a < s.d; ++a) {
            int y = c[a] + e.offset[a];
            if (y < 0 || y >= n) inside = false;
        }
        if (!inside) continue;
        p *= std::cos(2.0 * e.eps * bond_coupling(s, e.offset, seed) * t);
    }
    return delta * p;
}

// Dense check in d = 1: H = sum_{j<k} eps(k - j) J_jk sigma^z_j sigma^z_k on n sites, J_{i0,k} from
// bond_coupling and the remaining couplings from `others`; rho = prod_j e^{-gamma sigma^x_j} / tr;
// returns tr(rho U^dagger sigma^x_{i0} U) with U = e^{-itH}.
inline double dense_magnetization_1d(const EmchRadinSpec& s, int n, int i0, double t, std::uint64_t seed) {
    if (s.d != 1) throw DomainError("dense oracle is one-dimensional");
    if (n > 12) throw SizeError("dense oracle limited to 12 sites");
    const std::size_t dim = std::size_t{1} << n;
    auto eps_of = [&](int off) {
        for (const auto& e : s.profile)
            if (e.offset[0] == off) return e.eps;
        return 0.0;
    };
    Stream other(seed ^ 0xa5a5a5a5a5a5a5a5ULL, {static_cast<std::uint64_t>(n)});
    std::vector<double> J(static_cast<std::size_t>(n * n), 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
            double v;
            if (j == i0)
                v = bond_coupling(s, {k - i0}, seed);
            else if (k == i0)
                v = bond_coupling(s, {j - i0}, seed);
            else
                v = s.disorder ? sample(*s.disorder, other) : 1.0;
            J[j * n + k] = v;
        }
    Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
    for (std::size_t st = 0; st < dim; ++st)
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                double e = eps_of(k - j);
                if (e == 0) continue;
                int sj = (st >> j) & 1u ? -1 : 1, sk = (st >> k) & 1u ? -1 : 1;
                h(st) += e * J[j * n + k] * sj * sk;
            }
    Eigen::Matrix2d sx;
    sx << 0, 1, 1, 0;
    Eigen::Matrix2d r1 = std::cosh(s.gamma) * Eigen::Matrix2d::Identity() - std::sinh(s.gamma) * sx;
    r1 /= 2.0 * std::cosh(s.gamma);
    Eigen::MatrixXd rho = Eigen::MatrixXd::Ones(1, 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(1, 1);
    // Each new factor is the outer (high) index, so site j lands on bit j.
    for (int j = 0; j < n; ++j) {
        Eigen::MatrixXd R(rho.rows() * 2, rho.cols() * 2), Y(X.rows() * 2, X.cols() * 2);
        Eigen::Matrix2d g = (j == i0) ? sx : Eigen::Matrix2d::Identity();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                R.block(a * rho.rows(), b * rho.cols(), rho.rows(), rho.cols()) = r1(a, b) * rho;
                Y.block(a * X.rows(), b * X.cols(), X.rows(), X.cols()) = g(a, b) * X;
            }
        rho.swap(R);
        X.swap(Y);
    }
    // Tr(rho U^* X U) with U = diag(u): sum_ab rho_ba conj(u_a) X_ab u_b.
    Eigen::VectorXcd u(dim);
    for (std::size_t st = 0; st < dim; ++st) u(st) = std::polar(1.0, -h(st) * t);
    std::complex<double> tr = 0;
    for (std::size_t b = 0; b < dim; ++b) {
        std::complex<double> col = 0;
        for (std::size_t a = 0; a < dim; ++a) col += rho(b, a) * std::conj(u(a)) * X(a, b);
        tr += col * u(b);
    }
    return tr.real();
}

}  // namespace qdl
