#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>
#include <vector>

#include "common.hpp"
#include "fit.hpp"
#include "lattice_operators.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace qdl {

using cplx = std::complex<double>;

// Normalized complex amplitudes over the sites of an operator.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(Eigen::VectorXcd amp, bool normalize = false) : amp_(std::move(amp)) {
        double n = amp_.norm();
        if (!(n > 0)) throw DomainError("zero state vector");
        if (normalize)
            amp_ /= n;
        else if (std::abs(n - 1.0) > 1e-10)
            throw DomainError("state vector is not normalized");
    }
    static StateVector delta(std::size_t dim, std::size_t site) {
        if (site >= dim) throw DomainError("site outside the state space");
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
        v(site) = 1.0;
        return StateVector(v);
    }
    const Eigen::VectorXcd& amplitudes() const { return amp_; }
    std::size_t size() const { return static_cast<std::size_t>(amp_.size()); }
    double norm() const { return amp_.norm(); }

private:
    Eigen::VectorXcd amp_;
};

// Spectral decomposition H = V diag(E) V^dagger; Scalar is double (real symmetric) or cplx (Hermitian).
template <class Scalar>
struct Eigensystem {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::VectorXd E;
    Matrix V;

    Eigensystem() = default;
    explicit Eigensystem(const Matrix& H) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(H);
        if (es.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
        E = es.eigenvalues();
        V = es.eigenvectors();
    }
    std::size_t dimension() const { return static_cast<std::size_t>(E.size()); }

    // Coefficients c = V^dagger psi.
    Eigen::VectorXcd coefficients(const StateVector& psi) const {
        if (psi.size() != dimension()) throw DomainError("dimension mismatch between operator and state");
        return V.adjoint().template cast<cplx>() * psi.amplitudes();
    }
    // Column k of V evaluated at site x.
    cplx vec(std::size_t x, std::size_t k) const { return cplx(V(x, k)); }
};

using RealEigensystem = Eigensystem<double>;
using ComplexEigensystem = Eigensystem<cplx>;

inline RealEigensystem eigensystem(const OperatorMatrix& op) {
    RealEigensystem es;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> s;
    if (op.is_tridiagonal()) {
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(op.diagonal().data(), op.dimension());
        auto sd = op.subdiagonal();
        Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(sd.data(), sd.size());
        s.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    } else {
        s.compute(op.to_dense());
    }
    if (s.info() != Eigen::Success) throw ConvergenceError("eigensolver failed");
    es.E = s.eigenvalues();
    es.V = s.eigenvectors();
    return es;
}

// e^{-itH} psi0.
template <class S>
StateVector evolve(const Eigensystem<S>& es, const StateVector& psi0, double t) {
    if (t == 0.0) return psi0;
    Eigen::VectorXcd c = es.coefficients(psi0);
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -es.E(k) * t);
    Eigen::VectorXcd out = es.V.template cast<cplx>() * c;
    return StateVector(out, true);
}

inline StateVector evolve(const OperatorMatrix& op, const StateVector& psi0, double t) {
    if (psi0.size() != op.dimension()) throw DomainError("dimension mismatch between operator and state");
    return evolve(eigensystem(op), psi0, t);
}

// |psi_t(x)|^2 for all x, reusing precomputed coefficients.
template <class S>
Eigen::VectorXd probabilities_at(const Eigensystem<S>& es, const Eigen::VectorXcd& c, double t) {
    Eigen::VectorXcd ph(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) ph(k) = c(k) * std::polar(1.0, -es.E(k) * t);
    Eigen::VectorXcd a = es.V.template cast<cplx>() * ph;
    return a.cwiseAbs2();
}

// ----- sojourn time -----

struct SojournResult {
    double T_max = 0;
    double value = 0;       // J over [-T_max, T_max]
    double half_value = 0;  // J over [-T_max/2, T_max/2]
    double growth_ratio = 0;
    bool linear_growth = false;  // J(T)/J(T/2) > 1.5
};

namespace detail {
// sum over sites x in S of sum_{kl} conj(b_k) b_l 2 sin((E_k - E_l) T) / (E_k - E_l), b_k = c_k v_k(x).
template <class S>
double sojourn_closed_form(const Eigensystem<S>& es, const Eigen::VectorXcd& c, const std::vector<std::size_t>& sites,
                           double T) {
    const std::size_t n = es.dimension();
    std::vector<double> per_site(sites.size());
    for (std::size_t q = 0; q < sites.size(); ++q) {
        std::vector<cplx> b(n);
        for (std::size_t k = 0; k < n; ++k) b[k] = c(k) * es.vec(sites[q], k);
        std::vector<double> rows(n);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = std::norm(b[k]) * 2.0 * T;
            for (std::size_t l = k + 1; l < n; ++l) {
                double d = es.E(k) - es.E(l);
                double ker = d == 0.0 ? 2.0 * T : 2.0 * std::sin(d * T) / d;
                acc += 2.0 * std::real(std::conj(b[k]) * b[l]) * ker;
            }
            rows[k] = acc;
        }
        per_site[q] = pairwise_sum(rows);
    }
    return pairwise_sum(per_site);
}
}  // namespace detail

template <class S>
SojournResult sojourn_time(const Eigensystem<S>& es, const StateVector& psi, const std::vector<std::size_t>& region,
                           double T_max) {
    if (region.empty()) throw DomainError("empty region S");
    if (!(T_max > 0)) throw DomainError("T_max must be > 0");
    for (auto x : region)
        if (x >= es.dimension()) throw DomainError("region site outside the operator");
    auto c = es.coefficients(psi);
    SojournResult r;
    r.T_max = T_max;
    r.value = detail::sojourn_closed_form(es, c, region, T_max);
    r.half_value = detail::sojourn_closed_form(es, c, region, 0.5 * T_max);
    r.growth_ratio = r.half_value > 0 ? r.value / r.half_value : 0.0;
    r.linear_growth = r.growth_ratio > 1.5;
    return r;
}

// ----- moments and exponents -----

struct TransportSeries {
    std::string tag;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> averages;  // (1/T) int_0^T value dt; empty if not computed
};

// (1/T) int_0^T <psi_t, W psi_t> dt in closed form: sum_{kl} conj(c_k) c_l M_kl phi((E_k - E_l) T),
// M = V^dagger W V, phi(x) = (e^{ix} - 1)/(ix). Exact, so coarse time grids do not alias oscillations.
template <class S>
std::vector<double> cesaro_moments(const Eigensystem<S>& es, const Eigen::VectorXcd& c, const Eigen::VectorXd& w,
                                   const std::vector<double>& T, unsigned workers = 0) {
    const auto n = static_cast<Eigen::Index>(es.dimension());
    Eigen::MatrixXcd V = es.V.template cast<cplx>();
    Eigen::MatrixXcd M = V.adjoint() * w.asDiagonal() * V;
    Eigen::MatrixXcd B = c.conjugate().asDiagonal() * M * c.asDiagonal();
    double diag = 0;
    for (Eigen::Index k = 0; k < n; ++k) diag += B(k, k).real();
    std::vector<double> out(T.size());
    parallel_for(T.size(), workers, [&](std::size_t i) {
        const double t = T[i];
        if (!(t >= 0)) throw DomainError("averaging times must be >= 0");
        std::vector<double> cols(static_cast<std::size_t>(n), 0.0);
        for (Eigen::Index l = 1; l < n; ++l) {
            double acc = 0;
            for (Eigen::Index k = 0; k < l; ++k) {
                const cplx b = B(k, l);
                if (b == cplx(0)) continue;
                const double x = (es.E(k) - es.E(l)) * t;
                if (x == 0) {
                    acc += b.real();
                    continue;
                }
                acc += (b.real() * std::sin(x) - b.imag() * (1.0 - std::cos(x))) / x;
            }
            cols[static_cast<std::size_t>(l)] = acc;
        }
        out[i] = diag + 2.0 * pairwise_sum(cols);
    });
    return out;
}

// <|X|^m>(t) = sum_x |x|^m |psi_t(x)|^2 with x the site coordinate; times parallelize.
template <class S>
TransportSeries moments(const Eigensystem<S>& es, const OperatorMatrix& op, const StateVector& psi, double m,
                        const std::vector<double>& time_grid, unsigned workers = 0) {
    if (!(m > 0)) throw DomainError("moment order must be > 0");
    for (std::size_t i = 1; i < time_grid.size(); ++i)
        if (!(time_grid[i] > time_grid[i - 1])) throw DomainError("times must be strictly increasing");
    if (op.dimension() != es.dimension()) throw DomainError("operator and eigensystem differ in dimension");
    auto c = es.coefficients(psi);
    Eigen::VectorXd w(op.dimension());
    for (std::size_t x = 0; x < op.dimension(); ++x) w(x) = std::pow(op.radius(x), m);
    TransportSeries s;
    s.tag = "|X|^" + std::to_string(m);
    s.times = time_grid;
    s.values.resize(time_grid.size());
    parallel_for(time_grid.size(), workers, [&](std::size_t i) {
        s.values[i] = probabilities_at(es, c, time_grid[i]).dot(w);
    });
    s.averages = cesaro_moments(es, c, w, s.times, workers);
    return s;
}

struct DiffusionExponents {
    double beta_minus = 0;
    double beta_plus = 0;
    std::vector<double> window_slopes;  // last three dyadic windows, newest first
    bool clipped = false;
};

// Slopes of log <.>_T against log T^m over [T/2, T], [T/4, T/2], [T/8, T/4]; min and max stand in for
// liminf and limsup.
inline DiffusionExponents diffusion_exponents(const TransportSeries& s, double m) {
    const auto& y = s.averages.empty() ? s.values : s.averages;
    std::vector<double> t, v;
    for (std::size_t i = 0; i < s.times.size(); ++i)
        if (s.times[i] > 0 && y[i] > 0) {
            t.push_back(s.times[i]);
            v.push_back(y[i]);
        }
    if (t.size() < 8 || std::log10(t.back() / t.front()) < 2.0 - 1e-9)
        throw FitError("diffusion exponents need >= 2 decades of positive times");
    DiffusionExponents d;
    double T = t.back();
    for (int w = 0; w < 3; ++w) {
        double hi = T / std::ldexp(1.0, w), lo = hi / 2;
        std::vector<double> x, z;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i] >= lo * (1 - 1e-12) && t[i] <= hi * (1 + 1e-12)) {
                x.push_back(t[i]);
                z.push_back(v[i]);
            }
        if (x.size() < 2) throw FitError("dyadic window with fewer than two samples");
        d.window_slopes.push_back(fit_loglog(x, z).slope / m);
    }
    d.beta_minus = *std::min_element(d.window_slopes.begin(), d.window_slopes.end());
    d.beta_plus = *std::max_element(d.window_slopes.begin(), d.window_slopes.end());
    auto clip = [&](double b) {
        if (b < -1e-9 || b > 1 + 1e-9) d.clipped = true;
        return std::clamp(b, 0.0, 1.0);
    };
    d.beta_minus = clip(d.beta_minus);
    d.beta_plus = clip(d.beta_plus);
    return d;
}

// ----- resolvent-averaged transport -----

struct ResolventTransport {
    double time_side = 0;    // 2 eta int_0^{20/eta} e^{-2 eta t} P_t(x) dt
    double energy_side = 0;  // (eta/pi) int_R |((H - E - i eta)^{-1} psi)(x)|^2 dE
    double closed_form = 0;  // sum_{kl} a_k conj(a_l) 2 eta / (2 eta + i (E_k - E_l))
    double difference = 0;   // |time_side - energy_side|
    bool converged = true;
};

template <class S>
ResolventTransport resolvent_transport(const Eigensystem<S>& es, const StateVector& psi, double eta, std::size_t x,
                                       double tol = 1e-10) {
    if (!(eta > 0)) throw DomainError("eta must be > 0");
    if (x >= es.dimension()) throw DomainError("site outside the operator");
    auto c = es.coefficients(psi);
    const std::size_t n = es.dimension();
    std::vector<cplx> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = c(k) * es.vec(x, k);
    std::vector<double> E(es.E.data(), es.E.data() + n);
    ResolventTransport r;

    {
        std::vector<double> rows(n);
        for (std::size_t k = 0; k < n; ++k) {
            cplx acc = std::norm(a[k]);
            for (std::size_t l = k + 1; l < n; ++l)
                acc += 2.0 * std::real(a[k] * std::conj(a[l]) * (2.0 * eta / cplx(2.0 * eta, E[k] - E[l])));
            rows[k] = acc.real();
        }
        r.closed_form = pairwise_sum(rows);
    }

    const double lo = E.front(), hi = E.back();
    const double width = std::max(hi - lo, eta);
    {
        const double Tcut = 20.0 / eta;
        auto f = [&](double t) {
            cplx amp = 0;
            for (std::size_t k = 0; k < n; ++k) amp += a[k] * std::polar(1.0, -E[k] * t);
            return 2.0 * eta * std::exp(-2.0 * eta * t) * std::norm(amp);
        };
        auto panels = static_cast<std::size_t>(std::ceil(Tcut * width / pi)) + 1;
        auto q = integrate(f, 0.0, Tcut, tol, panels);
        r.time_side = q.value;
        r.converged = r.converged && q.converged;
    }
    {
        const double cen = 0.5 * (lo + hi), s = 0.5 * width + eta;
        auto g = [&](double th) {
            double ct = std::cos(th);
            if (ct <= 0) {
                cplx sum = 0;
                for (auto ak : a) sum += ak;
                return (eta / pi) * std::norm(sum) / s;
            }
            double Ev = cen + s * std::tan(th);
            cplx amp = 0;
            for (std::size_t k = 0; k < n; ++k) amp += a[k] / cplx(E[k] - Ev, -eta);
            return (eta / pi) * std::norm(amp) * s / (ct * ct);
        };
        auto panels = static_cast<std::size_t>(std::ceil(pi * s / eta)) + 1;
        auto q = integrate(g, -0.5 * pi, 0.5 * pi, tol, panels);
        r.energy_side = q.value;
        r.converged = r.converged && q.converged;
    }
    r.difference = std::abs(r.time_side - r.energy_side);
    return r;
}

// P^_{psi,eta}(x) for every site of a tridiagonal operator, by the energy formula in the variable
// E = c + s tan(theta) with the periodic trapezoid rule; each node costs one tridiagonal solve.
inline std::vector<double> resolvent_profile(const OperatorMatrix& op, const StateVector& psi, double eta,
                                             double spectral_center, double spectral_halfwidth,
                                             double nodes_per_width = 6.0) {
    if (!(eta > 0)) throw DomainError("eta must be > 0");
    if (!op.is_tridiagonal()) throw DomainError("resolvent_profile needs a tridiagonal operator");
    const std::size_t n = op.dimension();
    if (psi.size() != n) throw DomainError("dimension mismatch between operator and state");
    const auto& d = op.diagonal();
    const auto e = op.subdiagonal();
    const double s = spectral_halfwidth + eta;
    const auto N = static_cast<std::size_t>(std::ceil(nodes_per_width * pi * s / eta));
    const double h = pi / static_cast<double>(N);
    std::vector<double> P(n, 0.0);
    std::vector<cplx> cp(n), y(n);
    const auto& rhs = psi.amplitudes();
    for (std::size_t j = 0; j < N; ++j) {
        double th = -0.5 * pi + (static_cast<double>(j) + 0.5) * h;
        double ct = std::cos(th);
        double Ev = spectral_center + s * std::tan(th);
        cplx z(Ev, eta);
        // Thomas algorithm for (H - z) y = psi.
        cplx den = d[0] - z;
        cp[0] = n > 1 ? e[0] / den : 0.0;
        y[0] = rhs(0) / den;
        for (std::size_t i = 1; i < n; ++i) {
            den = (d[i] - z) - e[i - 1] * cp[i - 1];
            if (i + 1 < n) cp[i] = e[i] / den;
            y[i] = (rhs(i) - e[i - 1] * y[i - 1]) / den;
        }
        for (std::size_t i = n - 1; i-- > 0;) y[i] -= cp[i] * y[i + 1];
        double wgt = (eta / pi) * h * s / (ct * ct);
        for (std::size_t i = 0; i < n; ++i) P[i] += wgt * std::norm(y[i]);
    }
    return P;
}

struct TransportProfileReport {
    double beta_exp = 0;
    std::vector<double> eta;
    std::vector<double> M_hat;       // sum_x |x|^beta P^(x)
    std::vector<double> total_mass;  // sum_x P^(x)
    std::vector<double> inner_mass;  // sum_{|x| < b / eta} P^(x)
    double b = 1.0;
    double r = 0;  // M^ ~ eta^{-r beta}
};

inline TransportProfileReport transport_profile(const OperatorMatrix& op, const StateVector& psi,
                                                const std::vector<double>& eta_grid, double beta_exp, double b = 1.0,
                                                unsigned workers = 0) {
    if (eta_grid.size() < 2) throw FitError("transport profile needs >= 2 values of eta");
    auto mm = std::minmax_element(op.diagonal().begin(), op.diagonal().end());
    double off = 0;
    for (const auto& t : op.upper()) off = std::max(off, std::abs(t.value));
    double cen = 0.5 * (*mm.first + *mm.second);
    double hw = 0.5 * (*mm.second - *mm.first) + 2.0 * off;
    TransportProfileReport rep;
    rep.beta_exp = beta_exp;
    rep.b = b;
    rep.eta = eta_grid;
    std::size_t m = eta_grid.size();
    rep.M_hat.resize(m);
    rep.total_mass.resize(m);
    rep.inner_mass.resize(m);
    parallel_for(m, workers, [&](std::size_t i) {
        auto P = resolvent_profile(op, psi, eta_grid[i], cen, hw);
        std::vector<double> wm(P.size()), inner(P.size());
        for (std::size_t x = 0; x < P.size(); ++x) {
            double rad = op.radius(x);
            wm[x] = std::pow(rad, beta_exp) * P[x];
            inner[x] = rad < b / eta_grid[i] ? P[x] : 0.0;
        }
        rep.M_hat[i] = pairwise_sum(wm);
        rep.total_mass[i] = pairwise_sum(P);
        rep.inner_mass[i] = pairwise_sum(inner);
    });
    rep.r = beta_exp > 0 ? -fit_loglog(rep.eta, rep.M_hat).slope / beta_exp : 0.0;
    return rep;
}

}  // namespace qdl
