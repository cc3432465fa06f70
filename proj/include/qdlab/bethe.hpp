#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "disorder.hpp"
#include "fit.hpp"
#include "parallel.hpp"

namespace qdl {

using cplx = std::complex<double>;

struct BetheModelSpec {
    int K = 2;
    double lambda = 0.0;
    DistributionSpec disorder = DistributionSpec::uniform(1.0);
    double kappa = 0.5;
    int root_subtrees = -1;  // -1: K+1 subtrees at the root; set to K for the cavity root
    int root_degree() const { return root_subtrees < 0 ? K + 1 : root_subtrees; }
};

inline double spectral_edge(const BetheModelSpec& s) {
    return 2.0 * std::sqrt(static_cast<double>(s.K)) + s.lambda * s.disorder.sup_abs();
}

inline double delta_K(int K) {
    double r = std::sqrt(static_cast<double>(K)) - 1.0;
    return 0.5 * r * r;
}

struct TreeGreenEnsemble {
    std::vector<cplx> pool;
    cplx zeta{0.0, 1.0};
    std::uint64_t generation = 0;
};

// Herglotz root of K g^2 + zeta g + 1 = 0 (free cavity Green function).
inline cplx free_cavity_green(int K, cplx zeta) {
    cplx disc = std::sqrt(zeta * zeta - 4.0 * K);
    cplx g1 = (-zeta + disc) / (2.0 * K), g2 = (-zeta - disc) / (2.0 * K);
    return g1.imag() > g2.imag() ? g1 : g2;
}

inline cplx free_root_green(int K, int root_degree, cplx zeta) {
    return 1.0 / (-zeta - static_cast<double>(root_degree) * free_cavity_green(K, zeta));
}

inline void check_zeta(cplx zeta) {
    if (!(zeta.imag() > 0)) throw DomainError("Im zeta must be > 0");
}

inline TreeGreenEnsemble initial_ensemble(std::size_t pool_size, cplx zeta) {
    check_zeta(zeta);
    if (pool_size < 1) throw DomainError("pool must be nonempty");
    return {std::vector<cplx>(pool_size, cplx(0.0, 1.0)), zeta, 0};
}

namespace detail {
inline cplx cavity_draw(const std::vector<cplx>& pool, const BetheModelSpec& s, cplx zeta, Stream& st, int children,
                        cplx extra = 0.0) {
    cplx sum = extra;
    const auto n = pool.size();
    for (int c = 0; c < children; ++c) sum += pool[st.next_u64() % n];
    double V = s.lambda == 0.0 ? 0.0 : sample(s.disorder, st);
    return 1.0 / (s.lambda * V - zeta - sum);
}

inline void herglotz_check(cplx g, std::uint64_t gen, std::size_t i) {
    if (!(g.imag() > 0) || !std::isfinite(g.real()))
        throw Error("Herglotz property violated at generation " + std::to_string(gen) + ", sample " +
                    std::to_string(i));
}
}  // namespace detail

// One generation: each new sample uses K members of the previous pool and a fresh potential,
// all drawn from the stream keyed on (seed, generation, index).
inline TreeGreenEnsemble green_recursion_step(const TreeGreenEnsemble& ens, const BetheModelSpec& spec,
                                              std::uint64_t seed, unsigned workers = 0) {
    check_zeta(ens.zeta);
    if (ens.pool.empty()) throw DomainError("pool must be nonempty");
    TreeGreenEnsemble out;
    out.zeta = ens.zeta;
    out.generation = ens.generation + 1;
    out.pool.resize(ens.pool.size());
    const std::size_t n = ens.pool.size();
    const std::size_t blocks = std::min<std::size_t>(n, 64);
    parallel_for(blocks, workers, [&](std::size_t b) {
        for (std::size_t i = b * n / blocks; i < (b + 1) * n / blocks; ++i) {
            Stream st(seed, {out.generation, i});
            cplx g = detail::cavity_draw(ens.pool, spec, ens.zeta, st, spec.K);
            detail::herglotz_check(g, out.generation, i);
            out.pool[i] = g;
        }
    });
    return out;
}

inline cplx pool_mean(const std::vector<cplx>& p) { return pairwise_sum(p) / static_cast<double>(p.size()); }

inline double pool_mean_se(const std::vector<cplx>& p, cplx m) {
    std::vector<double> d(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) d[i] = std::norm(p[i] - m);
    return std::sqrt(pairwise_sum(d) / static_cast<double>(p.size()) / static_cast<double>(p.size()));
}

struct PopulationControls {
    std::size_t pool_size = 10000;
    std::size_t burn_in = 200;
    std::size_t readout = 100;
    std::size_t check_every = 50;
    std::size_t max_generations = 200000;
    double tol = 1e-8;
    std::uint64_t seed = 1;
};

struct PopulationRun {
    TreeGreenEnsemble ensemble;
    std::size_t generations = 0;
    double last_change = 0;
};

// Burn-in followed by a Cauchy test on pool means every check_every generations:
// |m_k - m_{k-1}| <= tol + 4 se.
inline PopulationRun converge_population(const BetheModelSpec& spec, cplx zeta, const PopulationControls& c,
                                         unsigned workers = 0) {
    if (spec.K < 2) throw DomainError("K must be >= 2");
    PopulationRun r;
    r.ensemble = initial_ensemble(c.pool_size, zeta);
    for (std::size_t g = 0; g < c.burn_in; ++g) r.ensemble = green_recursion_step(r.ensemble, spec, c.seed, workers);
    cplx prev = pool_mean(r.ensemble.pool);
    for (;;) {
        for (std::size_t g = 0; g < c.check_every; ++g)
            r.ensemble = green_recursion_step(r.ensemble, spec, c.seed, workers);
        cplx m = pool_mean(r.ensemble.pool);
        double se = pool_mean_se(r.ensemble.pool, m);
        r.last_change = std::abs(m - prev);
        if (r.last_change <= c.tol + 4.0 * se * std::sqrt(2.0)) break;
        prev = m;
        if (r.ensemble.generation >= c.max_generations) {
            std::ostringstream os;
            os << "population did not converge at zeta=" << zeta << " after " << r.ensemble.generation
               << " generations; last change " << r.last_change << ", pool se " << se;
            throw ConvergenceError(os.str());
        }
    }
    r.generations = r.ensemble.generation;
    return r;
}

struct RootGreenStats {
    cplx zeta;
    cplx mean_root;    // Av G(0,0), root with root_degree subtrees
    cplx mean_cavity;  // Av g over the readout pools
    double im_positive_fraction = 0;
    double median_im = 0;
    double ac_density = 0;  // median Im G(0,0) / pi
    std::size_t samples = 0;
    std::size_t generations = 0;
    std::vector<cplx> root_samples;  // last readout generation
};

// Samples roots over `readout` further generations after convergence.
inline RootGreenStats root_green(const BetheModelSpec& spec, cplx zeta, const PopulationControls& c,
                                 unsigned workers = 0, double positivity_threshold = 0.0) {
    if (c.pool_size < 2) throw DomainError("pool too small");
    auto run = converge_population(spec, zeta, c, workers);
    auto ens = run.ensemble;
    RootGreenStats st;
    st.zeta = zeta;
    std::vector<cplx> gen_root_means, gen_cav_means;
    std::vector<double> ims;
    std::size_t positive = 0;
    const std::size_t n = c.pool_size;
    for (std::size_t g = 0; g < c.readout; ++g) {
        ens = green_recursion_step(ens, spec, c.seed, workers);
        std::vector<cplx> roots(n);
        parallel_for(std::min<std::size_t>(n, 64), workers, [&](std::size_t b) {
            std::size_t blocks = std::min<std::size_t>(n, 64);
            for (std::size_t i = b * n / blocks; i < (b + 1) * n / blocks; ++i) {
                Stream sr(c.seed ^ 0x5bd1e995ULL, {ens.generation, i});
                roots[i] = detail::cavity_draw(ens.pool, spec, zeta, sr, spec.root_degree());
                detail::herglotz_check(roots[i], ens.generation, i);
            }
        });
        gen_root_means.push_back(pool_mean(roots));
        gen_cav_means.push_back(pool_mean(ens.pool));
        for (auto r : roots) {
            ims.push_back(r.imag());
            if (r.imag() > positivity_threshold) ++positive;
        }
        if (g + 1 == c.readout) st.root_samples = roots;
    }
    st.mean_root = pool_mean(gen_root_means);
    st.mean_cavity = pool_mean(gen_cav_means);
    st.samples = ims.size();
    st.im_positive_fraction = static_cast<double>(positive) / static_cast<double>(ims.size());
    std::nth_element(ims.begin(), ims.begin() + ims.size() / 2, ims.end());
    st.median_im = ims[ims.size() / 2];
    st.ac_density = st.median_im / pi;
    st.generations = ens.generation;
    return st;
}

// ----- path samples -----

// |G(0, x_r)| along one path for r = 0..x_max: log|G(0,0)| and the cumulative log cavity factors.
// Built backwards from the far end so that each cavity factor contains the rest of the path.
inline std::vector<double> path_log_green(const std::vector<cplx>& pool, const BetheModelSpec& spec, cplx zeta,
                                          std::size_t x_max, Stream& st) {
    std::vector<cplx> g(x_max + 1);
    cplx below = 0.0;
    for (std::size_t j = x_max; j >= 1; --j) {
        int children = (j == x_max) ? spec.K : spec.K - 1;
        g[j] = detail::cavity_draw(pool, spec, zeta, st, children, below);
        below = g[j];
    }
    int root_children = spec.root_degree() - (x_max >= 1 ? 1 : 0);
    cplx G00 = detail::cavity_draw(pool, spec, zeta, st, root_children, x_max >= 1 ? g[1] : 0.0);
    std::vector<double> out(x_max + 1);
    out[0] = std::log(std::abs(G00));
    for (std::size_t j = 1; j <= x_max; ++j) out[j] = out[j - 1] + std::log(std::abs(g[j]));
    return out;
}

struct PathSamples {
    cplx zeta;
    std::size_t x_max = 0;
    std::vector<std::vector<double>> log_green;  // [sample][r]
};

inline PathSamples sample_paths(const BetheModelSpec& spec, cplx zeta, std::size_t x_max, std::size_t samples,
                                const PopulationControls& c, unsigned workers = 0) {
    auto run = converge_population(spec, zeta, c, workers);
    PathSamples ps;
    ps.zeta = zeta;
    ps.x_max = x_max;
    ps.log_green.resize(samples);
    parallel_for(samples, workers, [&](std::size_t i) {
        Stream st(c.seed ^ 0x27d4eb2f165667c5ULL, {run.ensemble.generation, i});
        ps.log_green[i] = path_log_green(run.ensemble.pool, spec, zeta, x_max, st);
    });
    return ps;
}

// ----- Lyapunov exponent -----

struct LyapunovEstimate {
    std::vector<double> eta;
    std::vector<double> L_eta;     // -Av log|g| at each eta
    std::vector<double> L_eta_se;
    double L = 0;                  // linear extrapolation to eta = 0
    double L_se = 0;
    double path_slope_L = 0;       // -slope of Av log|G(0,x)| at the smallest eta
};

// -Av(log|G|) with the cavity root (K subtrees), extrapolated linearly in eta.
inline LyapunovEstimate lyapunov_exponent(BetheModelSpec spec, double E, const std::vector<double>& eta_grid,
                                          const PopulationControls& c, std::size_t path_samples = 2000,
                                          std::size_t x_max = 32, unsigned workers = 0) {
    if (eta_grid.size() < 2) throw DomainError("need >= 2 values of eta");
    if (c.pool_size < 100) throw DomainError("insufficient samples");
    spec.root_subtrees = spec.K;
    LyapunovEstimate le;
    le.eta = eta_grid;
    for (double eta : eta_grid) {
        auto run = converge_population(spec, {E, eta}, c, workers);
        auto ens = run.ensemble;
        std::vector<double> gen_means;
        for (std::size_t g = 0; g < c.readout; ++g) {
            ens = green_recursion_step(ens, spec, c.seed, workers);
            std::vector<double> lg(ens.pool.size());
            for (std::size_t i = 0; i < lg.size(); ++i) lg[i] = std::log(std::abs(ens.pool[i]));
            gen_means.push_back(-pairwise_sum(lg) / static_cast<double>(lg.size()));
        }
        auto est = summarize(gen_means);
        le.L_eta.push_back(est.mean);
        le.L_eta_se.push_back(est.std_error);
    }
    auto f = fit_line(le.eta, le.L_eta);
    le.L = f.intercept;
    double se = 0;
    for (double s : le.L_eta_se) se = std::max(se, s);
    le.L_se = se;
    double eta_min = *std::min_element(eta_grid.begin(), eta_grid.end());
    auto ps = sample_paths(spec, {E, eta_min}, x_max, path_samples, c, workers);
    std::vector<double> xs, ys;
    for (std::size_t r = x_max / 4; r <= x_max; ++r) {
        std::vector<double> col(ps.log_green.size());
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = ps.log_green[i][r];
        xs.push_back(static_cast<double>(r));
        ys.push_back(pairwise_sum(col) / static_cast<double>(col.size()));
    }
    le.path_slope_L = -fit_line(xs, ys).slope;
    return le;
}

// ----- free-energy function -----

struct FreeEnergyEstimate {
    double s = 0;
    cplx zeta;
    double phi = 0;
    double phi_se = 0;
    double L_path = 0;     // -slope of Av log|G(0,x)| from the same samples
    double L_path_se = 0;
    double min_ess_fraction = 1;  // effective sample size / N of |G|^s at the largest x
    bool tail_dominated = false;
    std::vector<double> log_moment;  // log Av|G(0,x)|^s, x = 0..x_max
};

namespace detail {
inline double log_mean_pow(const std::vector<double>& logs, double s, double* ess_fraction = nullptr) {
    double mx = -1e300;
    for (double l : logs) mx = std::max(mx, s * l);
    std::vector<double> w(logs.size()), w2(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i) {
        w[i] = std::exp(s * logs[i] - mx);
        w2[i] = w[i] * w[i];
    }
    double sw = pairwise_sum(w);
    if (ess_fraction) *ess_fraction = sw * sw / pairwise_sum(w2) / static_cast<double>(logs.size());
    return mx + std::log(sw / static_cast<double>(logs.size()));
}

inline double slope_tail(const std::vector<double>& y, std::size_t from) {
    std::vector<double> x, z;
    for (std::size_t r = from; r < y.size(); ++r) {
        x.push_back(static_cast<double>(r));
        z.push_back(y[r]);
    }
    return fit_line(x, z).slope;
}
}  // namespace detail

// Slope of log Av|G(0,x)|^s over x in [x_max/4, x_max]; errors by delete-one-group jackknife (16 groups).
inline FreeEnergyEstimate free_energy_from_paths(const PathSamples& ps, double s) {
    const std::size_t N = ps.log_green.size(), X = ps.x_max;
    const std::size_t groups = std::min<std::size_t>(16, N);
    auto estimate = [&](std::size_t skip, double& phi, double& L, double* ess, std::vector<double>* lm) {
        std::vector<double> y(X + 1), yl(X + 1);
        for (std::size_t r = 0; r <= X; ++r) {
            std::vector<double> col;
            col.reserve(N);
            for (std::size_t i = 0; i < N; ++i)
                if (skip == groups || i % groups != skip) col.push_back(ps.log_green[i][r]);
            double e = 1;
            y[r] = detail::log_mean_pow(col, s, r == X ? &e : nullptr);
            if (r == X && ess) *ess = e;
            yl[r] = pairwise_sum(col) / static_cast<double>(col.size());
        }
        phi = detail::slope_tail(y, X / 4);
        L = -detail::slope_tail(yl, X / 4);
        if (lm) *lm = y;
    };
    FreeEnergyEstimate fe;
    fe.s = s;
    fe.zeta = ps.zeta;
    estimate(groups, fe.phi, fe.L_path, &fe.min_ess_fraction, &fe.log_moment);
    std::vector<double> jp(groups), jl(groups);
    for (std::size_t g = 0; g < groups; ++g) estimate(g, jp[g], jl[g], nullptr, nullptr);
    auto jk = [&](const std::vector<double>& v) {
        double m = pairwise_sum(v) / static_cast<double>(groups), acc = 0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt((groups - 1.0) / groups * acc);
    };
    fe.phi_se = jk(jp);
    fe.L_path_se = jk(jl);
    fe.tail_dominated = fe.min_ess_fraction < 0.01;
    return fe;
}

inline FreeEnergyEstimate free_energy_fn(const BetheModelSpec& spec, double E, double s, std::size_t x_max,
                                         std::size_t samples, double eta, const PopulationControls& c,
                                         unsigned workers = 0) {
    if (s < -spec.kappa || s > 2.0) throw DomainError("s outside [-kappa, 2]");
    if (x_max < 8) throw DomainError("x_max must be >= 8");
    auto ps = sample_paths(spec, {E, eta}, x_max, samples, c, workers);
    return free_energy_from_paths(ps, s);
}

// ----- criteria -----

struct CriteriaReport {
    int K = 2;
    double lambda = 0, E = 0;
    std::vector<double> eta;
    double L = 0, L_se = 0;
    double phi1 = 0, phi1_se = 0;  // phi(1; E + i0) by linear extrapolation
    // Each criterion in its stated direction and reversed.
    bool lyapunov_exceeds_log_k = false;  // L > log K
    bool lyapunov_below_log_k = false;    // L < log K
    bool phi1_below_minus_log_k = false;  // phi(1) < -log K
    bool phi1_above_minus_log_k = false;  // phi(1) > -log K
    double im_positive_fraction = 0;    // fraction of roots with Im G > 10 eta_min at the smallest eta
    double delta_K = 0;
    bool in_weak_disorder_region = false;  // lambda < Delta_K
};

inline CriteriaReport extended_states_criteria(const BetheModelSpec& spec, double E, const std::vector<double>& eta_grid,
                                               const PopulationControls& c, std::size_t path_samples = 4000,
                                               std::size_t x_max = 32, unsigned workers = 0) {
    CriteriaReport r;
    r.K = spec.K;
    r.lambda = spec.lambda;
    r.E = E;
    r.eta = eta_grid;
    r.delta_K = delta_K(spec.K);
    r.in_weak_disorder_region = spec.lambda < r.delta_K;
    auto le = lyapunov_exponent(spec, E, eta_grid, c, path_samples, x_max, workers);
    r.L = le.L;
    r.L_se = le.L_se;
    std::vector<double> phis, ses;
    for (double eta : eta_grid) {
        auto fe = free_energy_fn(spec, E, 1.0, x_max, path_samples, eta, c, workers);
        phis.push_back(fe.phi);
        ses.push_back(fe.phi_se);
    }
    r.phi1 = fit_line(eta_grid, phis).intercept;
    r.phi1_se = *std::max_element(ses.begin(), ses.end());
    const double lk = std::log(static_cast<double>(spec.K));
    r.lyapunov_exceeds_log_k = r.L > lk;
    r.lyapunov_below_log_k = r.L < lk;
    r.phi1_below_minus_log_k = r.phi1 < -lk;
    r.phi1_above_minus_log_k = r.phi1 > -lk;
    double eta_min = *std::min_element(eta_grid.begin(), eta_grid.end());
    auto st = root_green(spec, {E, eta_min}, c, workers, 10.0 * eta_min);
    r.im_positive_fraction = st.im_positive_fraction;
    return r;
}

// ----- transport on the tree -----

struct TreeTransportReport {
    double eta = 0;
    std::vector<double> profile;     // Av P^(|x| = r), r = 0..radius_cap
    double total = 0;                // sum over r
    std::vector<double> b;
    std::vector<double> inner_mass;  // sum_{r < b / eta} profile
    double max_inner_over_b = 0;
    double E_ref = 0;
    std::vector<double> k_normalized;  // Av|G(0,x; E_ref + i eta)|^2 K^{|x|}
};

inline double shell_size(int K, std::size_t r, int root_degree) {
    if (r == 0) return 1.0;
    return static_cast<double>(root_degree) * std::pow(static_cast<double>(K), static_cast<double>(r) - 1.0);
}

// P^(x) = (eta/pi) int |G(0,x;E+i eta)|^2 dE, averaged over paths and multiplied by the shell size.
// The energy integral runs over the real line with E = R tan(theta), midpoint rule in theta.
inline TreeTransportReport tree_transport(const BetheModelSpec& spec, double eta, std::size_t radius_cap,
                                          const PopulationControls& c, std::size_t path_samples,
                                          std::size_t energy_nodes, const std::vector<double>& b_grid,
                                          double E_ref = 0.0, unsigned workers = 0) {
    if (!(eta > 0)) throw DomainError("eta must be > 0");
    if (radius_cap < 12) throw DomainError("radius cap must be >= 12");
    TreeTransportReport rep;
    rep.eta = eta;
    rep.E_ref = E_ref;
    const double R = spectral_edge(spec);
    const double h = pi / static_cast<double>(energy_nodes);
    std::vector<std::vector<double>> contrib(energy_nodes);
    for (std::size_t j = 0; j < energy_nodes; ++j) {
        double th = -0.5 * pi + (static_cast<double>(j) + 0.5) * h;
        double ct = std::cos(th);
        double E = R * std::tan(th);
        PopulationControls cj = c;
        cj.seed = c.seed + 0x9e3779b97f4a7c15ULL * (j + 1);
        auto ps = sample_paths(spec, {E, eta}, radius_cap, path_samples, cj, workers);
        std::vector<double> row(radius_cap + 1);
        for (std::size_t r = 0; r <= radius_cap; ++r) {
            std::vector<double> col(ps.log_green.size());
            for (std::size_t i = 0; i < col.size(); ++i) col[i] = std::exp(2.0 * ps.log_green[i][r]);
            row[r] = (eta / pi) * h * R / (ct * ct) * pairwise_sum(col) / static_cast<double>(col.size());
        }
        contrib[j] = std::move(row);
    }
    rep.profile.assign(radius_cap + 1, 0.0);
    for (std::size_t r = 0; r <= radius_cap; ++r) {
        std::vector<double> col(energy_nodes);
        for (std::size_t j = 0; j < energy_nodes; ++j) col[j] = contrib[j][r];
        rep.profile[r] = pairwise_sum(col) * shell_size(spec.K, r, spec.root_degree());
    }
    rep.total = pairwise_sum(rep.profile);
    rep.b = b_grid;
    for (double b : b_grid) {
        double m = 0;
        for (std::size_t r = 0; r <= radius_cap && static_cast<double>(r) < b / eta; ++r) m += rep.profile[r];
        rep.inner_mass.push_back(m);
        rep.max_inner_over_b = std::max(rep.max_inner_over_b, m / b);
    }
    auto ps = sample_paths(spec, {E_ref, eta}, radius_cap, path_samples, c, workers);
    rep.k_normalized.resize(radius_cap + 1);
    for (std::size_t r = 0; r <= radius_cap; ++r) {
        std::vector<double> col(ps.log_green.size());
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = std::exp(2.0 * ps.log_green[i][r]);
        rep.k_normalized[r] =
            pairwise_sum(col) / static_cast<double>(col.size()) * std::pow(static_cast<double>(spec.K), static_cast<double>(r));
    }
    return rep;
}

struct NegativeMomentProbe {
    double delta = 0.5;
    double moment_n = 0;   // Av (Im G)^{-3-delta} at pool size N
    double moment_2n = 0;  // at pool size 2N
    double ratio = 0;
    bool stable = false;   // |ratio - 1| < 0.1
};

inline NegativeMomentProbe negative_moment_probe(const BetheModelSpec& spec, cplx zeta, PopulationControls c,
                                                 double delta = 0.5, unsigned workers = 0) {
    NegativeMomentProbe p;
    p.delta = delta;
    auto moment = [&](const PopulationControls& cc) {
        auto st = root_green(spec, zeta, cc, workers);
        std::vector<double> v(st.root_samples.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(st.root_samples[i].imag(), -3.0 - delta);
        return pairwise_sum(v) / static_cast<double>(v.size());
    };
    p.moment_n = moment(c);
    c.pool_size *= 2;
    p.moment_2n = moment(c);
    p.ratio = p.moment_2n / p.moment_n;
    p.stable = std::isfinite(p.ratio) && std::abs(p.ratio - 1.0) < 0.1;
    return p;
}

}  // namespace qdl
