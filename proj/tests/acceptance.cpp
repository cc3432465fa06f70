// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                  run all criteria
//   acceptance --criterion N    run criterion N only (exit status 1 on failure)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qdlab/io.hpp"
#include "qdlab/qdlab.hpp"

using namespace qdl;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string data;  // %.17g serialization of every number the criterion produced

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
    void put(double x) { data += io::g17(x) + "\n"; }
    void put(cplx z) { put(z.real()), put(z.imag()); }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Two-dimensional cluster bound with zero tolerance.
Outcome criterion_1(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    auto b = lower_bound_e(2, DistributionSpec::bernoulli(1.0), AverageMode::exhaustive, 0, workers);
    double secs = seconds_since(t0);
    // 8 unfrustrated patterns at -4 and 8 frustrated at -2.
    o.check(b.average.n_patterns == 16, "pattern count");
    o.check(b.average.checksum && *b.average.checksum == -48, "minima sum != -48");
    o.check(b.bound == -1.5, "bound " + io::g17(b.bound) + " != -1.5");
    o.check(secs < 1.0, fmt("runtime %.3f s", secs));
    o.note("bound " + io::g17(b.bound) + fmt(", %.3f s", secs));
    o.put(b.bound);
    o.put(b.average.average);
    o.put(static_cast<double>(b.average.checksum.value_or(0)));
    return o;
}

// 2. Cube bound from 2^12 patterns x 2^8 spins.
Outcome criterion_2(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    auto single = lower_bound_e(3, DistributionSpec::bernoulli(1.0), AverageMode::exhaustive, 0, 1);
    double t_single = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    auto par = lower_bound_e(3, DistributionSpec::bernoulli(1.0), AverageMode::exhaustive, 0, workers == 1 ? 8 : workers);
    double t_par = seconds_since(t0);
    o.check(single.average.n_patterns == 4096, "pattern count");
    o.check(single.average.checksum && *single.average.checksum == -36096, "minima sum != -36096");
    o.check(single.bound == -2.203125, "bound " + io::g17(single.bound));
    o.check(single.bound == -0.25 * (36096.0 / 4096.0), "bound differs from -(1/4)(36096/4096)");
    o.check(par.bound == single.bound && par.average.checksum == single.average.checksum, "parallel differs");
    o.check(t_single < 60.0, fmt("single-threaded %.2f s", t_single));
    o.check(t_par < 10.0, fmt("parallel %.2f s", t_par));
    o.note("bound " + io::g17(single.bound) + ", checksum " + std::to_string(single.average.checksum.value_or(0)) +
           fmt(", %.2f s / %.2f s", t_single, t_par));
    o.put(single.bound);
    o.put(static_cast<double>(single.average.checksum.value_or(0)));
    return o;
}

// 3. Finite-volume decay classifier against the sign criterion.
Outcome criterion_3(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    SparseJacobiSpec s;
    s.beta = 2;
    s.v = 1.0;
    s.n_max = 10000;
    s.seed = {20260101, 0};
    std::size_t agree = 0, total = 0;
    bool far_disagreement = false;
    std::string misses;
    for (double l : open_grid(-2.0, 2.0, 41)) {
        auto want = classify_energy(s, l);
        auto got = decay_contrast(s, l, 256, workers);
        ++total;
        if (got.verdict == want)
            ++agree;
        else {
            misses += fmt(" %.4f", l);
            if (std::abs(l * l - 3.0) >= 0.2) far_disagreement = true;
        }
        o.put(got.growth);
        o.put(got.growth_se);
    }
    double secs = seconds_since(t0);
    double frac = static_cast<double>(agree) / static_cast<double>(total);
    o.check(frac >= 0.9, fmt("agreement %.3f < 0.9", frac));
    o.check(!far_disagreement, "disagreement with |lambda^2 - 3| >= 0.2");
    o.check(secs < 300.0, fmt("runtime %.1f s", secs));
    o.note(fmt("agreement %.3f (%g/41)", frac, static_cast<double>(agree)) + fmt(", %.1f s", secs) +
           (misses.empty() ? "" : ", misses at" + misses));
    return o;
}

// 4. Cantor measure suite.
Outcome criterion_4(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    o.check(cantor_fs(0.0, 20) == 1.0, "Gamma(0) != 1");
    double worst = 0;
    // Gamma_d(3u) = cos(2 pi u) Gamma_{d-1}(u), so on integers the depth-20 transform at 3n equals depth 19 at n.
    for (int n = 0; n <= 729; ++n) {
        double a = cantor_fs(3.0 * n, 20), b = cantor_fs(static_cast<double>(n), 19);
        worst = std::max(worst, std::abs(a - b));
        o.put(a);
    }
    o.check(worst < 1e-12, fmt("scaling defect %.3e", worst));
    auto r = cesaro_decay(cantor_measure(14), cesaro_grid(1.0, 12, 2), workers);
    const double want = std::log(2.0) / std::log(3.0);
    o.check(std::abs(r.alpha_hat - want) <= 0.05, fmt("alpha_hat %.4f vs %.4f", r.alpha_hat, want));
    double secs = seconds_since(t0);
    o.check(secs < 120.0, fmt("runtime %.1f s", secs));
    o.note(fmt("scaling defect %.2e, alpha_hat %.4f (target %.4f)", worst, r.alpha_hat, want) + fmt(", %.1f s", secs));
    o.put(r.alpha_hat);
    for (double v : r.value) o.put(v);
    return o;
}

PopulationControls controls(std::size_t pool, std::uint64_t seed) {
    PopulationControls c;
    c.pool_size = pool;
    c.burn_in = 200;
    c.readout = 20;
    c.seed = seed;
    return c;
}

// 5. Free Bethe lattice against closed forms.
Outcome criterion_5(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    BetheModelSpec s;
    s.K = 2;
    s.lambda = 0.0;
    s.disorder = DistributionSpec::uniform(1.0);
    auto c = controls(2000, 5);
    double worst = 0;
    for (double E : linspace(-3.5, 3.5, 20)) {
        cplx z(E, 0.05);
        auto st = root_green(s, z, c, workers);
        worst = std::max(worst, std::abs(st.mean_root - free_root_green(s.K, s.root_degree(), z)));
        o.put(st.mean_root);
    }
    o.check(worst <= 1e-3, fmt("max |G - G_free| = %.3e", worst));
    auto center = root_green(s, {0.0, 1e-3}, c, workers);
    double img = center.mean_cavity.imag();
    o.check(std::abs(img - 1.0 / std::sqrt(2.0)) <= 1e-3, fmt("Im g(0) = %.6f", img));
    auto le = lyapunov_exponent(s, 0.0, {0.01, 0.02}, c, 2000, 32, workers);
    const double want = 0.5 * std::log(2.0);
    o.check(std::abs(le.L - want) <= 0.02 * want, fmt("L = %.6f vs %.6f", le.L, want));
    double secs = seconds_since(t0);
    o.check(secs < 120.0, fmt("runtime %.1f s", secs));
    o.note(fmt("max |G - G_free| %.2e, Im g(0) %.6f, L %.6f", worst, img, le.L) + fmt(", %.1f s", secs));
    o.put(img);
    o.put(le.L);
    return o;
}

// 6. Free-energy function inequalities at zeta = E + 0.1i.
Outcome criterion_6(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    const int K = 2;
    const double lk = std::log(static_cast<double>(K));
    for (double lambda : {0.0, 0.2}) {
        BetheModelSpec s;
        s.K = K;
        s.lambda = lambda;
        s.disorder = DistributionSpec::uniform(1.0);
        auto c = controls(4000, 6);
        for (double sv : {0.5, 1.0}) {
            auto fe = free_energy_fn(s, 0.0, sv, 32, 4000, 0.1, c, workers);
            double upper = -sv * lk + 3.0 * fe.phi_se;
            double lower = -sv * fe.L_path - 3.0 * (fe.phi_se + sv * fe.L_path_se);
            o.check(fe.phi <= upper, fmt("lambda=%.1f s=%.1f: phi %.4f > -s log K + 3 sigma", lambda, sv, fe.phi) +
                                         fmt(" = %.4f", upper));
            o.check(fe.phi >= lower, fmt("lambda=%.1f s=%.1f: phi %.4f < -sL - 3 sigma", lambda, sv, fe.phi) +
                                         fmt(" = %.4f", lower));
            o.note(fmt("lambda=%.1f s=%.1f phi=%.4f", lambda, sv, fe.phi) +
                   fmt(" (-s log K=%.4f, -sL=%.4f)", -sv * lk, -sv * fe.L_path));
            o.put(fe.phi);
            o.put(fe.phi_se);
            o.put(fe.L_path);
        }
    }
    double secs = seconds_since(t0);
    o.check(secs < 600.0, fmt("runtime %.1f s", secs));
    return o;
}

Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed) {
    Stream st(seed, {static_cast<std::uint64_t>(n)});
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(st.normal(), st.normal());
    return (0.5 / std::sqrt(static_cast<double>(n))) * (A + A.adjoint());
}

// 7. Time side and energy side of the damped transport identity.
Outcome criterion_7(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0;
    std::vector<double> diffs(20 * 3 * 4);
    parallel_for(20, workers, [&](std::size_t m) {
        int n = 10 + static_cast<int>(m) * 10;  // 10 .. 200
        ComplexEigensystem es(random_hermitian(n, 700 + m));
        Stream st(701 + m, {static_cast<std::uint64_t>(n)});
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = cplx(st.normal(), st.normal());
        StateVector psi(v, true);
        std::size_t k = 0;
        for (double eta : {0.05, 0.1, 0.5})
            for (std::size_t x : {std::size_t{0}, std::size_t(n / 3), std::size_t(n / 2), std::size_t(n - 1)})
                diffs[m * 12 + k++] = resolvent_transport(es, psi, eta, x).difference;
    });
    for (double d : diffs) {
        worst = std::max(worst, d);
        o.put(d);
    }
    double secs = seconds_since(t0);
    o.check(worst <= 1e-6, fmt("max difference %.3e", worst));
    o.check(secs < 120.0, fmt("runtime %.1f s", secs));
    o.note(fmt("max |time - energy| %.2e over 240 cases, %.1f s", worst, secs));
    return o;
}

// 8. Moment exponents: ballistic free chain, frozen strong-disorder chain.
Outcome criterion_8(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    {
        const std::size_t n = 2001;
        auto op = free_chain(n, 1000);
        auto es = eigensystem(op);
        auto s = moments(es, op, StateVector::delta(n, 1000), 2.0, logspace(1.0, 400.0, 121), workers);
        auto d = diffusion_exponents(s, 2.0);
        o.check(std::abs(d.beta_minus - 1.0) <= 0.05 && std::abs(d.beta_plus - 1.0) <= 0.05,
                fmt("free beta_2 in [%.4f, %.4f]", d.beta_minus, d.beta_plus));
        o.note(fmt("free beta_2 [%.4f, %.4f]", d.beta_minus, d.beta_plus));
        o.put(d.beta_minus);
        o.put(d.beta_plus);
    }
    {
        AndersonSpec a;
        a.dim = 1;
        a.box_side = 2000;
        a.v = 10.0;
        a.disorder = DistributionSpec::uniform(1.0);
        a.seed = {8, 0};
        auto op = build_anderson(a);
        auto es = eigensystem(op);
        std::size_t origin = op.site_of_coord(std::vector<long>{0});
        auto s = moments(es, op, StateVector::delta(op.dimension(), origin), 2.0, logspace(1.0, 1000.0, 121), workers);
        auto d = diffusion_exponents(s, 2.0);
        o.check(d.beta_plus <= 0.1, fmt("Anderson v=10 beta_2+ = %.4f", d.beta_plus));
        o.note(fmt("Anderson v=10 beta_2+ %.4f", d.beta_plus));
        o.put(d.beta_plus);
        for (double x : s.averages) o.put(x);
    }
    double secs = seconds_since(t0);
    o.check(secs < 600.0, fmt("runtime %.1f s", secs));
    o.note(fmt("%.1f s", secs));
    return o;
}

// 9. Magnetization decay: Monte Carlo vs closed forms, envelope verdicts, dense finite-volume oracle.
Outcome criterion_9(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    struct Case {
        const char* name;
        EmchRadinSpec spec;
        double t_max;
        std::function<double(double)> closed;
    };
    const double beta = 1.0;
    std::vector<Case> cases;
    {
        auto s = EmchRadinSpec::nearest_neighbor(1, beta, DistributionSpec::bernoulli(1.0));
        double z = s.z();
        cases.push_back({"bernoulli", s, 5.0, [=](double t) { return std::pow(std::cos(2 * beta * t), z); }});
    }
    {
        auto s = EmchRadinSpec::nearest_neighbor(2, beta, DistributionSpec::uniform(1.0));
        double z = s.z();
        cases.push_back({"uniform", s, 5.0, [=](double t) {
                             double x = 2 * beta * t;
                             return t == 0 ? 1.0 : std::pow(std::sin(x) / x, z);
                         }});
    }
    {
        auto s = EmchRadinSpec::nearest_neighbor(1, beta, DistributionSpec::gaussian(1.0));
        double z = s.z();
        cases.push_back({"gaussian", s, 2.0, [=](double t) { return std::exp(-z * beta * beta * t * t); }});
    }
    std::size_t outliers = 0;
    for (const auto& c : cases) {
        auto t = linspace(0.0, c.t_max, 50);
        auto mc = mc_decay(c.spec, t, 20000, 9, workers);
        for (std::size_t i = 0; i < t.size(); ++i) {
            double want = c.closed(t[i]);
            double se = mc.std_error[i];
            if (std::abs(mc.g[i] - want) > 3.0 * se && std::abs(mc.g[i] - want) > 1e-13) {
                ++outliers;
                o.check(false, std::string(c.name) + fmt(" t=%.3f: |mc - exact| = %.2e > 3 se = %.2e", t[i],
                                                         std::abs(mc.g[i] - want), 3 * se));
            }
            o.put(mc.g[i]);
        }
    }
    o.note(fmt("MC outliers %g/150", static_cast<double>(outliers)));

    auto tb = linspace(0.0, 200.0, 20001);
    auto b = decay_envelope_classify(exact_curve(cases[0].spec, tb));
    o.check(b.verdict == EnvelopeVerdict::no_decay_almost_periodic && b.recurrence > 0.99,
            "bernoulli verdict " + to_string(b.verdict) + fmt(", recurrence %.4f", b.recurrence));
    auto u = decay_envelope_classify(exact_curve(cases[1].spec, tb));
    double z = cases[1].spec.z();
    o.check(u.verdict == EnvelopeVerdict::power_law && std::abs(u.power_exponent + z) <= 0.1 * z,
            "uniform verdict " + to_string(u.verdict) + fmt(", exponent %.4f vs %.1f", u.power_exponent, -z));
    auto tg = linspace(0.0, 10.0, 10001);
    auto g = decay_envelope_classify(exact_curve(cases[2].spec, tg));
    o.check(g.verdict == EnvelopeVerdict::gaussian_like, "gaussian verdict " + to_string(g.verdict));
    o.note(fmt("recurrence %.4f, uniform exponent %.4f, gaussian rate %.4f", b.recurrence, u.power_exponent,
               g.gaussian_rate));
    o.put(b.recurrence);
    o.put(u.power_exponent);
    o.put(g.gaussian_rate);

    double dense_worst = 0;
    auto fv = EmchRadinSpec::nearest_neighbor(1, 0.8, DistributionSpec::uniform(1.0), 0.6);
    for (double t : linspace(0.0, 6.0, 13)) {
        double dense = dense_magnetization_1d(fv, 10, 3, t, 31);
        double product = finite_volume_magnetization(fv, 10, t, 31, std::vector<int>{3});
        dense_worst = std::max(dense_worst, std::abs(dense - product));
        o.put(dense);
    }
    o.check(dense_worst <= 1e-10, fmt("dense oracle defect %.3e", dense_worst));
    double secs = seconds_since(t0);
    o.check(secs < 300.0, fmt("runtime %.1f s", secs));
    o.note(fmt("dense oracle defect %.2e, %.1f s", dense_worst, secs));
    return o;
}

// 10. Self-averaging of the ring free energy at two temperatures.
Outcome criterion_10(unsigned workers) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    for (double T : {0.5, 1.0}) {
        auto r = self_averaging(DistributionSpec::bernoulli(1.0), {8, 16, 32, 64}, T, 200, 10, workers);
        std::string v;
        for (double x : r.variance) {
            v += fmt(" %.3e", x);
            o.put(x);
        }
        o.check(r.strictly_decreasing, fmt("T=%.1f variance not strictly decreasing:", T) + v);
        o.note(fmt("T=%.1f var", T) + v);
    }
    double secs = seconds_since(t0);
    o.check(secs < 300.0, fmt("runtime %.1f s", secs));
    return o;
}

using Criterion = Outcome (*)(unsigned);
const Criterion criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                              criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};

// 11. Criteria 1-10 rerun at 1 and 8 workers must serialize identically.
Outcome criterion_11(unsigned) {
    Outcome o;
    std::string diff;
    for (int k = 0; k < 10; ++k) {
        auto a = criteria[k](1), b = criteria[k](8);
        if (a.data != b.data) diff += " " + std::to_string(k + 1);
        o.data += a.data;
    }
    o.check(diff.empty(), "data differ for criteria" + diff);
    o.note(fmt("%g bytes compared", static_cast<double>(o.data.size())));
    return o;
}

bool run(int k) {
    auto out = k == 11 ? criterion_11(0) : criteria[k - 1](default_workers());
    std::printf("criterion %2d: %s  %s\n", k, out.pass ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
    return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            which.push_back(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
            return 2;
        }
    }
    if (which.empty())
        for (int k = 1; k <= 11; ++k) which.push_back(k);
    bool ok = true;
    for (int k : which) {
        if (k < 1 || k > 11) {
            std::fprintf(stderr, "no criterion %d\n", k);
            return 2;
        }
        try {
            ok = run(k) && ok;
        } catch (const std::exception& e) {
            std::printf("criterion %2d: FAIL  exception: %s\n", k, e.what());
            ok = false;
        }
    }
    return ok ? 0 : 1;
}
