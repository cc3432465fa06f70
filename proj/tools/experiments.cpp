#include "experiments.hpp"

#include <cmath>

#include "qdlab/qdlab.hpp"

namespace qdl::cli {

namespace {

using io::json;
using io::number;
using io::ParamType;
using io::Params;
using io::Table;
using C = io::Cell;

std::int64_t I(std::size_t x) { return static_cast<std::int64_t>(x); }

std::vector<io::ParamSpec> law_params(const std::string& law, const std::string& scale, const std::string& prefix = "") {
    return {{prefix + "law", ParamType::text, law, "bernoulli | uniform | gaussian | tabulated"},
            {prefix + "scale", ParamType::real, scale, "distribution scale"},
            {prefix + "atoms", ParamType::text, "", "tabulated atoms as value:prob pairs"}};
}

std::vector<io::ParamSpec> join(std::vector<io::ParamSpec> a, const std::vector<io::ParamSpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::size_t positive(const Params& p, const std::string& k) {
    auto v = p.integer(k);
    if (v < 1) throw io::SchemaError("field '" + k + "' must be >= 1");
    return static_cast<std::size_t>(v);
}

json to_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

PopulationControls controls(const Params& p, const RunContext& ctx) {
    PopulationControls c;
    c.pool_size = positive(p, "pool_size");
    c.burn_in = static_cast<std::size_t>(p.integer("burn_in"));
    c.max_generations = positive(p, "max_generations");
    c.seed = ctx.master_seed;
    return c;
}

std::vector<io::ParamSpec> population_params(const std::string& pool) {
    return {{"pool_size", ParamType::integer, pool, "population size"},
            {"burn_in", ParamType::integer, "200", "generations before the Cauchy test"},
            {"max_generations", ParamType::integer, "200000", "generation cap before a convergence error"}};
}

BetheModelSpec bethe_spec(const Params& p) {
    BetheModelSpec s;
    s.K = static_cast<int>(p.integer("K"));
    s.lambda = p.real("lambda");
    s.disorder = io::distribution_from(p);
    return s;
}

// ----- experiments -----

Output mobility_edges_run(const Params& p, RunContext& ctx) {
    SparseJacobiSpec s;
    s.beta = static_cast<int>(p.integer("beta"));
    s.v = p.real("v");
    s.n_max = positive(p, "n_max");
    s.seed = {ctx.master_seed, 0};
    Output o;
    auto e = mobility_edges(s.beta, s.v);
    o.results["lambda_minus"] = e ? number(e->lower) : json(nullptr);
    o.results["lambda_plus"] = e ? number(e->upper) : json(nullptr);
    o.results["sc_zone_empty"] = !e.has_value();
    o.results["v_critical"] = number(critical_barrier(s.beta));
    bool classify = p.boolean("classify");
    o.data.columns = {"lambda", "zone"};
    if (classify) o.data.columns.insert(o.data.columns.end(), {"growth", "growth_se", "decay_slope", "verdict"});
    std::size_t agree = 0, n = 0;
    for (double l : open_grid(-2.0, 2.0, positive(p, "n_grid"))) {
        auto z = classify_energy(s, l);
        std::vector<C> row{l, to_string(z)};
        if (classify) {
            auto d = decay_contrast(s, l, positive(p, "realizations"), ctx.workers);
            row.insert(row.end(), {d.growth, d.growth_se, d.decay_slope, to_string(d.verdict)});
            agree += d.verdict == z;
        }
        ++n;
        o.data.add(std::move(row));
    }
    if (classify) o.results["classifier_agreement"] = number(static_cast<double>(agree) / static_cast<double>(n));
    return o;
}

Output jacobi_spectrum_run(const Params& p, RunContext& ctx) {
    SparseJacobiSpec s;
    s.beta = static_cast<int>(p.integer("beta"));
    s.v = p.real("v");
    s.n_max = positive(p, "n_max");
    s.phi = p.real("phi");
    s.seed = {ctx.master_seed, static_cast<std::uint64_t>(p.integer("realization"))};
    auto op = build_sparse_jacobi(s);
    auto m = spectral_data(op, 0);
    Output o;
    o.data.columns = {"eigenvalue", "weight"};
    for (const auto& a : m.atoms()) o.data.add({a.x, a.w});
    json bp = json::array();
    for (long x : barrier_positions(s)) bp.push_back(x);
    o.results["dimension"] = I(op.dimension());
    o.results["barrier_positions"] = bp;
    o.results["total_mass"] = number(m.total_mass());
    return o;
}

Output kronecker_run(const Params& p, RunContext& ctx) {
    KroneckerSumSpec k;
    k.spec_a.beta = k.spec_b.beta = static_cast<int>(p.integer("beta"));
    k.spec_a.v = p.real("v_a");
    k.spec_b.v = p.real("v_b");
    k.spec_a.seed = {ctx.master_seed, 0};
    k.spec_b.seed = {ctx.master_seed, 1};
    k.theta = p.real("theta");
    KroneckerFuel f{positive(p, "n_a"), positive(p, "n_b"), positive(p, "atom_cap")};
    auto m = kronecker_spectrum(k, f);
    SparseJacobiSpec a = k.spec_a, b = k.spec_b;
    a.n_max = f.n_a;
    b.n_max = f.n_b;
    auto ma = spectral_data(build_sparse_jacobi(a), 0), mb = spectral_data(build_sparse_jacobi(b), 0);
    Output o;
    o.data.columns = {"t", "re_f", "im_f", "factorization_defect"};
    double worst = 0;
    for (double t : linspace(0.0, p.real("t_max"), positive(p, "n_t"))) {
        auto ft = fs_transform(m, t);
        double d = std::abs(ft - fs_transform(ma, t) * fs_transform(mb, k.theta * t));
        worst = std::max(worst, d);
        o.data.add({t, ft.real(), ft.imag(), d});
    }
    o.results["atoms"] = I(m.size());
    o.results["max_factorization_defect"] = number(worst);
    return o;
}

Output cantor_run(const Params& p, RunContext&) {
    int depth = static_cast<int>(p.integer("depth"));
    long nmax = static_cast<long>(p.integer("n_max"));
    Output o;
    o.data.columns = {"n", "gamma_n", "gamma_3n", "defect"};
    double worst = 0;
    for (long n = 0; n <= nmax; ++n) {
        double a = cantor_fs(static_cast<double>(n), depth - 1), b = cantor_fs(3.0 * n, depth);
        worst = std::max(worst, std::abs(a - b));
        o.data.add({std::int64_t{n}, a, b, std::abs(a - b)});
    }
    json w = json::array();
    double u = 1;
    for (int m = 0; m <= 20; ++m, u *= 3) w.push_back(number(std::abs(cantor_fs(u, depth + 40))));
    o.results["gamma_0"] = number(cantor_fs(0.0, depth));
    o.results["max_scaling_defect"] = number(worst);
    o.results["abs_gamma_3_pow_m"] = w;
    return o;
}

Output cesaro_run(const Params& p, RunContext& ctx) {
    const auto& kind = p.text("measure");
    SpectralMeasureApprox m;
    if (kind == "cantor")
        m = cantor_measure(static_cast<int>(p.integer("depth")));
    else if (kind == "uniform")
        m = uniform_density_measure(-1.0, 1.0, positive(p, "atoms"));
    else if (kind == "point")
        m = SpectralMeasureApprox({{0.0, 1.0}});
    else
        throw io::SchemaError("field 'measure' must be cantor, uniform or point");
    auto r = cesaro_decay(m, cesaro_grid(p.real("T0"), static_cast<int>(p.integer("octaves")),
                                         static_cast<int>(p.integer("per_octave"))),
                          ctx.workers);
    Output o;
    o.data.columns = {"T", "cesaro_mean"};
    for (std::size_t i = 0; i < r.T.size(); ++i) o.data.add({r.T[i], r.value[i]});
    o.results["alpha_hat"] = number(r.alpha_hat);
    o.results["fit_rms"] = number(r.fit_rms);
    o.results["atoms"] = I(m.size());
    return o;
}

struct ChainSetup {
    OperatorMatrix op;
    RealEigensystem es;
    std::size_t origin;
};

ChainSetup anderson_setup(const Params& p, const RunContext& ctx) {
    AndersonSpec s;
    s.dim = static_cast<int>(p.integer("dim"));
    s.box_side = static_cast<long>(p.integer("L"));
    s.v = p.real("v");
    s.disorder = io::distribution_from(p);
    s.seed = {ctx.master_seed, static_cast<std::uint64_t>(p.integer("realization"))};
    ChainSetup c{build_anderson(s), {}, 0};
    c.origin = c.op.site_of_coord(std::vector<long>(s.dim, 0));
    c.es = eigensystem(c.op);
    return c;
}

std::vector<io::ParamSpec> anderson_params(const std::string& L, const std::string& v) {
    return join({{"dim", ParamType::integer, "1", "lattice dimension"},
                 {"L", ParamType::integer, L, "box side"},
                 {"v", ParamType::real, v, "disorder strength"},
                 {"realization", ParamType::integer, "0", "realization index under the master seed"}},
                law_params("uniform", "1"));
}

Output anderson_moments_run(const Params& p, RunContext& ctx) {
    auto c = anderson_setup(p, ctx);
    auto t = logspace(p.real("t_min"), p.real("t_max"), positive(p, "n_t"));
    double m = p.real("m");
    auto s = moments(c.es, c.op, StateVector::delta(c.op.dimension(), c.origin), m, t, ctx.workers);
    Output o;
    o.data.columns = {"t", "moment", "time_average"};
    for (std::size_t i = 0; i < t.size(); ++i) o.data.add({t[i], s.values[i], s.averages[i]});
    auto d = diffusion_exponents(s, m);
    o.results["beta_minus"] = number(d.beta_minus);
    o.results["beta_plus"] = number(d.beta_plus);
    o.results["window_slopes"] = to_json(d.window_slopes);
    o.results["clipped"] = d.clipped;
    return o;
}

Output sojourn_run(const Params& p, RunContext& ctx) {
    auto c = anderson_setup(p, ctx);
    const std::size_t n = c.op.dimension();
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    std::vector<std::size_t> S;
    const auto& state = p.text("state");
    if (state == "delta") {
        v(c.origin) = 1.0;
        S = {c.origin};
    } else if (state == "odd") {
        if (c.origin == 0 || c.origin + 1 >= n || c.op.coord_dim() != 1)
            throw io::SchemaError("field 'state': odd needs a one-dimensional box with L >= 3");
        v(c.origin - 1) = -1.0 / std::sqrt(2.0);
        v(c.origin + 1) = 1.0 / std::sqrt(2.0);
        S = {c.origin + 1};
    } else {
        throw io::SchemaError("field 'state' must be delta or odd");
    }
    StateVector psi(v, true);
    Output o;
    o.data.columns = {"T_max", "sojourn", "growth_ratio"};
    SojournResult last;
    for (double T : logspace(p.real("T_min"), p.real("T_max"), positive(p, "n_T"))) {
        last = sojourn_time(c.es, psi, S, T);
        o.data.add({T, last.value, last.growth_ratio});
    }
    o.results["sojourn"] = number(last.value);
    o.results["linear_growth"] = last.linear_growth;
    return o;
}

Output transport_run(const Params& p, RunContext& ctx) {
    auto c = anderson_setup(p, ctx);
    if (!c.op.is_tridiagonal()) throw io::SchemaError("field 'dim': transport needs dim = 1");
    auto rep = transport_profile(c.op, StateVector::delta(c.op.dimension(), c.origin), p.list("eta"),
                                 p.real("beta_exp"), p.real("b"), ctx.workers);
    Output o;
    o.data.columns = {"eta", "M_hat", "total_mass", "inner_mass"};
    for (std::size_t i = 0; i < rep.eta.size(); ++i)
        o.data.add({rep.eta[i], rep.M_hat[i], rep.total_mass[i], rep.inner_mass[i]});
    o.results["r"] = number(rep.r);
    return o;
}

std::vector<io::ParamSpec> bethe_params(const std::string& lambda) {
    return join({{"K", ParamType::integer, "2", "branching number"},
                 {"lambda", ParamType::real, lambda, "disorder strength"}},
                law_params("uniform", "1"));
}

Output bethe_green_run(const Params& p, RunContext& ctx) {
    auto s = bethe_spec(p);
    auto c = controls(p, ctx);
    c.readout = positive(p, "readout");
    double eta = p.real("eta");
    Output o;
    o.data.columns = {"E", "re_G", "im_G", "re_G_free", "im_G_free", "im_positive_fraction", "generations"};
    for (double E : linspace(p.real("E_min"), p.real("E_max"), positive(p, "n_E"))) {
        auto st = root_green(s, {E, eta}, c, ctx.workers);
        auto fr = free_root_green(s.K, s.root_degree(), {E, eta});
        o.data.add({E, st.mean_root.real(), st.mean_root.imag(), fr.real(), fr.imag(), st.im_positive_fraction,
                    I(st.generations)});
        ctx.note("E=" + io::g17(E) + " converged after " + std::to_string(st.generations) + " generations");
    }
    o.results["spectral_edge"] = number(spectral_edge(s));
    return o;
}

Output bethe_criteria_run(const Params& p, RunContext& ctx) {
    auto s = bethe_spec(p);
    auto c = controls(p, ctx);
    auto r = extended_states_criteria(s, p.real("E"), p.list("eta"), c, positive(p, "paths"), positive(p, "x_max"),
                                      ctx.workers);
    Output o;
    o.data.columns = {"L", "L_se", "phi1", "phi1_se", "log_K", "im_positive_fraction"};
    o.data.add({r.L, r.L_se, r.phi1, r.phi1_se, std::log(static_cast<double>(s.K)), r.im_positive_fraction});
    o.results["lyapunov_exceeds_log_k"] = r.lyapunov_exceeds_log_k;
    o.results["lyapunov_below_log_k"] = r.lyapunov_below_log_k;
    o.results["phi1_below_minus_log_k"] = r.phi1_below_minus_log_k;
    o.results["phi1_above_minus_log_k"] = r.phi1_above_minus_log_k;
    o.results["delta_K"] = number(r.delta_K);
    o.results["in_weak_disorder_region"] = r.in_weak_disorder_region;
    return o;
}

Output bethe_transport_run(const Params& p, RunContext& ctx) {
    auto s = bethe_spec(p);
    auto c = controls(p, ctx);
    auto rep = tree_transport(s, p.real("eta"), positive(p, "radius_cap"), c, positive(p, "paths"),
                              positive(p, "energy_nodes"), p.list("b"), p.real("E_ref"), ctx.workers);
    Output o;
    o.data.columns = {"r", "shell_mass", "k_normalized"};
    for (std::size_t r = 0; r < rep.profile.size(); ++r) o.data.add({I(r), rep.profile[r], rep.k_normalized[r]});
    o.results["total"] = number(rep.total);
    o.results["b"] = to_json(rep.b);
    o.results["inner_mass"] = to_json(rep.inner_mass);
    o.results["max_inner_over_b"] = number(rep.max_inner_over_b);
    return o;
}

AverageMode mode_of(const Params& p) {
    const auto& m = p.text("mode");
    if (m == "exhaustive") return AverageMode::exhaustive;
    if (m == "mc") return AverageMode::mc;
    throw io::SchemaError("field 'mode' must be exhaustive or mc");
}

Output ea_bound_run(const Params& p, RunContext& ctx) {
    int d = static_cast<int>(p.integer("d"));
    auto b = lower_bound_e(d, io::distribution_from(p), mode_of(p), ctx.master_seed, ctx.workers);
    Output o;
    o.data.columns = {"d", "cluster_average", "std_error", "bound", "patterns"};
    o.data.add({std::int64_t{d}, b.average.average, b.average.std_error, b.bound,
                static_cast<std::int64_t>(b.average.n_patterns)});
    o.results["bound"] = number(b.bound);
    o.results["cluster_average"] = number(b.average.average);
    o.results["checksum"] = b.average.checksum ? json(*b.average.checksum) : json(nullptr);
    o.results["misfit_lower_bound"] = number(misfit(b.bound, -static_cast<double>(d)));
    return o;
}

Output ea_lattice_run(const Params& p, RunContext& ctx) {
    int d = static_cast<int>(p.integer("d")), L = static_cast<int>(p.integer("L"));
    bool periodic = p.boolean("periodic");
    auto dist = io::distribution_from(p);
    std::size_t n = positive(p, "realizations");
    auto vals = realizations(
        [&](RealizationSeed s) { return finite_lattice_ground_state(make_lattice(d, L, periodic, dist, s)).per_site; },
        n, ctx.master_seed, ctx.workers);
    Output o;
    o.data.columns = {"realization", "energy_per_site"};
    for (std::size_t i = 0; i < n; ++i) o.data.add({I(i), vals[i]});
    auto est = summarize(vals);
    o.results["mean"] = number(est.mean);
    o.results["std_error"] = number(est.std_error);
    return o;
}

Output ea_free_energy_run(const Params& p, RunContext& ctx) {
    std::vector<std::size_t> sizes;
    for (double x : p.list("sizes")) {
        if (!(x >= 2) || x != std::floor(x)) throw io::SchemaError("field 'sizes' needs integers >= 2");
        sizes.push_back(static_cast<std::size_t>(x));
    }
    auto r = self_averaging(io::distribution_from(p), sizes, p.real("T"), positive(p, "realizations"), ctx.master_seed,
                            ctx.workers);
    Output o;
    o.data.columns = {"n", "mean_f", "variance_f"};
    for (std::size_t k = 0; k < sizes.size(); ++k) o.data.add({I(sizes[k]), r.mean[k], r.variance[k]});
    o.results["strictly_decreasing"] = r.strictly_decreasing;
    return o;
}

Output emch_decay_run(const Params& p, RunContext& ctx) {
    const auto& law = p.text("law");
    auto t = linspace(0.0, p.real("t_max"), positive(p, "n_t"));
    EmchRadinSpec s;
    if (law == "geometric") {
        s = geometric_profile_spec(p.real("t_max"));
    } else {
        std::optional<DistributionSpec> d;
        if (law != "nonrandom") d = io::distribution_from(p);
        s = EmchRadinSpec::nearest_neighbor(static_cast<int>(p.integer("d")), p.real("beta"), d);
    }
    s.gamma = p.real("gamma");
    auto ex = exact_curve(s, t);
    std::size_t mc = static_cast<std::size_t>(p.integer("mc_samples"));
    DecayCurve mcc;
    if (mc > 0) mcc = mc_decay(s, t, mc, ctx.master_seed, ctx.workers);
    Output o;
    o.data.columns = {"t", "g_exact", "g_mc", "g_mc_se", "envelope", "uniform_printed", "gaussian_printed"};
    auto envelope = upper_envelope(ex);
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto f = printed_forms(s.z(), p.real("beta"), t[i]);
        o.data.add({t[i], ex.g[i], mc ? mcc.g[i] : NAN, mc ? mcc.std_error[i] : NAN, envelope[i],
                    f.uniform_printed,
                    f.gaussian_printed});
    }
    auto env = decay_envelope_classify(ex);
    o.results["delta"] = number(ex.delta);
    o.results["delta_degenerate"] = delta_coefficient(s.gamma).degenerate;
    o.results["verdict"] = to_string(env.verdict);
    o.results["recurrence"] = number(env.recurrence);
    o.results["power_exponent"] = number(env.power_exponent);
    o.results["gaussian_rate"] = number(env.gaussian_rate);
    o.results["profile_class"] = ex.stability.profile_class;
    o.results["couplings_bounded"] = ex.stability.couplings_bounded;
    o.results["stable_second_kind"] = ex.stability.stable_second_kind;
    return o;
}

std::vector<Experiment> build() {
    std::vector<Experiment> c;
    c.push_back({"mobility-edges", "mobility edges of the sparse barrier model and optional decay classifier",
                 "sparse barrier sign criterion",
                 {{"beta", ParamType::integer, "2", "gap growth base"},
                  {"v", ParamType::real, "1", "barrier height"},
                  {"n_grid", ParamType::integer, "41", "energies in (-2, 2)"},
                  {"classify", ParamType::boolean, "false", "run the finite-volume classifier"},
                  {"n_max", ParamType::integer, "10000", "truncation size"},
                  {"realizations", ParamType::integer, "64", "barrier realizations per energy"}},
                 mobility_edges_run});
    c.push_back({"jacobi-spectrum", "spectral measure of delta_0 for one sparse barrier truncation",
                 "sparse random Jacobi matrix",
                 {{"beta", ParamType::integer, "2", "gap growth base"},
                  {"v", ParamType::real, "1", "barrier height"},
                  {"n_max", ParamType::integer, "2000", "truncation size"},
                  {"phi", ParamType::real, "1.0471975511965976", "boundary phase in (0, pi)"},
                  {"realization", ParamType::integer, "0", "realization index"}},
                 jacobi_spectrum_run});
    c.push_back({"kronecker", "Fourier-Stieltjes transform of a Kronecker-sum spectral measure",
                 "Kronecker sums of sparse operators",
                 {{"beta", ParamType::integer, "2", "gap growth base"},
                  {"v_a", ParamType::real, "1", "barrier height, first factor"},
                  {"v_b", ParamType::real, "1", "barrier height, second factor"},
                  {"theta", ParamType::real, "1", "coupling of the second factor, in [0, 1]"},
                  {"n_a", ParamType::integer, "60", "first truncation"},
                  {"n_b", ParamType::integer, "60", "second truncation"},
                  {"atom_cap", ParamType::integer, "1000000", "product atom cap"},
                  {"t_max", ParamType::real, "20", "largest time"},
                  {"n_t", ParamType::integer, "101", "time points"}},
                 kronecker_run});
    c.push_back({"cantor", "Cantor-measure transform and its triple-scaling identity", "Cantor measure, non-Rajchman",
                 {{"depth", ParamType::integer, "20", "product depth"},
                  {"n_max", ParamType::integer, "729", "largest integer n"}},
                 cantor_run});
    c.push_back({"cesaro", "Cesaro mean of |mu^|^2 and fitted decay exponent", "Strichartz-Last Cesaro decay",
                 {{"measure", ParamType::text, "cantor", "cantor | uniform | point"},
                  {"depth", ParamType::integer, "12", "Cantor depth"},
                  {"atoms", ParamType::integer, "2000", "atoms of the uniform discretization"},
                  {"T0", ParamType::real, "1", "first averaging time"},
                  {"octaves", ParamType::integer, "10", "doublings of T"},
                  {"per_octave", ParamType::integer, "2", "grid points per doubling"}},
                 cesaro_run});
    c.push_back({"anderson-moments", "moments of the position operator under Anderson dynamics",
                 "transport exponents beta_m",
                 join(anderson_params("401", "0"),
                      {{"m", ParamType::real, "2", "moment order"},
                       {"t_min", ParamType::real, "1", "first time"},
                       {"t_max", ParamType::real, "100", "last time"},
                       {"n_t", ParamType::integer, "41", "log-spaced times"}}),
                 anderson_moments_run});
    c.push_back({"sojourn", "truncated sojourn time of a state in a region", "sojourn time and continuous spectrum",
                 join(anderson_params("801", "0"),
                      {{"state", ParamType::text, "odd", "delta | odd"},
                       {"T_min", ParamType::real, "10", "smallest T_max"},
                       {"T_max", ParamType::real, "160", "largest T_max"},
                       {"n_T", ParamType::integer, "5", "log-spaced T_max values"}}),
                 sojourn_run});
    c.push_back({"transport", "resolvent-averaged transport profile and ballistic margin",
                 "Plancherel transport identity",
                 join(anderson_params("1001", "0"),
                      {{"eta", ParamType::real_list, "0.08,0.04,0.02", "damping values"},
                       {"beta_exp", ParamType::real, "1", "moment exponent"},
                       {"b", ParamType::real, "1", "inner radius factor"}}),
                 transport_run});
    c.push_back({"bethe-green", "population-dynamics root Green function on the Bethe lattice",
                 "cavity recursion on the tree",
                 join(join(bethe_params("0"), population_params("2000")),
                      {{"E_min", ParamType::real, "-3", "first energy"},
                       {"E_max", ParamType::real, "3", "last energy"},
                       {"n_E", ParamType::integer, "13", "energies"},
                       {"eta", ParamType::real, "0.05", "imaginary part of zeta"},
                       {"readout", ParamType::integer, "20", "readout generations"}}),
                 bethe_green_run});
    c.push_back({"bethe-criteria", "Lyapunov exponent, free-energy function and extended-state criteria",
                 "extended states criteria on the tree",
                 join(join(bethe_params("0.05"), population_params("2000")),
                      {{"E", ParamType::real, "0", "energy"},
                       {"eta", ParamType::real_list, "0.02,0.04", "damping values for extrapolation"},
                       {"paths", ParamType::integer, "2000", "path samples"},
                       {"x_max", ParamType::integer, "32", "path length"}}),
                 bethe_criteria_run});
    c.push_back({"bethe-transport", "shell profile of the resolvent-averaged transport on the tree",
                 "ballistic bound on the tree",
                 join(join(bethe_params("0"), population_params("64")),
                      {{"eta", ParamType::real, "0.5", "damping"},
                       {"radius_cap", ParamType::integer, "40", "largest shell"},
                       {"paths", ParamType::integer, "16", "path samples per energy"},
                       {"energy_nodes", ParamType::integer, "200", "energy quadrature nodes"},
                       {"b", ParamType::real_list, "0.5,1,2", "inner radius factors"},
                       {"E_ref", ParamType::real, "0", "energy for the K-normalized profile"}}),
                 bethe_transport_run});
    c.push_back({"ea-bound", "cluster lower bound on the Edwards-Anderson ground-state energy",
                 "plaquette and cube cluster bounds",
                 join({{"d", ParamType::integer, "3", "dimension (2 or 3)"},
                       {"mode", ParamType::text, "exhaustive", "exhaustive | mc"}},
                      law_params("bernoulli", "1")),
                 ea_bound_run});
    c.push_back({"ea-lattice", "exact ground-state energy per site on small lattices",
                 "finite-volume Edwards-Anderson ground states",
                 join({{"d", ParamType::integer, "2", "dimension"},
                       {"L", ParamType::integer, "3", "side"},
                       {"periodic", ParamType::boolean, "false", "periodic boundary"},
                       {"realizations", ParamType::integer, "100", "coupling realizations"}},
                      law_params("bernoulli", "1")),
                 ea_lattice_run});
    c.push_back({"ea-free-energy", "variance of the free energy per site along rings", "self-averaging free energy",
                 join({{"sizes", ParamType::real_list, "8,16,32,64", "ring sizes"},
                       {"T", ParamType::real, "1", "temperature"},
                       {"realizations", ParamType::integer, "200", "coupling realizations"}},
                      law_params("bernoulli", "1")),
                 ea_free_energy_run});
    c.push_back({"emch-decay", "magnetization decay in the Emch-Radin model", "Emch-Radin cosine products",
                 join({{"d", ParamType::integer, "1", "dimension"},
                       {"beta", ParamType::real, "1", "nearest-neighbor coupling"},
                       {"gamma", ParamType::real, "1", "initial-state parameter"},
                       {"t_max", ParamType::real, "100", "last time"},
                       {"n_t", ParamType::integer, "10001", "times from 0"},
                       {"mc_samples", ParamType::integer, "0", "Monte Carlo samples, 0 to skip"}},
                      law_params("uniform", "1")),
                 emch_decay_run});
    return c;
}

}  // namespace

const std::vector<Experiment>& catalog() {
    static const std::vector<Experiment> c = build();
    return c;
}

}  // namespace qdl::cli
