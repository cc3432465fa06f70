#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "parallel.hpp"

namespace qdl {

enum class Law { bernoulli, uniform, gaussian, tabulated };

inline std::string to_string(Law k) {
    switch (k) {
        case Law::bernoulli: return "bernoulli";
        case Law::uniform: return "uniform";
        case Law::gaussian: return "gaussian";
        case Law::tabulated: return "tabulated";
    }
    return "?";
}

inline Law parse_law(const std::string& s) {
    if (s == "bernoulli") return Law::bernoulli;
    if (s == "uniform") return Law::uniform;
    if (s == "gaussian") return Law::gaussian;
    if (s == "tabulated") return Law::tabulated;
    throw ConfigError("unknown distribution kind '" + s + "'");
}

// Coupling/potential law.
//   bernoulli : ±scale with probability 1/2
//   uniform   : density 1/(2 scale) on [-scale, scale]
//   gaussian  : density exp(-(x/scale)^2)/(scale sqrt(pi)), variance scale^2/2
//   tabulated : finite atoms (value, probability); scale multiplies the values
struct DistributionSpec {
    Law kind = Law::uniform;
    double scale = 1.0;
    std::optional<double> moment_constant;
    std::vector<std::pair<double, double>> atoms;

    static DistributionSpec bernoulli(double s = 1.0) { return {Law::bernoulli, s, {}, {}}; }
    static DistributionSpec uniform(double s = 1.0) { return {Law::uniform, s, {}, {}}; }
    static DistributionSpec gaussian(double s = 1.0) { return {Law::gaussian, s, {}, {}}; }
    static DistributionSpec tabulated(std::vector<std::pair<double, double>> a, double s = 1.0) {
        return {Law::tabulated, s, {}, std::move(a)};
    }
    static DistributionSpec point_mass(double x) { return tabulated({{x, 1.0}}); }

    // Support points and probabilities when the law is discrete.
    std::vector<std::pair<double, double>> discrete_atoms() const {
        if (kind == Law::bernoulli) return {{-scale, 0.5}, {scale, 0.5}};
        if (kind == Law::tabulated) {
            std::vector<std::pair<double, double>> out;
            for (auto [x, p] : atoms) out.emplace_back(x * scale, p);
            return out;
        }
        throw UnsupportedError(to_string(kind) + " law has no finite atom table");
    }
    bool is_discrete() const { return kind == Law::bernoulli || kind == Law::tabulated; }

    // Analytic mean (zero for the three centered families).
    double mean() const {
        if (kind != Law::tabulated) return 0.0;
        double m = 0;
        for (auto [x, p] : atoms) m += p * x * scale;
        return m;
    }

    // Largest |value| in the support; infinity for the gaussian.
    double sup_abs() const {
        switch (kind) {
            case Law::bernoulli:
            case Law::uniform: return std::abs(scale);
            case Law::gaussian: return std::numeric_limits<double>::infinity();
            case Law::tabulated: {
                double m = 0;
                for (auto [x, p] : atoms) m = std::max(m, std::abs(x * scale));
                return m;
            }
        }
        return 0;
    }
};

struct RealizationSeed {
    std::uint64_t master_seed = 0;
    std::uint64_t realization_index = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream: the n-th draw is a pure function of (key, n).
class Stream {
public:
    Stream() = default;
    explicit Stream(RealizationSeed s)
        : key_(splitmix64(splitmix64(s.master_seed) ^ (s.realization_index * 0xd1b54a32d192ed03ULL))) {}
    Stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
        key_ = splitmix64(master);
        for (auto p : path) key_ = splitmix64(key_ ^ (p * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t next_u64() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Standard normal via Box-Muller (one value per two draws).
    double normal() {
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }
    // Uniform integer on {lo, ..., hi}.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

inline double sample(const DistributionSpec& d, Stream& s) {
    switch (d.kind) {
        case Law::bernoulli: return (s.next_u64() >> 63) ? d.scale : -d.scale;
        case Law::uniform: return d.scale * (2.0 * s.uniform01() - 1.0);
        case Law::gaussian: return d.scale * s.normal() / std::sqrt(2.0);
        case Law::tabulated: {
            if (d.atoms.empty()) throw UnsupportedError("tabulated law without atoms");
            double u = s.uniform01(), acc = 0;
            for (auto [x, p] : d.atoms) {
                acc += p;
                if (u < acc) return x * d.scale;
            }
            return d.atoms.back().first * d.scale;
        }
    }
    throw ConfigError("unknown distribution kind");
}

inline std::vector<double> sample_couplings(const DistributionSpec& d, std::size_t count, RealizationSeed seed) {
    if (count < 1) throw DomainError("count must be >= 1");
    Stream s(seed);
    std::vector<double> out(count);
    for (auto& x : out) x = sample(d, s);
    return out;
}

struct MomentEntry {
    int n;
    double moment;
    double least_c;  // (|m_n| / n!)^(1/n)
};

struct MomentReport {
    std::vector<MomentEntry> entries;
    double c = 0;           // least c valid for all n <= n_max
    bool violation = false; // no finite c
};

// n-th analytic moment of the law.
inline double analytic_moment(const DistributionSpec& d, int n) {
    if (n == 0) return 1.0;
    switch (d.kind) {
        case Law::bernoulli: return n % 2 ? 0.0 : std::pow(d.scale, n);
        case Law::uniform: return n % 2 ? 0.0 : std::pow(d.scale, n) / (n + 1);
        case Law::gaussian: {
            if (n % 2) return 0.0;
            double dfact = 1;
            for (int k = n - 1; k > 1; k -= 2) dfact *= k;
            return dfact * std::pow(d.scale / std::sqrt(2.0), n);
        }
        case Law::tabulated: {
            if (d.atoms.empty()) throw UnsupportedError("tabulated law without moments");
            double m = 0;
            for (auto [x, p] : d.atoms) m += p * std::pow(x * d.scale, n);
            return m;
        }
    }
    throw ConfigError("unknown distribution kind");
}

inline MomentReport check_moment_bounds(const DistributionSpec& d, int n_max) {
    if (n_max < 2) throw DomainError("n_max must be >= 2");
    MomentReport r;
    for (int n = 2; n <= n_max; ++n) {
        double m = analytic_moment(d, n);
        double fact = std::tgamma(n + 1.0);
        double c = std::pow(std::abs(m) / fact, 1.0 / n);
        if (!std::isfinite(c)) r.violation = true;
        r.entries.push_back({n, m, c});
        r.c = std::max(r.c, c);
    }
    return r;
}

struct MonteCarloEstimate {
    double mean = 0;
    double std_error = 0;
    std::size_t n_samples = 0;
};

inline MonteCarloEstimate summarize(const std::vector<double>& v) {
    MonteCarloEstimate e;
    e.n_samples = v.size();
    e.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> dev(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) dev[i] = (v[i] - e.mean) * (v[i] - e.mean);
        double var = pairwise_sum(dev) / static_cast<double>(v.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(v.size()));
    }
    return e;
}

// Evaluates estimator on realizations 0..n-1 and returns the raw values in index order.
template <class Est>
std::vector<double> realizations(Est&& estimator, std::size_t n_samples, std::uint64_t master_seed,
                                 unsigned workers = 0) {
    std::vector<double> vals(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        try {
            vals[i] = estimator(RealizationSeed{master_seed, i});
        } catch (const RealizationError&) {
            throw;
        } catch (const std::exception& ex) {
            throw RealizationError(i, ex.what());
        }
    });
    return vals;
}

// Av over independent realizations: estimator(RealizationSeed) -> double.
template <class Est>
MonteCarloEstimate average(Est&& estimator, std::size_t n_samples, std::uint64_t master_seed,
                           unsigned workers = 0) {
    if (n_samples < 2) throw DomainError("n_samples must be >= 2");
    return summarize(realizations(std::forward<Est>(estimator), n_samples, master_seed, workers));
}

// Vector-valued variant: estimator returns a fixed-length vector; per-component estimates.
template <class Est>
std::vector<MonteCarloEstimate> average_vector(Est&& estimator, std::size_t n_samples, std::uint64_t master_seed,
                                               unsigned workers = 0) {
    if (n_samples < 2) throw DomainError("n_samples must be >= 2");
    std::vector<std::vector<double>> rows(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        try {
            rows[i] = estimator(RealizationSeed{master_seed, i});
        } catch (const RealizationError&) {
            throw;
        } catch (const std::exception& ex) {
            throw RealizationError(i, ex.what());
        }
    });
    std::size_t m = rows[0].size();
    std::vector<MonteCarloEstimate> out(m);
    std::vector<double> col(n_samples);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n_samples; ++i) {
            if (rows[i].size() != m) throw RealizationError(i, "estimator returned inconsistent length");
            col[i] = rows[i][k];
        }
        out[k] = summarize(col);
    }
    return out;
}

// Key-value block: "kind = uniform", "scale = 1", "master_seed = 42".
struct DistributionConfig {
    DistributionSpec dist;
    std::uint64_t master_seed = 0;
};

inline std::string to_config(const DistributionConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "kind = " << to_string(c.dist.kind) << "\n"
       << "scale = " << c.dist.scale << "\n"
       << "master_seed = " << c.master_seed << "\n";
    if (c.dist.kind == Law::tabulated) {
        os << "atoms =";
        for (auto [x, p] : c.dist.atoms) os << " " << x << ":" << p;
        os << "\n";
    }
    return os.str();
}

inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline DistributionConfig parse_distribution_config(const std::string& text) {
    auto kv = parse_key_values(text);
    DistributionConfig c;
    if (!kv.count("kind")) throw ConfigError("field 'kind' missing");
    c.dist.kind = parse_law(kv["kind"]);
    try {
        if (kv.count("scale")) c.dist.scale = std::stod(kv["scale"]);
        if (kv.count("master_seed")) c.master_seed = std::stoull(kv["master_seed"]);
    } catch (const std::logic_error&) {
        throw ConfigError("field 'scale' or 'master_seed' is not a number");
    }
    if (kv.count("atoms")) {
        std::istringstream as(kv["atoms"]);
        std::string tok;
        while (as >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos) throw ConfigError("field 'atoms': expected value:prob");
            c.dist.atoms.emplace_back(std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
        }
    }
    return c;
}

}  // namespace qdl
