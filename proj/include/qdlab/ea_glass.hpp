#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "common.hpp"
#include "disorder.hpp"
#include "parallel.hpp"

namespace qdl {

enum class Geometry { plaquette, cube };

using Bond = std::pair<int, int>;

// Plaquette: the 4-cycle 0-1-2-3. Cube: vertices x + 2y + 4z, edges in this fixed order.
inline const std::vector<Bond>& geometry_bonds(Geometry g) {
    static const std::vector<Bond> plaq{{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    static const std::vector<Bond> cube{{0, 1}, {0, 2}, {0, 4}, {1, 3}, {1, 5}, {2, 3},
                                        {2, 6}, {3, 7}, {4, 5}, {4, 6}, {5, 7}, {6, 7}};
    return g == Geometry::plaquette ? plaq : cube;
}

inline int geometry_sites(Geometry g) { return g == Geometry::plaquette ? 4 : 8; }

// c_d of the cluster decomposition: each bond of Z^d is shared by 2^{d-1} elementary cells.
inline double cluster_weight(Geometry g) { return g == Geometry::plaquette ? 0.5 : 0.25; }

struct Anisotropy {
    double ax = 0, ay = 0, az = 1;
};

struct ClusterInstance {
    Geometry geometry = Geometry::plaquette;
    std::vector<double> couplings;
    Anisotropy alpha;

    ClusterInstance() = default;
    ClusterInstance(Geometry g, std::vector<double> J, Anisotropy a = {}) : geometry(g), couplings(std::move(J)), alpha(a) {
        if (couplings.size() != geometry_bonds(g).size()) throw DomainError("bond count does not match geometry");
    }
    bool classical() const { return alpha.ax == 0 && alpha.ay == 0; }
};

using SpinConfiguration = std::vector<int>;  // entries ±1

inline SpinConfiguration spins_from_bits(std::uint32_t bits, int n) {
    SpinConfiguration s(n);
    for (int i = 0; i < n; ++i) s[i] = (bits >> i) & 1u ? -1 : 1;
    return s;
}

// F(sigma, J) = sum_bonds J_ij sigma_i sigma_j.
inline double classical_energy(const std::vector<Bond>& bonds, const std::vector<double>& J, std::uint32_t bits) {
    double e = 0;
    for (std::size_t b = 0; b < bonds.size(); ++b) {
        int si = (bits >> bonds[b].first) & 1u, sj = (bits >> bonds[b].second) & 1u;
        e += (si == sj) ? J[b] : -J[b];
    }
    return e;
}

struct GroundState {
    double E0 = 0;
    std::vector<SpinConfiguration> minimizers;  // classical mode only, including global flips
};

// Sigma_0 = +1 enumeration; every minimizer is returned together with its global flip.
inline GroundState classical_ground_state(const ClusterInstance& c) {
    const auto& bonds = geometry_bonds(c.geometry);
    const int n = geometry_sites(c.geometry);
    std::vector<double> J(c.couplings.size());
    for (std::size_t b = 0; b < J.size(); ++b) J[b] = c.alpha.az * c.couplings[b];
    GroundState g;
    g.E0 = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> best;
    for (std::uint32_t bits = 0; bits < (1u << (n - 1)); ++bits) {
        std::uint32_t full = bits << 1;
        double e = classical_energy(bonds, J, full);
        if (e < g.E0) {
            g.E0 = e;
            best.assign(1, full);
        } else if (e == g.E0) {
            best.push_back(full);
        }
    }
    const std::uint32_t mask = (1u << n) - 1;
    for (auto b : best) {
        g.minimizers.push_back(spins_from_bits(b, n));
        g.minimizers.push_back(spins_from_bits(~b & mask, n));
    }
    return g;
}

// sum_bonds J (ax XX + ay YY + az ZZ) on 2^n states; bit 0 of a spin is sigma^z = +1.
// YY is real: -1 on equal bit pairs, +1 on unequal ones, with both bits flipped.
inline Eigen::MatrixXd quantum_cluster_hamiltonian(const ClusterInstance& c) {
    const auto& bonds = geometry_bonds(c.geometry);
    const int n = geometry_sites(c.geometry);
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        for (std::size_t b = 0; b < bonds.size(); ++b) {
            int i = bonds[b].first, j = bonds[b].second;
            bool bi = (s >> i) & 1u, bj = (s >> j) & 1u;
            double J = c.couplings[b];
            H(s, s) += J * c.alpha.az * (bi == bj ? 1.0 : -1.0);
            std::size_t t = s ^ (std::size_t{1} << i) ^ (std::size_t{1} << j);
            H(t, s) += J * c.alpha.ax;
            H(t, s) += J * c.alpha.ay * (bi == bj ? -1.0 : 1.0);
        }
    }
    return H;
}

inline Eigen::VectorXd quantum_cluster_spectrum(const ClusterInstance& c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(quantum_cluster_hamiltonian(c), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline GroundState cluster_ground_state(const ClusterInstance& c) {
    if (c.classical()) return classical_ground_state(c);
    GroundState g;
    g.E0 = quantum_cluster_spectrum(c)(0);
    return g;
}

enum class AverageMode { exhaustive, mc };

struct ClusterAverage {
    double average = 0;
    double std_error = 0;
    std::uint64_t n_patterns = 0;
    std::optional<std::int64_t> checksum;  // sum of all minima when every minimum is an integer
};

// E_0^{(d)} = Av(E_0 of the cluster). Exhaustive mode enumerates all atom combinations of a discrete law.
inline ClusterAverage average_cluster_energy(Geometry geo, const DistributionSpec& dist, AverageMode mode,
                                             std::uint64_t seed = 0, std::size_t mc_samples = 10000,
                                             unsigned workers = 0) {
    const auto nb = geometry_bonds(geo).size();
    ClusterAverage r;
    if (mode == AverageMode::mc) {
        auto est = average(
            [&](RealizationSeed s) {
                ClusterInstance c(geo, sample_couplings(dist, nb, s));
                return classical_ground_state(c).E0;
            },
            mc_samples, seed, workers);
        r.average = est.mean;
        r.std_error = est.std_error;
        r.n_patterns = est.n_samples;
        return r;
    }
    if (!dist.is_discrete()) throw UnsupportedError("exhaustive averaging needs a discrete law");
    auto atoms = dist.discrete_atoms();
    const std::size_t m = atoms.size();
    std::uint64_t total = 1;
    for (std::size_t b = 0; b < nb; ++b) {
        if (total > (std::uint64_t{1} << 40) / m) throw SizeError("too many coupling patterns");
        total *= m;
    }
    std::vector<double> e0(total), prob(total);
    parallel_for(total, workers, [&](std::size_t p) {
        std::vector<double> J(nb);
        double pr = 1;
        std::size_t q = p;
        for (std::size_t b = 0; b < nb; ++b) {
            J[b] = atoms[q % m].first;
            pr *= atoms[q % m].second;
            q /= m;
        }
        e0[p] = classical_ground_state(ClusterInstance(geo, J)).E0;
        prob[p] = pr;
    });
    bool integral = true;
    for (double e : e0)
        if (e != std::nearbyint(e) || std::abs(e) > 1e15) integral = false;
    if (integral) {
        std::int64_t s = 0;
        for (double e : e0) s += static_cast<std::int64_t>(e);
        r.checksum = s;
    }
    bool uniform_prob = std::all_of(prob.begin(), prob.end(), [&](double x) { return x == prob[0]; });
    if (integral && uniform_prob)
        r.average = static_cast<double>(*r.checksum) / static_cast<double>(total);
    else {
        std::vector<double> pe(total);
        for (std::size_t p = 0; p < total; ++p) pe[p] = prob[p] * e0[p];
        r.average = pairwise_sum(pe);
    }
    r.n_patterns = total;
    return r;
}

struct BoundResult {
    double bound = 0;
    ClusterAverage average;
};

inline BoundResult lower_bound_e(int d, const DistributionSpec& dist, AverageMode mode = AverageMode::exhaustive,
                                 std::uint64_t seed = 0, unsigned workers = 0) {
    if (d != 2 && d != 3) throw UnsupportedError("cluster bounds are available for d = 2, 3");
    Geometry g = d == 2 ? Geometry::plaquette : Geometry::cube;
    BoundResult b;
    b.average = average_cluster_energy(g, dist, mode, seed, 10000, workers);
    b.bound = cluster_weight(g) * b.average.average;
    return b;
}

inline int frustration_indicator(const std::array<double, 4>& J) {
    int s = 1;
    for (double j : J) {
        if (j == 0) throw DomainError("zero coupling: frustration undefined");
        if (j < 0) s = -s;
    }
    return s;
}

inline double misfit(double E0_per_site, double E_ideal_per_site) {
    if (E_ideal_per_site == 0) throw DomainError("zero ideal energy");
    return (std::abs(E_ideal_per_site) - std::abs(E0_per_site)) / std::abs(E_ideal_per_site);
}

// Incident-coupling flip at one cluster site.
inline ClusterInstance gauge_transform(const ClusterInstance& c, int site) {
    if (site < 0 || site >= geometry_sites(c.geometry)) throw DomainError("site outside the cluster");
    ClusterInstance out = c;
    const auto& bonds = geometry_bonds(c.geometry);
    for (std::size_t b = 0; b < bonds.size(); ++b)
        if (bonds[b].first == site || bonds[b].second == site) out.couplings[b] = -out.couplings[b];
    return out;
}

// i sigma^y at `site` as a real 2^n x 2^n matrix: |0> -> -|1>, |1> -> |0>.
inline Eigen::MatrixXd site_rotation(int n, int site) {
    const std::size_t dim = std::size_t{1} << n;
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        std::size_t t = s ^ (std::size_t{1} << site);
        U(t, s) = ((s >> site) & 1u) ? 1.0 : -1.0;
    }
    return U;
}

// ----- lattices -----

struct LatticeInstance {
    int d = 2;
    int L = 2;
    bool periodic = true;
    // couplings[site * d + axis] on the bond site -> site + e_axis; 0 for a missing (free b.c.) bond.
    std::vector<double> couplings;

    std::size_t sites() const {
        std::size_t n = 1;
        for (int k = 0; k < d; ++k) n *= static_cast<std::size_t>(L);
        return n;
    }
    std::size_t neighbor(std::size_t site, int axis, bool& exists) const {
        std::size_t stride = 1;
        for (int k = 0; k < axis; ++k) stride *= static_cast<std::size_t>(L);
        std::size_t x = (site / stride) % static_cast<std::size_t>(L);
        exists = true;
        if (x + 1 < static_cast<std::size_t>(L)) return site + stride;
        if (!periodic) {
            exists = false;
            return site;
        }
        return site - (static_cast<std::size_t>(L) - 1) * stride;
    }
    std::size_t bond_count() const {
        std::size_t c = 0;
        for (std::size_t s = 0; s < sites(); ++s)
            for (int a = 0; a < d; ++a) {
                bool ex;
                neighbor(s, a, ex);
                if (ex) ++c;
            }
        return c;
    }
};

inline LatticeInstance make_lattice(int d, int L, bool periodic, const DistributionSpec& dist, RealizationSeed seed) {
    if (d < 1 || L < 2) throw DomainError("lattice needs d >= 1 and L >= 2");
    LatticeInstance lat{d, L, periodic, {}};
    std::size_t n = lat.sites();
    lat.couplings.assign(n * d, 0.0);
    Stream st(seed);
    for (std::size_t s = 0; s < n; ++s)
        for (int a = 0; a < d; ++a) {
            bool ex;
            lat.neighbor(s, a, ex);
            if (ex) lat.couplings[s * d + a] = sample(dist, st);
        }
    return lat;
}

inline LatticeInstance uniform_lattice(int d, int L, bool periodic, double J) {
    LatticeInstance lat{d, L, periodic, {}};
    lat.couplings.assign(lat.sites() * d, 0.0);
    for (std::size_t s = 0; s < lat.sites(); ++s)
        for (int a = 0; a < d; ++a) {
            bool ex;
            lat.neighbor(s, a, ex);
            if (ex) lat.couplings[s * d + a] = J;
        }
    return lat;
}

inline LatticeInstance gauge_transform(const LatticeInstance& lat, std::size_t site) {
    if (site >= lat.sites()) throw DomainError("site outside the lattice");
    LatticeInstance out = lat;
    for (std::size_t s = 0; s < lat.sites(); ++s)
        for (int a = 0; a < lat.d; ++a) {
            bool ex;
            std::size_t t = lat.neighbor(s, a, ex);
            if (ex && (s == site || t == site)) out.couplings[s * lat.d + a] = -out.couplings[s * lat.d + a];
        }
    return out;
}

inline double lattice_energy(const LatticeInstance& lat, const std::vector<int>& sigma) {
    double e = 0;
    for (std::size_t s = 0; s < lat.sites(); ++s)
        for (int a = 0; a < lat.d; ++a) {
            bool ex;
            std::size_t t = lat.neighbor(s, a, ex);
            if (ex) e += lat.couplings[s * lat.d + a] * sigma[s] * sigma[t];
        }
    return e;
}

inline constexpr std::size_t max_enumerated_sites = 24;

namespace detail {
// Adjacency (neighbor, coupling) per site, merging parallel bonds.
inline std::vector<std::vector<std::pair<std::size_t, double>>> lattice_adjacency(const LatticeInstance& lat) {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(lat.sites());
    for (std::size_t s = 0; s < lat.sites(); ++s)
        for (int a = 0; a < lat.d; ++a) {
            bool ex;
            std::size_t t = lat.neighbor(s, a, ex);
            if (!ex) continue;
            double J = lat.couplings[s * lat.d + a];
            adj[s].push_back({t, J});
            adj[t].push_back({s, J});
        }
    return adj;
}

// Visits every configuration with sigma_0 = +1 in Gray-code order; visit(energy, sigma).
template <class Visit>
void gray_enumerate(const LatticeInstance& lat, Visit&& visit) {
    const std::size_t n = lat.sites();
    if (n > max_enumerated_sites) throw SizeError("lattice too large for exhaustive enumeration");
    auto adj = lattice_adjacency(lat);
    std::vector<int> sigma(n, 1);
    double e = lattice_energy(lat, sigma);
    visit(e, sigma);
    const std::uint64_t count = std::uint64_t{1} << (n - 1);
    for (std::uint64_t k = 1; k < count; ++k) {
        std::size_t flip = static_cast<std::size_t>(__builtin_ctzll(k)) + 1;
        double loc = 0;
        for (auto [t, J] : adj[flip])
            if (t != flip) loc += J * sigma[t];
        e -= 2.0 * sigma[flip] * loc;
        sigma[flip] = -sigma[flip];
        visit(e, sigma);
    }
}
}  // namespace detail

struct LatticeGroundState {
    double E = 0;
    double per_site = 0;
    std::vector<int> sigma;
};

inline LatticeGroundState finite_lattice_ground_state(const LatticeInstance& lat) {
    LatticeGroundState g;
    g.E = std::numeric_limits<double>::infinity();
    detail::gray_enumerate(lat, [&](double e, const std::vector<int>& s) {
        if (e < g.E - 1e-9) {
            g.E = e;
            g.sigma = s;
        }
    });
    g.E = lattice_energy(lat, g.sigma);
    g.per_site = g.E / static_cast<double>(lat.sites());
    return g;
}

// ----- free energy (classical diagonal Hamiltonian) -----

// -T log Z / N over all 2^N configurations, by log-sum-exp.
inline double free_energy_per_site(const LatticeInstance& lat, double T) {
    if (!(T > 0)) throw DomainError("temperature must be > 0");
    const double beta = 1.0 / T;
    double emin = finite_lattice_ground_state(lat).E;
    std::vector<double> w;
    w.reserve(std::size_t{1} << (lat.sites() - 1));
    detail::gray_enumerate(lat, [&](double e, const std::vector<int>&) { w.push_back(std::exp(-beta * (e - emin))); });
    double z = 2.0 * pairwise_sum(w);
    return (emin - T * std::log(z)) / static_cast<double>(lat.sites());
}

// Periodic ring with n = J.size() bonds: Z = prod 2cosh(beta J) + prod(-2 sinh(beta J)).
inline double ring_free_energy_per_site(const std::vector<double>& J, double T) {
    if (!(T > 0)) throw DomainError("temperature must be > 0");
    if (J.size() < 2) throw SizeError("ring needs >= 2 sites");
    const double beta = 1.0 / T;
    // The loop term is carried as sign * exp(lt) so frustrated rings stay finite at low T.
    double lc = 0, lt = 0;
    bool negative = false;
    for (double j : J) {
        double x = beta * std::abs(j);
        double e = std::exp(-2.0 * x);
        lc += x + std::log1p(e);  // log(2 cosh x)
        lt += std::log1p(-e) - std::log1p(e);  // log tanh x
        negative ^= j > 0;
        if (j == 0) lt = -INFINITY;
    }
    double logZ = lc + (negative ? std::log(-std::expm1(lt)) : std::log1p(std::exp(lt)));
    return -T * logZ / static_cast<double>(J.size());
}

// Open chain of n sites with n-1 bonds: Z = 2 prod 2cosh(beta J).
inline double chain_free_energy_per_site(const std::vector<double>& J, double T) {
    if (!(T > 0)) throw DomainError("temperature must be > 0");
    const double beta = 1.0 / T;
    double logZ = std::log(2.0);
    for (double j : J) {
        double x = beta * std::abs(j);
        logZ += x + std::log1p(std::exp(-2.0 * x));
    }
    return -T * logZ / static_cast<double>(J.size() + 1);
}

struct SelfAveragingReport {
    double T = 1;
    std::vector<std::size_t> n;
    std::vector<double> mean;
    std::vector<double> variance;
    bool strictly_decreasing = false;
};

// Variance of f_n(J) over realizations of periodic rings.
inline SelfAveragingReport self_averaging(const DistributionSpec& dist, const std::vector<std::size_t>& sizes, double T,
                                          std::size_t realizations, std::uint64_t seed, unsigned workers = 0) {
    SelfAveragingReport r;
    r.T = T;
    r.n = sizes;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        auto vals = qdl::realizations(
            [&](RealizationSeed s) {
                s.master_seed = splitmix64(seed ^ (0x100000001b3ULL * (sizes[k] + 1)));
                return ring_free_energy_per_site(sample_couplings(dist, sizes[k], s), T);
            },
            realizations, seed, workers);
        auto est = summarize(vals);
        r.mean.push_back(est.mean);
        r.variance.push_back(est.std_error * est.std_error * static_cast<double>(vals.size()));
    }
    r.strictly_decreasing = true;
    for (std::size_t k = 1; k < sizes.size(); ++k)
        if (!(r.variance[k] < r.variance[k - 1])) r.strictly_decreasing = false;
    return r;
}

}  // namespace qdl
