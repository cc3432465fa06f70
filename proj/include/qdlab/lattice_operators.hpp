#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "disorder.hpp"
#include "parallel.hpp"
#include "spectral_measures.hpp"

namespace qdl {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

// Real symmetric matrix: diagonal plus strictly upper off-diagonal entries, each site with a lattice coordinate.
class OperatorMatrix {
public:
    OperatorMatrix() = default;
    OperatorMatrix(std::size_t n, int coord_dim) : diag_(n, 0.0), coord_dim_(coord_dim), coords_(n * coord_dim, 0) {}

    std::size_t dimension() const { return diag_.size(); }
    int coord_dim() const { return coord_dim_; }

    double& diag(std::size_t i) { return diag_[i]; }
    double diag(std::size_t i) const { return diag_[i]; }
    const std::vector<double>& diagonal() const { return diag_; }
    const std::vector<Triplet>& upper() const { return upper_; }

    // Adds v at (i, j) and (j, i); repeated pairs accumulate.
    void add_bond(std::size_t i, std::size_t j, double v) {
        if (i == j) {
            diag_[i] += v;
            return;
        }
        if (i > j) std::swap(i, j);
        for (auto& t : upper_)
            if (t.row == i && t.col == j) {
                t.value += v;
                return;
            }
        upper_.push_back({i, j, v});
    }
    // Appends without the duplicate scan; caller guarantees (i, j) is new and i < j.
    void push_bond(std::size_t i, std::size_t j, double v) { upper_.push_back({i, j, v}); }

    long coord(std::size_t site, int axis) const { return coords_[site * coord_dim_ + axis]; }
    void set_coord(std::size_t site, int axis, long x) { coords_[site * coord_dim_ + axis] = x; }

    // Euclidean |x| of a site.
    double radius(std::size_t site) const {
        double r = 0;
        for (int a = 0; a < coord_dim_; ++a) r += static_cast<double>(coord(site, a)) * coord(site, a);
        return std::sqrt(r);
    }

    Eigen::MatrixXd to_dense() const {
        std::size_t n = dimension();
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = diag_[i];
        for (const auto& t : upper_) {
            m(t.row, t.col) += t.value;
            m(t.col, t.row) += t.value;
        }
        return m;
    }

    // True when every off-diagonal entry couples i and i+1.
    bool is_tridiagonal() const {
        for (const auto& t : upper_)
            if (t.col != t.row + 1) return false;
        return true;
    }

    // Sub-diagonal of a tridiagonal matrix (size n-1).
    std::vector<double> subdiagonal() const {
        std::vector<double> s(dimension() > 0 ? dimension() - 1 : 0, 0.0);
        for (const auto& t : upper_) {
            if (t.col != t.row + 1) throw DomainError("operator is not tridiagonal");
            s[t.row] += t.value;
        }
        return s;
    }

    std::size_t site_of_coord(const std::vector<long>& x) const {
        for (std::size_t s = 0; s < dimension(); ++s) {
            bool ok = true;
            for (int a = 0; a < coord_dim_ && ok; ++a) ok = coord(s, a) == x[a];
            if (ok) return s;
        }
        throw DomainError("no site with the requested coordinate");
    }

private:
    std::vector<double> diag_;
    std::vector<Triplet> upper_;
    int coord_dim_ = 1;
    std::vector<long> coords_;
};

// Entry-wise symmetry holds by construction; this checks the dense form too.
inline bool is_symmetric(const OperatorMatrix& op) {
    Eigen::MatrixXd m = op.to_dense();
    return (m - m.transpose()).cwiseAbs().maxCoeff() == 0.0;
}

inline OperatorMatrix free_chain(std::size_t n, long origin = 0) {
    OperatorMatrix op(n, 1);
    for (std::size_t i = 0; i < n; ++i) op.set_coord(i, 0, static_cast<long>(i) - origin);
    for (std::size_t i = 0; i + 1 < n; ++i) op.push_bond(i, i + 1, 1.0);
    return op;
}

// ----- sparse random Jacobi -----

struct SparseJacobiSpec {
    int beta = 2;
    double v = 1.0;
    std::size_t n_max = 10000;
    double phi = pi / 3;  // boundary condition u_{-1} cos(phi) - u_0 sin(phi) = 0
    RealizationSeed seed{};
};

// a_1 = beta - 1, a_j = a_{j-1} + beta^j, for all a_j - j < limit.
inline std::vector<long> barrier_centers(int beta, std::size_t limit) {
    if (beta < 2) throw DomainError("beta must be >= 2");
    std::vector<long> a;
    long cur = beta - 1, pw = beta;
    for (long j = 1; cur - j < static_cast<long>(limit); ++j) {
        a.push_back(cur);
        pw *= beta;
        cur += pw;
        if (pw > (1L << 52)) break;
    }
    return a;
}

// Randomized positions a_j + omega_j, omega_j uniform on {-j..j}, restricted to [0, n_max).
inline std::vector<long> barrier_positions(const SparseJacobiSpec& s) {
    auto a = barrier_centers(s.beta, s.n_max);
    Stream st(s.seed);
    std::vector<long> out;
    for (std::size_t k = 0; k < a.size(); ++k) {
        long j = static_cast<long>(k) + 1;
        long p = a[k] + st.uniform_int(-j, j);
        if (p >= 0 && p < static_cast<long>(s.n_max)) out.push_back(p);
    }
    return out;
}

// log(#{a_j <= R}) surrogate: number of deterministic centers in [0, R].
inline std::size_t barrier_count(int beta, long R) {
    std::size_t c = 0;
    for (long x : barrier_centers(beta, static_cast<std::size_t>(R) + 1))
        if (x <= R) ++c;
    return c;
}

inline bool dirichlet_phase(double phi) { return std::abs(std::cos(phi)) < 1e-14; }

// Sites 0..n_max-1, off-diagonal 1, diagonal v at the barriers. The phase folds into the first
// diagonal entry as + tan(phi); phi = pi/2 means u_0 = 0 and site 0 is dropped.
inline OperatorMatrix build_sparse_jacobi(const SparseJacobiSpec& s) {
    if (s.beta < 2) throw DomainError("beta must be >= 2");
    if (!(s.phi > 0 && s.phi < pi)) throw DomainError("phi must lie in (0, pi)");
    if (s.n_max < static_cast<std::size_t>(s.beta) + 1)
        throw SizeError("n_max too small to contain the first barrier");
    std::vector<double> pot(s.n_max, 0.0);
    for (long p : barrier_positions(s)) pot[p] = s.v;
    bool drop = dirichlet_phase(s.phi);
    std::size_t first = drop ? 1 : 0;
    OperatorMatrix op(s.n_max - first, 1);
    for (std::size_t i = first; i < s.n_max; ++i) {
        op.diag(i - first) = pot[i];
        op.set_coord(i - first, 0, static_cast<long>(i));
    }
    if (!drop) op.diag(0) += std::tan(s.phi);
    for (std::size_t i = 0; i + 1 < op.dimension(); ++i) op.push_bond(i, i + 1, 1.0);
    return op;
}

// ----- Anderson and almost Mathieu -----

struct AndersonSpec {
    int dim = 1;
    long box_side = 10;
    DistributionSpec disorder = DistributionSpec::uniform(1.0);
    double v = 0.0;
    RealizationSeed seed{};
    bool periodic = false;
};

inline constexpr std::size_t max_lattice_sites = std::size_t{1} << 24;

inline OperatorMatrix build_anderson(const AndersonSpec& s) {
    if (s.dim < 1) throw DomainError("dimension must be >= 1");
    if (s.box_side < 2) throw DomainError("box side must be >= 2");
    if (s.dim * std::log2(static_cast<double>(s.box_side)) > std::log2(static_cast<double>(max_lattice_sites)))
        throw SizeError("L^d exceeds the site cap");
    std::size_t n = 1;
    for (int k = 0; k < s.dim; ++k) n *= static_cast<std::size_t>(s.box_side);
    OperatorMatrix op(n, s.dim);
    const long L = s.box_side, half = L / 2;
    Stream st(s.seed);
    std::vector<long> x(s.dim);
    for (std::size_t site = 0; site < n; ++site) {
        std::size_t r = site;
        for (int a = s.dim - 1; a >= 0; --a) {
            x[a] = static_cast<long>(r % L);
            r /= L;
        }
        for (int a = 0; a < s.dim; ++a) op.set_coord(site, a, x[a] - half);
        op.diag(site) = s.v == 0.0 ? 0.0 : s.v * sample(s.disorder, st);
    }
    std::size_t stride = 1;
    for (int a = s.dim - 1; a >= 0; --a, stride *= L) {
        for (std::size_t site = 0; site < n; ++site) {
            long xa = static_cast<long>((site / stride) % L);
            if (xa + 1 < L)
                op.push_bond(site, site + stride, 1.0);
            else if (s.periodic) {
                std::size_t other = site - static_cast<std::size_t>(L - 1) * stride;
                if (L == 2)
                    op.add_bond(other, site, 1.0);
                else
                    op.push_bond(other, site, 1.0);
            }
        }
    }
    return op;
}

struct AlmostMathieuSpec {
    double lambda = 0.0;
    double omega = (std::sqrt(5.0) - 1.0) / 2.0;
    double theta = 0.0;
    std::size_t n_max = 100;
};

inline OperatorMatrix build_almost_mathieu(const AlmostMathieuSpec& s) {
    if (s.n_max < 2) throw SizeError("n_max must be >= 2");
    if (s.lambda < 0) throw DomainError("lambda must be >= 0");
    OperatorMatrix op = free_chain(s.n_max);
    for (std::size_t n = 0; n < s.n_max; ++n)
        op.diag(n) = s.lambda * std::cos(2.0 * pi * (s.omega * static_cast<double>(n) + s.theta));
    return op;
}

// ----- mobility edges and the sign criterion -----

struct MobilityEdges {
    double lower;
    double upper;
};

// lambda± = ±sqrt(4 - v^2/(beta-1)); empty once v >= 2 sqrt(beta-1).
inline std::optional<MobilityEdges> mobility_edges(int beta, double v) {
    if (beta < 2) throw DomainError("beta must be >= 2");
    if (!(v > 0)) throw DomainError("v must be > 0");
    double r = 4.0 - v * v / (beta - 1.0);
    if (r <= 0) return std::nullopt;
    double l = std::sqrt(r);
    return MobilityEdges{-l, l};
}

inline double critical_barrier(int beta) { return 2.0 * std::sqrt(beta - 1.0); }

enum class SpectralZone { sc_zone, pp_zone, edge };

inline std::string to_string(SpectralZone z) {
    switch (z) {
        case SpectralZone::sc_zone: return "sc_zone";
        case SpectralZone::pp_zone: return "pp_zone";
        case SpectralZone::edge: return "edge";
    }
    return "?";
}

// Sign of (beta-1)(4-lambda^2) - v^2; |value| <= 1e-12 is the edge.
inline SpectralZone classify_energy(const SparseJacobiSpec& s, double lambda) {
    if (!(std::abs(lambda) < 2.0)) throw DomainError("energy outside the essential spectrum [-2, 2]");
    double c = (s.beta - 1.0) * (4.0 - lambda * lambda) - s.v * s.v;
    if (std::abs(c) <= 1e-12) return SpectralZone::edge;
    return c > 0 ? SpectralZone::sc_zone : SpectralZone::pp_zone;
}

// ----- transfer matrices -----

using Mat2 = std::array<double, 4>;  // row-major [[a, b], [c, d]]

inline Mat2 mat2_mul(const Mat2& x, const Mat2& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3]};
}

inline double mat2_norm(const Mat2& m) {  // Frobenius
    return std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]);
}

struct TransferResult {
    Mat2 product{1, 0, 0, 1};  // M_{hi-1} ... M_lo, scaled by exp(-log_scale)
    double log_scale = 0;
    std::vector<long> barrier_sites;
    std::vector<double> barrier_log_norm;  // log ||partial product|| just after each barrier
};

// Single-site matrices [[lambda - v_n, -1], [1, 0]] over sites [lo, hi); the boundary phase plays no role.
inline TransferResult transfer_product(const std::vector<double>& potential, double lambda, std::size_t lo,
                                       std::size_t hi, const std::vector<char>& is_barrier = {}) {
    if (hi < lo || hi > potential.size()) throw DomainError("site range outside the truncation");
    TransferResult r;
    for (std::size_t n = lo; n < hi; ++n) {
        Mat2 m{lambda - potential[n], -1.0, 1.0, 0.0};
        r.product = mat2_mul(m, r.product);
        double nr = mat2_norm(r.product);
        if (nr > 1e100 || nr < 1e-100) {
            for (auto& e : r.product) e /= nr;
            r.log_scale += std::log(nr);
        }
        if (!is_barrier.empty() && is_barrier[n]) {
            r.barrier_sites.push_back(static_cast<long>(n));
            r.barrier_log_norm.push_back(r.log_scale + std::log(mat2_norm(r.product)));
        }
    }
    return r;
}

inline std::vector<double> sparse_potential(const SparseJacobiSpec& s, std::vector<char>* mask = nullptr) {
    std::vector<double> pot(s.n_max, 0.0);
    if (mask) mask->assign(s.n_max, 0);
    for (long p : barrier_positions(s)) {
        pot[p] = s.v;
        if (mask) (*mask)[p] = 1;
    }
    return pot;
}

inline TransferResult transfer_product(const SparseJacobiSpec& s, double lambda, std::size_t lo, std::size_t hi) {
    std::vector<char> mask;
    auto pot = sparse_potential(s, &mask);
    return transfer_product(pot, lambda, lo, hi, mask);
}

// ----- finite-volume decay contrast -----

struct DecayContrast {
    double lambda = 0;
    double growth = 0;     // mean per-barrier growth of the log squared envelope
    double growth_se = 0;
    double decay_slope = 0;  // log(beta) - growth: per-barrier log mass ratio of the decaying eigenfunction
    double ipr = 0;          // mean inverse participation ratio
    std::size_t realizations = 0;
    SpectralZone verdict = SpectralZone::edge;
};

struct EigenfunctionProfile {
    std::vector<double> log_envelope;  // log Q(u_b, u_{b+1}) after each barrier b
    double ipr = 0;
};

// Eigenvector at lambda of the truncation whose right boundary phase is tuned so that lambda is an
// eigenvalue: it is the left solution u_{n+1} = (lambda - v_n) u_n - u_{n-1}, started from the phase.
// The squared envelope Q(u_k, u_{k+1}) = u_k^2 + u_{k+1}^2 - lambda u_k u_{k+1} is constant on free stretches.
inline EigenfunctionProfile eigenfunction_profile(const SparseJacobiSpec& s, double lambda) {
    std::vector<char> mask;
    auto pot = sparse_potential(s, &mask);
    bool drop = dirichlet_phase(s.phi);
    // (u_0, u_{-1}) = (cos phi, sin phi); with u_0 = 0 the recursion starts at site 1 from (1, 0).
    double u = drop ? 1.0 : std::cos(s.phi);
    double um = drop ? 0.0 : std::sin(s.phi);
    std::size_t start = drop ? 1 : 0;
    EigenfunctionProfile p;
    double logs = 0;
    std::vector<double> logu(s.n_max - start);
    for (std::size_t n = start; n < s.n_max; ++n) {
        logu[n - start] = (u == 0 ? -1e300 : std::log(std::abs(u))) + logs;
        double nx = (lambda - pot[n]) * u - um;
        um = u;
        u = nx;
        double sc = std::abs(u) + std::abs(um);
        if (sc > 1e100) {
            u /= sc;
            um /= sc;
            logs += std::log(sc);
        }
        if (mask[n]) p.log_envelope.push_back(std::log(um * um + u * u - lambda * um * u) + 2.0 * logs);
    }
    double mx = *std::max_element(logu.begin(), logu.end());
    double s2 = 0, s4 = 0;
    for (double l : logu) {
        double e = std::exp(2.0 * (l - mx));
        s2 += e;
        s4 += e * e;
    }
    p.ipr = s4 / (s2 * s2);
    return p;
}

// Averages the per-barrier envelope growth over realizations 0..n-1 (the first barrier is skipped).
// pp when the decaying eigenfunction's gap masses shrink, i.e. decay_slope < -2 se; sc when > 2 se.
inline DecayContrast decay_contrast(SparseJacobiSpec s, double lambda, std::size_t n_realizations,
                                    unsigned workers = 0) {
    if (!(std::abs(lambda) < 2.0)) throw DomainError("energy outside the essential spectrum [-2, 2]");
    const std::uint64_t master = s.seed.master_seed;
    std::vector<double> rate(n_realizations), ipr(n_realizations);
    parallel_for(n_realizations, workers, [&](std::size_t r) {
        SparseJacobiSpec sr = s;
        sr.seed = {master, r};
        auto prof = eigenfunction_profile(sr, lambda);
        const auto& le = prof.log_envelope;
        if (le.size() < 3) throw SizeError("fewer than three barriers inside the truncation");
        rate[r] = (le.back() - le[1]) / static_cast<double>(le.size() - 2);
        ipr[r] = prof.ipr;
    });
    auto est = summarize(rate);
    DecayContrast d;
    d.lambda = lambda;
    d.growth = est.mean;
    d.growth_se = est.std_error;
    d.decay_slope = std::log(static_cast<double>(s.beta)) - est.mean;
    d.ipr = pairwise_sum(ipr) / static_cast<double>(n_realizations);
    d.realizations = n_realizations;
    if (d.decay_slope < -2.0 * d.growth_se)
        d.verdict = SpectralZone::pp_zone;
    else if (d.decay_slope > 2.0 * d.growth_se)
        d.verdict = SpectralZone::sc_zone;
    else
        d.verdict = SpectralZone::edge;
    return d;
}

// ----- spectral data -----

// Spectral measure of delta_site for a real symmetric operator: atoms (E_k, |v_k(site)|^2).
inline SpectralMeasureApprox spectral_data(const OperatorMatrix& op, std::size_t site) {
    if (site >= op.dimension()) throw DomainError("site outside the operator");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    if (op.is_tridiagonal()) {
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(op.diagonal().data(), op.dimension());
        auto sd = op.subdiagonal();
        Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(sd.data(), sd.size());
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    } else {
        es.compute(op.to_dense());
    }
    std::vector<Atom> atoms(op.dimension());
    for (std::size_t k = 0; k < op.dimension(); ++k) {
        double c = es.eigenvectors()(site, k);
        atoms[k] = {es.eigenvalues()(k), c * c};
    }
    return SpectralMeasureApprox(std::move(atoms), false);
}

struct KroneckerSumSpec {
    SparseJacobiSpec spec_a;
    SparseJacobiSpec spec_b;
    double theta = 1.0;
};

struct KroneckerFuel {
    std::size_t n_a = 60;
    std::size_t n_b = 60;
    std::size_t atom_cap = 1000000;
};

// Spectral measure of delta_0 (x) delta_0 for J_a (x) I + theta I (x) J_b, combined from the component data.
inline SpectralMeasureApprox kronecker_spectrum(const KroneckerSumSpec& k, const KroneckerFuel& fuel) {
    if (!(k.theta >= 0 && k.theta <= 1)) throw DomainError("theta must lie in [0, 1]");
    if (fuel.n_a * fuel.n_b > fuel.atom_cap) throw SizeError("product dimension exceeds the cap");
    SparseJacobiSpec a = k.spec_a, b = k.spec_b;
    a.n_max = fuel.n_a;
    b.n_max = fuel.n_b;
    auto ma = spectral_data(build_sparse_jacobi(a), 0);
    auto mb = spectral_data(build_sparse_jacobi(b), 0);
    return convolve(ma, mb, k.theta, fuel.atom_cap);
}

// Dense J_a (x) I + theta I (x) J_b, site index ia * n_b + ib.
inline Eigen::MatrixXd kronecker_dense(const OperatorMatrix& a, const OperatorMatrix& b, double theta) {
    Eigen::MatrixXd A = a.to_dense(), B = b.to_dense();
    const auto na = A.rows(), nb = B.rows();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            if (A(i, j) != 0)
                for (Eigen::Index q = 0; q < nb; ++q) M(i * nb + q, j * nb + q) += A(i, j);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index q = 0; q < nb; ++q)
            for (Eigen::Index r = 0; r < nb; ++r)
                if (B(q, r) != 0) M(i * nb + q, i * nb + r) += theta * B(q, r);
    return M;
}

// ----- export -----

// Header lines start with '#'; body "row col value" per stored entry (diagonal and upper triangle).
inline void write_triplets(std::ostream& os, const OperatorMatrix& op, const std::string& header) {
    std::istringstream hs(header);
    std::string line;
    while (std::getline(hs, line)) os << "# " << line << "\n";
    os << "# dimension " << op.dimension() << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < op.dimension(); ++i)
        if (op.diag(i) != 0.0) os << i << " " << i << " " << op.diag(i) << "\n";
    for (const auto& t : op.upper()) os << t.row << " " << t.col << " " << t.value << "\n";
}

inline OperatorMatrix read_triplets(std::istream& is) {
    std::string line;
    std::size_t n = 0;
    bool have_dim = false;
    std::vector<Triplet> ts;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "dimension") {
                ls >> n;
                have_dim = true;
            }
            continue;
        }
        std::istringstream ls(line);
        Triplet t{};
        if (!(ls >> t.row >> t.col >> t.value)) throw ConfigError("malformed triplet line: " + line);
        ts.push_back(t);
    }
    if (!have_dim) throw ConfigError("triplet file lacks a dimension header");
    OperatorMatrix op(n, 1);
    for (std::size_t i = 0; i < n; ++i) op.set_coord(i, 0, static_cast<long>(i));
    for (const auto& t : ts) {
        if (t.row >= n || t.col >= n) throw ConfigError("triplet index out of range");
        op.add_bond(t.row, t.col, t.value);
    }
    return op;
}

inline void write_spectrum_csv(std::ostream& os, const SpectralMeasureApprox& m) {
    os << "eigenvalue,weight\n";
    os.precision(17);
    for (const auto& a : m.atoms()) os << a.x << "," << a.w << "\n";
}

}  // namespace qdl
