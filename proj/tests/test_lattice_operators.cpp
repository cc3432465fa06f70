#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdlab/lattice_operators.hpp"

using namespace qdl;

namespace {
Eigen::VectorXd sorted_eigs(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}
}  // namespace

TEST(SparseJacobi, DeterministicCenters) {
    auto a = barrier_centers(2, 40);
    ASSERT_GE(a.size(), 4u);
    EXPECT_EQ(a[0], 1);
    EXPECT_EQ(a[1], 5);
    EXPECT_EQ(a[2], 13);
    EXPECT_EQ(a[3], 29);
    // a_1 + 1 = beta and successive gaps beta^j, for beta = 3 as well.
    auto b = barrier_centers(3, 1000);
    EXPECT_EQ(b[0] + 1, 3);
    for (std::size_t j = 1; j < b.size(); ++j) EXPECT_EQ(b[j] - b[j - 1], std::lround(std::pow(3.0, j + 1)));
}

TEST(SparseJacobi, BarrierCountClosedForm) {
    const long R = 10000;
    // Closed form a_j = 2^{j+1} - 3 counted directly.
    long direct = 0;
    for (long j = 1; (1L << (j + 1)) - 3 <= R; ++j) ++direct;
    EXPECT_EQ(direct, 12);
    EXPECT_EQ(barrier_count(2, R), 12u);
    EXPECT_EQ(static_cast<long>(std::floor(std::log2(R + 3.0))) - 1, 12);
}

TEST(SparseJacobi, DensityVanishes) {
    for (long R : {100L, 1000L, 100000L, 10000000L})
        EXPECT_LE(static_cast<double>(barrier_count(2, R)), std::log2(static_cast<double>(R)) + 1);
}

TEST(SparseJacobi, ZeroBarrierIsFree) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SparseJacobiSpec s;
        s.v = 0;
        s.n_max = 50;
        s.phi = pi / 2;
        s.seed = {seed, 0};
        auto op = build_sparse_jacobi(s);
        for (double d : op.diagonal()) EXPECT_EQ(d, 0.0);
        EXPECT_TRUE(op.is_tridiagonal());
        for (double e : op.subdiagonal()) EXPECT_EQ(e, 1.0);
    }
}

TEST(SparseJacobi, PositionsWithinWindow) {
    SparseJacobiSpec s;
    s.n_max = 10000;
    s.seed = {7, 3};
    auto c = barrier_centers(2, s.n_max);
    auto p = barrier_positions(s);
    ASSERT_EQ(p.size(), c.size());
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_LE(std::abs(p[k] - c[k]), static_cast<long>(k + 1));
}

TEST(SparseJacobi, TooSmallIsSizeError) {
    SparseJacobiSpec s;
    s.n_max = 2;
    EXPECT_THROW(build_sparse_jacobi(s), SizeError);
}

TEST(Anderson, FreePeriodicRing) {
    AndersonSpec s;
    s.dim = 1;
    s.box_side = 5;
    s.periodic = true;
    auto ev = sorted_eigs(build_anderson(s).to_dense());
    std::vector<double> want;
    for (int k = 0; k < 5; ++k) want.push_back(2 * std::cos(2 * pi * k / 5));
    std::sort(want.begin(), want.end());
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(ev(k), want[k], 1e-12);
}

TEST(Anderson, TwoDimensionalIsSeparable) {
    AndersonSpec s1;
    s1.box_side = 4;
    AndersonSpec s2 = s1;
    s2.dim = 2;
    auto e1 = sorted_eigs(build_anderson(s1).to_dense());
    auto e2 = sorted_eigs(build_anderson(s2).to_dense());
    std::vector<double> sums;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) sums.push_back(e1(i) + e1(j));
    std::sort(sums.begin(), sums.end());
    for (int k = 0; k < 16; ++k) EXPECT_NEAR(e2(k), sums[k], 1e-12);
}

TEST(Anderson, SpectrumInsideBandPlusSupport) {
    AndersonSpec s;
    s.box_side = 2000;
    s.v = 2;
    s.seed = {4, 0};
    auto op = build_anderson(s);
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(op.diagonal().data(), op.dimension());
    auto sd = op.subdiagonal();
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(sd.data(), sd.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -4.0);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 4.0);
}

TEST(Anderson, SymmetricAndPeriodicL2) {
    AndersonSpec s;
    s.dim = 3;
    s.box_side = 2;
    s.periodic = true;
    s.v = 1;
    auto op = build_anderson(s);
    EXPECT_TRUE(is_symmetric(op));
    // L = 2 periodic doubles every bond.
    auto m = op.to_dense();
    EXPECT_EQ(m(0, 1), 2.0);
}

TEST(Anderson, SiteCap) {
    AndersonSpec s;
    s.dim = 3;
    s.box_side = 1000;
    EXPECT_THROW(build_anderson(s), SizeError);
}

TEST(AlmostMathieu, Cases) {
    AlmostMathieuSpec s;
    s.n_max = 64;
    auto free = build_almost_mathieu(s);
    for (double d : free.diagonal()) EXPECT_EQ(d, 0.0);
    s.lambda = 2;
    auto op = build_almost_mathieu(s);
    for (double d : op.diagonal()) EXPECT_LE(std::abs(d), 2.0);
    auto ev = sorted_eigs(op.to_dense());
    EXPECT_GE(ev.minCoeff(), -4.0 - 1e-12);
    EXPECT_LE(ev.maxCoeff(), 4.0 + 1e-12);
}

TEST(MobilityEdges, Values) {
    auto e = mobility_edges(2, 1.0);
    ASSERT_TRUE(e);
    EXPECT_NEAR(e->upper, std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(e->lower, -std::sqrt(3.0), 1e-15);
    auto tiny = mobility_edges(2, 1e-8);
    ASSERT_TRUE(tiny);
    EXPECT_NEAR(tiny->upper, 2.0, 1e-12);
    EXPECT_FALSE(mobility_edges(2, 2.0));
    EXPECT_THROW(mobility_edges(2, 0.0), DomainError);
    EXPECT_THROW(mobility_edges(2, -1.0), DomainError);
}

TEST(MobilityEdges, Classification) {
    SparseJacobiSpec s;
    EXPECT_EQ(classify_energy(s, 0.0), SpectralZone::sc_zone);
    EXPECT_EQ(classify_energy(s, 1.9), SpectralZone::pp_zone);
    EXPECT_EQ(classify_energy(s, std::sqrt(3.0)), SpectralZone::edge);
    EXPECT_THROW(classify_energy(s, 2.0), DomainError);
    for (double l = -1.95; l < 1.96; l += 0.05) EXPECT_EQ(classify_energy(s, l), classify_energy(s, -l));
}

TEST(Transfer, FreeBandCenterHasPeriodFour) {
    std::vector<double> pot(8, 0.0);
    auto r = transfer_product(pot, 0.0, 0, 4);
    EXPECT_EQ(r.log_scale, 0.0);
    EXPECT_NEAR(r.product[0], 1.0, 1e-15);
    EXPECT_NEAR(r.product[1], 0.0, 1e-15);
    EXPECT_NEAR(r.product[2], 0.0, 1e-15);
    EXPECT_NEAR(r.product[3], 1.0, 1e-15);
}

TEST(Transfer, OutsideBandGrowthRate) {
    std::vector<double> pot(20000, 0.0);
    auto r = transfer_product(pot, 3.0, 0, pot.size());
    double lg = (r.log_scale + std::log(mat2_norm(r.product))) / pot.size();
    EXPECT_NEAR(lg, std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);
}

TEST(Transfer, SingleBarrierMatchesDirectMultiply) {
    std::vector<double> pot(40, 0.0);
    pot[17] = 0.5;
    const double lam = 0.7;
    auto r = transfer_product(pot, lam, 3, 31);
    Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
    for (int n = 3; n < 31; ++n) {
        Eigen::Matrix2d M;
        M << lam - pot[n], -1, 1, 0;
        P = M * P;
    }
    double s = std::exp(r.log_scale);
    EXPECT_NEAR(r.product[0] * s, P(0, 0), 1e-12);
    EXPECT_NEAR(r.product[1] * s, P(0, 1), 1e-12);
    EXPECT_NEAR(r.product[2] * s, P(1, 0), 1e-12);
    EXPECT_NEAR(r.product[3] * s, P(1, 1), 1e-12);
}

TEST(Transfer, SolvesRecurrence) {
    SparseJacobiSpec s;
    s.n_max = 200;
    s.seed = {2, 1};
    auto pot = sparse_potential(s);
    const double lam = 1.1;
    double u = 0.3, um = -0.8;
    auto r = transfer_product(pot, lam, 0, 150);
    for (int n = 0; n < 150; ++n) {
        double up = (lam - pot[n]) * u - um;
        um = u;
        u = up;
    }
    double sc = std::exp(r.log_scale);
    EXPECT_NEAR((r.product[0] * 0.3 + r.product[1] * -0.8) * sc, u, 1e-9 * std::max(1.0, std::abs(u)));
}

TEST(Kronecker, ThetaZeroGivesFirstComponent) {
    KroneckerSumSpec k;
    k.spec_a.seed = {1, 0};
    k.spec_b.seed = {2, 0};
    k.theta = 0;
    KroneckerFuel f{30, 20, 100000};
    auto m = kronecker_spectrum(k, f);
    SparseJacobiSpec a = k.spec_a;
    a.n_max = 30;
    auto ma = spectral_data(build_sparse_jacobi(a), 0);
    for (double t : {0.3, 1.7, 5.0}) EXPECT_NEAR(std::abs(fs_transform(m, t) - fs_transform(ma, t)), 0.0, 1e-12);
}

TEST(Kronecker, FreeComponentsSupport) {
    KroneckerSumSpec k;
    k.spec_a.v = 0;
    k.spec_b.v = 0;
    k.spec_a.phi = k.spec_b.phi = pi / 2;
    KroneckerFuel f{25, 25, 100000};
    auto m = kronecker_spectrum(k, f);
    for (const auto& a : m.atoms()) {
        EXPECT_GE(a.x, -4.0);
        EXPECT_LE(a.x, 4.0);
    }
    EXPECT_NEAR(m.total_mass(), 1.0, 1e-12);
}

TEST(Kronecker, FactorizationAgainstDenseEvolution) {
    KroneckerSumSpec k;
    k.spec_a.seed = {3, 0};
    k.spec_b.seed = {4, 0};
    k.spec_b.v = 0.5;
    k.theta = 0.6;
    KroneckerFuel f{14, 12, 100000};
    SparseJacobiSpec a = k.spec_a, b = k.spec_b;
    a.n_max = 14;
    b.n_max = 12;
    auto A = build_sparse_jacobi(a), B = build_sparse_jacobi(b);
    auto ma = spectral_data(A, 0), mb = spectral_data(B, 0);
    auto m = kronecker_spectrum(k, f);
    Eigen::MatrixXd M = kronecker_dense(A, B, k.theta);
    for (double t : {0.0, 0.5, 1.3, 4.0, 9.0}) {
        Eigen::MatrixXcd U = (std::complex<double>(0, -t) * M.cast<std::complex<double>>()).exp();
        std::complex<double> direct = U(0, 0);
        EXPECT_LT(std::abs(fs_transform(m, t) - fs_transform(ma, t) * fs_transform(mb, k.theta * t)), 1e-12);
        EXPECT_LT(std::abs(direct - fs_transform(m, t)), 1e-10);
    }
}

TEST(Kronecker, CapIsSizeError) {
    KroneckerSumSpec k;
    KroneckerFuel f{100, 100, 5000};
    EXPECT_THROW(kronecker_spectrum(k, f), SizeError);
}

TEST(Export, TripletRoundTrip) {
    AndersonSpec s;
    s.dim = 2;
    s.box_side = 3;
    s.v = 1.5;
    s.seed = {9, 9};
    auto op = build_anderson(s);
    std::stringstream ss;
    write_triplets(ss, op, "anderson d=2 L=3\nseed=9");
    auto back = read_triplets(ss);
    EXPECT_EQ((back.to_dense() - op.to_dense()).norm(), 0.0);
}

TEST(Classifier, EnvelopeGrowthTracksCriterion) {
    SparseJacobiSpec s;
    s.n_max = 10000;
    s.seed = {5, 0};
    auto deep_sc = decay_contrast(s, 0.0, 24);
    auto deep_pp = decay_contrast(s, 1.9, 24);
    EXPECT_EQ(deep_sc.verdict, SpectralZone::sc_zone);
    EXPECT_EQ(deep_pp.verdict, SpectralZone::pp_zone);
    // Expected per-barrier growth of log rho: log(1 + v^2 / (4 - lambda^2)).
    EXPECT_NEAR(deep_pp.growth, std::log(1.0 + 1.0 / (4.0 - 1.9 * 1.9)), 6 * deep_pp.growth_se + 0.05);
}
