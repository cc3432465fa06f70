#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdlab/quantum_dynamics.hpp"

using namespace qdl;

namespace {
Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed) {
    Stream st(seed, {static_cast<std::uint64_t>(n)});
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(st.normal(), st.normal());
    return 0.5 * (A + A.adjoint());
}

StateVector random_state(int n, std::uint64_t seed) {
    Stream st(seed, {7});
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(st.normal(), st.normal());
    return StateVector(v, true);
}
}  // namespace

TEST(Evolve, TimeZeroIsIdentity) {
    auto op = free_chain(21, 10);
    auto psi = StateVector::delta(21, 10);
    EXPECT_EQ((evolve(op, psi, 0.0).amplitudes() - psi.amplitudes()).norm(), 0.0);
}

TEST(Evolve, EigenvectorPicksUpPhase) {
    auto op = free_chain(30);
    auto es = eigensystem(op);
    Eigen::VectorXcd v = es.V.col(4).cast<cplx>();
    StateVector psi(v, true);
    for (double t : {0.5, 3.0, 40.0}) {
        auto out = evolve(es, psi, t);
        cplx ov = psi.amplitudes().dot(out.amplitudes());
        EXPECT_NEAR(std::abs(ov), 1.0, 1e-12);
        EXPECT_NEAR(std::arg(ov), std::arg(std::polar(1.0, -es.E(4) * t)), 1e-9);
    }
}

TEST(Evolve, FreeChainMatchesExpmAndBessel) {
    const int n = 201;
    auto op = free_chain(n, 100);
    auto psi = StateVector::delta(n, 100);
    const double t = 12.0;
    auto out = evolve(op, psi, t);
    Eigen::MatrixXcd U = (cplx(0, -t) * op.to_dense().cast<cplx>()).exp();
    EXPECT_LT((U.col(100) - out.amplitudes()).cwiseAbs().maxCoeff(), 1e-8);
    // On Z: <x| e^{-itΔ} |0> = (-i)^x J_x(2t).
    for (int x : {0, 1, 5, 17}) EXPECT_NEAR(std::abs(out.amplitudes()(100 + x)), std::abs(std::cyl_bessel_j(x, 2 * t)), 1e-8);
}

TEST(Evolve, UnnormalizedStateRejected) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(4);
    EXPECT_THROW(StateVector{v}, DomainError);
    EXPECT_THROW(evolve(free_chain(5), StateVector::delta(4, 0), 1.0), DomainError);
}

TEST(Sojourn, StationaryStateGrowsLinearly) {
    auto op = free_chain(20);
    auto es = eigensystem(op);
    StateVector psi(es.V.col(3).cast<cplx>(), true);
    std::vector<std::size_t> S{2, 3, 4};
    double w = 0;
    for (auto x : S) w += es.V(x, 3) * es.V(x, 3);
    auto r = sojourn_time(es, psi, S, 500.0);
    EXPECT_NEAR(r.value, 2.0 * 500.0 * w, 1e-8);
    EXPECT_TRUE(r.linear_growth);
}

TEST(Sojourn, BlockSeparatedIsZero) {
    OperatorMatrix op(6, 1);
    op.push_bond(0, 1, 1.0);
    op.push_bond(1, 2, 1.0);
    op.push_bond(3, 4, 1.0);
    op.push_bond(4, 5, 1.0);
    auto es = eigensystem(op);
    auto r = sojourn_time(es, StateVector::delta(6, 1), {3, 4, 5}, 100.0);
    EXPECT_NEAR(r.value, 0.0, 1e-12);
    EXPECT_THROW(sojourn_time(es, StateVector::delta(6, 1), {}, 1.0), DomainError);
}

TEST(Sojourn, FreeChainOddStateConverges) {
    const int n = 801;
    auto op = free_chain(n, 400);
    auto es = eigensystem(op);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    v(399) = -1.0 / std::sqrt(2.0);
    v(401) = 1.0 / std::sqrt(2.0);
    StateVector psi(v);
    auto a = sojourn_time(es, psi, {401}, 50.0), b = sojourn_time(es, psi, {401}, 150.0);
    EXPECT_FALSE(b.linear_growth);
    EXPECT_LT(std::abs(b.value - a.value), 0.02 * b.value);
    // Direct quadrature oracle for the closed form.
    auto c = es.coefficients(psi);
    auto q = integrate(
        [&](double t) { return 2.0 * probabilities_at(es, c, t)(401); }, 0.0, 50.0, 1e-10, 64);
    EXPECT_NEAR(a.value, q.value, 1e-7);
}

TEST(Moments, EigenvectorIsStationary) {
    auto op = free_chain(40, 20);
    auto es = eigensystem(op);
    StateVector psi(es.V.col(10).cast<cplx>(), true);
    auto s = moments(es, op, psi, 2.0, {0.0, 1.0, 10.0, 100.0});
    for (double v : s.values) EXPECT_NEAR(v, s.values[0], 1e-9);
}

TEST(Moments, FreeChainBallistic) {
    const int n = 801;
    auto op = free_chain(n, 400);
    auto es = eigensystem(op);
    auto psi = StateVector::delta(n, 400);
    std::vector<double> t;
    for (double x = 10; x <= 100.0 + 1e-9; x *= std::pow(10.0, 0.1)) t.push_back(x);
    auto s2 = moments(es, op, psi, 2.0, t);
    EXPECT_NEAR(s2.values.back() / (t.back() * t.back()), 2.0, 0.02);
    auto s1 = moments(es, op, psi, 1.0, t);
    EXPECT_NEAR(fit_loglog(t, s1.values).slope, 1.0, 0.05);
}

TEST(Moments, CesaroAverageMatchesQuadrature) {
    auto H = random_hermitian(12, 9);
    ComplexEigensystem es(H);
    auto psi = random_state(12, 10);
    auto c = es.coefficients(psi);
    Eigen::VectorXd w(12);
    for (int x = 0; x < 12; ++x) w(x) = x * x;
    std::vector<double> T{0.0, 0.7, 5.0, 40.0};
    auto avg = cesaro_moments(es, c, w, T);
    EXPECT_NEAR(avg[0], probabilities_at(es, c, 0.0).dot(w), 1e-10);
    for (std::size_t i = 1; i < T.size(); ++i) {
        // Composite Simpson on a fine grid.
        const int m = 20000;
        const double h = T[i] / m;
        double acc = 0;
        for (int j = 0; j <= m; ++j) {
            double wt = (j == 0 || j == m) ? 1 : (j % 2 ? 4 : 2);
            acc += wt * probabilities_at(es, c, j * h).dot(w);
        }
        EXPECT_NEAR(avg[i], acc * h / 3 / T[i], 1e-8) << T[i];
    }
}

TEST(DiffusionExponents, SyntheticSeries) {
    TransportSeries bal, flat;
    for (double x = 1; x <= 1000; x *= 1.2) {
        bal.times.push_back(x);
        bal.values.push_back(3.0 * x * x);
        flat.times.push_back(x);
        flat.values.push_back(5.0);
    }
    auto b = diffusion_exponents(bal, 2.0);
    EXPECT_NEAR(b.beta_minus, 1.0, 1e-9);
    EXPECT_NEAR(b.beta_plus, 1.0, 1e-9);
    auto f = diffusion_exponents(flat, 2.0);
    EXPECT_NEAR(f.beta_minus, 0.0, 1e-12);
    EXPECT_NEAR(f.beta_plus, 0.0, 1e-12);
    TransportSeries shortS;
    shortS.times = {1, 2, 3};
    shortS.values = {1, 1, 1};
    EXPECT_THROW(diffusion_exponents(shortS, 2.0), FitError);
}

TEST(DiffusionExponents, FreeChainMeasured) {
    const int n = 1201;
    auto op = free_chain(n, 600);
    auto es = eigensystem(op);
    auto psi = StateVector::delta(n, 600);
    std::vector<double> t;
    for (double x = 1; x <= 250.0; x *= 1.05) t.push_back(x);
    auto s = moments(es, op, psi, 2.0, t);
    auto d = diffusion_exponents(s, 2.0);
    EXPECT_NEAR(d.beta_minus, 1.0, 0.05);
    EXPECT_NEAR(d.beta_plus, 1.0, 0.05);
    EXPECT_LE(d.beta_minus, d.beta_plus);
}

TEST(ResolventTransport, OneByOne) {
    Eigen::MatrixXcd H(1, 1);
    H(0, 0) = 0.7;
    ComplexEigensystem es(H);
    Eigen::VectorXcd v(1);
    v(0) = 1.0;
    auto r = resolvent_transport(es, StateVector(v), 0.1, 0);
    EXPECT_NEAR(r.time_side, 1.0, 1e-9);
    EXPECT_NEAR(r.energy_side, 1.0, 1e-9);
    EXPECT_NEAR(r.closed_form, 1.0, 1e-14);
}

TEST(ResolventTransport, RandomHermitianBothSidesAgree) {
    auto H = random_hermitian(50, 3);
    ComplexEigensystem es(H);
    auto psi = random_state(50, 4);
    double total = 0;
    for (std::size_t x = 0; x < 50; ++x) {
        auto r = resolvent_transport(es, psi, 0.1, x);
        EXPECT_LT(r.difference, 1e-6) << x;
        EXPECT_NEAR(r.time_side, r.closed_form, 1e-8);
        total += r.energy_side;
    }
    EXPECT_NEAR(total, 1.0, 1e-8);
}

TEST(TransportProfile, EigenvectorHasZeroExponent) {
    auto op = free_chain(61, 30);
    auto es = eigensystem(op);
    StateVector psi(es.V.col(20).cast<cplx>(), true);
    auto rep = transport_profile(op, psi, {0.4, 0.2, 0.1, 0.05}, 1.0);
    for (double m : rep.M_hat) EXPECT_NEAR(m, rep.M_hat[0], 1e-6 * rep.M_hat[0]);
    EXPECT_NEAR(rep.r, 0.0, 1e-5);
    for (double tm : rep.total_mass) EXPECT_NEAR(tm, 1.0, 1e-8);
}

TEST(TransportProfile, FreeChainBallistic) {
    const int n = 2001;
    auto op = free_chain(n, 1000);
    auto rep = transport_profile(op, StateVector::delta(n, 1000), {0.04, 0.02, 0.01}, 1.0);
    EXPECT_NEAR(rep.r, 1.0, 0.1);
}

TEST(TransportProfile, ProfileMatchesPerSiteFormula) {
    AndersonSpec s;
    s.box_side = 40;
    s.v = 1.5;
    s.seed = {6, 0};
    auto op = build_anderson(s);
    auto es = eigensystem(op);
    auto psi = StateVector::delta(40, 20);
    const double eta = 0.2;
    auto P = resolvent_profile(op, psi, eta, 0.0, 2.0 + 1.5);
    for (std::size_t x : {0u, 15u, 20u, 33u}) EXPECT_NEAR(P[x], resolvent_transport(es, psi, eta, x).closed_form, 1e-9);
}
