#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cwbnlw/operator.hpp"
#include "oracles.hpp"

using namespace cwbnlw;
using namespace cwbnlw::testing;

namespace {

ProblemParams ref_params(double eps = 1e-3, double alpha = 0.05) {
    return ProblemParams::make(1, {1}, std::sqrt(2.0), alpha, eps);
}

TruncatedOperator manual_operator(const Eigen::MatrixXd& M, int N) {
    TruncatedOperator op;
    std::vector<LatticeIndex> sites;
    for (int i = 0; i < M.rows(); ++i) sites.push_back(LatticeIndex({2 + i}, 0));
    op.basis = SiteBasis::from_sites(std::move(sites));
    op.entries = M;
    op.kind = OperatorKind::T_tilde;
    op.params = ref_params();
    op.lambda = op.params.lambda0;
    op.N = N;
    op.phi = FourierField(1);
    return op;
}

}  // namespace

TEST_CASE("assemble: u = 0 gives the bare diagonal") {
    auto params = ref_params();
    ResonantSet S = resonant_set(params);
    FourierField u0(1);
    TruncatedOperator T = assemble(u0, params.lambda0, params, S, 6, OperatorKind::T);
    for (int i = 0; i < T.size(); ++i) {
        const LatticeIndex& xi = T.basis.site(i);
        double expect = -std::pow(xi.n() * params.lambda0, 2) +
                        static_cast<double>(xi.spatial_norm2()) + params.rho;
        CHECK(T.entries(i, i) == doctest::Approx(expect).epsilon(1e-15));
        for (int j = 0; j < T.size(); ++j)
            if (i != j) CHECK(T.entries(i, j) == 0.0);
    }
}

TEST_CASE("assemble: diagonal at (m0, 2) equals -3(|m0|^2 + rho)") {
    auto params = ref_params();
    ResonantSet S = resonant_set(params);
    TruncatedOperator T = assemble(FourierField(1), params.lambda0, params, S, 8, OperatorKind::T);
    auto idx = T.basis.index_of(LatticeIndex({1}, 2));
    REQUIRE(idx.has_value());
    double expect = -3.0 * (1.0 + params.rho);
    CHECK(T.entries(*idx, *idx) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("assemble: Toeplitz block matches the convolution oracle") {
    auto params = ref_params(0.1, 0.0);
    ResonantSet S = resonant_set(params);
    FourierField u(1);
    u.set_pair(LatticeIndex({1}, 1), 0.5);  // cos(x + theta)
    TruncatedOperator T = assemble(u, params.lambda0, params, S, 8, OperatorKind::T);
    auto usq = plain_convolve(as_map(u), as_map(u));
    const double e2 = params.eps * params.eps;
    for (int i = 0; i < T.size(); ++i)
        for (int j = 0; j < T.size(); ++j) {
            if (i == j) continue;
            LatticeIndex diff = T.basis.site(i) - T.basis.site(j);
            auto it = usq.find(diff);
            double expect = it == usq.end() ? 0.0 : 3.0 * e2 * it->second;
            CHECK(T.entries(i, j) == doctest::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("T~ is self-adjoint and T = Lambda T~ entrywise (randomized)") {
    auto params = ref_params(5e-2, 0.05);
    ResonantSet S = resonant_set(params);
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        FourierField u = random_field(1, 4, seed, 0.7);
        TruncatedOperator Tt = assemble(u, params.lambda0 + 0.02, params, S, 7,
                                        OperatorKind::T_tilde);
        double asym = (Tt.entries - Tt.entries.transpose()).cwiseAbs().maxCoeff();
        CHECK(asym <= 1e-12);

        TruncatedOperator T = assemble(u, params.lambda0 + 0.02, params, S, 7, OperatorKind::T);
        for (int i = 0; i < T.size(); ++i) {
            double sym = fractional_symbol(T.basis.site(i), params.alpha);
            for (int j = 0; j < T.size(); ++j)
                CHECK(std::abs(T.entries(i, j) - sym * Tt.entries(i, j)) <= 1e-12);
        }
    }
}

TEST_CASE("Toeplitz property: equal site differences give equal couplings") {
    auto params = ref_params(1e-2, 0.0);
    ResonantSet S = resonant_set(params);
    FourierField u = random_field(1, 3, 99, 0.5);
    TruncatedOperator Tt = assemble(u, params.lambda0, params, S, 9, OperatorKind::T_tilde);
    const double e2 = params.eps * params.eps;
    for (int i = 0; i < Tt.size(); ++i)
        for (int j = 0; j < Tt.size(); ++j) {
            if (i == j) continue;
            double expect = e2 * Tt.phi.at(Tt.basis.site(i) - Tt.basis.site(j));
            CHECK(Tt.entries(i, j) == expect);
        }
}

TEST_CASE("invert_with_certificate") {
    SUBCASE("identity passes with l2 norm 1") {
        auto op = manual_operator(Eigen::MatrixXd::Identity(6, 6), 16);
        auto ci = invert_with_certificate(op, 2.0, 0.3);
        CHECK(ci.cert.pass());
        CHECK(ci.cert.l2_norm == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(ci.cert.l2_bound == doctest::Approx(std::exp(std::pow(std::log(16.0), 2.0))));
    }
    SUBCASE("numerically singular diagonal fails with +inf") {
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(5, 5);
        M(2, 2) = 1e-300;
        auto ci = invert_with_certificate(manual_operator(M, 16), 2.0, 0.3);
        CHECK_FALSE(ci.cert.pass());
        CHECK(std::isinf(ci.cert.l2_norm));
    }
    SUBCASE("inverse times operator is the identity to 1e-10") {
        auto params = ref_params();
        ResonantSet S = resonant_set(params);
        FourierField u = random_field(1, 3, 17, 0.6);
        TruncatedOperator Tt = assemble(u, params.lambda0 + 0.01, params, S, 8,
                                        OperatorKind::T_tilde);
        auto ci = invert_with_certificate(Tt, 2.5, 0.04);
        REQUIRE(ci.cert.pass());
        Eigen::MatrixXd R = ci.inverse * Tt.entries -
                            Eigen::MatrixXd::Identity(Tt.size(), Tt.size());
        CHECK(operator_norm_2(R) <= 1e-10);
    }
}

TEST_CASE("certificate survives the paper's mesh-size parameter wiggle") {
    auto params = ref_params();
    ResonantSet S = resonant_set(params);
    Amplitudes amp{1.5, {0.0}};
    FourierField u0 = build_seed_field(params, S, amp);
    const int N = 8;
    const double C1 = 3.0, C2 = 2.5, c = 0.04;
    TruncatedOperator Tt = assemble(u0, params.lambda0 + 0.01, params, S, N,
                                    OperatorKind::T_tilde);
    auto ci = invert_with_certificate(Tt, C2, c);
    REQUIRE(ci.cert.pass());
    REQUIRE(ci.cert.l2_norm * 2.0 < ci.cert.l2_bound);  // strict 2x margin

    double mesh = std::exp(-std::pow(std::log(static_cast<double>(N)), C1));
    Amplitudes amp2{1.5 + 0.5 * mesh, {0.5 * mesh}};
    FourierField u2 = build_seed_field(params, S, amp2);
    TruncatedOperator Tt2 = assemble(u2, params.lambda0 + 0.01 + 0.5 * mesh, params, S, N,
                                     OperatorKind::T_tilde);
    auto ci2 = invert_with_certificate(Tt2, C2, c);
    CHECK(ci2.cert.l2_norm < 2.0 * ci.cert.l2_bound);
    CHECK(ci2.cert.worst_ratio < 2.0);
}

TEST_CASE("neumann_invert") {
    auto params = ref_params(1e-6, 0.05);
    ResonantSet S = resonant_set(params);
    const double gamma = 0.05;

    SUBCASE("u = 0: the series collapses to the bare diagonal inverse") {
        TruncatedOperator Tt = assemble(FourierField(1), params.lambda0, params, S, 8,
                                        OperatorKind::T_tilde);
        auto [X, rep] = neumann_invert(Tt, gamma);
        CHECK(rep.converged);
        for (int i = 0; i < Tt.size(); ++i)
            for (int j = 0; j < Tt.size(); ++j) {
                if (i == j)
                    CHECK(X(i, i) == 1.0 / Tt.entries(i, i));
                else
                    CHECK(X(i, j) == 0.0);
            }
    }
    SUBCASE("agrees with the dense factorization to 1e-12 and meets the bounds") {
        Amplitudes amp{1.5, {0.0}};
        FourierField u0 = build_seed_field(params, S, amp);
        TruncatedOperator Tt = assemble(u0, params.lambda0, params, S, 8,
                                        OperatorKind::T_tilde);
        auto [X, rep] = neumann_invert(Tt, gamma);
        CHECK(rep.converged);
        CHECK(rep.norm_ok);
        CHECK(rep.decay_ok);
        auto ci = invert_with_certificate(Tt, 2.5, 0.04);
        REQUIRE(ci.cert.pass());
        CHECK((X - ci.inverse).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("outside the perturbative regime") {
        // eps^2 N^{4C3+2alpha+2d} = 0.9 violates the smallness threshold.
        double expo = 4.0 * 2.0 + 2.0 * params.alpha + 2.0;
        double eps_bad = std::sqrt(0.9 / std::pow(8.0, expo));
        auto bad = ProblemParams::make(1, {1}, params.rho, params.alpha, eps_bad);
        TruncatedOperator Tt = assemble(FourierField(1), bad.lambda0, bad, S, 8,
                                        OperatorKind::T_tilde);
        CHECK_THROWS_WITH_AS(neumann_invert(Tt, gamma),
                             doctest::Contains("outside_perturbative_regime"), Error);
    }
}

TEST_CASE("offdiag_decay_profile") {
    SUBCASE("identity") {
        auto op = manual_operator(Eigen::MatrixXd::Identity(5, 5), 16);
        auto prof = offdiag_decay_profile(op.entries, op.basis);
        CHECK(prof[0] == 1.0);
        for (std::size_t s = 1; s < prof.size(); ++s) CHECK(prof[s] == 0.0);
    }
    SUBCASE("diagonal matrix has vanishing off-diagonal maxima") {
        Eigen::MatrixXd D = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0).asDiagonal();
        auto op = manual_operator(D, 16);
        auto prof = offdiag_decay_profile(op.entries, op.basis);
        for (std::size_t s = 1; s < prof.size(); ++s) CHECK(prof[s] == 0.0);
    }
}

TEST_CASE("apply_operator agrees with the assembled matrix on the basis") {
    auto params = ref_params(1e-2, 0.05);
    ResonantSet S = resonant_set(params);
    FourierField u = random_field(1, 3, 55, 0.5);
    const int N = 7;
    TruncatedOperator T = assemble(u, params.lambda0 + 0.03, params, S, N, OperatorKind::T);

    FourierField x = random_field(1, N - 1, 56);
    x = project_P(x, S.sites);
    Eigen::VectorXd xv(T.size());
    for (int i = 0; i < T.size(); ++i) xv(i) = x.at(T.basis.site(i));
    Eigen::VectorXd yv = T.entries * xv;

    FourierField y = apply_operator(T.phi, params.lambda0 + 0.03, params, S, x, OperatorKind::T);
    for (int i = 0; i < T.size(); ++i) {
        // The fieldwise operator is untruncated; inside the ball the matrix
        // row only differs by couplings to sites outside, which vanish here
        // when supp(phi * x) stays inside.
        if (T.basis.site(i).one_norm() + 2 * u.support_radius() < N)
            CHECK(y.at(T.basis.site(i)) == doctest::Approx(yv(i)).epsilon(1e-12));
    }
}

TEST_CASE("matrix dump round-trips bit for bit") {
    Eigen::MatrixXd M(3, 3);
    M << 1.5, -2.25, 3.0e-17, 0.0, 1e300, -1e-300, 7.1, 0.25, -0.125;
    std::stringstream ss;
    dump_matrix(ss, M, 1, 16);
    int kind = 0, N = 0;
    Eigen::MatrixXd R = load_matrix(ss, &kind, &N);
    CHECK(kind == 1);
    CHECK(N == 16);
    CHECK((R - M).cwiseAbs().maxCoeff() == 0.0);
}
