#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cwbnlw/fourier_field.hpp"
#include "cwbnlw/problem.hpp"
#include "oracles.hpp"

using namespace cwbnlw;
using namespace cwbnlw::testing;

TEST_CASE("one_norm") {
    CHECK(one_norm(LatticeIndex({2, -1}, 3)) == 6);
    CHECK(one_norm(LatticeIndex({0, 0}, 0)) == 0);
    CHECK(one_norm(LatticeIndex({5}, -5)) == 10);
}

TEST_CASE("resonant set enumeration") {
    SUBCASE("d=1, m0=1") {
        auto params = ProblemParams::make(1, {1}, std::sqrt(2.0), 0.0, 0.0);
        ResonantSet S = resonant_set(params);
        CHECK(S.b == 2);
        CHECK(S.sites.size() == 4);
        CHECK(S.contains(LatticeIndex({1}, 1)));
        CHECK(S.contains(LatticeIndex({1}, -1)));
        CHECK(S.contains(LatticeIndex({-1}, 1)));
        CHECK(S.contains(LatticeIndex({-1}, -1)));
    }
    SUBCASE("d=2, m0=(1,0)") {
        auto params = ProblemParams::make(2, {1, 0}, std::sqrt(2.0), 0.0, 0.0);
        ResonantSet S = resonant_set(params);
        CHECK(S.b == 4);
        CHECK(S.sites.size() == 8);
    }
    SUBCASE("d=2, m0=(2,1): brute-force count of |m|^2 = 5") {
        auto params = ProblemParams::make(2, {2, 1}, std::sqrt(2.0), 0.0, 0.0);
        ResonantSet S = resonant_set(params);
        int count = 0;
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; ++b)
                if (a * a + b * b == 5) ++count;
        CHECK(S.b == count);
        CHECK(S.b == 8);
        CHECK(S.sites.size() == 16);
    }
}

TEST_CASE("apply_fractional") {
    SUBCASE("<(1,0)> = sqrt(2), alpha = 1") {
        FourierField f(2);
        f.set_pair(LatticeIndex({1, 0}, 0), 0.5);
        FourierField g = apply_fractional(f, 1.0);
        CHECK(g.at(LatticeIndex({1, 0}, 0)) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-15));
        CHECK(g.at(LatticeIndex({-1, 0}, 0)) == g.at(LatticeIndex({1, 0}, 0)));
    }
    SUBCASE("alpha = 0 is the identity") {
        FourierField f = random_field(2, 4, 11);
        FourierField g = apply_fractional(f, 0.0);
        for (const auto& [xi, v] : f.coeffs()) CHECK(g.at(xi) == v);
        CHECK(g.size() == f.size());
    }
    SUBCASE("cos(m0 x + theta), alpha = 0.05") {
        FourierField f(1);
        f.set_pair(LatticeIndex({1}, 1), 0.5);
        FourierField g = apply_fractional(f, 0.05);
        double expect = 0.5 * std::pow(2.0, 0.025);
        CHECK(g.at(LatticeIndex({1}, 1)) == doctest::Approx(expect).epsilon(1e-15));
        CHECK(g.at(LatticeIndex({-1}, -1)) == g.at(LatticeIndex({1}, 1)));
    }
}

TEST_CASE("pointwise_cube basics") {
    SUBCASE("cos^3 x identity") {
        FourierField f(1);
        f.set_pair(LatticeIndex({1}, 0), 0.5);
        FourierField g = pointwise_cube(f);
        CHECK(g.at(LatticeIndex({1}, 0)) == doctest::Approx(0.375).epsilon(1e-15));
        CHECK(g.at(LatticeIndex({3}, 0)) == doctest::Approx(0.125).epsilon(1e-15));
        CHECK(g.size() == 4);
    }
    SUBCASE("cube of zero") {
        FourierField f(1);
        CHECK(pointwise_cube(f).empty());
    }
    SUBCASE("two-mode field vs dense convolution oracle") {
        FourierField f(1);
        f.set_pair(LatticeIndex({1}, 0), 0.5);
        f.set_pair(LatticeIndex({2}, 0), 0.05);
        FourierField g = pointwise_cube(f);
        auto oracle = plain_cube(f);
        for (const auto& [xi, v] : oracle) {
            if (v == 0.0) continue;
            CHECK(g.at(xi) == doctest::Approx(v).epsilon(1e-14));
        }
    }
    SUBCASE("support cap overflow") {
        FourierField f(1);
        f.set_pair(LatticeIndex({40}, 0), 1.0);
        FieldOptions opt;
        opt.support_cap = 100;
        CHECK_THROWS_WITH_AS(pointwise_cube(f, opt), doctest::Contains("support_exceeded"),
                             Error);
    }
}

TEST_CASE("cube: triple-loop oracle at 1e-13 relative, supports up to radius 8") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        FourierField f = random_field(1, 8, seed);
        FourierField g = pointwise_cube(f);
        auto oracle = plain_cube(f);
        double scale = 0.0;
        for (const auto& [xi, v] : oracle) scale = std::max(scale, std::abs(v));
        for (const auto& [xi, v] : oracle)
            CHECK(std::abs(g.at(xi) - v) <= 1e-13 * scale);
    }
}

TEST_CASE("cube: FFT path agrees with direct convolution to 1e-12") {
    FieldOptions direct_opt, fft_opt;
    direct_opt.fft_threshold = 1u << 30;
    fft_opt.fft_threshold = 0;
    for (int d : {1, 2}) {
        for (std::uint64_t seed : {7u, 8u, 9u}) {
            FourierField f = random_field(d, d == 1 ? 10 : 5, seed);
            FourierField a = pointwise_cube(f, direct_opt);
            FourierField b = pointwise_cube(f, fft_opt);
            double scale = std::max(1e-300, sup_norm(a));
            for (const auto& [xi, v] : a.coeffs())
                CHECK(std::abs(b.at(xi) - v) <= 1e-12 * scale);
            for (const auto& [xi, v] : b.coeffs())
                CHECK(std::abs(a.at(xi) - v) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("gevrey_weighted_sum") {
    auto params = ProblemParams::make(1, {1}, std::sqrt(2.0), 0.0, 0.0);
    ResonantSet S = resonant_set(params);
    SUBCASE("zero field") { CHECK(gevrey_weighted_sum(FourierField(1), 0.5) == 0.0); }
    SUBCASE("single pair, |xi|_1 = 2, c = 0.5") {
        FourierField f(1);
        f.set_pair(LatticeIndex({1}, 1), 0.5);
        double expect = 2 * 0.5 * std::exp(std::sqrt(2.0));  // both pair members counted
        CHECK(gevrey_weighted_sum(f, 0.5) == doctest::Approx(expect).epsilon(1e-15));
    }
    SUBCASE("seed field with exclusion of S") {
        FourierField u0 = build_seed_field(params, S, Amplitudes{1.0, {0.0}});
        CHECK(gevrey_weighted_sum(u0, 0.1, S.sites) == 0.0);
    }
    SUBCASE("monotone under coefficientwise domination") {
        FourierField f = random_field(1, 6, 21);
        FourierField g(1);
        std::mt19937_64 rng(22);
        for (const auto& xi : f.canonical_sites())
            g.set_pair(xi, f.at(xi) * uniform01(rng));
        CHECK(gevrey_weighted_sum(g, 0.3) <= gevrey_weighted_sum(f, 0.3) + 1e-18);
    }
}

TEST_CASE("projections") {
    auto params = ProblemParams::make(1, {1}, std::sqrt(2.0), 0.0, 0.0);
    ResonantSet S = resonant_set(params);
    SUBCASE("field on S projects to zero") {
        FourierField u0 = build_seed_field(params, S, Amplitudes{1.3, {0.2}});
        CHECK(project_P(u0, S.sites).empty());
    }
    SUBCASE("Gamma_N with N=1 keeps only the origin") {
        FourierField f(1);
        f.set_pair(LatticeIndex({0}, 0), 2.0);
        f.set_pair(LatticeIndex({3}, 0), 1.0);
        FourierField g = project_N(f, S.sites, 1);
        CHECK(g.size() == 1);
        CHECK(g.at(LatticeIndex({0}, 0)) == 2.0);
    }
    SUBCASE("partition identity Gamma_P + Gamma_Q = id, exact") {
        for (std::uint64_t seed : {31u, 32u, 33u}) {
            FourierField f = random_field(1, 5, seed);
            FourierField p = project_P(f, S.sites);
            FourierField q = project_Q(f, S.sites);
            for (const auto& [xi, v] : f.coeffs()) CHECK(p.at(xi) + q.at(xi) == v);
            CHECK(p.size() + q.size() == f.size());
        }
    }
}

TEST_CASE("symmetry closure under all operations (randomized)") {
    auto params = ProblemParams::make(2, {1, 0}, std::sqrt(2.0), 0.05, 1e-2);
    ResonantSet S = resonant_set(params);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        FourierField f = random_field(2, 4, 100 + seed);
        CHECK(f.symmetry_ok());
        CHECK(apply_fractional(f, 0.3).symmetry_ok());
        CHECK(pointwise_cube(f).symmetry_ok());
        CHECK(project_P(f, S.sites).symmetry_ok());
        CHECK(project_ball(f, 3).symmetry_ok());
        FourierField g = random_field(2, 3, 200 + seed);
        CHECK(convolve(f, g).symmetry_ok());
    }
}

TEST_CASE("fractional derivative commutes with projections, exactly") {
    auto params = ProblemParams::make(1, {2}, std::sqrt(2.0), 0.0, 0.0);
    ResonantSet S = resonant_set(params);
    for (std::uint64_t seed : {41u, 42u}) {
        FourierField f = random_field(1, 6, seed);
        FourierField a = apply_fractional(project_P(f, S.sites), 0.4);
        FourierField b = project_P(apply_fractional(f, 0.4), S.sites);
        CHECK(a.size() == b.size());
        for (const auto& [xi, v] : a.coeffs()) CHECK(b.at(xi) == v);
    }
}

TEST_CASE("field JSON pair representation round-trips") {
    FourierField f = random_field(2, 4, 77);
    CHECK(f.symmetry_ok());
    // canonical_sites lists exactly one representative per pair
    std::size_t pairs = 0;
    for (const auto& xi : f.canonical_sites()) pairs += xi.is_zero() ? 1 : 2;
    CHECK(pairs == f.size());
}
