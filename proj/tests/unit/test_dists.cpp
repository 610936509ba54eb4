#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pqagent/dists.hpp"

using namespace pqagent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("z_priority standardizes the mixture", "[dists]") {
    const GaussianPairModel m{5.0, 4.0, 2.0, 0.5, 0.3};
    // gamma = 1 reproduces the standardized principal interest.
    CHECK_THAT(z_priority(7.0, 1.0, {1.0}, m), WithinAbs(1.0, 1e-15));
    // gamma = 0 reproduces the standardized agent interest.
    CHECK_THAT(z_priority(0.0, 4.5, {0.0}, m), WithinAbs(1.0, 1e-15));
    // gamma = 1/2, rho = 0.3: (0.5 + 0.5) / sqrt(2 * 1.3 / 4)
    CHECK_THAT(z_priority(7.0, 4.5, {0.5}, m), WithinRel(1.0 / std::sqrt(0.65), 1e-14));
}

TEST_CASE("rho_xz examples", "[dists]") {
    CHECK_THAT(rho_xz(1.0, -0.4), WithinAbs(1.0, 1e-15));
    CHECK_THAT(rho_xz(0.0, -0.4), WithinAbs(-0.4, 1e-15));
    CHECK_THAT(rho_xz(0.5, 0.0), WithinRel(std::sqrt(0.5), 1e-14));
    CHECK_THAT(rho_xz(0.7, -1.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(rho_xz(0.3, -1.0), WithinAbs(-1.0, 1e-15));
    // Direct covariance/variance computation.
    for (double g : {0.1, 0.35, 0.8}) {
        for (double r : {-0.9, -0.2, 0.0, 0.6, 1.0}) {
            const double cov = g + (1.0 - g) * r;
            const double var = g * g + (1.0 - g) * (1.0 - g) + 2.0 * g * (1.0 - g) * r;
            CHECK_THAT(rho_xz(g, r), WithinAbs(cov / std::sqrt(var), 1e-14));
        }
    }
}

TEST_CASE("degenerate rule only at gamma = 1/2, rho = -1", "[dists]") {
    CHECK(is_degenerate(0.5, -1.0));
    CHECK_FALSE(is_degenerate(0.5 + 1e-9, -1.0));
    CHECK_FALSE(is_degenerate(0.5, -1.0 + 1e-12));
    CHECK_THROWS_AS(rho_xz(0.5, -1.0), DegenerateRule);
    CHECK_THROWS_AS(z_priority(0.0, 0.0, {0.5}, GaussianPairModel{0, 0, 1, 1, -1.0}), DegenerateRule);
    CHECK_THROWS_AS(rho_xz(1.5, 0.0), DomainError);
}

TEST_CASE("Gaussian pairs have the requested correlation", "[dists]") {
    Rng rng(11);
    const GaussianPairModel m{1.0, -2.0, 2.0, 3.0, -0.6};
    const int n = 200000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const auto [x, y] = sample_gaussian_pair(m, rng);
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double mx = sx / n, my = sy / n;
    const double vx = sxx / n - mx * mx, vy = syy / n - my * my;
    CHECK_THAT(mx, WithinAbs(1.0, 0.02));
    CHECK_THAT(my, WithinAbs(-2.0, 0.03));
    CHECK_THAT(std::sqrt(vx), WithinAbs(2.0, 0.02));
    CHECK_THAT((sxy / n - mx * my) / std::sqrt(vx * vy), WithinAbs(-0.6, 0.01));
}

TEST_CASE("copula pairs have uniform marginals", "[dists]") {
    Rng rng(5);
    for (double rg : {0.0, -0.4, -0.8, -1.0}) {
        std::vector<double> u1, u2;
        for (int i = 0; i < 20000; ++i) {
            const auto [a, b] = sample_copula_pair(CopulaModel{rg}, rng);
            u1.push_back(a);
            u2.push_back(b);
        }
        for (auto* v : {&u1, &u2}) {
            std::sort(v->begin(), v->end());
            double ks = 0.0;
            for (std::size_t i = 0; i < v->size(); ++i) {
                const double f = static_cast<double>(i + 1) / static_cast<double>(v->size());
                ks = std::max(ks, std::abs(f - (*v)[i]));
            }
            // 1% critical value of the one-sample KS statistic is 1.63 / sqrt(n).
            CHECK(ks < 1.63 / std::sqrt(20000.0));
        }
    }
}

TEST_CASE("perfect diversity mirrors the interests", "[dists]") {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        const auto [a, b] = sample_copula_pair(CopulaModel{-1.0}, rng);
        CHECK_THAT(a + b, WithinAbs(1.0, 1e-15));
    }
}

TEST_CASE("copula winner density matches the derivative of the joint cdf", "[dists]") {
    for (double rg : {0.0, -0.4, -0.8, -0.95}) {
        const auto d = routed_density(RoutingScenario::copula(rg));
        CHECK_THAT(d.mass(), WithinAbs(1.0, 1e-9));
        const long double h = 1e-5L;
        for (int i = 1; i < 64; ++i) {
            const long double z = static_cast<long double>(i) / 64.0L;
            auto joint = [&](long double t) {
                return oracle::bivariate_diag_cdf(oracle::quantile(t), rg);
            };
            const double numeric = static_cast<double>((joint(z + h) - joint(z - h)) / (2.0L * h));
            CHECK_THAT(d.pdf(static_cast<double>(z)), WithinAbs(numeric, 2e-4));
        }
    }
}

TEST_CASE("copula winner density matches a Monte Carlo histogram", "[dists]") {
    Rng rng(21);
    const double rg = -0.4;
    const auto d = routed_density(RoutingScenario::copula(rg));
    const int bins = 10;
    const int n = 400000;
    std::vector<int> hist(bins, 0);
    int wins = 0;
    for (int i = 0; i < n; ++i) {
        const auto [a, b] = sample_copula_pair(CopulaModel{rg}, rng);
        if (a > b) {
            ++wins;
            ++hist[std::min(bins - 1, static_cast<int>(a * bins))];
        }
    }
    CHECK_THAT(static_cast<double>(wins) / n, WithinAbs(0.5, 0.005));
    for (int k = 0; k < bins; ++k) {
        const double expected =
            d.expect([&](double z) { return (z >= k / 10.0 && z < (k + 1) / 10.0) ? 1.0 : 0.0; }, 512);
        const double got = static_cast<double>(hist[k]) / wins;
        CHECK_THAT(got, WithinAbs(expected, 5.0 * std::sqrt(expected / wins) + 1e-3));
    }
}

TEST_CASE("quantal density", "[dists]") {
    const auto d = routed_density(RoutingScenario::quantal(0.8, 0.5));
    CHECK_THAT(d.mass(), WithinAbs(1.0, 1e-12));
    // share = 0.2 + 0.5 * 0.6 = 0.5
    CHECK_THAT(d.pdf(0.9), WithinAbs(2.0, 1e-15));
    CHECK_THAT(d.pdf(0.5), WithinAbs(1.0, 1e-15));
    CHECK(d.pdf(0.1) == 0.0);
    const auto skew = routed_density(RoutingScenario::quantal(0.8, 0.25), 1);
    CHECK_THAT(skew.mass(), WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(routed_density(RoutingScenario::quantal(1.0, 0.0), 0), UnsupportedScenario);
    const auto pd = routed_density(RoutingScenario::quantal(0.5));
    CHECK_THAT(pd.mean(), WithinAbs(0.75, 1e-12));
}

TEST_CASE("survival of a routed density", "[dists]") {
    const auto d = routed_density(RoutingScenario::independent());
    // Winner of two independent uniforms: density 2z, survival 1 - x^2.
    for (double x : {0.0, 0.2, 0.5, 0.77, 1.0}) {
        CHECK_THAT(d.survival(x), WithinAbs(1.0 - x * x, 1e-12));
    }
}
