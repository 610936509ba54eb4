#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pqagent/analytic.hpp"

using namespace pqagent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("sojourn formulas agree with the slot-recursion derivation", "[analytic]") {
    for (double mu : {0.3, 0.6, 0.9, 1.0}) {
        for (double f : {0.0, 0.1, 0.5, 0.95}) {
            const double lz = f * mu;
            const double geo = static_cast<double>(oracle::sojourn_geo(lz, mu));
            CHECK_THAT(expected_sojourn_poisson_geo(lz, mu), WithinRel(geo, 1e-12));
            CHECK_THAT(expected_sojourn_poisson(lz, mu, (1.0 - mu) / (mu * mu)), WithinRel(geo, 1e-12));
            for (double var : {0.0, 0.7, 3.35}) {
                const double es = 1.0 / mu;
                const double ref = static_cast<double>(oracle::sojourn(lz, es, var + es * es));
                CHECK_THAT(expected_sojourn_poisson(lz, mu, var), WithinRel(ref, 1e-12));
                if (lz > 0.0) {
                    CHECK_THAT(expected_sojourn_general(lz, mu, lz, var), WithinRel(ref, 1e-12));
                }
            }
        }
    }
    CHECK_THAT(expected_sojourn_general(0.0, 0.5, 0.0, 2.0), WithinAbs(2.0, 1e-15));
    CHECK_THAT(expected_sojourn_poisson_geo(0.0, 0.5), WithinAbs(2.0, 1e-15));
}

TEST_CASE("sojourn inputs are checked", "[analytic]") {
    CHECK_THROWS_AS(expected_sojourn_poisson_geo(0.6, 0.6), StabilityViolation);
    CHECK_THROWS_AS(expected_sojourn_poisson_geo(-0.1, 0.6), DomainError);
    CHECK_THROWS_AS(expected_sojourn_poisson_geo(0.1, 1.2), DomainError);
    CHECK_THROWS_AS(expected_sojourn_poisson(0.1, 0.6, -1.0), DomainError);
}

TEST_CASE("c1 matches Simpson and Monte Carlo references", "[analytic]") {
    const double lambda = 0.4;
    const double mu = 0.6;
    const double c1 = c1_integral(lambda, mu);
    const long double ref = oracle::simpson(
        [&](long double z) { return oracle::pdf(z) * z * oracle::sojourn_geo(lambda * oracle::upper_tail(z), mu); },
        -10.0L, 10.0L, 4000);
    CHECK_THAT(c1, WithinRel(static_cast<double>(ref), 1e-9));
    CHECK(c1 < 0.0);

    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    const int n = 2000000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = normal(rng);
        const double v = z * static_cast<double>(oracle::sojourn_geo(lambda * 0.5 * std::erfc(z / std::sqrt(2.0)), mu));
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK_THAT(c1, WithinAbs(mean, 4.0 * se));
}

TEST_CASE("c1 vanishes as the load vanishes", "[analytic]") {
    CHECK(std::abs(c1_integral(1e-6, 0.9)) < 1e-5);
    CHECK(std::abs(c1_integral(1e-3, 0.9)) < std::abs(c1_integral(0.1, 0.9)));
    CHECK_THROWS_AS(c1_integral(0.6, 0.6), StabilityViolation);
    CHECK_THROWS_AS(c1_integral(0.0, 0.6), DomainError);
}

TEST_CASE("quadrature refinement changes c1 by less than 1e-10", "[analytic]") {
    const Accuracy acc{};
    const double a = c1_integral(0.4, 0.6, acc);
    const double b = c1_integral(0.4, 0.6, acc.refined());
    CHECK_THAT(a, WithinAbs(b, 1e-10));
}

TEST_CASE("single-agent cost scales c1 by the priority correlation", "[analytic]") {
    const double c1 = c1_integral(0.4, 0.6);
    CHECK_THAT(cost_single_priority_variation(0.4, 0.6, 0.2, 1.0), WithinAbs(c1, 1e-15));
    CHECK_THAT(cost_single_priority_variation(0.4, 0.6, -0.5, 0.0), WithinAbs(-0.5 * c1, 1e-14));
    // Fully aligned agents cost the least; anti-aligned ones the most.
    CHECK(cost_single_priority_variation(0.4, 0.6, 1.0, 0.0) < cost_single_priority_variation(0.4, 0.6, 0.0, 0.0));
    CHECK(cost_single_priority_variation(0.4, 0.6, -1.0, 0.0) > 0.0);
}

TEST_CASE("closed forms match direct integration with their moments", "[analytic]") {
    auto reference = [](double lambda, double var) {
        return static_cast<double>(oracle::simpson(
            [&](long double x) { return x * oracle::sojourn(lambda * (1.0L - x), 2.0L, var + 4.0L); },
            0.0L, 1.0L, 2000));
    };
    for (double l = 0.05; l < 0.46; l += 0.05) {
        CHECK_THAT(cost_variable_rate_closed(l), WithinRel(reference(l, 3.35), 1e-9));
        CHECK_THAT(cost_constant_rate_closed(l), WithinRel(reference(l, 2.0), 1e-9));
        CHECK(cost_variable_rate_closed(l) > cost_constant_rate_closed(l));
    }
    CHECK_THROWS_AS(cost_variable_rate_closed(0.5), DomainError);
    CHECK_THROWS_AS(cost_constant_rate_closed(0.0), DomainError);
}

TEST_CASE("general service cost with uniform priorities", "[analytic]") {
    const auto x = RoutedInterestDensity::uniform(0.0, 1.0);
    const ServiceMoments m{0.7, 1.1};
    const double got = cost_service_variation_general(0.3, m, x);
    const double ref = static_cast<double>(oracle::simpson(
        [&](long double u) { return u * oracle::sojourn(0.3L * (1.0L - u), 1.0L / 0.7L, 1.1L + 1.0L / 0.49L); },
        0.0L, 1.0L, 2000));
    CHECK_THAT(got, WithinRel(ref, 1e-10));
    CHECK_THROWS_AS(cost_service_variation_general(0.7, m, x), StabilityViolation);
}

TEST_CASE("two-agent service cost", "[analytic]") {
    const TwoAgentServiceScenario pd{RoutingScenario::perfect_diversity(), 0.2, std::nullopt};
    CHECK(agent_share(pd, 0) == 0.5);
    const auto m = agent_moments(pd, 0);
    const auto x = RoutedInterestDensity::uniform(0.0, 1.0);
    CHECK_THAT(cost_two_agent_service_variation(0.3, pd),
               WithinRel(cost_service_variation_general(0.15, m, x), 1e-12));
    const TwoAgentServiceScenario skew{RoutingScenario::quantal(0.8, 0.25), 0.2, std::nullopt};
    CHECK_THAT(agent_share(skew, 0), WithinAbs(0.2 + 0.25 * 0.6, 1e-15));
    const double c = cost_two_agent_service_variation(0.3, skew);
    const double parts = agent_share(skew, 0) * cost_service_variation_general(0.3 * 0.35, agent_moments(skew, 0), x) +
                         0.65 * cost_service_variation_general(0.3 * 0.65, agent_moments(skew, 1), x);
    CHECK_THAT(c, WithinRel(parts, 1e-12));
    const TwoAgentServiceScenario machine{RoutingScenario::uniform(), 0.2, 0.6};
    CHECK_THAT(agent_moments(machine, 1).variance, WithinRel(0.4 / 0.36, 1e-12));
}

TEST_CASE("two-agent priority cost", "[analytic]") {
    TwoAgentParams p;
    // Reference for one queue by Simpson in the standardized agent interest.
    auto queue_ref = [&](int i, double load) {
        const auto& a = p.agents[static_cast<std::size_t>(i)];
        return static_cast<double>(oracle::simpson(
            [&](long double t) {
                return oracle::pdf(t) * (p.mean_x + a.rho * p.sigma_x * t) *
                       oracle::sojourn_geo(p.lambda * load * oracle::upper_tail(t), a.mu);
            },
            -10.0L, 10.0L, 4000));
    };
    CHECK_THAT(agent_queue_cost(0, 0.3, p), WithinRel(queue_ref(0, 0.3), 1e-9));
    CHECK_THAT(cost_two_agent_priority_variation(0.0, p), WithinRel(queue_ref(1, 1.0), 1e-9));
    CHECK_THAT(cost_two_agent_priority_variation(1.0, p), WithinRel(queue_ref(0, 1.0), 1e-9));
    CHECK_THAT(cost_two_agent_priority_variation(0.4, p),
               WithinRel(0.4 * queue_ref(0, 0.4) + 0.6 * queue_ref(1, 0.6), 1e-9));

    TwoAgentParams sym;
    sym.agents = {AgentSpec{0.5}, AgentSpec{0.5}};
    for (double q : {0.1, 0.3, 0.45}) {
        CHECK_THAT(cost_two_agent_priority_variation(q, sym),
                   WithinRel(cost_two_agent_priority_variation(1.0 - q, sym), 1e-12));
    }
    CHECK_THROWS_AS(cost_two_agent_priority_variation(1.5, p), DomainError);
    TwoAgentParams heavy;
    heavy.lambda = 0.9;
    CHECK_THROWS_AS(cost_two_agent_priority_variation(0.0, heavy), StabilityViolation);
}

TEST_CASE("independent coupling needs compatible correlations", "[analytic]") {
    TwoAgentParams p;
    p.coupling = AgentCoupling::Independent;
    p.agents = {AgentSpec{0.8}, AgentSpec{0.7}};
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.agents[1].rho = 0.6;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("sweep requires an increasing grid", "[analytic]") {
    const auto c = sweep("lambda", {0.1, 0.2}, CostMethod::ClosedForm, cost_constant_rate_closed);
    CHECK(c.values.size() == 2);
    CHECK(c.values[0] == cost_constant_rate_closed(0.1));
    CHECK_THROWS_AS(sweep("lambda", {0.2, 0.2}, CostMethod::ClosedForm, cost_constant_rate_closed),
                    DomainError);
}
