#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "pqagent/routing.hpp"

using namespace pqagent;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// E[D | X = x, R = i] by Simpson over the agent's conditional interest.
long double delay_ref(long double x, int i, long double mean_prob, const TwoAgentParams& p) {
    const auto& a = p.agents[static_cast<std::size_t>(i)];
    const long double rate = p.lambda * (i == 0 ? mean_prob : 1.0L - mean_prob);
    const long double s = (x - p.mean_x) / p.sigma_x;
    const long double sd = std::sqrt(1.0L - static_cast<long double>(a.rho) * a.rho);
    return oracle::simpson(
        [&](long double u) { return oracle::pdf(u) * oracle::sojourn_geo(rate * oracle::upper_tail(a.rho * s + sd * u), a.mu); },
        -9.0L, 9.0L, 300);
}

long double fx(long double x, const TwoAgentParams& p) {
    return oracle::pdf((x - p.mean_x) / p.sigma_x) / p.sigma_x;
}

// Per-cell integrals of x f(x) E_2(x) and x f(x) (E_1 - E_2)(x) above x*.
struct RefEvaluator {
    std::vector<long double> base;
    std::vector<long double> gain;
    long double tail = 0.0L;

    RefEvaluator(const TwoAgentParams& p, double mean_prob, const std::vector<double>& cells) {
        tail = oracle::upper_tail((cells.front() - p.mean_x) / p.sigma_x);
        for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
            base.push_back(oracle::simpson(
                [&](long double x) { return x * fx(x, p) * delay_ref(x, 1, mean_prob, p); },
                cells[k], cells[k + 1], 200));
            gain.push_back(oracle::simpson(
                [&](long double x) {
                    return x * fx(x, p) * (delay_ref(x, 0, mean_prob, p) - delay_ref(x, 1, mean_prob, p));
                },
                cells[k], cells[k + 1], 200));
        }
    }

    double cost(const std::vector<double>& probs) const {
        long double s = 0.0L;
        for (std::size_t k = 0; k < probs.size(); ++k) s += base[k] + probs[k] * gain[k];
        return static_cast<double>(s / tail);
    }
};

}  // namespace

TEST_CASE("admissible routing interval", "[routing]") {
    TwoAgentParams p;
    auto [lo, hi] = admissible_interval(p);
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
    p.lambda = 0.9;
    std::tie(lo, hi) = admissible_interval(p, 0.0);
    CHECK_THAT(lo, WithinAbs(1.0 / 3.0, 1e-15));
    CHECK_THAT(hi, WithinAbs(2.0 / 3.0, 1e-15));
    p.lambda = 1.3;
    CHECK_THROWS_AS(admissible_interval(p), NoStableRouting);
}

TEST_CASE("optimal mean routing matches a dense grid", "[routing]") {
    const TwoAgentParams p;
    const auto opt = minimize_total_cost(p);
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double q = i / 20000.0;
        const double c = cost_two_agent_priority_variation(q, p);
        if (c < best) {
            best = c;
            arg = q;
        }
    }
    CHECK(opt.cost <= best + 1e-12);
    CHECK_THAT(opt.q_star, WithinAbs(arg, 1e-4));

    TwoAgentParams sym;
    sym.agents = {AgentSpec{0.5}, AgentSpec{0.5}};
    CHECK_THAT(minimize_total_cost(sym).q_star, WithinAbs(0.5, 1e-6));
}

TEST_CASE("total cost is convex in q when the principal's mean exceeds the agents'", "[routing]") {
    const TwoAgentParams p;  // mean_x - mean_y = 1
    for (double d : second_differences(cost_on_grid(p, 201))) CHECK(d >= -1e-9);
    TwoAgentParams q = p;
    q.agents = {AgentSpec{-0.5, 4.0, 1.0, 0.7}, AgentSpec{0.9, 4.0, 1.0, 0.5}};
    for (double d : second_differences(cost_on_grid(q, 201))) CHECK(d >= -1e-9);
}

TEST_CASE("policy construction", "[routing]") {
    const TwoAgentParams p;
    const auto c = RoutingPolicy::constant(0.3, p);
    CHECK(c.mean_prob == 0.3);
    CHECK(c(p.mean_x) == 0.3);
    const auto up = RoutingPolicy::upper_threshold(0.3, p);
    CHECK_THAT(up.mean_prob, WithinAbs(0.3, 1e-14));
    CHECK(up(p.mean_x + 2.0) == 1.0);
    CHECK(up(p.mean_x - 2.0) == 0.0);
    const auto low = RoutingPolicy::lower_threshold(0.3, p);
    CHECK_THAT(low.mean_prob, WithinAbs(0.3, 1e-14));
    CHECK(low(p.mean_x - 2.0) == 1.0);
    CHECK_THAT(total_cost(up, p), WithinAbs(total_cost(c, p), 1e-12));
    CHECK_THAT(total_cost(low, p), WithinAbs(total_cost(c, p), 1e-12));
    CHECK_THROWS_AS(RoutingPolicy::from_cells({0.0, 1.0}, {1.2}, p), DomainError);
    CHECK_THROWS_AS(RoutingPolicy::from_cells({1.0, 0.0}, {0.2}, p), DomainError);
}

TEST_CASE("conditional delay", "[routing]") {
    TwoAgentParams p;
    p.agents = {AgentSpec{0.8}, AgentSpec{0.0}};
    for (double x : {3.0, 5.0, 6.5}) {
        CHECK_THAT(conditional_delay(x, 0, 0.4, p), WithinRel(static_cast<double>(delay_ref(x, 0, 0.4L, p)), 1e-8));
    }
    // An unaligned agent's delay does not depend on x.
    CHECK_THAT(conditional_delay(3.0, 1, 0.4, p), WithinRel(conditional_delay(7.0, 1, 0.4, p), 1e-13));
    // Aligned agents favour tasks the principal values.
    CHECK(conditional_delay(7.0, 0, 0.4, p) < conditional_delay(3.0, 0, 0.4, p));
    // Averaging over X gives the queue's mean sojourn.
    const double avg = static_cast<double>(oracle::simpson(
        [&](long double x) { return fx(x, p) * conditional_delay(static_cast<double>(x), 0, 0.4, p); },
        p.mean_x - 9.0, p.mean_x + 9.0, 400));
    const double queue = static_cast<double>(oracle::simpson(
        [&](long double t) { return oracle::pdf(t) * oracle::sojourn_geo(0.4L * 0.4L * oracle::upper_tail(t), 0.6L); },
        -10.0L, 10.0L, 2000));
    CHECK_THAT(avg, WithinRel(queue, 1e-7));
    // Perfect alignment collapses the conditional law.
    p.agents[0].rho = 1.0;
    CHECK_THAT(conditional_delay(6.0, 0, 0.4, p),
               WithinRel(expected_sojourn_poisson_geo(0.16 * q_tail(1.0), 0.6), 1e-13));
    CHECK(conditional_delay(6.0, 0, 0.0, p) == 1.0 / 0.6);
}

TEST_CASE("threshold policy is optimal among enumerated policies", "[routing]") {
    struct Case {
        TwoAgentParams p;
        double quantile;
    };
    std::vector<Case> cases(2);
    cases[1].p.agents = {AgentSpec{0.5, 4.0, 1.0, 0.5}, AgentSpec{-0.3, 4.0, 1.0, 0.7}};
    cases[0].quantile = 0.7;
    cases[1].quantile = 0.6;
    for (const auto& c : cases) {
        const double p_star = minimize_total_cost(c.p).q_star;
        const double x_star = c.p.mean_x + c.p.sigma_x * normal_quantile(c.quantile);
        const HighPriorityObjective obj{x_star, p_star};
        const auto pol = build_threshold_policy(obj, c.p);
        CHECK_THAT(pol.mean_prob, WithinAbs(p_star, 1e-10));
        CHECK_THAT(total_cost(pol, c.p), WithinAbs(cost_two_agent_priority_variation(p_star, c.p), 1e-9));

        // Threshold cost through the reference evaluator on the policy's own cells.
        std::vector<double> cells{x_star};
        for (double b : pol.breakpoints) {
            if (b > x_star) cells.push_back(b);
        }
        std::vector<double> probs;
        for (std::size_t k = 0; k + 1 < cells.size(); ++k) probs.push_back(pol(0.5 * (cells[k] + cells[k + 1])));
        const double threshold_cost = RefEvaluator(c.p, p_star, cells).cost(probs);
        CHECK_THAT(high_priority_cost(pol, x_star, c.p), WithinRel(threshold_cost, 1e-7));

        // Enumerate {0, 1/2, 1} on four equal-mass cells, matching the mean with a constant below x*.
        const auto grid = equal_mass_cells(x_star, 4, c.p);
        const RefEvaluator ref(c.p, p_star, grid);
        const double below = 1.0 - static_cast<double>(oracle::upper_tail((x_star - c.p.mean_x) / c.p.sigma_x));
        double best = std::numeric_limits<double>::infinity();
        const double levels[] = {0.0, 0.5, 1.0};
        for (int code = 0; code < 81; ++code) {
            std::vector<double> pr;
            double upper = 0.0;
            int v = code;
            for (std::size_t k = 0; k < 4; ++k, v /= 3) {
                pr.push_back(levels[v % 3]);
                const double hi = k == 3 ? std::numeric_limits<double>::infinity() : grid[k + 1];
                upper += pr.back() * RoutingPolicy::cell_mass(grid[k], hi, c.p);
            }
            const double fill = (p_star - upper) / below;
            if (fill < 0.0 || fill > 1.0) continue;
            best = std::min(best, ref.cost(pr));
        }
        CHECK(threshold_cost <= best + 1e-9);
        const auto lib = brute_force_high_priority(obj, c.p, grid);
        CHECK_THAT(lib.best_cost, WithinRel(best, 1e-7));
        CHECK(high_priority_cost(RoutingPolicy::constant(p_star, c.p), x_star, c.p) >= threshold_cost - 1e-9);
    }
}

TEST_CASE("infeasible high-priority constraint", "[routing]") {
    TwoAgentParams p;
    p.agents = {AgentSpec{0.9}, AgentSpec{-0.9}};
    // Almost all mass above x* and a tiny p*: the upper cells alone exceed the mean.
    const HighPriorityObjective obj{p.mean_x - 3.0, 0.01};
    CHECK_THROWS_AS(build_threshold_policy(obj, p), InfeasibleConstraint);
}

TEST_CASE("n-agent costs approach the asymptote", "[routing]") {
    CHECK_THAT(asymptotic_cost(0.2), WithinAbs(0.5 / (0.2 + std::log(2.0)), 1e-15));
    CHECK_THAT(asymptotic_cost(0.2), WithinAbs(0.5598181474, 1e-9));
    const auto u = RoutedInterestDensity::uniform(0.0, 1.0);
    CHECK_THAT(analytic_cn(1, 0.4, 0.2),
               WithinRel(cost_service_variation_general(0.4, fitts_moments(u, FittsRateMap(0.2)), u), 1e-14));
    double prev = analytic_cn(1, 0.4, 0.2);
    for (int n : {2, 4, 8, 64, 1024}) {
        const double c = analytic_cn(n, 0.4, 0.2);
        CHECK(c < prev);
        prev = c;
    }
    CHECK(std::abs(prev - asymptotic_cost(0.2)) < 1e-3);
}
