#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pqagent/dists.hpp"
#include "pqagent/error.hpp"
#include "pqagent/normal.hpp"
#include "pqagent/quadrature.hpp"
#include "pqagent/service.hpp"

namespace pqagent {

// ---------------------------------------------------------------------------
// Mean sojourn of a task that only sees higher-priority traffic of rate lambda_z.

namespace detail {
inline void check_sojourn_args(double lambda_z, double mu) {
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("sojourn: service rate must lie in (0, 1]");
    if (!(lambda_z >= 0.0)) throw DomainError("sojourn: arrival rate must be nonnegative");
    if (lambda_z >= mu) throw StabilityViolation("sojourn: arrival rate reaches the service rate");
}
}  // namespace detail

/// Discrete-time preemptive-resume sojourn for general arrival and service variances.
/// At lambda_z = 0 the value is the continuity limit 1/mu of Poisson arrivals.
inline double expected_sojourn_general(double lambda_z, double mu, double var_arrivals,
                                       double var_service) {
    detail::check_sojourn_args(lambda_z, mu);
    if (var_arrivals < 0.0 || var_service < 0.0) throw DomainError("sojourn: negative variance");
    if (lambda_z == 0.0) return 1.0 / mu;
    const double gap = mu - lambda_z;
    return (2.0 * mu - lambda_z) * var_arrivals / (2.0 * lambda_z * gap * gap) +
           lambda_z * mu * mu * var_service / (2.0 * gap * gap) - lambda_z / (2.0 * gap);
}

/// Poisson arrivals (var = lambda_z) with general service variance; no 0/0 at lambda_z = 0.
inline double expected_sojourn_poisson(double lambda_z, double mu, double var_service) {
    detail::check_sojourn_args(lambda_z, mu);
    if (var_service < 0.0) throw DomainError("sojourn: negative variance");
    const double gap = mu - lambda_z;
    return (2.0 * mu - lambda_z * (1.0 + mu) + lambda_z * lambda_z +
            lambda_z * mu * mu * var_service) /
           (2.0 * gap * gap);
}

/// Poisson arrivals and geometric service.
inline double expected_sojourn_poisson_geo(double lambda_z, double mu) {
    detail::check_sojourn_args(lambda_z, mu);
    const double gap = mu - lambda_z;
    return (2.0 * mu - 2.0 * lambda_z * mu + lambda_z * lambda_z) / (2.0 * gap * gap);
}

// ---------------------------------------------------------------------------
// Single agent, priority variation.

inline constexpr double kGaussianCutoff = 8.0;

/// Cost E[ZD] of a perfectly aligned agent with standard Gaussian priorities.
inline double c1_integral(double lambda, double mu, const Accuracy& acc = {}) {
    if (!(lambda > 0.0)) throw DomainError("c1_integral: lambda must be positive");
    if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("c1_integral: mu must lie in (0, 1]");
    if (lambda >= mu) throw StabilityViolation("c1_integral: lambda must be below mu");
    return integrate(
        [&](double z) {
            return normal_pdf(z) * z * expected_sojourn_poisson_geo(lambda * q_tail(z), mu);
        },
        -kGaussianCutoff, kGaussianCutoff, acc);
}

inline double cost_single_priority_variation(double lambda, double mu, double rho, double gamma,
                                             const Accuracy& acc = {}) {
    const double r = rho_xz(gamma, rho);
    return r * c1_integral(lambda, mu, acc);
}

// ---------------------------------------------------------------------------
// Single agent, service-rate variation (X uniform on [0, 1], mu0 = 1/5).

namespace detail {
inline void check_closed_form_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 0.5)) {
        throw DomainError("closed-form cost: lambda must lie in (0, 1/2)");
    }
}
}  // namespace detail

/// Cost with interest-dependent service: unconditional rate 0.5 and variance 3.35.
inline double cost_variable_rate_closed(double lambda) {
    detail::check_closed_form_lambda(lambda);
    const double l = lambda;
    return (2.0 * l * (20.0 * l - 87.0) + 3.0 * (9.0 * l - 29.0) * std::log1p(-2.0 * l)) /
           (160.0 * l * l);
}

/// Cost with constant geometric service at rate 0.5 (variance 2).
inline double cost_constant_rate_closed(double lambda) {
    detail::check_closed_form_lambda(lambda);
    const double l = lambda;
    return (2.0 * l * l - 6.0 * l - 3.0 * std::log1p(-2.0 * l)) / (8.0 * l * l);
}

/// E[X D] for priorities X ~ `priority` served with the given unconditional moments,
/// where tasks above x arrive at rate lambda * P(X > x).
inline double cost_service_variation_general(double lambda, const ServiceMoments& moments,
                                             const RoutedInterestDensity& priority,
                                             const Accuracy& acc = {}) {
    if (!(lambda >= 0.0)) throw DomainError("cost_service_variation_general: negative lambda");
    if (lambda >= moments.rate) {
        throw StabilityViolation("cost_service_variation_general: lambda must be below the rate");
    }
    return priority.expect(
        [&](double x) {
            return x * expected_sojourn_poisson(lambda * priority.survival(x), moments.rate,
                                                moments.variance);
        },
        acc.nodes);
}

/// Two agents fed with probability `share` and 1 - share, priorities X ~ U[0, 1].
inline double cost_two_agent_service_variation(double lambda, const ServiceMoments& first,
                                               const ServiceMoments& second, double share = 0.5,
                                               const Accuracy& acc = {}) {
    const auto x = RoutedInterestDensity::uniform(0.0, 1.0);
    double cost = 0.0;
    if (share > 0.0) cost += share * cost_service_variation_general(lambda * share, first, x, acc);
    if (share < 1.0) {
        cost += (1.0 - share) *
                cost_service_variation_general(lambda * (1.0 - share), second, x, acc);
    }
    return cost;
}

/// Two Fitts-law agents fed by an interest-based rule, or a pair of constant-rate
/// "machine" servers fed by a fair coin when machine_rate is set.
struct TwoAgentServiceScenario {
    RoutingScenario routing = RoutingScenario::perfect_diversity();
    double mu0 = 0.2;
    std::optional<double> machine_rate;

    std::string label() const {
        if (machine_rate) return "machine";
        return routing.label();
    }
};

/// Fraction of tasks that reach agent `agent`.
inline double agent_share(const TwoAgentServiceScenario& s, int agent) {
    double first = 0.5;
    if (!s.machine_rate && s.routing.kind == InterestScenario::Quantal) {
        const auto& pq = s.routing.perception;
        first = (1.0 - pq.q) + pq.p_unsure * (2.0 * pq.q - 1.0);
    }
    return agent == 0 ? first : 1.0 - first;
}

/// Service moments of agent `agent` under the scenario.
inline ServiceMoments agent_moments(const TwoAgentServiceScenario& s, int agent) {
    if (s.machine_rate) return geometric_moments(*s.machine_rate);
    return fitts_moments(routed_density(s.routing, agent), FittsRateMap(s.mu0));
}

inline double cost_two_agent_service_variation(double lambda, const TwoAgentServiceScenario& s,
                                               const Accuracy& acc = {}) {
    const double share = agent_share(s, 0);
    const auto m0 = share > 0.0 ? agent_moments(s, 0) : ServiceMoments{};
    const auto m1 = share < 1.0 ? agent_moments(s, 1) : ServiceMoments{};
    return cost_two_agent_service_variation(lambda, m0, m1, share, acc);
}

// ---------------------------------------------------------------------------
// Two agents, priority variation. Each agent orders its queue by its own interest.

struct AgentSpec {
    double rho = 0.0;     // correlation of the agent's interest with X
    double mean_y = 4.0;
    double sigma_y = 1.0;
    double mu = 0.6;      // constant service rate
};

/// How the two agents' interests relate beyond their correlation with X.
enum class AgentCoupling {
    ConditionallyIndependent,  // Y1, Y2 independent given X
    Independent,               // Y1, Y2 unconditionally independent
};

struct TwoAgentParams {
    double lambda = 0.4;
    double mean_x = 5.0;
    double sigma_x = 1.0;
    std::array<AgentSpec, 2> agents{AgentSpec{0.8}, AgentSpec{0.2}};
    AgentCoupling coupling = AgentCoupling::ConditionallyIndependent;

    void validate() const {
        if (!(lambda > 0.0)) throw DomainError("TwoAgentParams: lambda must be positive");
        if (!(sigma_x > 0.0)) throw DomainError("TwoAgentParams: sigma_x must be positive");
        for (const auto& a : agents) {
            if (!(a.rho >= -1.0 && a.rho <= 1.0)) throw DomainError("TwoAgentParams: rho in [-1, 1]");
            if (!(a.sigma_y > 0.0)) throw DomainError("TwoAgentParams: sigma_y must be positive");
            if (!(a.mu > 0.0 && a.mu <= 1.0)) throw DomainError("TwoAgentParams: mu in (0, 1]");
        }
        if (coupling == AgentCoupling::Independent &&
            agents[0].rho * agents[0].rho + agents[1].rho * agents[1].rho > 1.0 + 1e-12) {
            throw DomainError("TwoAgentParams: independent agents need rho1^2 + rho2^2 <= 1");
        }
    }
};

/// E[XD | R = i] when agent i receives a fraction `load` of all arrivals.
inline double agent_queue_cost(int agent, double load, const TwoAgentParams& params,
                               const Accuracy& acc = {}) {
    const auto& a = params.agents.at(static_cast<std::size_t>(agent));
    const double rate = params.lambda * load;
    if (rate >= a.mu) throw StabilityViolation("agent_queue_cost: queue is unstable");
    // Standardized interest t = (y - mean_y) / sigma_y.
    return integrate(
        [&](double t) {
            const double ex = params.mean_x + a.rho * params.sigma_x * t;
            return normal_pdf(t) * ex * expected_sojourn_poisson_geo(rate * q_tail(t), a.mu);
        },
        -kGaussianCutoff, kGaussianCutoff, acc);
}

/// Total cost when a fraction q of tasks, on average, goes to the first agent.
inline double cost_two_agent_priority_variation(double q, const TwoAgentParams& params,
                                                const Accuracy& acc = {}) {
    params.validate();
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("cost_two_agent_priority_variation: q in [0, 1]");
    if (params.lambda * q >= params.agents[0].mu ||
        params.lambda * (1.0 - q) >= params.agents[1].mu) {
        throw StabilityViolation("cost_two_agent_priority_variation: a queue is unstable");
    }
    double cost = 0.0;
    if (q > 0.0) cost += q * agent_queue_cost(0, q, params, acc);
    if (q < 1.0) cost += (1.0 - q) * agent_queue_cost(1, 1.0 - q, params, acc);
    return cost;
}

// ---------------------------------------------------------------------------

enum class CostMethod { ClosedForm, Quadrature };

inline const char* to_string(CostMethod m) {
    return m == CostMethod::ClosedForm ? "closed-form" : "quadrature";
}

/// Analytic cost over a strictly increasing parameter grid.
struct CostCurve {
    std::string parameter;
    std::vector<double> grid;
    std::vector<double> values;
    CostMethod method = CostMethod::Quadrature;
};

template <class F>
CostCurve sweep(std::string parameter, std::vector<double> grid, CostMethod method, F&& cost) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("sweep: grid must be strictly increasing");
    }
    CostCurve curve{std::move(parameter), std::move(grid), {}, method};
    curve.values.reserve(curve.grid.size());
    for (double v : curve.grid) curve.values.push_back(cost(v));
    return curve;
}

}  // namespace pqagent
