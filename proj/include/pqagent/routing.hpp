#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "pqagent/analytic.hpp"
#include "pqagent/error.hpp"
#include "pqagent/normal.hpp"
#include "pqagent/optimize.hpp"
#include "pqagent/quadrature.hpp"
#include "pqagent/service.hpp"

namespace pqagent {

// ---------------------------------------------------------------------------
// Memoryless routing as a function of the principal's interest X ~ N(mean_x, sigma_x^2).

/// Piecewise-constant probability of routing to the first agent. The outer cells extend
/// to +/- infinity when computing the mean; the breakpoints span mean_x +/- 8 sigma_x.
struct RoutingPolicy {
    std::vector<double> breakpoints;
    std::vector<double> probs;
    double mean_prob = 0.0;

    double operator()(double x) const {
        const auto it = std::upper_bound(breakpoints.begin() + 1, breakpoints.end() - 1, x);
        return probs[static_cast<std::size_t>(it - (breakpoints.begin() + 1))];
    }

    /// Builds a policy and caches E[p(X)].
    static RoutingPolicy from_cells(std::vector<double> breaks, std::vector<double> probs,
                                    const TwoAgentParams& params) {
        if (breaks.size() < 2 || probs.size() + 1 != breaks.size()) {
            throw DomainError("RoutingPolicy: need one probability per cell");
        }
        for (std::size_t i = 1; i < breaks.size(); ++i) {
            if (!(breaks[i] > breaks[i - 1])) throw DomainError("RoutingPolicy: unsorted breakpoints");
        }
        for (double p : probs) {
            if (!(p >= 0.0 && p <= 1.0)) throw DomainError("RoutingPolicy: probability outside [0, 1]");
        }
        RoutingPolicy out{std::move(breaks), std::move(probs), 0.0};
        double mean = 0.0;
        const std::size_t cells = out.probs.size();
        for (std::size_t k = 0; k < cells; ++k) {
            const double lo = k == 0 ? -std::numeric_limits<double>::infinity() : out.breakpoints[k];
            const double hi = k + 1 == cells ? std::numeric_limits<double>::infinity()
                                             : out.breakpoints[k + 1];
            mean += out.probs[k] * cell_mass(lo, hi, params);
        }
        out.mean_prob = std::clamp(mean, 0.0, 1.0);
        return out;
    }

    static RoutingPolicy constant(double p, const TwoAgentParams& params) {
        return from_cells({support_lo(params), support_hi(params)}, {p}, params);
    }

    /// Every task above the (1 - q) quantile of X goes to the first agent.
    static RoutingPolicy upper_threshold(double q, const TwoAgentParams& params) {
        return threshold(q, params, true);
    }

    /// Every task below the q quantile of X goes to the first agent.
    static RoutingPolicy lower_threshold(double q, const TwoAgentParams& params) {
        return threshold(q, params, false);
    }

    static double support_lo(const TwoAgentParams& p) { return p.mean_x - 8.0 * p.sigma_x; }
    static double support_hi(const TwoAgentParams& p) { return p.mean_x + 8.0 * p.sigma_x; }

    /// P(lo < X <= hi).
    static double cell_mass(double lo, double hi, const TwoAgentParams& p) {
        const double a = (lo - p.mean_x) / p.sigma_x;
        const double b = (hi - p.mean_x) / p.sigma_x;
        // Subtract in whichever tail keeps precision.
        if (a > 0.0) return q_tail(a) - q_tail(b);
        return normal_cdf(b) - normal_cdf(a);
    }

private:
    static RoutingPolicy threshold(double q, const TwoAgentParams& params, bool upper) {
        if (!(q >= 0.0 && q <= 1.0)) throw DomainError("RoutingPolicy: mean must lie in [0, 1]");
        if (q == 0.0 || q == 1.0) return constant(q, params);
        const double lo = support_lo(params);
        const double hi = support_hi(params);
        const double cut =
            params.mean_x + params.sigma_x * normal_quantile(upper ? 1.0 - q : q);
        if (!(cut > lo && cut < hi)) return constant(q, params);
        return from_cells({lo, cut, hi}, upper ? std::vector<double>{0.0, 1.0}
                                               : std::vector<double>{1.0, 0.0},
                          params);
    }
};

/// Model cost of a policy; it depends on the policy only through its mean.
inline double total_cost(const RoutingPolicy& policy, const TwoAgentParams& params,
                         const Accuracy& acc = {}) {
    return cost_two_agent_priority_variation(policy.mean_prob, params, acc);
}

// ---------------------------------------------------------------------------

struct RoutingOptimum {
    double q_star = 0.0;
    double cost = 0.0;
    double lo = 0.0;  // admissible interval searched
    double hi = 1.0;
};

/// Range of q for which both queues are stable, shrunk by `margin` at unstable ends.
inline std::pair<double, double> admissible_interval(const TwoAgentParams& params,
                                                     double margin = 1e-9) {
    params.validate();
    const double l = params.lambda;
    double lo = 0.0;
    double hi = 1.0;
    if (l >= params.agents[1].mu) lo = 1.0 - params.agents[1].mu / l + margin;
    if (l >= params.agents[0].mu) hi = params.agents[0].mu / l - margin;
    if (!(lo <= hi)) throw NoStableRouting("no routing probability stabilizes both queues");
    return {lo, hi};
}

inline RoutingOptimum minimize_total_cost(const TwoAgentParams& params,
                                          std::size_t grid_points = 1024,
                                          const Accuracy& acc = {}) {
    const auto [lo, hi] = admissible_interval(params);
    auto cost = [&](double q) { return cost_two_agent_priority_variation(q, params, acc); };
    const auto opt = grid_golden_min(cost, lo, hi, grid_points);
    return {opt.arg, opt.value, lo, hi};
}

/// C_m sampled on an even grid over the admissible interval.
inline std::vector<double> cost_on_grid(const TwoAgentParams& params, std::size_t points,
                                        const Accuracy& acc = {}) {
    const auto [lo, hi] = admissible_interval(params);
    std::vector<double> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double q = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(cost_two_agent_priority_variation(q, params, acc));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conditional delay E_{D,i}(x) and the high-priority objective.

/// E[D | X = x, R = queue] when queue 0 receives a fraction mean_prob of all tasks.
inline double conditional_delay(double x, int queue, double mean_prob,
                                const TwoAgentParams& params, std::size_t nodes = 128) {
    if (queue != 0 && queue != 1) throw DomainError("conditional_delay: queue must be 0 or 1");
    if (!(mean_prob >= 0.0 && mean_prob <= 1.0)) {
        throw DomainError("conditional_delay: mean_prob must lie in [0, 1]");
    }
    const auto& a = params.agents[static_cast<std::size_t>(queue)];
    const double load = queue == 0 ? mean_prob : 1.0 - mean_prob;
    const double rate = params.lambda * load;
    if (rate >= a.mu) throw StabilityViolation("conditional_delay: queue is unstable");
    if (rate == 0.0) return 1.0 / a.mu;
    // Standardized agent interest given X = x is N(rho * s, 1 - rho^2).
    const double s = (x - params.mean_x) / params.sigma_x;
    const double m = a.rho * s;
    const double sd = std::sqrt(std::max(0.0, 1.0 - a.rho * a.rho));
    if (sd < 1e-12) return expected_sojourn_poisson_geo(rate * q_tail(m), a.mu);
    const auto& rule = gauss_legendre(nodes);
    return rule.integrate(
        [&](double u) {
            return normal_pdf(u) * expected_sojourn_poisson_geo(rate * q_tail(m + sd * u), a.mu);
        },
        -kGaussianCutoff, kGaussianCutoff);
}

struct HighPriorityObjective {
    double x_star = 0.0;
    double p_star = 0.5;

    void validate(const TwoAgentParams& params) const {
        if (!(p_star >= 0.0 && p_star <= 1.0)) throw DomainError("HighPriorityObjective: p_star in [0, 1]");
        if (!(x_star < RoutingPolicy::support_hi(params))) {
            throw DomainError("HighPriorityObjective: no mass above x_star");
        }
    }
};

/// Integrals over cells above x_star with the conditional delays evaluated once per node.
///
/// For cell k, base[k] = int x E_{D,2} f_X and gain[k] = int x (E_{D,1} - E_{D,2}) f_X, so a
/// policy with probability p_k on cell k has high-priority cost sum(base + p_k gain) / P(X > x*).
class HighPriorityEvaluator {
public:
    HighPriorityEvaluator(const TwoAgentParams& params, double mean_prob, double x_star,
                          std::vector<double> cells, std::size_t nodes = 64)
        : cells_(std::move(cells)) {
        if (cells_.size() < 2 || std::abs(cells_.front() - x_star) > 1e-12) {
            throw DomainError("HighPriorityEvaluator: cells must start at x_star");
        }
        tail_ = RoutingPolicy::cell_mass(x_star, std::numeric_limits<double>::infinity(), params);
        if (!(tail_ > 0.0)) throw DomainError("HighPriorityEvaluator: no mass above x_star");
        const auto& rule = gauss_legendre(nodes);
        for (std::size_t k = 0; k + 1 < cells_.size(); ++k) {
            const double a = cells_[k];
            const double b = cells_[k + 1];
            const double half = 0.5 * (b - a);
            const double mid = 0.5 * (a + b);
            double base = 0.0;
            double gain = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double x = mid + half * rule.nodes()[i];
                const double w = half * rule.weights()[i] * x *
                                 normal_pdf((x - params.mean_x) / params.sigma_x) / params.sigma_x;
                const double e1 = conditional_delay(x, 0, mean_prob, params);
                const double e2 = conditional_delay(x, 1, mean_prob, params);
                base += w * e2;
                gain += w * (e1 - e2);
            }
            base_.push_back(base);
            gain_.push_back(gain);
        }
    }

    std::size_t cells() const { return base_.size(); }
    const std::vector<double>& breakpoints() const { return cells_; }
    double tail_mass() const { return tail_; }

    double cost(const std::vector<double>& probs) const {
        if (probs.size() != base_.size()) throw DomainError("HighPriorityEvaluator: size mismatch");
        double sum = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) sum += base_[k] + probs[k] * gain_[k];
        return sum / tail_;
    }

private:
    std::vector<double> cells_;
    std::vector<double> base_;
    std::vector<double> gain_;
    double tail_ = 0.0;
};

/// E[XD | X > x_star] of a policy, with delays taken at the policy's mean.
inline double high_priority_cost(const RoutingPolicy& policy, double x_star,
                                 const TwoAgentParams& params) {
    const double top = std::max(RoutingPolicy::support_hi(params), x_star + params.sigma_x);
    std::vector<double> cells{x_star};
    for (double b : policy.breakpoints) {
        if (b > x_star && b < top) cells.push_back(b);
    }
    cells.push_back(top);
    std::vector<double> probs;
    for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
        probs.push_back(policy(0.5 * (cells[k] + cells[k + 1])));
    }
    return HighPriorityEvaluator(params, policy.mean_prob, x_star, cells).cost(probs);
}

/// Mean-matched policy that routes each task above x_star to the agent with the smaller
/// conditional delay, 0.5 where the delays tie, and a constant probability below x_star.
inline RoutingPolicy build_threshold_policy(const HighPriorityObjective& obj,
                                            const TwoAgentParams& params,
                                            std::size_t scan_points = 512) {
    obj.validate(params);
    const double lo = RoutingPolicy::support_lo(params);
    const double top = RoutingPolicy::support_hi(params);
    const double x0 = std::max(obj.x_star, lo);
    auto diff = [&](double x) {
        return conditional_delay(x, 0, obj.p_star, params) -
               conditional_delay(x, 1, obj.p_star, params);
    };
    auto decide = [](double d) { return std::abs(d) <= 1e-9 ? 0.5 : (d < 0.0 ? 1.0 : 0.0); };

    // Sign changes of E_{D,1} - E_{D,2} located on a scan grid and refined by bisection.
    std::vector<double> roots;
    double prev_x = x0;
    double prev_d = diff(x0);
    for (std::size_t i = 1; i < scan_points; ++i) {
        const double x = x0 + (top - x0) * static_cast<double>(i) / static_cast<double>(scan_points - 1);
        const double d = diff(x);
        if (decide(d) != decide(prev_d)) {
            double a = prev_x;
            double b = x;
            const double da = prev_d;
            for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
                const double m = 0.5 * (a + b);
                if (decide(diff(m)) == decide(da)) a = m; else b = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_x = x;
        prev_d = d;
    }

    std::vector<double> breaks{lo};
    std::vector<double> probs{0.0};  // filled below
    if (x0 > lo) breaks.push_back(x0);
    for (double r : roots) {
        if (r > breaks.back()) breaks.push_back(r);
    }
    breaks.push_back(top);
    const std::size_t first_upper = x0 > lo ? 1 : 0;
    probs.assign(breaks.size() - 1, 0.0);
    double upper_mean = 0.0;
    for (std::size_t k = first_upper; k + 1 < breaks.size(); ++k) {
        probs[k] = decide(diff(0.5 * (breaks[k] + breaks[k + 1])));
        const double hi = k + 2 == breaks.size() ? std::numeric_limits<double>::infinity()
                                                 : breaks[k + 1];
        upper_mean += probs[k] * RoutingPolicy::cell_mass(breaks[k], hi, params);
    }
    if (first_upper == 1) {
        const double below = RoutingPolicy::cell_mass(-std::numeric_limits<double>::infinity(), x0, params);
        double c = (obj.p_star - upper_mean) / below;
        if (c < -1e-12 || c > 1.0 + 1e-12 || !(below > 0.0)) {
            throw InfeasibleConstraint(
                "build_threshold_policy: no constant below x_star meets the mean constraint");
        }
        probs[0] = std::clamp(c, 0.0, 1.0);
    } else if (std::abs(upper_mean - obj.p_star) > 1e-12) {
        throw InfeasibleConstraint("build_threshold_policy: x_star leaves no room to match the mean");
    }
    return RoutingPolicy::from_cells(std::move(breaks), std::move(probs), params);
}

/// Cells above x_star holding equal shares of the tail mass of X; the last one ends at the
/// top of the policy support.
inline std::vector<double> equal_mass_cells(double x_star, std::size_t cells,
                                            const TwoAgentParams& params) {
    if (cells == 0) throw DomainError("equal_mass_cells: need at least one cell");
    const double tail = q_tail((x_star - params.mean_x) / params.sigma_x);
    std::vector<double> out{x_star};
    for (std::size_t k = 1; k < cells; ++k) {
        const double t = tail * (1.0 - static_cast<double>(k) / static_cast<double>(cells));
        out.push_back(params.mean_x + params.sigma_x * normal_quantile(1.0 - t));
    }
    out.push_back(std::max(RoutingPolicy::support_hi(params), out.back() + params.sigma_x));
    return out;
}

struct BruteForceResult {
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> best_probs;
    std::size_t feasible = 0;  // mean-matched candidates evaluated
};

/// Minimum high-priority cost over every policy taking values in `levels` on the given cells
/// above x_star, completed below x_star by the constant that matches p_star.
inline BruteForceResult brute_force_high_priority(const HighPriorityObjective& obj,
                                                  const TwoAgentParams& params,
                                                  const std::vector<double>& cells,
                                                  const std::vector<double>& levels = {0.0, 0.5, 1.0}) {
    obj.validate(params);
    const HighPriorityEvaluator eval(params, obj.p_star, obj.x_star, cells);
    const std::size_t n = eval.cells();
    std::vector<double> mass(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double hi = k + 1 == n ? std::numeric_limits<double>::infinity() : cells[k + 1];
        mass[k] = RoutingPolicy::cell_mass(cells[k], hi, params);
    }
    const double below = RoutingPolicy::cell_mass(-std::numeric_limits<double>::infinity(), obj.x_star, params);
    BruteForceResult out;
    std::vector<std::size_t> digit(n, 0);
    std::vector<double> probs(n);
    for (;;) {
        double upper = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            probs[k] = levels[digit[k]];
            upper += probs[k] * mass[k];
        }
        const double c = below > 0.0 ? (obj.p_star - upper) / below : 0.0;
        if (c >= -1e-12 && c <= 1.0 + 1e-12 && (below > 0.0 || std::abs(upper - obj.p_star) < 1e-12)) {
            ++out.feasible;
            const double cost = eval.cost(probs);
            if (cost < out.best_cost) {
                out.best_cost = cost;
                out.best_probs = probs;
            }
        }
        std::size_t k = 0;
        while (k < n && ++digit[k] == levels.size()) digit[k++] = 0;
        if (k == n) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// n agents with block-uniform interests.

inline double asymptotic_cost(double mu0) {
    const double rate = mu0 + std::numbers::ln2;
    if (!(mu0 > 0.0) || !(rate <= 1.0)) throw RateOutOfRange("asymptotic_cost: mu0 + ln 2 outside (0, 1]");
    return 1.0 / (2.0 * rate);
}

/// Service moments of one of n agents; its tasks have interest U[(n-1)/n, 1].
inline ServiceMoments n_agent_moments(int n, double mu0) {
    if (n < 1) throw DomainError("n_agent_moments: n must be at least 1");
    const FittsRateMap map(mu0);
    const double lo = static_cast<double>(n - 1) / static_cast<double>(n);
    return fitts_moments(RoutedInterestDensity::uniform(lo, 1.0), map);
}

/// C_n: each agent receives lambda / n of the traffic, priorities X ~ U[0, 1].
inline double analytic_cn(int n, double lambda, double mu0, const Accuracy& acc = {}) {
    const auto m = n_agent_moments(n, mu0);
    return cost_service_variation_general(lambda / static_cast<double>(n), m,
                                          RoutedInterestDensity::uniform(0.0, 1.0), acc);
}

}  // namespace pqagent
