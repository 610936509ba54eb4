#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "pqagent/analytic.hpp"
#include "pqagent/dists.hpp"
#include "pqagent/error.hpp"
#include "pqagent/routing.hpp"
#include "pqagent/service.hpp"
#include "pqagent/stats.hpp"

namespace pqagent {

// Slot convention: arrivals at the start of a slot (ahead of service in that slot, so a
// same-slot arrival can preempt), one slot of service for the head of every queue,
// departures at the end of the slot. The minimum sojourn is therefore one slot.

struct SimConfig {
    double lambda = 0.4;
    std::int64_t horizon_slots = 1'000'000;
    std::int64_t warmup_slots = -1;  // negative: 10% of the horizon
    std::size_t replications = 20;
    std::uint64_t base_seed = 20240601;
    std::size_t queue_cap = 1'000'000;
    unsigned jobs = 0;  // 0: hardware concurrency

    std::int64_t warmup() const { return warmup_slots < 0 ? horizon_slots / 10 : warmup_slots; }

    void validate() const {
        if (!(lambda > 0.0)) throw ConfigError("SimConfig: lambda must be positive");
        if (horizon_slots <= 0) throw ConfigError("SimConfig: horizon must be positive");
        if (warmup() >= horizon_slots) throw ConfigError("SimConfig: warmup must be below the horizon");
        if (replications == 0) throw ConfigError("SimConfig: need at least one replication");
        if (queue_cap == 0) throw ConfigError("SimConfig: queue cap must be positive");
    }
};

/// What a source hands the engine for each new task.
struct Arrival {
    std::size_t queue = 0;
    double priority = 0.0;   // larger is served first
    double weight = 0.0;     // principal interest x
    std::uint32_t service = 1;  // slots of work
    std::size_t tag = 0;
};

struct TaskRecord {
    double x = 0.0;
    double z = 0.0;
    std::size_t queue = 0;
    std::size_t tag = 0;
    std::int64_t arrival_slot = 0;
    std::int64_t departure_slot = 0;
    std::uint32_t requirement = 0;
    std::uint32_t served = 0;
    bool counted = false;

    std::int64_t sojourn() const { return departure_slot - arrival_slot + 1; }
};

struct NoObserver {
    void operator()(const TaskRecord&) const {}
};

/// Totals from one replication.
struct ReplicationTotals {
    struct Group {
        double weighted = 0.0;  // sum of x * D
        double sojourn = 0.0;   // sum of D
        std::uint64_t count = 0;
    };
    std::vector<Group> queues;
    std::vector<Group> tags;
    double area = 0.0;  // sum over measured slots of tasks in system
    std::int64_t measured_slots = 0;

    Group overall() const {
        Group g;
        for (const auto& q : queues) {
            g.weighted += q.weighted;
            g.sojourn += q.sojourn;
            g.count += q.count;
        }
        return g;
    }
};

namespace detail {

struct QueuedTask {
    double priority;
    std::uint64_t seq;
    double x;
    std::int64_t arrival;
    std::uint32_t remaining;
    std::uint32_t requirement;
    std::uint32_t served;
    std::size_t tag;
    bool counted;
};

// Max-heap order: higher priority first, then earlier arrival.
struct LowerPrecedence {
    bool operator()(const QueuedTask& a, const QueuedTask& b) const {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.seq > b.seq;
    }
};

}  // namespace detail

/// One replication. Tasks arriving in [warmup, horizon) are counted; the run continues
/// past the horizon until every counted task has left.
template <class Source, class Observer = NoObserver>
ReplicationTotals simulate_replication(Source& source, std::size_t queues, std::size_t tags,
                                       const SimConfig& cfg, Rng& rng, Observer&& observe = {}) {
    using detail::QueuedTask;
    std::vector<std::vector<QueuedTask>> heaps(queues);
    std::poisson_distribution<std::uint32_t> arrivals(cfg.lambda);
    const detail::LowerPrecedence order;
    ReplicationTotals out;
    out.queues.resize(queues);
    out.tags.resize(tags);

    const std::int64_t warm = cfg.warmup();
    const std::int64_t horizon = cfg.horizon_slots;
    const std::int64_t drain_limit = horizon + std::max<std::int64_t>(horizon, 1'000'000) * 10;
    std::uint64_t seq = 0;
    std::uint64_t outstanding = 0;
    std::uint64_t in_system = 0;

    for (std::int64_t t = 0; t < horizon || outstanding > 0; ++t) {
        if (t >= drain_limit) throw OverflowGuard("simulation did not drain; the system looks unstable");
        const bool measured = t >= warm && t < horizon;
        const std::uint32_t n = arrivals(rng);
        for (std::uint32_t k = 0; k < n; ++k) {
            const Arrival a = source(rng);
            auto& heap = heaps[a.queue];
            heap.push_back({a.priority, seq++, a.weight, t, a.service, a.service, 0, a.tag, measured});
            std::push_heap(heap.begin(), heap.end(), order);
            if (heap.size() > cfg.queue_cap) {
                throw OverflowGuard("queue length exceeded the configured cap");
            }
            if (measured) ++outstanding;
        }
        in_system += n;
        if (measured) {
            out.area += static_cast<double>(in_system);
            ++out.measured_slots;
        }
        for (std::size_t q = 0; q < queues; ++q) {
            auto& heap = heaps[q];
            if (heap.empty()) continue;
            auto& head = heap.front();
            ++head.served;
            if (--head.remaining > 0) continue;
            std::pop_heap(heap.begin(), heap.end(), order);
            const QueuedTask done = heap.back();
            heap.pop_back();
            --in_system;
            const double d = static_cast<double>(t - done.arrival + 1);
            if (done.counted) {
                --outstanding;
                auto add = [&](ReplicationTotals::Group& g) {
                    g.weighted += done.x * d;
                    g.sojourn += d;
                    ++g.count;
                };
                add(out.queues[q]);
                add(out.tags[done.tag]);
            }
            observe(TaskRecord{done.x, done.priority, q, done.tag, done.arrival, t,
                               done.requirement, done.served, done.counted});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Estimates across replications.

struct GroupEstimate {
    MeanEstimate cost;     // E[XD] within the group
    MeanEstimate sojourn;  // E[D] within the group
    std::uint64_t tasks = 0;
};

struct SimEstimate {
    MeanEstimate cost;
    MeanEstimate sojourn;
    MeanEstimate in_system;  // time-average number of tasks present
    std::uint64_t tasks_counted = 0;
    std::size_t replications = 0;
    std::vector<GroupEstimate> queues;
    std::vector<GroupEstimate> tags;

    double mean_cost() const { return cost.mean; }
    double ci_half_width() const { return cost.half_width; }
};

inline SimEstimate summarize(const std::vector<ReplicationTotals>& reps) {
    SimEstimate est;
    est.replications = reps.size();
    if (reps.empty()) return est;
    auto group_estimate = [&](auto pick) {
        std::vector<double> cost;
        std::vector<double> soj;
        GroupEstimate g;
        for (const auto& r : reps) {
            const ReplicationTotals::Group grp = pick(r);
            if (grp.count == 0) continue;
            cost.push_back(grp.weighted / static_cast<double>(grp.count));
            soj.push_back(grp.sojourn / static_cast<double>(grp.count));
            g.tasks += grp.count;
        }
        g.cost = estimate_mean(cost);
        g.sojourn = estimate_mean(soj);
        return g;
    };
    const auto all = group_estimate([](const ReplicationTotals& r) { return r.overall(); });
    est.cost = all.cost;
    est.sojourn = all.sojourn;
    est.tasks_counted = all.tasks;
    if (est.tasks_counted == 0) throw UnstableConfig("no task completed inside the measurement window");
    for (std::size_t q = 0; q < reps.front().queues.size(); ++q) {
        est.queues.push_back(group_estimate([q](const ReplicationTotals& r) { return r.queues[q]; }));
    }
    for (std::size_t k = 0; k < reps.front().tags.size(); ++k) {
        est.tags.push_back(group_estimate([k](const ReplicationTotals& r) { return r.tags[k]; }));
    }
    std::vector<double> area;
    for (const auto& r : reps) {
        area.push_back(r.area / static_cast<double>(std::max<std::int64_t>(1, r.measured_slots)));
    }
    est.in_system = estimate_mean(area);
    return est;
}

/// Runs cfg.replications independent replications on up to cfg.jobs threads. Replication i
/// uses its own generator seeded with base_seed + i and a fresh source from make_source,
/// so the result does not depend on the thread count.
template <class MakeSource>
SimEstimate run_replications(MakeSource&& make_source, std::size_t queues, std::size_t tags,
                             const SimConfig& cfg) {
    cfg.validate();
    std::vector<ReplicationTotals> reps(cfg.replications);
    unsigned jobs = cfg.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.jobs;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, cfg.replications));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= reps.size()) return;
            try {
                Rng rng = replication_rng(cfg.base_seed, i);
                auto source = make_source();
                reps[i] = simulate_replication(source, queues, tags, cfg, rng);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(reps.size());
                return;
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(reps);
}

// ---------------------------------------------------------------------------
// Task sources.

/// Gaussian (X, Y); the agent serves by z_priority at a constant rate.
struct GaussianPrioritySource {
    GaussianPairModel model;
    PrioritizationRule rule;
    double mu = 0.6;

    Arrival operator()(Rng& rng) const {
        const auto [x, y] = sample_gaussian_pair(model, rng);
        return {0, z_priority(x, y, rule, model), x, draw_service_slots(mu, rng), 0};
    }
};

/// X ~ U[0, 1] is the priority; service is constant-rate or Fitts-law in an independent
/// agent interest Y ~ U[0, 1].
struct UniformServiceSource {
    std::optional<double> constant_rate;
    double mu0 = 0.2;

    Arrival operator()(Rng& rng) const {
        std::uniform_real_distribution<double> unit;
        const double x = unit(rng);
        double mu = 0.0;
        if (constant_rate) {
            mu = *constant_rate;
        } else {
            mu = mu0 + std::log1p(unit(rng));
        }
        return {0, x, x, draw_service_slots(mu, rng), 0};
    }
};

/// Gaussian principal interest, two agents each ordering their queue by their own interest,
/// routing by a policy on X.
struct TwoAgentGaussianSource {
    TwoAgentParams params;
    RoutingPolicy policy;

    Arrival operator()(Rng& rng) const {
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unit;
        const auto& a = params.agents;
        double s = 0.0;
        double t[2] = {0.0, 0.0};
        if (params.coupling == AgentCoupling::ConditionallyIndependent) {
            s = normal(rng);
            for (int i = 0; i < 2; ++i) {
                const double r = a[i].rho;
                t[i] = r * s + std::sqrt(std::max(0.0, 1.0 - r * r)) * normal(rng);
            }
        } else {
            t[0] = normal(rng);
            t[1] = normal(rng);
            const double rest = 1.0 - a[0].rho * a[0].rho - a[1].rho * a[1].rho;
            s = a[0].rho * t[0] + a[1].rho * t[1] + std::sqrt(std::max(0.0, rest)) * normal(rng);
        }
        const double x = params.mean_x + params.sigma_x * s;
        const std::size_t q = unit(rng) < policy(x) ? 0 : 1;
        return {q, t[q], x, draw_service_slots(a[q].mu, rng), 0};
    }
};

/// X ~ U[0, 1] priority; two Fitts-law agents chosen by interest, or coin-routed machines.
struct TwoAgentServiceSource {
    TwoAgentServiceScenario scenario;

    Arrival operator()(Rng& rng) const {
        std::uniform_real_distribution<double> unit;
        const double x = unit(rng);
        if (scenario.machine_rate) {
            const std::size_t q = unit(rng) < 0.5 ? 0 : 1;
            return {q, x, x, draw_service_slots(*scenario.machine_rate, rng), 0};
        }
        const auto& r = scenario.routing;
        double y[2];
        std::size_t q = 0;
        switch (r.kind) {
            case InterestScenario::Uniform:
                y[0] = unit(rng);
                y[1] = unit(rng);
                q = unit(rng) < 0.5 ? 0 : 1;
                break;
            case InterestScenario::Quantal: {
                y[0] = unit(rng);
                y[1] = 1.0 - y[0];
                const double qq = r.perception.q;
                if (y[0] >= qq) {
                    q = 0;
                } else if (y[0] <= 1.0 - qq) {
                    q = 1;
                } else {
                    q = unit(rng) < r.perception.p_unsure ? 0 : 1;
                }
                break;
            }
            default: {
                const double rho_g = r.kind == InterestScenario::PerfectDiversity ? -1.0
                                     : r.kind == InterestScenario::Independent    ? 0.0
                                                                                  : r.rho_g;
                const auto [y1, y2] = sample_copula_pair(CopulaModel{rho_g}, rng);
                y[0] = y1;
                y[1] = y2;
                q = y1 > y2 ? 0 : 1;
                break;
            }
        }
        const double mu = scenario.mu0 + std::log1p(y[q]);
        return {q, x, x, draw_service_slots(mu, rng), 0};
    }
};

/// Block-uniform interests over n agents: each task interests exactly one agent highly.
struct NAgentSource {
    int n = 2;
    double mu0 = 0.2;

    Arrival operator()(Rng& rng) const {
        std::uniform_real_distribution<double> unit;
        std::uniform_int_distribution<int> pick(0, n - 1);
        const double x = unit(rng);
        const int k = pick(rng);
        const double nn = static_cast<double>(n);
        const double y = (nn - 1.0 + unit(rng)) / nn;
        return {static_cast<std::size_t>(k), x, x, draw_service_slots(mu0 + std::log1p(y), rng), 0};
    }
};

/// Two classes in one queue: a high class with rate lambda_high (priorities in (1, 2)) and a
/// tagged low class (priorities in (0, 1)). Weights are 1, so costs are mean sojourns.
struct CalibrationCase {
    double lambda_high = 0.25;
    double lambda_tagged = 0.02;
    double mu = 0.7;

    /// Mean sojourn of a tagged task: a tagged task with priority u sees higher-priority
    /// traffic of rate lambda_high + lambda_tagged (1 - u).
    double analytic_tagged() const {
        return integrate(
            [&](double u) {
                return expected_sojourn_poisson_geo(lambda_high + lambda_tagged * (1.0 - u), mu);
            },
            0.0, 1.0, Accuracy{64, 1});
    }

    double analytic_high() const {
        return integrate(
            [&](double u) { return expected_sojourn_poisson_geo(lambda_high * (1.0 - u), mu); },
            0.0, 1.0, Accuracy{64, 1});
    }
};

struct CalibrationSource {
    CalibrationCase c;

    Arrival operator()(Rng& rng) const {
        std::uniform_real_distribution<double> unit;
        const double total = c.lambda_high + c.lambda_tagged;
        const bool high = unit(rng) * total < c.lambda_high;
        const double u = unit(rng);
        return {0, high ? 1.0 + u : u, 1.0, draw_service_slots(c.mu, rng),
                static_cast<std::size_t>(high ? 0 : 1)};
    }
};

// ---------------------------------------------------------------------------
// Entry points.

/// Single agent ordering by z_priority at constant rate mu.
struct PriorityScenario {
    GaussianPairModel model{};
    PrioritizationRule rule{};
    double mu = 0.6;
};

/// Single agent with X ~ U[0, 1] priorities; constant or Fitts-law service.
struct ServiceScenario {
    std::optional<double> constant_rate;
    double mu0 = 0.2;

    double rate() const {
        if (constant_rate) return *constant_rate;
        return fitts_moments(RoutedInterestDensity::uniform(0.0, 1.0), FittsRateMap(mu0)).rate;
    }
};

using SingleQueueScenario = std::variant<PriorityScenario, ServiceScenario>;

namespace detail {
inline void require_stable(double load, double rate, const char* what) {
    if (!(load < rate)) throw UnstableConfig(std::string(what) + ": offered load reaches the service rate");
}
}  // namespace detail

inline SimEstimate run_single_queue(const SingleQueueScenario& scenario, const SimConfig& cfg) {
    cfg.validate();
    if (const auto* p = std::get_if<PriorityScenario>(&scenario)) {
        p->model.validate();
        p->rule.validate();
        if (!(p->mu > 0.0 && p->mu <= 1.0)) throw ConfigError("run_single_queue: mu in (0, 1]");
        detail::require_stable(cfg.lambda, p->mu, "run_single_queue");
        detail::mixture_sd_checked(p->rule.gamma, p->model.rho);
        return run_replications([p] { return GaussianPrioritySource{p->model, p->rule, p->mu}; }, 1,
                                1, cfg);
    }
    const auto& s = std::get<ServiceScenario>(scenario);
    if (s.constant_rate && !(*s.constant_rate > 0.0 && *s.constant_rate <= 1.0)) {
        throw ConfigError("run_single_queue: constant rate in (0, 1]");
    }
    if (!s.constant_rate) FittsRateMap(s.mu0);  // validates the map on [0, 1]
    detail::require_stable(cfg.lambda, s.rate(), "run_single_queue");
    return run_replications([&s] { return UniformServiceSource{s.constant_rate, s.mu0}; }, 1, 1,
                            cfg);
}

inline SimEstimate run_two_queue(const RoutingPolicy& policy, const TwoAgentParams& params,
                                 const SimConfig& cfg) {
    params.validate();
    cfg.validate();
    if (std::abs(cfg.lambda - params.lambda) > 1e-15) {
        throw ConfigError("run_two_queue: SimConfig lambda differs from the model lambda");
    }
    detail::require_stable(cfg.lambda * policy.mean_prob, params.agents[0].mu, "run_two_queue");
    detail::require_stable(cfg.lambda * (1.0 - policy.mean_prob), params.agents[1].mu, "run_two_queue");
    return run_replications([&] { return TwoAgentGaussianSource{params, policy}; }, 2, 1, cfg);
}

inline SimEstimate run_two_queue(const TwoAgentServiceScenario& scenario, const SimConfig& cfg) {
    cfg.validate();
    for (int i = 0; i < 2; ++i) {
        const double share = agent_share(scenario, i);
        if (share > 0.0) {
            detail::require_stable(cfg.lambda * share, agent_moments(scenario, i).rate, "run_two_queue");
        }
    }
    return run_replications([&] { return TwoAgentServiceSource{scenario}; }, 2, 1, cfg);
}

inline SimEstimate run_n_agent(int n, const SimConfig& cfg, double mu0 = 0.2) {
    cfg.validate();
    if (n < 1) throw ConfigError("run_n_agent: n must be at least 1");
    detail::require_stable(cfg.lambda / n, n_agent_moments(n, mu0).rate, "run_n_agent");
    return run_replications([&] { return NAgentSource{n, mu0}; }, static_cast<std::size_t>(n), 1,
                            cfg);
}

/// Tag 0 is the high class and tag 1 the tagged class in the returned breakdown.
inline SimEstimate run_calibration(const CalibrationCase& c, SimConfig cfg) {
    cfg.lambda = c.lambda_high + c.lambda_tagged;
    cfg.validate();
    detail::require_stable(cfg.lambda, c.mu, "run_calibration");
    return run_replications([&] { return CalibrationSource{c}; }, 1, 2, cfg);
}

}  // namespace pqagent
