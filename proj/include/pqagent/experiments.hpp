#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqagent/analytic.hpp"
#include "pqagent/csv.hpp"
#include "pqagent/error.hpp"
#include "pqagent/incentives.hpp"
#include "pqagent/routing.hpp"
#include "pqagent/sim.hpp"

#ifndef PQAGENT_VERSION
#define PQAGENT_VERSION "0.1.0"
#endif

namespace pqagent {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration.

/// Reads typed values out of a JSON object and rejects keys nobody asked for.
class ParamReader {
public:
    ParamReader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j_.is_null() && !j_.is_object()) throw ConfigError(context_ + ": expected an object");
    }

    double number(const std::string& key, double def) {
        const json* v = lookup(key);
        if (!v) return record(key, def);
        if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
        return record(key, v->get<double>());
    }

    std::int64_t integer(const std::string& key, std::int64_t def) {
        const json* v = lookup(key);
        if (!v) return record(key, def);
        if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
        return record(key, v->get<std::int64_t>());
    }

    bool flag(const std::string& key, bool def) {
        const json* v = lookup(key);
        if (!v) return record(key, def);
        if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
        return record(key, v->get<bool>());
    }

    std::string text(const std::string& key, const std::string& def) {
        const json* v = lookup(key);
        if (!v) return record(key, def);
        if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
        return record(key, v->get<std::string>());
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        const json* v = lookup(key);
        if (!v) return record(key, std::move(def));
        if (!v->is_array() || v->empty()) throw ConfigError(where(key) + " must be a non-empty array");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) throw ConfigError(where(key) + " must hold numbers only");
            out.push_back(e.get<double>());
        }
        return record(key, std::move(out));
    }

    std::vector<std::string> texts(const std::string& key, std::vector<std::string> def) {
        const json* v = lookup(key);
        if (!v) return record(key, std::move(def));
        if (!v->is_array() || v->empty()) throw ConfigError(where(key) + " must be a non-empty array");
        std::vector<std::string> out;
        for (const auto& e : *v) {
            if (!e.is_string()) throw ConfigError(where(key) + " must hold strings only");
            out.push_back(e.get<std::string>());
        }
        return record(key, std::move(out));
    }

    /// Raw sub-document, recorded as given.
    const json* raw(const std::string& key) {
        const json* v = lookup(key);
        if (v) effective_[key] = *v;
        return v;
    }

    /// Throws on any key that was never read.
    void finish() const {
        if (!j_.is_object()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) throw ConfigError(where(it.key()) + " is not a known setting");
        }
    }

    const json& effective() const { return effective_; }

private:
    const json* lookup(const std::string& key) {
        used_.insert(key);
        if (!j_.is_object()) return nullptr;
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T>
    T record(const std::string& key, T value) {
        effective_[key] = value;
        return value;
    }

    std::string where(const std::string& key) const { return context_ + "." + key; }

    const json& j_;
    std::string context_;
    std::set<std::string> used_;
    json effective_ = json::object();
};

struct ExperimentConfig {
    std::string name;
    SimConfig sim{};
    bool simulate = true;
    json params = json::object();
    std::filesystem::path out_dir = ".";
};

/// Applies the top-level keys of a config document on top of `cfg`.
inline void apply_config_document(const json& doc, ExperimentConfig& cfg) {
    ParamReader r(doc, "config");
    const std::string name = r.text("experiment", cfg.name);
    if (!cfg.name.empty() && name != cfg.name) {
        throw ConfigError("config names experiment '" + name + "' but '" + cfg.name + "' was requested");
    }
    cfg.name = name;
    const auto seed = r.integer("seed", static_cast<std::int64_t>(cfg.sim.base_seed));
    if (seed < 0) throw ConfigError("config.seed must be nonnegative");
    cfg.sim.base_seed = static_cast<std::uint64_t>(seed);
    cfg.sim.horizon_slots = r.integer("horizon", cfg.sim.horizon_slots);
    cfg.sim.warmup_slots = r.integer("warmup", cfg.sim.warmup_slots);
    const auto reps = r.integer("replications", static_cast<std::int64_t>(cfg.sim.replications));
    if (reps < 1) throw ConfigError("config.replications must be at least 1");
    cfg.sim.replications = static_cast<std::size_t>(reps);
    const auto cap = r.integer("queue_cap", static_cast<std::int64_t>(cfg.sim.queue_cap));
    if (cap < 1) throw ConfigError("config.queue_cap must be positive");
    cfg.sim.queue_cap = static_cast<std::size_t>(cap);
    const auto jobs = r.integer("jobs", cfg.sim.jobs);
    if (jobs < 0) throw ConfigError("config.jobs must be nonnegative");
    cfg.sim.jobs = static_cast<unsigned>(jobs);
    cfg.simulate = r.flag("simulate", cfg.simulate);
    if (const json* p = r.raw("params")) {
        if (!p->is_object()) throw ConfigError("config.params must be an object");
        cfg.params = *p;
    }
    r.finish();
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(is, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Experiments.

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::vector<double> linspace(double a, double b, std::int64_t n) {
    if (n < 2) throw ConfigError("grid needs at least two points");
    std::vector<double> out;
    for (std::int64_t i = 0; i < n; ++i) {
        out.push_back(i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return out;
}

inline std::vector<std::string> standard_columns() {
    return {"series", "param_name", "param", "analytic_cost", "sim_cost", "ci_half_width", "method"};
}

inline SimConfig at_lambda(const ExperimentConfig& cfg, double lambda) {
    SimConfig s = cfg.sim;
    s.lambda = lambda;
    return s;
}

inline void push_sim(std::vector<Cell>& row, const SimEstimate* e) {
    if (e) {
        row.push_back(e->mean_cost());
        row.push_back(e->ci_half_width());
    } else {
        row.push_back(std::monostate{});
        row.push_back(std::monostate{});
    }
}

inline TwoAgentParams read_two_agent(ParamReader& r, const TwoAgentParams& base = {}) {
    TwoAgentParams p = base;
    p.lambda = r.number("lambda", p.lambda);
    p.mean_x = r.number("mean_x", p.mean_x);
    p.sigma_x = r.number("sigma_x", p.sigma_x);
    p.agents[0].rho = r.number("rho1", p.agents[0].rho);
    p.agents[1].rho = r.number("rho2", p.agents[1].rho);
    p.agents[0].mean_y = r.number("mean_y1", p.agents[0].mean_y);
    p.agents[1].mean_y = r.number("mean_y2", p.agents[1].mean_y);
    p.agents[0].sigma_y = r.number("sigma_y1", p.agents[0].sigma_y);
    p.agents[1].sigma_y = r.number("sigma_y2", p.agents[1].sigma_y);
    p.agents[0].mu = r.number("mu1", p.agents[0].mu);
    p.agents[1].mu = r.number("mu2", p.agents[1].mu);
    const auto coupling = r.text("coupling", p.coupling == AgentCoupling::Independent
                                                 ? "independent" : "conditional");
    if (coupling == "conditional") {
        p.coupling = AgentCoupling::ConditionallyIndependent;
    } else if (coupling == "independent") {
        p.coupling = AgentCoupling::Independent;
    } else {
        throw ConfigError("coupling must be 'conditional' or 'independent'");
    }
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return p;
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

// Single agent, Gaussian interests: cost over one parameter for fixed values of the other.
inline Table priority_sweep(const ExperimentConfig& cfg, ParamReader& r, bool over_gamma) {
    const double lambda = r.number("lambda", 0.4);
    const double mu = r.number("mu", 0.6);
    const auto fixed = over_gamma ? r.numbers("rhos", {-1.0, -0.5, 0.0, 0.5, 1.0})
                                  : r.numbers("gammas", {0.0, 0.3, 0.5, 0.7, 1.0});
    const auto points = r.integer(over_gamma ? "gamma_points" : "rho_points", 101);
    const auto stride = r.integer("sim_stride", 10);
    r.finish();
    require(lambda > 0.0 && lambda < mu && mu <= 1.0, "need 0 < lambda < mu <= 1");
    require(stride >= 1, "sim_stride must be at least 1");
    for (double v : fixed) require(v >= (over_gamma ? -1.0 : 0.0) && v <= 1.0, "fixed values out of range");

    const double c1 = c1_integral(lambda, mu);
    const auto grid = over_gamma ? linspace(0.0, 1.0, points) : linspace(-1.0, 1.0, points);
    Table t{standard_columns(), {}};
    for (double f : fixed) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double gamma = over_gamma ? grid[i] : f;
            const double rho = over_gamma ? f : grid[i];
            std::vector<Cell> row{std::string(over_gamma ? "rho=" : "gamma=") + fmt(f),
                                  std::string(over_gamma ? "gamma" : "rho"), grid[i]};
            if (is_degenerate(gamma, rho)) {
                row.insert(row.end(), {std::monostate{}, std::monostate{}, std::monostate{},
                                       std::string("degenerate")});
                t.add(std::move(row));
                continue;
            }
            row.push_back(rho_xz(gamma, rho) * c1);
            const bool sim_here = cfg.simulate && (i % static_cast<std::size_t>(stride) == 0 ||
                                                   i + 1 == grid.size());
            if (sim_here) {
                const auto e = run_single_queue(
                    PriorityScenario{GaussianPairModel{0.0, 0.0, 1.0, 1.0, rho}, {gamma}, mu},
                    at_lambda(cfg, lambda));
                push_sim(row, &e);
            } else {
                push_sim(row, nullptr);
            }
            row.push_back(std::string(to_string(CostMethod::Quadrature)));
            t.add(std::move(row));
        }
    }
    return t;
}

inline std::vector<double> default_lambdas() {
    return {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
}

inline Table fig_gamma(const ExperimentConfig& cfg, ParamReader& r) { return priority_sweep(cfg, r, true); }
inline Table fig_rho(const ExperimentConfig& cfg, ParamReader& r) { return priority_sweep(cfg, r, false); }

inline Table fig_lambda_service(const ExperimentConfig& cfg, ParamReader& r) {
    const double mu0 = r.number("mu0", 0.2);
    const auto lambdas = r.numbers("lambdas", default_lambdas());
    r.finish();
    const FittsRateMap map(mu0);
    const auto moments = fitts_moments(RoutedInterestDensity::uniform(0.0, 1.0), map);
    const auto x = RoutedInterestDensity::uniform(0.0, 1.0);
    Table t{standard_columns(), {}};
    for (double l : lambdas) {
        require(l > 0.0 && l < 0.5, "lambdas must lie in (0, 1/2)");
        t.add({std::string("variable-closed"), std::string("lambda"), l, cost_variable_rate_closed(l),
               std::monostate{}, std::monostate{}, std::string(to_string(CostMethod::ClosedForm))});
    }
    for (double l : lambdas) {
        std::vector<Cell> row{std::string("constant"), std::string("lambda"), l, cost_constant_rate_closed(l)};
        if (cfg.simulate) {
            const auto e = run_single_queue(ServiceScenario{0.5, mu0}, at_lambda(cfg, l));
            push_sim(row, &e);
        } else {
            push_sim(row, nullptr);
        }
        row.push_back(std::string(to_string(CostMethod::ClosedForm)));
        t.add(std::move(row));
    }
    for (double l : lambdas) {
        std::vector<Cell> row{std::string("variable"), std::string("lambda"), l,
                              cost_service_variation_general(l, moments, x)};
        if (cfg.simulate) {
            const auto e = run_single_queue(ServiceScenario{std::nullopt, mu0}, at_lambda(cfg, l));
            push_sim(row, &e);
        } else {
            push_sim(row, nullptr);
        }
        row.push_back(std::string(to_string(CostMethod::Quadrature)));
        t.add(std::move(row));
    }
    return t;
}

inline void two_agent_series(const ExperimentConfig& cfg, Table& t, const std::string& series,
                             const TwoAgentServiceScenario& s, const std::vector<double>& lambdas) {
    for (double l : lambdas) {
        std::vector<Cell> row{series, std::string("lambda"), l, cost_two_agent_service_variation(l, s)};
        if (cfg.simulate) {
            const auto e = run_two_queue(s, at_lambda(cfg, l));
            push_sim(row, &e);
        } else {
            push_sim(row, nullptr);
        }
        row.push_back(std::string(to_string(CostMethod::Quadrature)));
        t.add(std::move(row));
    }
}

inline Table fig_diversity(const ExperimentConfig& cfg, ParamReader& r) {
    const double mu0 = r.number("mu0", 0.2);
    const auto lambdas = r.numbers("lambdas", default_lambdas());
    const auto rho_gs = r.numbers("rho_gs", {0.0, -0.4, -0.8, -1.0});
    // The machine works at the average rate of independent agents unless told otherwise.
    const double indep_rate =
        agent_moments(TwoAgentServiceScenario{RoutingScenario::independent(), mu0, std::nullopt}, 0).rate;
    const double machine = r.number("machine_rate", indep_rate);
    r.finish();
    require(machine > 0.0 && machine <= 1.0, "machine_rate must lie in (0, 1]");
    for (double g : rho_gs) require(g >= -1.0 && g <= 0.0, "rho_gs must lie in [-1, 0]");
    Table t{standard_columns(), {}};
    two_agent_series(cfg, t, "machine", {RoutingScenario::uniform(), mu0, machine}, lambdas);
    for (double g : rho_gs) {
        two_agent_series(cfg, t, "rho_g=" + fmt(g), {RoutingScenario::copula(g), mu0, std::nullopt},
                         lambdas);
    }
    return t;
}

inline Table fig_quantal(const ExperimentConfig& cfg, ParamReader& r) {
    const double mu0 = r.number("mu0", 0.2);
    const auto lambdas = r.numbers("lambdas", default_lambdas());
    const auto qs = r.numbers("qs", {0.5, 0.9, 1.0});
    const double p_unsure = r.number("p_unsure", 0.5);
    // Random routing (q = 1) sets the machine's rate unless told otherwise.
    const double random_rate =
        agent_moments(TwoAgentServiceScenario{RoutingScenario::quantal(1.0, 0.5), mu0, std::nullopt}, 0).rate;
    const double machine = r.number("machine_rate", random_rate);
    r.finish();
    require(machine > 0.0 && machine <= 1.0, "machine_rate must lie in (0, 1]");
    for (double q : qs) require(q >= 0.5 && q <= 1.0, "qs must lie in [1/2, 1]");
    Table t{standard_columns(), {}};
    for (double q : qs) {
        two_agent_series(cfg, t, "q=" + fmt(q),
                         {RoutingScenario::quantal(q, p_unsure), mu0, std::nullopt}, lambdas);
    }
    two_agent_series(cfg, t, "machine", {RoutingScenario::uniform(), mu0, machine}, lambdas);
    const double asym = asymptotic_cost(mu0);
    for (double l : lambdas) {
        t.add({std::string("asymptote"), std::string("lambda"), l, asym, std::monostate{},
               std::monostate{}, std::string(to_string(CostMethod::ClosedForm))});
    }
    return t;
}

inline IncentiveMap parse_map(const std::string& name) {
    if (name == "saturating") return IncentiveMap::saturating();
    if (name == "logistic") return IncentiveMap::logistic();
    if (name == "capped-linear") return IncentiveMap::capped_linear();
    throw ConfigError("unknown incentive map '" + name + "'");
}

inline Table prop1(const ExperimentConfig&, ParamReader& r) {
    const double lambda = r.number("lambda", 0.4);
    const double mu = r.number("mu", 0.6);
    const auto thetas = r.numbers("thetas", {1.0, 5.0, 20.0});
    const auto maps = r.texts("maps", {"saturating", "logistic", "capped-linear"});
    const auto points = r.integer("rho_points", 17);
    const double beta_max = r.number("beta_max", 100.0);
    const auto grid = r.integer("grid_points", 4096);
    r.finish();
    require(grid >= 2, "grid_points must be at least 2");
    Table t{{"series", "param_name", "param", "beta_star", "u_star", "beta_grid_step", "increase"}, {}};
    for (const auto& m : maps) {
        for (double theta : thetas) {
            double prev = -1.0;
            for (double rho : linspace(-1.0, 1.0, points)) {
                IncentiveSpec spec{theta, parse_map(m), rho, lambda, mu, beta_max,
                                   static_cast<std::size_t>(grid)};
                const auto opt = optimize_incentive(spec);
                const double inc = prev < 0.0 ? 0.0 : std::max(0.0, opt.beta_star - prev);
                prev = opt.beta_star;
                t.add({m + ";theta=" + fmt(theta), std::string("rho"), rho, opt.beta_star, opt.u_star,
                       opt.grid_step, inc});
            }
        }
    }
    return t;
}

inline Table lemma1(const ExperimentConfig& cfg, ParamReader& r) {
    const auto params = read_two_agent(r);
    const double mean = r.number("mean_prob", -1.0);
    r.finish();
    const double q = mean < 0.0 ? minimize_total_cost(params).q_star : mean;
    require(q >= 0.0 && q <= 1.0, "mean_prob must lie in [0, 1]");
    Table t{standard_columns(), {}};
    const std::vector<std::pair<std::string, RoutingPolicy>> policies{
        {"constant", RoutingPolicy::constant(q, params)},
        {"upper-threshold", RoutingPolicy::upper_threshold(q, params)},
        {"lower-threshold", RoutingPolicy::lower_threshold(q, params)},
    };
    for (const auto& [name, pol] : policies) {
        std::vector<Cell> row{name, std::string("mean_prob"), pol.mean_prob, total_cost(pol, params)};
        if (cfg.simulate) {
            const auto e = run_two_queue(pol, params, at_lambda(cfg, params.lambda));
            push_sim(row, &e);
        } else {
            push_sim(row, nullptr);
        }
        row.push_back(std::string(to_string(CostMethod::Quadrature)));
        t.add(std::move(row));
    }
    return t;
}

struct Prop3Case {
    TwoAgentParams params;
    double x_quantile = 0.7;  // x_star as a quantile of X
    double p_star = -1.0;     // negative: use the q* optimum
};

inline std::vector<Prop3Case> default_prop3_cases() {
    Prop3Case a;
    Prop3Case b;
    b.params.agents[0].rho = 0.5;
    b.params.agents[1].rho = -0.3;
    b.params.agents[0].mu = 0.5;
    b.params.agents[1].mu = 0.7;
    b.x_quantile = 0.6;
    Prop3Case c;
    c.params.lambda = 0.5;
    c.params.agents[0].rho = 0.9;
    c.params.agents[1].rho = 0.6;
    c.params.agents[0].mu = 0.7;
    c.params.agents[1].mu = 0.5;
    c.x_quantile = 0.8;
    c.p_star = 0.5;
    return {a, b, c};
}

inline Table prop3(const ExperimentConfig&, ParamReader& r) {
    std::vector<Prop3Case> cases = default_prop3_cases();
    const auto cells = r.integer("cells", 8);
    if (const json* sets = r.raw("cases")) {
        require(sets->is_array() && !sets->empty(), "cases must be a non-empty array");
        cases.clear();
        for (std::size_t i = 0; i < sets->size(); ++i) {
            ParamReader cr((*sets)[i], "cases[" + std::to_string(i) + "]");
            Prop3Case c;
            c.params = read_two_agent(cr);
            c.x_quantile = cr.number("x_quantile", c.x_quantile);
            c.p_star = cr.number("p_star", c.p_star);
            cr.finish();
            require(c.x_quantile > 0.0 && c.x_quantile < 1.0, "x_quantile must lie in (0, 1)");
            cases.push_back(c);
        }
    }
    r.finish();
    require(cells >= 1 && cells <= 12, "cells must lie in [1, 12]");
    Table t{{"series", "x_star", "p_star", "threshold_cost", "brute_force_min", "constant_cost",
             "candidates", "threshold_total_cost", "optimal_total_cost"},
            {}};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        const auto opt = minimize_total_cost(c.params);
        const double p_star = c.p_star < 0.0 ? opt.q_star : c.p_star;
        const double x_star = c.params.mean_x + c.params.sigma_x * normal_quantile(c.x_quantile);
        const HighPriorityObjective obj{x_star, p_star};
        const auto policy = build_threshold_policy(obj, c.params);
        const auto brute = brute_force_high_priority(
            obj, c.params, equal_mass_cells(x_star, static_cast<std::size_t>(cells), c.params));
        const auto flat = RoutingPolicy::constant(p_star, c.params);
        t.add({"case" + std::to_string(i + 1), x_star, p_star, high_priority_cost(policy, x_star, c.params),
               brute.best_cost, high_priority_cost(flat, x_star, c.params),
               static_cast<long long>(brute.feasible), total_cost(policy, c.params),
               cost_two_agent_priority_variation(p_star, c.params)});
    }
    return t;
}

inline Table prop4(const ExperimentConfig& cfg, ParamReader& r) {
    const double lambda = r.number("lambda", 0.4);
    const double mu0 = r.number("mu0", 0.2);
    const auto ns = r.numbers("ns", {1, 2, 4, 8, 16, 32, 64});
    r.finish();
    auto cols = standard_columns();
    cols.push_back("asymptote");
    Table t{cols, {}};
    const double asym = asymptotic_cost(mu0);
    for (double nd : ns) {
        const int n = static_cast<int>(nd);
        require(n >= 1 && static_cast<double>(n) == nd, "ns must be positive integers");
        std::vector<Cell> row{std::string("C_n"), std::string("n"), static_cast<long long>(n),
                              analytic_cn(n, lambda, mu0)};
        if (cfg.simulate) {
            const auto e = run_n_agent(n, at_lambda(cfg, lambda), mu0);
            push_sim(row, &e);
        } else {
            push_sim(row, nullptr);
        }
        row.push_back(std::string(to_string(CostMethod::Quadrature)));
        row.push_back(asym);
        t.add(std::move(row));
    }
    return t;
}

inline Table calibrate(const ExperimentConfig& cfg, ParamReader& r) {
    const auto highs = r.numbers("lambda_highs", {0.1, 0.25, 0.4});
    const auto mus = r.numbers("mus", {0.5, 0.7, 0.9});
    const double tagged = r.number("lambda_tagged", 0.02);
    r.finish();
    Table t{{"series", "lambda_high", "mu", "analytic_tagged", "sim_tagged", "ci_tagged",
             "analytic_high", "sim_high", "ci_high"},
            {}};
    for (double lz : highs) {
        for (double mu : mus) {
            const CalibrationCase c{lz, tagged, mu};
            std::vector<Cell> row{"lz=" + fmt(lz) + ";mu=" + fmt(mu), lz, mu, c.analytic_tagged()};
            SimEstimate e;
            if (cfg.simulate) e = run_calibration(c, cfg.sim);
            auto push = [&](int tag) {
                if (cfg.simulate) {
                    row.push_back(e.tags[tag].sojourn.mean);
                    row.push_back(e.tags[tag].sojourn.half_width);
                } else {
                    row.push_back(std::monostate{});
                    row.push_back(std::monostate{});
                }
            };
            push(1);
            row.push_back(c.analytic_high());
            push(0);
            t.add(std::move(row));
        }
    }
    return t;
}

}  // namespace detail

struct ExperimentInfo {
    std::string name;
    std::string summary;
    std::function<Table(const ExperimentConfig&, ParamReader&)> run;
};

inline const std::vector<ExperimentInfo>& experiment_registry() {
    static const std::vector<ExperimentInfo> list{
        {"fig-gamma", "single agent: cost against gamma for fixed rho", detail::fig_gamma},
        {"fig-rho", "single agent: cost against rho for fixed gamma", detail::fig_rho},
        {"fig-lambda-service", "single agent: interest-dependent against constant service",
         detail::fig_lambda_service},
        {"fig-diversity", "two agents: diversity of interests against a machine pair",
         detail::fig_diversity},
        {"fig-quantal", "two agents: coarse knowledge of interests", detail::fig_quantal},
        {"prop1", "optimal incentive against alignment", detail::prop1},
        {"lemma1", "mean-matched routing policies", detail::lemma1},
        {"prop3", "threshold policy against brute-force policies", detail::prop3},
        {"prop4", "n agents and the asymptotic cost", detail::prop4},
        {"calibrate", "two-class simulator calibration", detail::calibrate},
    };
    return list;
}

inline const ExperimentInfo& find_experiment(const std::string& name) {
    for (const auto& e : experiment_registry()) {
        if (e.name == name) return e;
    }
    throw ConfigError("unknown experiment '" + name + "' (see `pq-agent list`)");
}

struct ExperimentOutput {
    std::filesystem::path csv;
    std::filesystem::path meta;
    Table table;
};

/// Runs one experiment and writes <out>/<name>.csv plus <out>/<name>.meta.json.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    const auto& info = find_experiment(cfg.name);
    cfg.sim.validate();
    const auto start = std::chrono::steady_clock::now();
    ParamReader reader(cfg.params, "params");
    Table table = info.run(cfg, reader);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::create_directories(cfg.out_dir);
    ExperimentOutput out{cfg.out_dir / (cfg.name + ".csv"), cfg.out_dir / (cfg.name + ".meta.json"),
                         std::move(table)};
    write_csv_file(out.csv, out.table);
    try {
        json meta{
            {"experiment", cfg.name},
            {"version", PQAGENT_VERSION},
            {"seed", cfg.sim.base_seed},
            {"horizon", cfg.sim.horizon_slots},
            {"warmup", cfg.sim.warmup()},
            {"replications", cfg.sim.replications},
            {"simulate", cfg.simulate},
            {"params", reader.effective()},
            {"rows", out.table.rows.size()},
            {"wall_time_seconds", wall},
        };
        std::ofstream os(out.meta);
        os << meta.dump(2) << '\n';
        if (!os) throw Error("failed to write " + out.meta.string());
    } catch (...) {
        std::filesystem::remove(out.csv);
        std::filesystem::remove(out.meta);
        throw;
    }
    return out;
}

}  // namespace pqagent
