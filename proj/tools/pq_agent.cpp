// pq-agent: runs the named experiments and writes their CSV tables.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pqagent/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int run(const std::string& name, const std::string& config_path,
        const std::optional<std::uint64_t>& seed, const std::string& out_dir,
        const std::optional<unsigned>& jobs, const std::optional<std::int64_t>& horizon) {
    pqagent::ExperimentConfig cfg;
    cfg.name = name;
    pqagent::find_experiment(name);
    if (!config_path.empty()) {
        pqagent::apply_config_document(pqagent::read_json_file(config_path), cfg);
    }
    // Flags win over the config file.
    if (seed) cfg.sim.base_seed = *seed;
    if (jobs) cfg.sim.jobs = *jobs;
    if (horizon) cfg.sim.horizon_slots = *horizon;
    cfg.out_dir = out_dir;
    cfg.sim.validate();
    const auto out = pqagent::run_experiment(cfg);
    std::cout << out.csv.string() << " (" << out.table.rows.size() << " rows)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Priority-queue principal-agent experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(PQAGENT_VERSION));

    auto* list = app.add_subcommand("list", "List the available experiments");

    auto* run_cmd = app.add_subcommand("run", "Run one experiment");
    std::string name;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::optional<std::int64_t> horizon;
    run_cmd->add_option("experiment", name, "Experiment name (see `list`)")->required();
    run_cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", seed, "Base seed; replication i uses seed + i");
    run_cmd->add_option("--out", out_dir, "Output directory");
    run_cmd->add_option("--jobs", jobs, "Replications run in parallel (0: all cores)");
    run_cmd->add_option("--horizon", horizon, "Slots per replication")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (list->parsed()) {
        for (const auto& e : pqagent::experiment_registry()) {
            std::printf("%-20s %s\n", e.name.c_str(), e.summary.c_str());
        }
        return kExitOk;
    }

    try {
        return run(name, config_path, seed, out_dir, jobs, horizon);
    } catch (const pqagent::StabilityError& e) {
        std::cerr << "pq-agent: unstable configuration: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const pqagent::DomainError& e) {
        std::cerr << "pq-agent: invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "pq-agent: " << e.what() << '\n';
        return kExitRuntime;
    }
}
