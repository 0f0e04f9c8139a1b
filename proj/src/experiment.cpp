#include "mbandit/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "mbandit/parallel.hpp"

namespace mbandit {

using nlohmann::json;

void apply_paper_scale(ExperimentConfig& config) {
    config.episodes = 3000;
    config.seeds.clear();
    config.seed_count = 80;
}

void apply_config_file(const std::string& text, ExperimentConfig& config) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config file: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config file: expected an object");

    try {
        for (const auto& [key, value] : root.items()) {
            if (key == "scenario") {
                config.scenario.name = value.get<std::string>();
            } else if (key == "parameters") {
                config.scenario.parameters = value.get<std::map<std::string, double>>();
            } else if (key == "instance") {
                config.instance_path = value.get<std::string>();
            } else if (key == "algorithms") {
                config.algorithms.clear();
                for (const auto& name : value) {
                    config.algorithms.push_back(parse_algorithm(name.get<std::string>()));
                }
            } else if (key == "episodes") {
                config.episodes = value.get<std::size_t>();
            } else if (key == "seeds") {
                if (value.is_array()) {
                    config.seeds = value.get<std::vector<std::uint64_t>>();
                } else {
                    config.seeds.clear();
                    config.seed_count = value.get<std::size_t>();
                }
            } else if (key == "master_seed") {
                config.master_seed = value.get<std::uint64_t>();
            } else if (key == "beta") {
                config.discount = value.get<double>();
            } else if (key == "regret") {
                const auto method = value.get<std::string>();
                if (method == "exact") {
                    config.regret = RegretMethod::exact;
                } else if (method == "mc") {
                    config.regret = RegretMethod::monte_carlo;
                } else {
                    throw std::invalid_argument("regret must be exact or mc");
                }
            } else if (key == "replicas") {
                config.replicas = value.get<std::size_t>();
            } else if (key == "out") {
                config.output_dir = value.get<std::string>();
            } else if (key == "jobs") {
                config.jobs = value.get<std::size_t>();
            } else if (key == "state_cap") {
                config.state_cap = value.get<std::size_t>();
            } else if (key == "evi_tolerance") {
                config.evi_tolerance = value.get<double>();
            } else if (key == "prior") {
                // Reuse the instance-file parser for the prior block.
                json wrapper{{"discount", 0.5}, {"arms", json::array()}, {"prior", value}};
                config.prior = parse_instance(wrapper.dump()).prior;
            } else if (key == "paper_scale") {
                if (value.get<bool>()) apply_paper_scale(config);
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("config file: ") + e.what());
    }
}

void check_config(const ExperimentConfig& config) {
    if (config.algorithms.empty()) throw std::invalid_argument("algorithm list is empty");
    if (config.episodes < 1) throw std::invalid_argument("episode count must be at least 1");
    if (config.seeds.empty() && config.seed_count < 1) {
        throw std::invalid_argument("at least one seed is required");
    }
    if (config.regret == RegretMethod::monte_carlo && config.replicas < 1) {
        throw std::invalid_argument("replica count must be positive");
    }
    if (config.discount && !(*config.discount > 0.0 && *config.discount < 1.0)) {
        throw std::invalid_argument("discount outside (0,1)");
    }
    if (!config.instance_path) {
        const auto& names = scenario_names();
        if (std::find(names.begin(), names.end(), config.scenario.name) == names.end()) {
            throw std::invalid_argument("unknown scenario '" + config.scenario.name + "'");
        }
    }
}

std::vector<std::uint64_t> resolve_seeds(const ExperimentConfig& config) {
    if (!config.seeds.empty()) return config.seeds;
    std::vector<std::uint64_t> seeds;
    const std::string label = scenario_label(config);
    for (std::size_t i = 0; i < config.seed_count; ++i) {
        seeds.push_back(derive_seed(config.master_seed, label, i));
    }
    return seeds;
}

std::string scenario_label(const ExperimentConfig& config) {
    if (config.instance_path) return config.instance_path->stem().string();
    return config.scenario.name;
}

BanditInstance experiment_instance(const ExperimentConfig& config, std::uint64_t seed) {
    BanditInstance instance;
    if (config.instance_path) {
        instance = load_instance(*config.instance_path).instance;
    } else {
        Rng rng = make_rng(seed, "scenario");
        instance = make_scenario(config.scenario, rng);
    }
    if (config.discount) instance.discount = *config.discount;
    return instance;
}

namespace {

PriorConfig effective_prior(const ExperimentConfig& config) {
    if (config.prior) return *config.prior;
    if (config.instance_path) {
        if (auto prior = load_instance(*config.instance_path).prior) return *prior;
    }
    return PriorConfig{};
}

RegretTrace run_cell(const ExperimentConfig& config, const PriorConfig& prior, Algorithm algorithm,
                     std::uint64_t seed, std::size_t replica_jobs) {
    const BanditInstance instance = experiment_instance(config, seed);
    LearnerConfig learner;
    learner.algorithm = algorithm;
    learner.episodes = config.episodes;
    learner.seed = seed;
    learner.prior = prior;
    learner.evi_state_cap = config.state_cap;
    learner.evi_tolerance = config.evi_tolerance;

    const std::string name(algorithm_name(algorithm));
    if (config.regret == RegretMethod::monte_carlo) {
        RegretTrace trace = regret_monte_carlo(instance, learner, config.replicas, replica_jobs);
        trace.seed = seed;
        return trace;
    }
    // Fail before learning when the exact evaluation cannot run.
    if (instance.global_state_count() > static_cast<double>(config.state_cap)) {
        throw StateSpaceTooLarge(instance.global_state_count(), config.state_cap,
                                 "use Monte-Carlo regret instead");
    }
    const LearnerRun run = run_learner(instance, learner);
    return regret_exact(instance, run, name, seed, config.state_cap);
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v.begin(), v.end()) / static_cast<double>(v.size());
}

}  // namespace

bool ExperimentResult::ok() const {
    for (const CellResult& cell : cells) {
        if (!cell.error.empty()) return false;
    }
    return true;
}

std::filesystem::path trace_path(const ExperimentConfig& config, Algorithm algorithm,
                                 std::uint64_t seed) {
    return config.output_dir / ("trace_" + scenario_label(config) + "_" +
                                std::string(algorithm_name(algorithm)) + "_seed" +
                                std::to_string(seed) + ".csv");
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
    check_config(config);
    const std::vector<std::uint64_t> seeds = resolve_seeds(config);
    const PriorConfig prior = effective_prior(config);
    if (config.regret == RegretMethod::exact && !seeds.empty()) {
        // Every seed of a scenario has the same state counts, so one instance decides.
        const double states = experiment_instance(config, seeds.front()).global_state_count();
        if (states > static_cast<double>(config.state_cap)) {
            throw StateSpaceTooLarge(states, config.state_cap, "use Monte-Carlo regret instead");
        }
    }

    std::filesystem::create_directories(config.output_dir);

    ExperimentResult result;
    for (Algorithm algorithm : config.algorithms) {
        for (std::uint64_t seed : seeds) {
            CellResult cell;
            cell.algorithm = algorithm;
            cell.seed = seed;
            cell.csv_path = trace_path(config, algorithm, seed);
            result.cells.push_back(std::move(cell));
        }
    }

    // Cells run in parallel; replicas inside a cell only when there is a single cell.
    const std::size_t cell_jobs = std::min(config.jobs, result.cells.size());
    const std::size_t replica_jobs = result.cells.size() == 1 ? config.jobs : 1;
    parallel_for(result.cells.size(), cell_jobs, [&](std::size_t i) {
        CellResult& cell = result.cells[i];
        try {
            cell.trace = run_cell(config, prior, cell.algorithm, cell.seed, replica_jobs);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    for (const CellResult& cell : result.cells) {
        if (!cell.trace) {
            log << "cell " << algorithm_name(cell.algorithm) << " seed " << cell.seed
                << " failed: " << cell.error << "\n";
            continue;
        }
        std::ofstream out(cell.csv_path, std::ios::binary);
        write_trace_csv(out, *cell.trace);
        if (!out) throw std::runtime_error("cannot write " + cell.csv_path.string());
    }

    for (Algorithm algorithm : config.algorithms) {
        std::vector<double> finals;
        std::vector<double> ms;
        for (const CellResult& cell : result.cells) {
            if (cell.algorithm != algorithm || !cell.trace) continue;
            finals.push_back(cell.trace->final_regret());
            for (const RegretRow& row : cell.trace->rows) ms.push_back(row.policy_ms);
        }
        SummaryRow row;
        row.algorithm = std::string(algorithm_name(algorithm));
        row.seeds = finals.size();
        row.episodes = config.episodes;
        row.final_regret_mean = mean_of(finals);
        if (finals.size() > 1) {
            std::vector<double> sq;
            for (double f : finals) sq.push_back((f - row.final_regret_mean) * (f - row.final_regret_mean));
            row.final_regret_std = std::sqrt(pairwise_sum(sq.begin(), sq.end()) /
                                             static_cast<double>(finals.size() - 1));
        }
        row.policy_ms_mean = mean_of(ms);
        result.summary.push_back(row);
    }

    result.summary_path = config.output_dir / ("summary_" + scenario_label(config) + ".csv");
    std::ofstream out(result.summary_path, std::ios::binary);
    write_summary_csv(out, result.summary);
    if (!out) throw std::runtime_error("cannot write " + result.summary_path.string());
    return result;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "algorithm,seeds,K,final_regret_mean,final_regret_std,policy_ms_mean\n";
    char buffer[256];
    for (const SummaryRow& row : rows) {
        std::snprintf(buffer, sizeof buffer, "%s,%zu,%zu,%.17g,%.17g,%.6f\n", row.algorithm.c_str(),
                      row.seeds, row.episodes, row.final_regret_mean, row.final_regret_std,
                      row.policy_ms_mean);
        out << buffer;
    }
}

}  // namespace mbandit
