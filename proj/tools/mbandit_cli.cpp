#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mbandit/confidence.hpp"
#include "mbandit/environments.hpp"
#include "mbandit/evaluation.hpp"
#include "mbandit/experiment.hpp"
#include "mbandit/gittins.hpp"
#include "mbandit/instance_io.hpp"

using namespace mbandit;

namespace {

std::map<std::string, double> parse_parameters(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const std::string& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected key=value, got " + item);
        try {
            out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--param", "value of " + item + " is not a number");
        }
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

BanditInstance instance_from(const std::string& path, const std::string& scenario,
                             const std::vector<std::string>& params, std::uint64_t seed) {
    if (!path.empty()) return load_instance(path).instance;
    Rng rng = make_rng(seed, "scenario");
    return make_scenario(ScenarioSpec{scenario, parse_parameters(params)}, rng);
}

void print_violations(const std::vector<Violation>& violations) {
    for (const Violation& v : violations) {
        std::cerr << (v.severity == Severity::error ? "error" : "warning");
        if (v.arm) std::cerr << " arm " << *v.arm;
        if (v.row) std::cerr << " state " << *v.row;
        std::cerr << ": " << v.message << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-based learning for Markovian bandits"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run learners on a scenario and write regret CSVs");
    std::string config_path, instance_path, scenario = "scenario1_random_walk", regret = "exact";
    std::vector<std::string> algorithms, params, seed_list;
    std::size_t episodes = 0, seeds = 0, replicas = 0, jobs = 0;
    std::uint64_t master_seed = 1;
    double beta = 0.0;
    std::string out_dir;
    bool paper_scale = false;
    run->add_option("--config", config_path, "JSON experiment file (explicit flags take precedence)");
    run->add_option("--instance", instance_path, "Instance file");
    run->add_option("--scenario", scenario, "Built-in scenario")->check(CLI::IsMember(scenario_names()));
    run->add_option("--param", params, "Scenario parameter override key=value");
    run->add_option("--algorithms", algorithms, "mb_psrl, mb_ucrl2, mb_ucbvi")->delimiter(',');
    run->add_option("--episodes", episodes, "Episodes per run (K)")->check(CLI::PositiveNumber);
    run->add_option("--seeds", seeds, "Number of seeds derived from --master-seed")->check(CLI::PositiveNumber);
    run->add_option("--seed-list", seed_list, "Explicit comma-separated seeds")->delimiter(',');
    run->add_option("--master-seed", master_seed, "Master seed");
    run->add_option("--beta", beta, "Discount override")->check(CLI::Range(0.0, 1.0));
    run->add_option("--regret", regret, "Regret evaluation")->check(CLI::IsMember({"exact", "mc"}));
    run->add_option("--replicas", replicas, "Monte-Carlo replicas per cell")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--paper-scale", paper_scale, "K = 3000 and 80 seeds");

    // gittins
    auto* gittins = app.add_subcommand("gittins", "Print the Gittins index table as CSV");
    std::string g_instance, g_scenario;
    std::vector<std::string> g_params;
    auto* g_inst_opt = gittins->add_option("--instance", g_instance, "Instance file");
    gittins->add_option("--scenario", g_scenario, "Built-in scenario")
        ->check(CLI::IsMember(scenario_names()))
        ->excludes(g_inst_opt);
    gittins->add_option("--param", g_params, "Scenario parameter override key=value");

    // env
    auto* env = app.add_subcommand("env", "List scenarios or dump one as an instance file");
    std::string e_scenario, e_out;
    std::vector<std::string> e_params;
    std::uint64_t e_seed = 1;
    bool e_list = false;
    env->add_flag("--list", e_list, "List built-in scenarios");
    env->add_option("--scenario", e_scenario, "Scenario to dump")->check(CLI::IsMember(scenario_names()));
    env->add_option("--param", e_params, "Scenario parameter override key=value");
    env->add_option("--seed", e_seed, "Seed for random scenarios");
    env->add_option("--out", e_out, "Write to this file instead of stdout");

    // counterexample
    auto* counter = app.add_subcommand("counterexample", "Check the optimism counterexample");
    double radius = 0.2, mu = 1.0;
    counter->add_option("--radius", radius, "L1 radius of the confidence ball");
    counter->add_option("--mu", mu, "Reward of the constant arm");

    // lemma5
    auto* lemma = app.add_subcommand("lemma5", "Simulate time spent per state on the lower-bound instance");
    std::size_t l_states = 2, l_arms = 2, l_episodes = 1000, l_replicas = 10000, l_jobs = 1;
    double l_beta = 0.9;
    std::uint64_t l_seed = 1;
    lemma->add_option("--states", l_states)->check(CLI::PositiveNumber);
    lemma->add_option("--arms", l_arms)->check(CLI::PositiveNumber);
    lemma->add_option("--episodes", l_episodes)->check(CLI::PositiveNumber);
    lemma->add_option("--beta", l_beta)->check(CLI::Range(0.0, 1.0));
    lemma->add_option("--replicas", l_replicas)->check(CLI::PositiveNumber);
    lemma->add_option("--seed", l_seed);
    lemma->add_option("--jobs", l_jobs)->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ExperimentConfig config;
            if (!config_path.empty()) apply_config_file(read_file(config_path), config);
            if (paper_scale) {
                apply_paper_scale(config);
                std::cerr << "warning: paper-scale runs take hours on one core and days for "
                             "MB-UCRL2; consider --jobs\n";
            }
            if (run->count("--instance")) config.instance_path = instance_path;
            if (run->count("--scenario")) config.scenario.name = scenario;
            if (run->count("--param")) config.scenario.parameters = parse_parameters(params);
            if (run->count("--algorithms")) {
                config.algorithms.clear();
                for (const auto& a : algorithms) config.algorithms.push_back(parse_algorithm(a));
            }
            if (run->count("--episodes")) config.episodes = episodes;
            if (run->count("--seeds")) {
                config.seeds.clear();
                config.seed_count = seeds;
            }
            if (run->count("--master-seed")) config.master_seed = master_seed;
            if (run->count("--seed-list")) {
                config.seeds.clear();
                for (const auto& s : seed_list) config.seeds.push_back(std::stoull(s));
            }
            if (run->count("--beta")) config.discount = beta;
            if (run->count("--regret")) {
                config.regret = regret == "mc" ? RegretMethod::monte_carlo : RegretMethod::exact;
            }
            if (run->count("--replicas")) config.replicas = replicas;
            if (run->count("--out")) config.output_dir = out_dir;
            if (run->count("--jobs")) config.jobs = jobs;

            const ExperimentResult result = run_experiment(config, std::cerr);
            for (const SummaryRow& row : result.summary) {
                std::printf("%-10s seeds=%zu K=%zu final_regret=%.4f +- %.4f policy_ms=%.3f\n",
                            row.algorithm.c_str(), row.seeds, row.episodes, row.final_regret_mean,
                            row.final_regret_std, row.policy_ms_mean);
            }
            std::printf("summary: %s\n", result.summary_path.string().c_str());
            return result.exit_code();
        }

        if (gittins->parsed()) {
            if (g_instance.empty() && g_scenario.empty()) {
                std::cerr << "gittins: give --instance or --scenario\n";
                return 2;
            }
            const BanditInstance instance = instance_from(g_instance, g_scenario, g_params, 1);
            const auto violations = validate_instance(instance);
            print_violations(violations);
            if (has_errors(violations)) return 1;
            std::printf("arm,state,index\n");
            for (std::size_t a = 0; a < instance.arm_count(); ++a) {
                const IndexTable table = gittins_indices(instance.arms[a], instance.discount);
                for (std::size_t x = 0; x < table.values.size(); ++x) {
                    std::printf("%zu,%zu,%.12g\n", a, x, table.values[x]);
                }
            }
            return 0;
        }

        if (env->parsed()) {
            if (e_list || e_scenario.empty()) {
                for (const auto& name : scenario_names()) std::printf("%s\n", name.c_str());
                return 0;
            }
            const BanditInstance instance = instance_from("", e_scenario, e_params, e_seed);
            const std::string text = dump_instance(instance);
            if (e_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(e_out, std::ios::binary);
                out << text;
                if (!out) throw std::runtime_error("cannot write " + e_out);
            }
            return 0;
        }

        if (counter->parsed()) {
            const Counterexample ce = build_counterexample(radius, mu);
            const CounterexampleValues v = verify_counterexample(ce);
            std::printf("optimistic_pi2_M1=%.6f optimal_M1=%.6f optimistic_pi1_M2=%.6f optimal_M2=%.6f\n",
                        v.optimistic_b_first, v.optimal_first, v.optimistic_a1_first, v.optimal_second);
            std::printf("first_inequality=%s second_inequality=%s %s\n",
                        v.first_gap() > 0 ? "PASS" : "FAIL", v.second_gap() > 0 ? "PASS" : "FAIL",
                        v.holds() ? "PASS" : "FAIL");
            return v.holds() ? 0 : 1;
        }

        if (lemma->parsed()) {
            const Lemma5Report r =
                check_lemma5(l_states, l_arms, l_episodes, l_beta, l_replicas, l_seed, l_jobs);
            std::printf("S=%zu K=%zu beta=%g replicas=%zu mean=%.3f expected=%.3f se=%.3f "
                        "tail=%.5f bound=%.5f %s\n",
                        r.states, r.episodes, r.discount, r.replicas, r.empirical_mean, r.expected_mean,
                        r.standard_error, r.tail_probability, r.tail_bound, r.pass() ? "PASS" : "FAIL");
            return r.pass() ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
