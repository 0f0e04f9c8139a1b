#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbandit/environments.hpp"
#include "mbandit/evaluation.hpp"
#include "mbandit/instance_io.hpp"
#include "mbandit/learners.hpp"

namespace mbandit {

struct ExperimentConfig {
    /// Built-in scenario, used when no instance file is given.
    ScenarioSpec scenario{"scenario1_random_walk", {}};
    std::optional<std::filesystem::path> instance_path;

    std::vector<Algorithm> algorithms{Algorithm::mb_psrl, Algorithm::mb_ucrl2, Algorithm::mb_ucbvi};
    std::size_t episodes = 300;
    /// Explicit seeds win over (master_seed, seed_count).
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 1;
    std::size_t seed_count = 10;
    /// Overrides the instance's discount when set.
    std::optional<double> discount;
    std::optional<PriorConfig> prior;

    RegretMethod regret = RegretMethod::exact;
    std::size_t replicas = 100;  // Monte-Carlo regret only
    std::filesystem::path output_dir = "results";
    std::size_t jobs = 1;
    std::size_t state_cap = default_state_cap;
    double evi_tolerance = 1e-4;
};

/// Desk-scale defaults are K = 300 and 10 seeds; this switches to K = 3000 and 80 seeds.
void apply_paper_scale(ExperimentConfig& config);

/// Applies the keys present in a JSON experiment file on top of `config`.
/// Unknown keys throw std::invalid_argument.
void apply_config_file(const std::string& text, ExperimentConfig& config);

/// Throws std::invalid_argument when the configuration is unusable.
void check_config(const ExperimentConfig& config);

/// Seeds of the runs, in order. Derived seeds hash the master seed, the
/// scenario label and the seed index, never the algorithm, so every algorithm
/// of one seed sees the same horizons and start states.
std::vector<std::uint64_t> resolve_seeds(const ExperimentConfig& config);

/// Name used in output file names: the scenario name or the instance file stem.
std::string scenario_label(const ExperimentConfig& config);

/// The instance for one seed. Random scenarios are drawn from a stream of the run seed.
BanditInstance experiment_instance(const ExperimentConfig& config, std::uint64_t seed);

struct CellResult {
    Algorithm algorithm = Algorithm::mb_psrl;
    std::uint64_t seed = 0;
    std::optional<RegretTrace> trace;
    std::string error;
    std::filesystem::path csv_path;
};

struct SummaryRow {
    std::string algorithm;
    std::size_t seeds = 0;
    std::size_t episodes = 0;
    double final_regret_mean = 0.0;
    double final_regret_std = 0.0;
    double policy_ms_mean = 0.0;
};

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summary;
    std::filesystem::path summary_path;

    bool ok() const;
    int exit_code() const { return ok() ? 0 : 1; }
};

std::filesystem::path trace_path(const ExperimentConfig& config, Algorithm algorithm,
                                 std::uint64_t seed);

/// Runs every (algorithm, seed) cell on up to `config.jobs` threads and writes
/// one trace CSV per cell plus summary_<label>.csv. A failing cell is recorded
/// with its error and does not stop the others; `log` receives the per-cell
/// error report.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log);

/// Summary CSV: algorithm,seeds,K,final_regret_mean,final_regret_std,policy_ms_mean.
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace mbandit
