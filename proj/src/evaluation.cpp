#include "mbandit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include <boost/random/uniform_int_distribution.hpp>

#include "mbandit/gittins.hpp"
#include "mbandit/parallel.hpp"

namespace mbandit {

std::string_view regret_method_name(RegretMethod method) {
    return method == RegretMethod::exact ? "exact" : "monte_carlo";
}

RegretTrace regret_exact(const BanditInstance& instance, const LearnerRun& run,
                         std::string algorithm, std::uint64_t seed, std::size_t state_cap) {
    GlobalMdp mdp;
    try {
        mdp = assemble_global_mdp(instance, state_cap);
    } catch (const StateSpaceTooLarge& e) {
        throw StateSpaceTooLarge(e.state_count(), state_cap, "use Monte-Carlo regret instead");
    }
    const double discount = instance.discount;
    const Vector optimal = policy_value_exact(mdp, gittins_policy(instance), discount);

    std::map<std::vector<std::size_t>, Vector> cache;
    std::vector<const Vector*> policy_values(run.policies.size(), nullptr);

    RegretTrace trace;
    trace.algorithm = std::move(algorithm);
    trace.seed = seed;
    trace.method = RegretMethod::exact;
    double cumulative = 0.0;
    for (const EpisodeRecord& record : run.records) {
        const Vector*& values = policy_values.at(record.policy_id);
        if (values == nullptr) {
            TabularPolicy tab = tabulate(run.policies[record.policy_id], mdp.codec());
            auto it = cache.find(tab.actions());
            if (it == cache.end()) {
                Vector v = policy_value_exact(mdp, tab, discount);
                it = cache.emplace(tab.actions(), std::move(v)).first;
            }
            values = &it->second;
        }
        const std::size_t s = mdp.codec().encode(record.start_state);
        const double delta = optimal[s] - (*values)[s];
        cumulative += delta;
        trace.rows.push_back(
            RegretRow{record.episode, record.horizon, delta, cumulative, 0.0, record.policy_ms});
    }
    return trace;
}

namespace {

struct ReplicaResult {
    std::vector<double> delta;
    std::vector<double> policy_ms;
    std::vector<std::uint64_t> horizon;
};

ReplicaResult run_replica(const BanditInstance& instance, const Policy& oracle,
                          const AgentSpec& agent, std::uint64_t replica_seed) {
    ReplicaResult out;
    const double discount = instance.discount;
    RunStreams streams(replica_seed);

    if (const auto* config = std::get_if<LearnerConfig>(&agent)) {
        LearnerConfig cfg = *config;
        cfg.seed = replica_seed;
        const LearnerRun run = run_learner(instance, cfg);
        for (const EpisodeRecord& record : run.records) {
            Rng env = streams.environment(record.episode);
            const EpisodeOutcome best =
                play_episode(instance, oracle, EpisodePlan{record.start_state, record.horizon}, env);
            out.delta.push_back(best.mean_reward - record.mean_reward);
            out.policy_ms.push_back(record.policy_ms);
            out.horizon.push_back(record.horizon);
        }
    } else {
        const auto& fixed = std::get<FixedPolicyAgent>(agent);
        for (std::size_t k = 1; k <= fixed.episodes; ++k) {
            const EpisodePlan plan = streams.next_episode(instance, discount);
            Rng agent_env = streams.environment(k);
            Rng oracle_env = streams.environment(k);
            const EpisodeOutcome mine = play_episode(instance, fixed.policy, plan, agent_env);
            const EpisodeOutcome best = play_episode(instance, oracle, plan, oracle_env);
            out.delta.push_back(best.mean_reward - mine.mean_reward);
            out.policy_ms.push_back(0.0);
            out.horizon.push_back(plan.horizon);
        }
    }
    return out;
}

}  // namespace

RegretTrace regret_monte_carlo(const BanditInstance& instance, const AgentSpec& agent,
                               std::size_t replica_count, std::size_t jobs) {
    require_valid(instance);
    if (replica_count == 0) throw std::invalid_argument("replica count must be positive");

    const Policy oracle = gittins_policy(instance);
    std::uint64_t base_seed = 0;
    std::size_t episodes = 0;
    RegretTrace trace;
    trace.method = RegretMethod::monte_carlo;
    if (const auto* config = std::get_if<LearnerConfig>(&agent)) {
        base_seed = config->seed;
        episodes = config->episodes;
        trace.algorithm = std::string(algorithm_name(config->algorithm));
    } else {
        const auto& fixed = std::get<FixedPolicyAgent>(agent);
        base_seed = fixed.seed;
        episodes = fixed.episodes;
        trace.algorithm = fixed.name;
    }
    trace.seed = base_seed;

    std::vector<ReplicaResult> replicas(replica_count);
    parallel_for(replica_count, jobs, [&](std::size_t j) {
        replicas[j] = run_replica(instance, oracle, agent, derive_seed(base_seed, "replica", j));
    });

    const double R = static_cast<double>(replica_count);
    double cumulative = 0.0;
    std::vector<double> column(replica_count);
    for (std::size_t k = 0; k < episodes; ++k) {
        for (std::size_t j = 0; j < replica_count; ++j) column[j] = replicas[j].delta[k];
        const double mean = pairwise_sum(column.begin(), column.end()) / R;
        for (double& v : column) v = (v - mean) * (v - mean);
        const double variance =
            replica_count > 1 ? pairwise_sum(column.begin(), column.end()) / (R - 1.0) : 0.0;
        for (std::size_t j = 0; j < replica_count; ++j) column[j] = replicas[j].policy_ms[k];
        const double ms = pairwise_sum(column.begin(), column.end()) / R;

        cumulative += mean;
        trace.rows.push_back(RegretRow{k + 1, replicas[0].horizon[k], mean, cumulative,
                                       std::sqrt(variance / R), ms});
    }
    return trace;
}

RewardGap default_reward_gap(const LowerBoundParams& params) {
    const double tau = static_cast<double>(params.episodes) /
                       (2.0 * static_cast<double>(params.states) * (1.0 - params.discount));
    const double n = static_cast<double>(params.arms);
    return RewardGap{0.5, 0.5 + std::min(0.25, std::sqrt(n / tau) / 4.0)};
}

BanditInstance lower_bound_instance(const LowerBoundParams& params, Rng& rng) {
    if (params.states < 1 || params.arms < 1 || params.episodes < 1) {
        throw std::invalid_argument("lower-bound instance needs S, n, K >= 1");
    }
    if (!(params.discount > 0.0 && params.discount < 1.0)) {
        throw std::invalid_argument("discount outside (0,1)");
    }
    const RewardGap gap = params.gap.value_or(default_reward_gap(params));
    if (!(gap.low >= 0.0 && gap.low < gap.high && gap.high <= 1.0)) {
        throw std::invalid_argument("reward gap must satisfy 0 <= low < high <= 1");
    }

    const std::size_t S = params.states;
    const std::size_t n = params.arms;
    BanditInstance instance;
    instance.discount = params.discount;
    instance.arms.assign(n, ArmModel{Vector(S, gap.low), identity_matrix(S), BernoulliReward{}});
    boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < S; ++i) instance.arms[pick(rng)].reward_mean[i] = gap.high;

    CoupledInitial initial;
    for (std::size_t i = 0; i < S; ++i) {
        initial.states.emplace_back(n, i);
        initial.probabilities.push_back(1.0 / static_cast<double>(S));
    }
    instance.initial = std::move(initial);
    return instance;
}

std::vector<std::size_t> lower_bound_best_arms(const BanditInstance& instance) {
    const std::size_t S = instance.arms.at(0).state_count();
    std::vector<std::size_t> best(S, 0);
    for (std::size_t i = 0; i < S; ++i) {
        for (std::size_t a = 1; a < instance.arm_count(); ++a) {
            if (instance.arms[a].reward_mean[i] > instance.arms[best[i]].reward_mean[i]) best[i] = a;
        }
    }
    return best;
}

bool Lemma5Report::mean_ok() const {
    return std::abs(empirical_mean - expected_mean) <= 3.0 * standard_error;
}

Lemma5Report check_lemma5(std::size_t states, std::size_t arms, std::size_t episodes,
                          double discount, std::size_t replica_count, std::uint64_t seed,
                          std::size_t jobs) {
    if (replica_count == 0) throw std::invalid_argument("replica count must be positive");
    LowerBoundParams params{states, arms, episodes, discount, std::nullopt};
    Rng instance_rng = make_rng(seed, "lemma5-instance");
    const BanditInstance instance = lower_bound_instance(params, instance_rng);
    const GlobalState watched(arms, 0);

    std::vector<double> time_in_state(replica_count);
    parallel_for(replica_count, jobs, [&](std::size_t j) {
        RunStreams streams(derive_seed(seed, "lemma5-replica", j));
        std::uint64_t total = 0;
        for (std::size_t k = 0; k < episodes; ++k) {
            const EpisodePlan plan = streams.next_episode(instance, discount);
            // Identity transitions: the episode stays in its start state.
            if (plan.start == watched) total += plan.horizon;
        }
        time_in_state[j] = static_cast<double>(total);
    });

    Lemma5Report report;
    report.states = states;
    report.episodes = episodes;
    report.discount = discount;
    report.replicas = replica_count;
    report.expected_mean =
        static_cast<double>(episodes) / (static_cast<double>(states) * (1.0 - discount));
    const double R = static_cast<double>(replica_count);
    report.empirical_mean = pairwise_sum(time_in_state.begin(), time_in_state.end()) / R;
    std::vector<double> sq(replica_count);
    std::size_t above = 0;
    for (std::size_t j = 0; j < replica_count; ++j) {
        sq[j] = (time_in_state[j] - report.empirical_mean) * (time_in_state[j] - report.empirical_mean);
        if (time_in_state[j] >= report.expected_mean / 2.0) ++above;
    }
    const double variance = replica_count > 1 ? pairwise_sum(sq.begin(), sq.end()) / (R - 1.0) : 0.0;
    report.standard_error = std::sqrt(variance / R);
    report.tail_probability = static_cast<double>(above) / R;
    report.tail_bound = 1.0 - 8.0 * static_cast<double>(states) / static_cast<double>(episodes);
    return report;
}

void write_trace_csv(std::ostream& out, const RegretTrace& trace) {
    out << "algorithm,seed,episode,horizon,delta,cumulative_delta,policy_ms\n";
    char buffer[256];
    for (const RegretRow& row : trace.rows) {
        std::snprintf(buffer, sizeof buffer, "%s,%llu,%zu,%llu,%.17g,%.17g,%.6f\n",
                      trace.algorithm.c_str(), static_cast<unsigned long long>(trace.seed),
                      row.episode, static_cast<unsigned long long>(row.horizon), row.delta,
                      row.cumulative, row.policy_ms);
        out << buffer;
    }
}

}  // namespace mbandit
