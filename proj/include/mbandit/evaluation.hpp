#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mbandit/core.hpp"
#include "mbandit/learners.hpp"

namespace mbandit {

enum class RegretMethod { exact, monte_carlo };

std::string_view regret_method_name(RegretMethod method);

struct RegretRow {
    std::size_t episode = 0;
    std::uint64_t horizon = 0;
    double delta = 0.0;
    double cumulative = 0.0;
    double standard_error = 0.0;  // Monte-Carlo only
    double policy_ms = 0.0;
};

struct RegretTrace {
    std::string algorithm;
    std::uint64_t seed = 0;
    RegretMethod method = RegretMethod::exact;
    std::vector<RegretRow> rows;

    double final_regret() const { return rows.empty() ? 0.0 : rows.back().cumulative; }
};

/// Per-episode regret V*(X_{t_k}) - V^{pi_k}(X_{t_k}) by linear solves. The
/// optimal value is the exact value of the Gittins policy; per-policy values
/// are cached by their decision table. Throws StateSpaceTooLarge (with a hint
/// to use Monte-Carlo regret) when the global MDP is above `state_cap`.
RegretTrace regret_exact(const BanditInstance& instance, const LearnerRun& run,
                         std::string algorithm = {}, std::uint64_t seed = 0,
                         std::size_t state_cap = default_state_cap);

/// An agent replaying one fixed policy every episode.
struct FixedPolicyAgent {
    Policy policy;
    std::size_t episodes = 1;
    std::uint64_t seed = 0;
    std::string name = "fixed";
};

using AgentSpec = std::variant<LearnerConfig, FixedPolicyAgent>;

/// Monte-Carlo regret: each replica runs the agent with its own seed and,
/// episode by episode, an oracle playing the true Gittins policy from the same
/// start state for the same horizon on the same environment stream. The
/// per-episode estimate averages the difference of mean-reward sums.
RegretTrace regret_monte_carlo(const BanditInstance& instance, const AgentSpec& agent,
                               std::size_t replica_count, std::size_t jobs = 1);

struct RewardGap {
    double low = 0.5;
    double high = 0.75;
};

struct LowerBoundParams {
    std::size_t states = 2;
    std::size_t arms = 2;
    std::size_t episodes = 1000;
    double discount = 0.9;
    /// Defaults to low = 1/2, high = 1/2 + min(1/4, sqrt(n / tau) / 4) with
    /// tau = K / (2 S (1 - beta)).
    std::optional<RewardGap> gap;
};

RewardGap default_reward_gap(const LowerBoundParams& params);

/// S independent n-armed stochastic bandits glued together: identity
/// transitions, one uniformly drawn best arm per state, and an initial
/// distribution putting mass 1/S on each diagonal state (i, ..., i).
BanditInstance lower_bound_instance(const LowerBoundParams& params, Rng& rng);

/// Arm holding the higher reward at each state of a lower-bound instance.
std::vector<std::size_t> lower_bound_best_arms(const BanditInstance& instance);

struct Lemma5Report {
    std::size_t states = 0;
    std::size_t episodes = 0;
    double discount = 0.0;
    std::size_t replicas = 0;
    double expected_mean = 0.0;      // K / (S (1 - beta))
    double empirical_mean = 0.0;
    double standard_error = 0.0;
    double tail_probability = 0.0;   // empirical P(T_i >= E[T_i] / 2)
    double tail_bound = 0.0;         // 1 - 8S/K

    bool mean_ok() const;
    bool tail_ok() const { return tail_probability >= tail_bound; }
    bool pass() const { return mean_ok() && tail_ok(); }
};

/// Simulates the time T_1 spent in the first diagonal state of the
/// lower-bound instance over K episodes, `replica_count` times.
/// Throws std::invalid_argument when replica_count is 0.
Lemma5Report check_lemma5(std::size_t states, std::size_t arms, std::size_t episodes,
                          double discount, std::size_t replica_count, std::uint64_t seed = 1,
                          std::size_t jobs = 1);

/// Trace CSV: algorithm,seed,episode,horizon,delta,cumulative_delta,policy_ms.
void write_trace_csv(std::ostream& out, const RegretTrace& trace);

}  // namespace mbandit
