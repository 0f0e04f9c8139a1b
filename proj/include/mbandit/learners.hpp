#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbandit/confidence.hpp"
#include "mbandit/core.hpp"
#include "mbandit/posterior.hpp"

namespace mbandit {

enum class Algorithm { mb_psrl, mb_ucrl2, mb_ucbvi };

std::string_view algorithm_name(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct LearnerConfig {
    Algorithm algorithm = Algorithm::mb_psrl;
    std::size_t episodes = 300;
    /// Defaults to the instance's discount when unset.
    std::optional<double> discount;
    std::uint64_t seed = 0;
    PriorConfig prior;
    std::size_t evi_state_cap = default_state_cap;
    double evi_tolerance = 1e-4;
    /// Start each extended value iteration from the previous episode's values.
    bool evi_warm_start = false;
};

/// Geometric episode length on {1, 2, ...}: P(H = h) = (1 - beta) beta^(h - 1).
std::uint64_t sample_horizon(double discount, Rng& rng);

/// Start state and length of one episode.
struct EpisodePlan {
    GlobalState start;
    std::uint64_t horizon = 1;
};

/// Streams derived from one run seed. The protocol stream (initial states and
/// horizons) and the per-episode environment streams do not depend on the
/// algorithm, so every algorithm run with the same seed sees the same episodes.
class RunStreams {
public:
    explicit RunStreams(std::uint64_t seed) : seed_(seed), protocol_(make_rng(seed, "protocol")) {}

    EpisodePlan next_episode(const BanditInstance& instance, double discount);
    Rng environment(std::uint64_t episode) const { return make_rng(seed_, "environment", episode); }
    Rng algorithm(std::string_view name) const { return make_rng(seed_, name); }

private:
    std::uint64_t seed_;
    Rng protocol_;
};

struct EpisodeOutcome {
    double reward = 0.0;       // realised rewards
    double mean_reward = 0.0;  // sum of r(X_{t, A_t}) along the trajectory
    GlobalState final_state;
};

/// Plays `policy` for `plan.horizon` steps; `observe` sees every transition.
template <class Observer>
EpisodeOutcome play_episode(const BanditInstance& instance, const Policy& policy,
                            const EpisodePlan& plan, Rng& env, Observer&& observe) {
    EpisodeOutcome out;
    GlobalState state = plan.start;
    for (std::uint64_t t = 0; t < plan.horizon; ++t) {
        const std::size_t a = act(policy, state);
        const std::size_t x = state[a];
        StepOutcome next = step(instance, state, a, env);
        out.reward += next.reward;
        out.mean_reward += instance.arms[a].reward_mean[x];
        observe(Observation{a, x, next.reward, next.next_state[a]});
        state = std::move(next.next_state);
    }
    out.final_state = std::move(state);
    return out;
}

inline EpisodeOutcome play_episode(const BanditInstance& instance, const Policy& policy,
                                   const EpisodePlan& plan, Rng& env) {
    return play_episode(instance, policy, plan, env, [](const Observation&) {});
}

struct EpisodeRecord {
    std::size_t episode = 0;        // k, 1-based
    std::uint64_t start_time = 1;   // t_k
    GlobalState start_state;
    std::uint64_t horizon = 1;
    std::size_t policy_id = 0;      // index into LearnerRun::policies
    double reward = 0.0;
    double mean_reward = 0.0;
    double policy_ms = 0.0;
};

/// Everything a learner knows between episodes.
struct LearnerState {
    SufficientStats stats;
    std::optional<PosteriorState> posterior;
    Vector evi_value;  // last optimistic value, for warm starts
};

/// Radius inputs for episode k starting at time t_k.
RadiusContext radius_context(const BanditInstance& instance, std::size_t episodes,
                             std::uint64_t start_time);

Policy psrl_policy(const PosteriorState& posterior, const BanditInstance& template_instance, Rng& rng);

/// Gittins policy of the empirical instance with every reward raised by its bonus.
IndexPolicy ucbvi_policy(const SufficientStats& stats, const BanditInstance& template_instance,
                         double discount, const RadiusContext& ctx);

/// Greedy policy of extended value iteration over the confidence set.
/// Throws ExponentialBarrier when the global state space is above the cap.
EviResult ucrl2_plan(const SufficientStats& stats, double discount, const RadiusContext& ctx,
                     const EviOptions& options);

/// Policy for episode k of `config.algorithm`, from the learner state.
Policy compute_policy(const LearnerConfig& config, LearnerState& state,
                      const BanditInstance& template_instance, std::uint64_t start_time, Rng& rng);

struct LearnerRun {
    std::vector<EpisodeRecord> records;
    std::vector<Policy> policies;
    LearnerState final_state;
};

/// Episodic learning loop: compute the policy, draw the start state and
/// horizon, play the episode and feed every observation back.
LearnerRun run_learner(const BanditInstance& instance, const LearnerConfig& config);

}  // namespace mbandit
