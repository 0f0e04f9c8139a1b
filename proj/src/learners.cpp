#include "mbandit/learners.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include <boost/random/geometric_distribution.hpp>

#include "mbandit/gittins.hpp"

namespace mbandit {

std::string_view algorithm_name(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::mb_psrl: return "mb_psrl";
        case Algorithm::mb_ucrl2: return "mb_ucrl2";
        case Algorithm::mb_ucbvi: return "mb_ucbvi";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "mb_psrl") return Algorithm::mb_psrl;
    if (name == "mb_ucrl2") return Algorithm::mb_ucrl2;
    if (name == "mb_ucbvi") return Algorithm::mb_ucbvi;
    throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::uint64_t sample_horizon(double discount, Rng& rng) {
    if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount outside (0,1)");
    boost::random::geometric_distribution<std::uint64_t, double> failures(1.0 - discount);
    return 1 + failures(rng);
}

EpisodePlan RunStreams::next_episode(const BanditInstance& instance, double discount) {
    EpisodePlan plan;
    plan.start = instance.sample_initial(protocol_);
    plan.horizon = sample_horizon(discount, protocol_);
    return plan;
}

RadiusContext radius_context(const BanditInstance& instance, std::size_t episodes,
                             std::uint64_t start_time) {
    std::size_t states = 1;
    for (const auto& arm : instance.arms) states = std::max(states, arm.state_count());
    return RadiusContext{static_cast<double>(states), static_cast<double>(instance.arm_count()),
                         static_cast<double>(episodes), static_cast<double>(start_time)};
}

Policy psrl_policy(const PosteriorState& posterior, const BanditInstance& template_instance, Rng& rng) {
    return gittins_policy(sample_model(posterior, template_instance, rng));
}

IndexPolicy ucbvi_policy(const SufficientStats& stats, const BanditInstance& template_instance,
                         double discount, const RadiusContext& ctx) {
    BanditInstance optimistic =
        stats.empirical_instance(template_instance, ucbvi_bonus(stats, discount, ctx));
    optimistic.discount = discount;
    return gittins_policy(optimistic);
}

EviResult ucrl2_plan(const SufficientStats& stats, double discount, const RadiusContext& ctx,
                     const EviOptions& options) {
    double count = 1.0;
    for (std::size_t a = 0; a < stats.arm_count(); ++a) count *= static_cast<double>(stats.state_count(a));
    if (count > static_cast<double>(options.state_cap)) {
        throw ExponentialBarrier(count, options.state_cap);
    }
    return evi_optimistic_plan(ConfidenceSet::from_stats(stats, ucrl2_radii(stats, ctx)), discount,
                               options);
}

Policy compute_policy(const LearnerConfig& config, LearnerState& state,
                      const BanditInstance& template_instance, std::uint64_t start_time, Rng& rng) {
    const double discount = config.discount.value_or(template_instance.discount);
    const RadiusContext ctx = radius_context(template_instance, config.episodes, start_time);
    switch (config.algorithm) {
        case Algorithm::mb_psrl: {
            if (!state.posterior) throw std::logic_error("MB-PSRL needs a posterior");
            BanditInstance tmpl = template_instance;
            tmpl.discount = discount;
            return psrl_policy(*state.posterior, tmpl, rng);
        }
        case Algorithm::mb_ucbvi:
            return ucbvi_policy(state.stats, template_instance, discount, ctx);
        case Algorithm::mb_ucrl2: {
            EviOptions options;
            options.tolerance = config.evi_tolerance;
            options.state_cap = config.evi_state_cap;
            if (config.evi_warm_start && !state.evi_value.empty()) {
                options.initial_value = &state.evi_value;
            }
            EviResult plan = ucrl2_plan(state.stats, discount, ctx, options);
            if (config.evi_warm_start) state.evi_value = plan.value;
            return std::move(plan.policy);
        }
    }
    throw std::logic_error("unhandled algorithm");
}

namespace {

bool same_policy(const Policy& a, const Policy& b) {
    if (a.index() != b.index()) return false;
    if (const auto* ia = std::get_if<IndexPolicy>(&a)) {
        return ia->table() == std::get<IndexPolicy>(b).table();
    }
    return std::get<TabularPolicy>(a) == std::get<TabularPolicy>(b);
}

}  // namespace

LearnerRun run_learner(const BanditInstance& instance, const LearnerConfig& config) {
    require_valid(instance);
    if (config.episodes < 1) throw std::invalid_argument("episode count must be at least 1");
    const double discount = config.discount.value_or(instance.discount);
    if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount outside (0,1)");

    LearnerRun run;
    LearnerState& state = run.final_state;
    state.stats = SufficientStats(instance.state_counts());
    if (config.algorithm == Algorithm::mb_psrl) {
        state.posterior = PosteriorState(instance.state_counts(), config.prior);
    }

    RunStreams streams(config.seed);
    Rng algorithm_rng = streams.algorithm(algorithm_name(config.algorithm));
    run.records.reserve(config.episodes);

    std::uint64_t start_time = 1;
    for (std::size_t k = 1; k <= config.episodes; ++k) {
        const auto started = std::chrono::steady_clock::now();
        Policy policy = compute_policy(config, state, instance, start_time, algorithm_rng);
        const auto finished = std::chrono::steady_clock::now();

        if (run.policies.empty() || !same_policy(run.policies.back(), policy)) {
            run.policies.push_back(std::move(policy));
        }
        const Policy& current = run.policies.back();

        const EpisodePlan plan = streams.next_episode(instance, discount);
        Rng env = streams.environment(k);
        const EpisodeOutcome outcome =
            play_episode(instance, current, plan, env, [&](const Observation& obs) {
                state.stats.record(obs.arm, obs.state, obs.reward, obs.next_state);
                if (state.posterior) state.posterior->update(obs);
            });

        EpisodeRecord record;
        record.episode = k;
        record.start_time = start_time;
        record.start_state = plan.start;
        record.horizon = plan.horizon;
        record.policy_id = run.policies.size() - 1;
        record.reward = outcome.reward;
        record.mean_reward = outcome.mean_reward;
        record.policy_ms = std::chrono::duration<double, std::milli>(finished - started).count();
        run.records.push_back(std::move(record));
        start_time += plan.horizon;
    }
    return run;
}

}  // namespace mbandit
