#include <doctest.h>

#include <chrono>
#include <numeric>

#include "mbandit/environments.hpp"
#include "mbandit/learners.hpp"
#include "oracles.hpp"

using namespace mbandit;

namespace {

LearnerConfig config_for(Algorithm algorithm, std::size_t episodes, std::uint64_t seed) {
    LearnerConfig c;
    c.algorithm = algorithm;
    c.episodes = episodes;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("algorithm names") {
    for (Algorithm a : {Algorithm::mb_psrl, Algorithm::mb_ucrl2, Algorithm::mb_ucbvi}) {
        CHECK(parse_algorithm(algorithm_name(a)) == a);
    }
    CHECK_THROWS_AS(parse_algorithm("psrl"), std::invalid_argument);
}

TEST_CASE("horizons are geometric on {1, 2, ...} with mean 1 / (1 - beta)") {
    Rng rng(1);
    const double beta = 0.9;
    const int draws = 50000;
    std::vector<double> freq(5, 0.0);
    double mean = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto h = sample_horizon(beta, rng);
        CHECK(h >= 1);
        mean += double(h) / draws;
        if (h <= 5) freq[h - 1] += 1.0 / draws;
    }
    // sd of the horizon is sqrt(beta) / (1 - beta).
    CHECK(std::abs(mean - 10.0) < 4 * std::sqrt(beta) / 0.1 / std::sqrt(double(draws)));
    for (int h = 1; h <= 5; ++h) {
        const double p = 0.1 * std::pow(beta, h - 1);
        CHECK(std::abs(freq[h - 1] - p) < 4 * std::sqrt(p * (1 - p) / draws));
    }
    CHECK_THROWS_AS(sample_horizon(1.0, rng), std::invalid_argument);
}

TEST_CASE("runs are deterministic and share the protocol stream across algorithms") {
    const BanditInstance inst = scenario1_instance();
    const LearnerRun psrl = run_learner(inst, config_for(Algorithm::mb_psrl, 30, 9));
    const LearnerRun again = run_learner(inst, config_for(Algorithm::mb_psrl, 30, 9));
    const LearnerRun ucbvi = run_learner(inst, config_for(Algorithm::mb_ucbvi, 30, 9));
    const LearnerRun other = run_learner(inst, config_for(Algorithm::mb_psrl, 30, 10));
    REQUIRE(psrl.records.size() == 30);
    bool differs = false;
    for (std::size_t k = 0; k < 30; ++k) {
        CHECK(psrl.records[k].episode == k + 1);
        CHECK(psrl.records[k].horizon == again.records[k].horizon);
        CHECK(psrl.records[k].reward == again.records[k].reward);
        CHECK(psrl.records[k].policy_id == again.records[k].policy_id);
        CHECK(psrl.records[k].horizon == ucbvi.records[k].horizon);
        CHECK(psrl.records[k].start_state == ucbvi.records[k].start_state);
        differs = differs || psrl.records[k].horizon != other.records[k].horizon;
    }
    CHECK(differs);
    CHECK(psrl.final_state.posterior == again.final_state.posterior);
}

TEST_CASE("statistics and posterior see every transition") {
    const BanditInstance inst = scenario1_instance();
    const LearnerRun run = run_learner(inst, config_for(Algorithm::mb_psrl, 40, 3));
    std::uint64_t steps = 0;
    for (const auto& r : run.records) steps += r.horizon;
    CHECK(run.final_state.stats.total_visits() == steps);
    CHECK(run.records.back().start_time + run.records.back().horizon == steps + 1);

    const PosteriorState& post = *run.final_state.posterior;
    double reward_total = 0.0;
    for (const auto& r : run.records) reward_total += r.reward;
    double alpha_total = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t x = 0; x < 4; ++x) {
            for (std::size_t y = 0; y < 4; ++y) {
                CHECK(post.arm(a).transitions[x].concentration[y] ==
                      1.0 + double(run.final_state.stats.transition_count(a, x, y)));
            }
            alpha_total += post.arm(a).beta[x].alpha - 1.0;
        }
    }
    CHECK(alpha_total == reward_total);
}

TEST_CASE("policies are deduplicated between consecutive episodes") {
    const BanditInstance inst = scenario1_instance();
    const LearnerRun run = run_learner(inst, config_for(Algorithm::mb_ucbvi, 50, 2));
    CHECK(run.policies.size() <= run.records.size());
    for (std::size_t k = 1; k < run.records.size(); ++k) {
        CHECK(run.records[k].policy_id >= run.records[k - 1].policy_id);
        CHECK(run.records[k].policy_id <= run.records[k - 1].policy_id + 1);
    }
    for (std::size_t i = 1; i < run.policies.size(); ++i) {
        CHECK_FALSE(std::get<IndexPolicy>(run.policies[i]).table() ==
                    std::get<IndexPolicy>(run.policies[i - 1]).table());
    }
}

TEST_CASE("UCRL2 hits the exponential barrier on scenario 2 immediately") {
    const BanditInstance inst = scenario2_instance();
    const auto started = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(run_learner(inst, config_for(Algorithm::mb_ucrl2, 100, 1)), ExponentialBarrier);
    CHECK(std::chrono::steady_clock::now() - started < std::chrono::seconds(1));
}

TEST_CASE("UCRL2 runs on a small instance, with and without warm starts") {
    Rng rng(4);
    const BanditInstance inst = oracle::random_instance({2, 3}, 0.9, rng);
    LearnerConfig cold = config_for(Algorithm::mb_ucrl2, 15, 5);
    LearnerConfig warm = cold;
    warm.evi_warm_start = true;
    const LearnerRun a = run_learner(inst, cold);
    const LearnerRun b = run_learner(inst, warm);
    CHECK(a.records.size() == 15);
    CHECK(b.final_state.evi_value.size() == 6);
    for (std::size_t k = 0; k < 15; ++k) CHECK(a.records[k].horizon == b.records[k].horizon);
}

TEST_CASE("PSRL with a Gaussian-Gamma prior accepts Bernoulli data") {
    LearnerConfig c = config_for(Algorithm::mb_psrl, 20, 7);
    c.prior.rewards = RewardPrior::gauss_gamma;
    const LearnerRun run = run_learner(scenario1_instance(), c);
    CHECK(run.final_state.posterior->reward_prior() == RewardPrior::gauss_gamma);
    std::size_t observed = 0;
    for (const auto& arm : run.final_state.posterior->arms()) {
        for (const auto& g : arm.gauss_gamma) observed += g.count;
    }
    CHECK(observed == run.final_state.stats.total_visits());
}

TEST_CASE("learner input validation") {
    BanditInstance inst = scenario1_instance();
    CHECK_THROWS_AS(run_learner(inst, config_for(Algorithm::mb_psrl, 0, 1)), std::invalid_argument);
    LearnerConfig c = config_for(Algorithm::mb_psrl, 1, 1);
    c.discount = 1.5;
    CHECK_THROWS_AS(run_learner(inst, c), std::invalid_argument);
    inst.arms[0].transition[0][0] = 0.5;
    CHECK_THROWS_AS(run_learner(inst, config_for(Algorithm::mb_psrl, 1, 1)), std::invalid_argument);
}
