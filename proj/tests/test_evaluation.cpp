#include <doctest.h>

#include <sstream>

#include "mbandit/environments.hpp"
#include "mbandit/evaluation.hpp"
#include "mbandit/gittins.hpp"
#include "oracles.hpp"

using namespace mbandit;

namespace {

BanditInstance small_instance() {
    BanditInstance inst;
    inst.discount = 0.8;
    inst.arms.push_back(ArmModel{{0.9, 0.1}, {{0.3, 0.7}, {0.2, 0.8}}, BernoulliReward{}});
    inst.arms.push_back(ArmModel{{0.5, 0.6}, {{0.5, 0.5}, {0.5, 0.5}}, BernoulliReward{}});
    inst.initial = ProductInitial{{{0.5, 0.5}, {1.0, 0.0}}};
    return inst;
}

}  // namespace

TEST_CASE("exact regret of the Gittins policy is zero and regret is never negative") {
    const BanditInstance inst = scenario1_instance();
    LearnerRun run;
    run.policies.push_back(gittins_policy(inst));
    for (std::size_t k = 1; k <= 3; ++k) {
        EpisodeRecord r;
        r.episode = k;
        r.start_state = {0, 0, 0};
        r.horizon = 10;
        run.records.push_back(r);
    }
    const RegretTrace t = regret_exact(inst, run, "oracle", 1);
    for (const auto& row : t.rows) CHECK(row.delta == 0.0);

    LearnerConfig c;
    c.episodes = 30;
    c.seed = 4;
    const LearnerRun learned = run_learner(inst, c);
    const RegretTrace lt = regret_exact(inst, learned, "mb_psrl", 4);
    double cumulative = 0.0;
    for (const auto& row : lt.rows) {
        CHECK(row.delta >= -1e-9);
        cumulative += row.delta;
        CHECK(row.cumulative == doctest::Approx(cumulative).epsilon(1e-12));
    }
    CHECK(lt.final_regret() == lt.rows.back().cumulative);
}

TEST_CASE("exact regret refuses large instances and names the alternative") {
    const BanditInstance inst = scenario2_instance();
    LearnerRun run;
    try {
        regret_exact(inst, run);
        FAIL("expected StateSpaceTooLarge");
    } catch (const StateSpaceTooLarge& e) {
        CHECK(std::string(e.what()).find("Monte-Carlo") != std::string::npos);
    }
}

TEST_CASE("Monte-Carlo regret of the optimal policy is exactly zero") {
    // Common random numbers: identical policies produce identical trajectories.
    const BanditInstance inst = small_instance();
    const RegretTrace t = regret_monte_carlo(inst, FixedPolicyAgent{gittins_policy(inst), 5, 3, "gittins"}, 50);
    for (const auto& row : t.rows) {
        CHECK(row.delta == 0.0);
        CHECK(row.standard_error == 0.0);
    }
}

TEST_CASE("Monte-Carlo regret of a fixed policy is unbiased") {
    const BanditInstance inst = small_instance();
    const StateCodec codec({2, 2});
    const TabularPolicy always_b(codec, {1, 1, 1, 1});
    const RegretTrace t = regret_monte_carlo(inst, FixedPolicyAgent{always_b, 3, 11, "always_b"}, 3000);

    const Eigen::VectorXd vstar = oracle::policy_value(inst, tabulate(gittins_policy(inst), codec).actions());
    const Eigen::VectorXd vpi = oracle::policy_value(inst, always_b.actions());
    // Start in (x, 0) with x uniform.
    const double expected = 0.5 * (vstar(0) - vpi(0)) + 0.5 * (vstar(1) - vpi(1));
    REQUIRE(expected > 0.05);
    for (const auto& row : t.rows) CHECK(std::abs(row.delta - expected) <= 3 * row.standard_error);
}

TEST_CASE("Monte-Carlo regret does not depend on the worker count") {
    const BanditInstance inst = small_instance();
    LearnerConfig c;
    c.episodes = 5;
    c.seed = 2;
    const RegretTrace serial = regret_monte_carlo(inst, c, 40, 1);
    const RegretTrace parallel = regret_monte_carlo(inst, c, 40, 4);
    REQUIRE(serial.rows.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(serial.rows[k].delta == parallel.rows[k].delta);
        CHECK(serial.rows[k].horizon == parallel.rows[k].horizon);
    }
    CHECK_THROWS_AS(regret_monte_carlo(inst, c, 0), std::invalid_argument);
}

TEST_CASE("visit-count statistics on a small run") {
    const Lemma5Report r = check_lemma5(2, 2, 200, 0.9, 2000, 3);
    CHECK(r.expected_mean == doctest::Approx(1000.0));
    CHECK(r.mean_ok());
    CHECK(r.tail_bound == doctest::Approx(1.0 - 16.0 / 200.0));
    CHECK(r.tail_ok());
    CHECK_THROWS_AS(check_lemma5(2, 2, 200, 0.9, 0), std::invalid_argument);
}

TEST_CASE("trace CSV layout") {
    RegretTrace t;
    t.algorithm = "mb_psrl";
    t.seed = 7;
    t.rows.push_back(RegretRow{1, 12, 0.5, 0.5, 0.0, 1.25});
    t.rows.push_back(RegretRow{2, 3, 0.25, 0.75, 0.0, 0.5});
    std::ostringstream os;
    write_trace_csv(os, t);
    CHECK(os.str() ==
          "algorithm,seed,episode,horizon,delta,cumulative_delta,policy_ms\n"
          "mb_psrl,7,1,12,0.5,0.5,1.250000\n"
          "mb_psrl,7,2,3,0.25,0.75,0.500000\n");
}
