#include <doctest.h>

#include <cmath>
#include <functional>

#include "mbandit/confidence.hpp"
#include "mbandit/gittins.hpp"
#include "mbandit/learners.hpp"
#include "oracles.hpp"

using namespace mbandit;

namespace {

/// max q.v over the simplex grid of step 1/steps intersected with the L1 ball.
double brute_inner_max(const Vector& center, const Vector& value, double radius, int steps) {
    const std::size_t S = center.size();
    double best = -1e300;
    std::vector<int> k(S, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == S) {
            k[i] = left;
            double l1 = 0.0, dot = 0.0;
            for (std::size_t y = 0; y < S; ++y) {
                const double q = static_cast<double>(k[y]) / steps;
                l1 += std::abs(q - center[y]);
                dot += q * value[y];
            }
            if (l1 <= radius + 1e-12) best = std::max(best, dot);
            return;
        }
        for (int j = 0; j <= left; ++j) {
            k[i] = j;
            rec(i + 1, left - j);
        }
    };
    rec(0, steps);
    return best;
}

double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

ConfidenceSet random_set(Rng& rng, const std::vector<std::size_t>& counts, double rr, double rq) {
    ConfidenceSet set;
    for (std::size_t S : counts) {
        set.center.push_back(oracle::random_arm(S, rng, 0.3));
        set.radii.reward.push_back(Vector(S, rr));
        set.radii.transition.push_back(Vector(S, rq));
    }
    return set;
}

}  // namespace

TEST_CASE("UCRL2 radii") {
    const RadiusContext ctx{4, 3, 3000, 1};
    CHECK(ucrl2_reward_radius(ctx, 0) == doctest::Approx(std::sqrt(std::log(72000.0) / 2)).epsilon(1e-14));
    CHECK(ucrl2_reward_radius(ctx, 0) == doctest::Approx(2.3648).epsilon(1e-4));
    CHECK(ucrl2_reward_radius(ctx, 0) == ucrl2_reward_radius(ctx, 1));
    CHECK(ucrl2_reward_radius(ctx, 400) == doctest::Approx(ucrl2_reward_radius(ctx, 100) / 2).epsilon(1e-14));
    // S n K 2^S t_k = 1 * 1 * 1 * 4 * 1 with S = 2.
    const RadiusContext small{2, 1, 1, 1};
    CHECK(ucrl2_transition_radius(small, 1) == doctest::Approx(std::sqrt(2 * std::log(8.0))).epsilon(1e-14));
    CHECK(ucrl2_transition_radius(small, 1) == doctest::Approx(2.0393).epsilon(1e-4));
}

TEST_CASE("UCBVI bonus") {
    SufficientStats stats({4, 4, 4});
    const RadiusContext ctx{4, 3, 3000, 1};
    CHECK(ucbvi_bonus(stats, 0.99, ctx)[0][0] == doctest::Approx(236.48).epsilon(1e-4));
    CHECK(ucbvi_bonus(stats, 0.5, ctx)[1][2] == doctest::Approx(2 * ucrl2_reward_radius(ctx, 0)).epsilon(1e-14));
    double previous = 1e300;
    for (int i = 0; i < 50; ++i) {
        stats.record(0, 0, 1.0, 1);
        const double b = ucbvi_bonus(stats, 0.9, ctx)[0][0];
        CHECK(b <= previous);
        previous = b;
    }
    CHECK_THROWS_AS(ucbvi_bonus(stats, 1.0, ctx), std::invalid_argument);
}

TEST_CASE("sufficient statistics conserve counts") {
    Rng rng(3);
    SufficientStats stats({3, 2});
    std::uint64_t steps = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t a = i % 2;
        const std::size_t S = a == 0 ? 3 : 2;
        const auto x = static_cast<std::size_t>(uniform01(rng) * S);
        const auto y = static_cast<std::size_t>(uniform01(rng) * S);
        stats.record(a, x, uniform01(rng), y);
        ++steps;
    }
    CHECK(stats.total_visits() == steps);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t x = 0; x < stats.state_count(a); ++x) {
            std::uint64_t out = 0;
            for (std::size_t y = 0; y < stats.state_count(a); ++y) out += stats.transition_count(a, x, y);
            CHECK(out == stats.visits(a, x));
        }
    }
    CHECK_THROWS_AS(stats.record(2, 0, 0.0, 0), std::invalid_argument);
    const SufficientStats fresh({3});
    CHECK(fresh.empirical_row(0, 1) == Vector(3, 1.0 / 3.0));
    CHECK(fresh.mean_reward(0, 1) == 0.0);
}

TEST_CASE("inner max example") {
    const Vector row = optimistic_row({0.5, 0.5}, {1.0, 0.0}, 0.4);
    CHECK(row[0] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(row[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(brute_inner_max({0.5, 0.5}, {1.0, 0.0}, 0.4, 10000) == doctest::Approx(0.7).epsilon(1e-4));
}

TEST_CASE("inner max agrees with a discretised brute force") {
    Rng rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t S = 2 + trial % 3;
        const int steps = S == 2 ? 10000 : (S == 3 ? 600 : 80);
        const Vector center = oracle::random_row(S, rng, 0.3);
        Vector value(S);
        for (double& v : value) v = 5.0 * uniform01(rng);
        const double radius = 2.0 * uniform01(rng);
        const Vector row = optimistic_row(center, value, radius);

        double l1 = 0.0, total = 0.0;
        for (std::size_t y = 0; y < S; ++y) {
            CHECK(row[y] >= 0.0);
            l1 += std::abs(row[y] - center[y]);
            total += row[y];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(l1 <= radius + 1e-12);
        // Grid points are within (S-1)/steps of any simplex point in L1, so the
        // grid optimum trails the true optimum by at most that times max |v|.
        const double brute = brute_inner_max(center, value, radius, steps);
        CHECK(dot(row, value) >= brute - 1e-12);
        CHECK(dot(row, value) <= brute + 2.0 * 5.0 * (S - 1.0) / steps + 1e-12);
    }
}

TEST_CASE("EVI: single arm single state") {
    ConfidenceSet set;
    set.center = {ArmModel{{0.5}, {{1.0}}, GaussianReward{1.0}}};
    set.radii = {{{0.1}}, {{0.3}}};
    const EviResult r = evi_optimistic_plan(set, 0.5, {1e-10});
    CHECK(r.value[0] == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("EVI with zero radii is value iteration on the centre") {
    Rng rng(14);
    for (int trial = 0; trial < 5; ++trial) {
        const ConfidenceSet set = random_set(rng, {3, 2, 3}, 0.0, 0.0);
        BanditInstance inst;
        inst.arms = set.center;
        inst.discount = 0.9;
        inst.initial = point_initial(inst.state_counts(), {0, 0, 0});
        const EviResult r = evi_optimistic_plan(set, 0.9, {1e-8});
        const Vector v = policy_value_exact(assemble_global_mdp(inst), gittins_policy(inst), 0.9);
        for (std::size_t s = 0; s < v.size(); ++s) CHECK(r.value[s] == doctest::Approx(v[s]).epsilon(1e-7));
    }
}

TEST_CASE("EVI: sup-norm updates contract with ratio beta") {
    Rng rng(15);
    const ConfidenceSet set = random_set(rng, {3, 3}, 0.1, 0.3);
    const EviResult r = evi_optimistic_plan(set, 0.95, {1e-8});
    REQUIRE(r.update_norms.size() > 5);
    for (std::size_t i = 1; i < r.update_norms.size(); ++i) {
        CHECK(r.update_norms[i] <= 0.95 * r.update_norms[i - 1] + 1e-12);
    }
    CHECK(r.update_norms.back() <= 1e-8 * 0.05 / 1.9);
}

TEST_CASE("EVI: enlarging a radius never lowers the optimistic value") {
    Rng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        ConfidenceSet set = random_set(rng, {3, 2}, 0.05, 0.2);
        const EviResult small = evi_optimistic_plan(set, 0.9, {1e-9});
        const std::size_t a = trial % 2;
        const std::size_t x = trial % set.center[a].state_count();
        if (trial % 3 == 0) {
            set.radii.reward[a][x] += 0.2;
        } else {
            set.radii.transition[a][x] += 0.5;
        }
        const EviResult large = evi_optimistic_plan(set, 0.9, {1e-9});
        for (std::size_t s = 0; s < small.value.size(); ++s) CHECK(large.value[s] >= small.value[s] - 1e-8);
    }
}

TEST_CASE("EVI value dominates every member of the set it is built from") {
    Rng rng(18);
    const ConfidenceSet set = random_set(rng, {2, 3}, 0.05, 0.3);
    const EviResult r = evi_optimistic_plan(set, 0.9, {1e-9});
    for (int trial = 0; trial < 20; ++trial) {
        BanditInstance member;
        member.discount = 0.9;
        for (std::size_t a = 0; a < 2; ++a) {
            ArmModel arm = set.center[a];
            for (std::size_t x = 0; x < arm.state_count(); ++x) {
                arm.reward_mean[x] += 0.05 * (2 * uniform01(rng) - 1);
                // Mix toward a random row, keeping the L1 move within the radius.
                const Vector other = oracle::random_row(arm.state_count(), rng);
                const double w = 0.15 * uniform01(rng) / 2;
                for (std::size_t y = 0; y < arm.state_count(); ++y) {
                    arm.transition[x][y] = (1 - w) * arm.transition[x][y] + w * other[y];
                }
            }
            arm.reward_kind = GaussianReward{1.0};
            member.arms.push_back(arm);
        }
        member.initial = point_initial(member.state_counts(), {0, 0});
        REQUIRE(set.contains(member, 1e-12));
        const GlobalMdp mdp = assemble_global_mdp(member);
        const OptimalSolution opt = optimal_value(mdp, 0.9, 1e-9);
        for (std::size_t s = 0; s < opt.value.size(); ++s) CHECK(r.value[s] >= opt.value[s] - 1e-7);
    }
}

TEST_CASE("EVI refuses state spaces above the cap") {
    Rng rng(19);
    const ConfidenceSet set = random_set(rng, {4, 4, 4}, 0.1, 0.1);
    EviOptions options;
    options.state_cap = 63;
    CHECK_THROWS_AS(evi_optimistic_plan(set, 0.9, options), ExponentialBarrier);
    CHECK_THROWS_AS(evi_optimistic_plan(set, 0.9, options), StateSpaceTooLarge);
}

TEST_CASE("UCBVI optimism when the truth lies inside every interval") {
    Rng rng(20);
    const double beta = 0.8;
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const BanditInstance truth = oracle::random_instance({3, 2}, beta, rng);
        const std::uint64_t N = 50;
        SufficientStats stats(truth.state_counts());
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t x = 0; x < truth.arms[a].state_count(); ++x) {
                // Empirical row: the true row rounded to multiples of 1/N.
                const std::size_t S = truth.arms[a].state_count();
                std::vector<std::uint64_t> counts(S, 0);
                std::uint64_t used = 0;
                for (std::size_t y = 0; y + 1 < S; ++y) {
                    counts[y] = static_cast<std::uint64_t>(std::floor(truth.arms[a].transition[x][y] * N));
                    used += counts[y];
                }
                counts[S - 1] = N - used;
                stats.set(a, x, N, truth.arms[a].reward_mean[x] + 0.05 * (2 * uniform01(rng) - 1), counts);
            }
        }
        const RadiusContext ctx{3, 2, 100, 1};
        const auto bonus = ucbvi_bonus(stats, beta, ctx);

        // The event: |r_hat - r + beta (P_hat - P) V*| <= bonus at every state and action.
        const GlobalMdp true_mdp = assemble_global_mdp(truth);
        const Vector vstar = policy_value_exact(true_mdp, gittins_policy(truth), beta);
        const BanditInstance empirical = stats.empirical_instance(truth);
        const GlobalMdp emp_mdp = assemble_global_mdp(empirical);
        bool event = true;
        for (std::size_t s = 0; s < true_mdp.state_count(); ++s) {
            for (std::size_t a = 0; a < 2; ++a) {
                double diff = emp_mdp.reward(s, a) - true_mdp.reward(s, a);
                emp_mdp.for_each_successor(s, a, [&](std::size_t y, double p) { diff += beta * p * vstar[y]; });
                true_mdp.for_each_successor(s, a, [&](std::size_t y, double p) { diff -= beta * p * vstar[y]; });
                event = event && std::abs(diff) <= bonus[a][true_mdp.codec().local_state(s, a)];
            }
        }
        REQUIRE(event);

        const IndexPolicy pk = ucbvi_policy(stats, truth, beta, ctx);
        const BanditInstance optimistic = stats.empirical_instance(truth, bonus);
        const Eigen::VectorXd vk = oracle::policy_value(optimistic, tabulate(pk, true_mdp.codec()).actions());
        for (std::size_t s = 0; s < vstar.size(); ++s) CHECK(vk(static_cast<Eigen::Index>(s)) >= vstar[s] - 1e-9);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("counterexample construction") {
    const Counterexample ce = build_counterexample();
    CHECK(ce.set.contains(ce.first, 1e-12));
    CHECK(ce.set.contains(ce.second, 1e-12));
    CHECK_FALSE(has_errors(validate_instance(ce.first)));
    CHECK_FALSE(has_errors(validate_instance(ce.second)));

    // Arm b's absorbing zero-reward state has index 0.
    const IndexTable b = gittins_indices(ce.first.arms[1], ce.discount);
    CHECK(b.values[1] == doctest::Approx(0.0));

    // Both priority orders put A2 first.
    for (const IndexPolicy* p : {&ce.a1_first, &ce.b_first}) {
        const auto& t = p->table();
        CHECK(t[0][1] > t[0][0]);
        for (double v : t[1]) CHECK(t[0][1] > v);
    }
    CHECK(ce.a1_first.act(ce.start_second) == 0);
    CHECK(ce.b_first.act(ce.start_second) == 1);
}

TEST_CASE("counterexample values") {
    const CounterexampleValues v = verify_counterexample(build_counterexample());
    CHECK(std::abs(v.optimistic_b_first - 6.42) <= 0.02);
    CHECK(std::abs(v.optimal_first - 6.47) <= 0.02);
    CHECK(std::abs(v.optimistic_a1_first - 5.96) <= 0.02);
    CHECK(std::abs(v.optimal_second - 6.00) <= 0.02);
    CHECK(v.holds());
}

TEST_CASE("zero-radius set reduces extended evaluation to plain evaluation") {
    const Counterexample ce = build_counterexample();
    ConfidenceSet degenerate;
    degenerate.center = ce.first.arms;
    for (const ArmModel& arm : ce.first.arms) {
        degenerate.radii.reward.push_back(Vector(arm.state_count(), 0.0));
        degenerate.radii.transition.push_back(Vector(arm.state_count(), 0.0));
    }
    const EviResult r = extended_policy_evaluation(degenerate, ce.b_first, ce.discount, {1e-10});
    const GlobalMdp mdp = assemble_global_mdp(ce.first);
    const Vector v = policy_value_exact(mdp, ce.b_first, ce.discount);
    for (std::size_t s = 0; s < v.size(); ++s) CHECK(r.value[s] == doctest::Approx(v[s]).epsilon(1e-8));
}
