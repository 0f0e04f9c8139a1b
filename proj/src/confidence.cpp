#include "mbandit/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mbandit/gittins.hpp"

namespace mbandit {

SufficientStats::SufficientStats(const std::vector<std::size_t>& state_counts) {
    for (std::size_t S : state_counts) {
        counts_.emplace_back(S, 0);
        mean_.emplace_back(S, 0.0);
        next_counts_.emplace_back(S, std::vector<std::uint64_t>(S, 0));
    }
}

void SufficientStats::record(std::size_t arm, std::size_t state, double reward,
                             std::size_t next_state) {
    if (arm >= counts_.size() || state >= counts_[arm].size() ||
        next_state >= counts_[arm].size()) {
        throw std::invalid_argument("observation out of range");
    }
    const auto n = ++counts_[arm][state];
    mean_[arm][state] += (reward - mean_[arm][state]) / static_cast<double>(n);
    ++next_counts_[arm][state][next_state];
}

std::uint64_t SufficientStats::total_visits() const {
    std::uint64_t total = 0;
    for (const auto& arm : counts_) total = std::accumulate(arm.begin(), arm.end(), total);
    return total;
}

Vector SufficientStats::empirical_row(std::size_t arm, std::size_t state) const {
    const std::size_t S = counts_[arm].size();
    const std::uint64_t n = counts_[arm][state];
    if (n == 0) return Vector(S, 1.0 / static_cast<double>(S));
    Vector row(S);
    for (std::size_t y = 0; y < S; ++y) {
        row[y] = static_cast<double>(next_counts_[arm][state][y]) / static_cast<double>(n);
    }
    return row;
}

void SufficientStats::set(std::size_t arm, std::size_t state, std::uint64_t visits,
                          double mean_reward, const std::vector<std::uint64_t>& next_counts) {
    if (next_counts.size() != counts_.at(arm).size() ||
        std::accumulate(next_counts.begin(), next_counts.end(), std::uint64_t{0}) != visits) {
        throw std::invalid_argument("next-state counts must have one entry per state and sum to visits");
    }
    counts_[arm].at(state) = visits;
    mean_[arm][state] = mean_reward;
    next_counts_[arm][state] = next_counts;
}

BanditInstance SufficientStats::empirical_instance(const BanditInstance& template_instance,
                                                   const std::vector<Vector>& reward_shift) const {
    BanditInstance out;
    out.discount = template_instance.discount;
    out.initial = template_instance.initial;
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        ArmModel arm;
        const std::size_t S = counts_[a].size();
        arm.reward_mean = mean_[a];
        if (!reward_shift.empty()) {
            for (std::size_t x = 0; x < S; ++x) arm.reward_mean[x] += reward_shift[a][x];
        }
        for (std::size_t x = 0; x < S; ++x) arm.transition.push_back(empirical_row(a, x));
        arm.reward_kind = GaussianReward{1.0};
        out.arms.push_back(std::move(arm));
    }
    return out;
}

double ucrl2_reward_radius(const RadiusContext& ctx, std::uint64_t visits) {
    const double n = std::max<double>(1.0, static_cast<double>(visits));
    return std::sqrt(std::log(2.0 * ctx.states * ctx.arms * ctx.episodes * ctx.time) / (2.0 * n));
}

double ucrl2_transition_radius(const RadiusContext& ctx, std::uint64_t visits) {
    const double n = std::max<double>(1.0, static_cast<double>(visits));
    const double log_term = std::log(ctx.states * ctx.arms * ctx.episodes * ctx.time) +
                            ctx.states * std::log(2.0);
    return std::sqrt(2.0 * log_term / n);
}

ConfidenceRadii ucrl2_radii(const SufficientStats& stats, const RadiusContext& ctx) {
    ConfidenceRadii radii;
    for (std::size_t a = 0; a < stats.arm_count(); ++a) {
        Vector br, bq;
        for (std::size_t x = 0; x < stats.state_count(a); ++x) {
            br.push_back(ucrl2_reward_radius(ctx, stats.visits(a, x)));
            bq.push_back(ucrl2_transition_radius(ctx, stats.visits(a, x)));
        }
        radii.reward.push_back(std::move(br));
        radii.transition.push_back(std::move(bq));
    }
    return radii;
}

std::vector<Vector> ucbvi_bonus(const SufficientStats& stats, double discount,
                                const RadiusContext& ctx) {
    if (!(discount > 0.0 && discount < 1.0)) {
        throw std::invalid_argument("discount outside (0,1)");
    }
    std::vector<Vector> bonus;
    for (std::size_t a = 0; a < stats.arm_count(); ++a) {
        Vector b;
        for (std::size_t x = 0; x < stats.state_count(a); ++x) {
            b.push_back(ucrl2_reward_radius(ctx, stats.visits(a, x)) / (1.0 - discount));
        }
        bonus.push_back(std::move(b));
    }
    return bonus;
}

ConfidenceSet ConfidenceSet::from_stats(const SufficientStats& stats, ConfidenceRadii radii) {
    ConfidenceSet set;
    for (std::size_t a = 0; a < stats.arm_count(); ++a) {
        ArmModel arm;
        for (std::size_t x = 0; x < stats.state_count(a); ++x) {
            arm.reward_mean.push_back(stats.mean_reward(a, x));
            arm.transition.push_back(stats.empirical_row(a, x));
        }
        arm.reward_kind = GaussianReward{1.0};
        set.center.push_back(std::move(arm));
    }
    set.radii = std::move(radii);
    return set;
}

bool ConfidenceSet::contains(const BanditInstance& instance, double slack) const {
    if (instance.arm_count() != center.size()) return false;
    for (std::size_t a = 0; a < center.size(); ++a) {
        const ArmModel& c = center[a];
        const ArmModel& m = instance.arms[a];
        if (m.state_count() != c.state_count()) return false;
        for (std::size_t x = 0; x < c.state_count(); ++x) {
            if (std::abs(m.reward_mean[x] - c.reward_mean[x]) > radii.reward[a][x] + slack) {
                return false;
            }
            double l1 = 0.0;
            for (std::size_t y = 0; y < c.state_count(); ++y) {
                l1 += std::abs(m.transition[x][y] - c.transition[x][y]);
            }
            if (l1 > radii.transition[a][x] + slack) return false;
        }
    }
    return true;
}

Vector optimistic_row(const Vector& center, const Vector& value, double radius) {
    const std::size_t S = center.size();
    std::vector<std::size_t> order(S);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return value[i] < value[j]; });

    Vector row = center;
    const std::size_t best = order.back();
    row[best] = std::min(1.0, center[best] + radius / 2.0);
    double total = std::accumulate(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i + 1 < S && total > 1.0; ++i) {
        const std::size_t j = order[i];
        const double removed = std::min(row[j], total - 1.0);
        row[j] -= removed;
        total -= removed;
    }
    return row;
}

ExponentialBarrier::ExponentialBarrier(double state_count, std::size_t cap)
    : StateSpaceTooLarge(state_count, cap,
                         "extended value iteration works on the product state space, which is "
                         "exponential in the number of arms") {}

namespace {

class OptimisticBackup {
public:
    OptimisticBackup(const ConfidenceSet& set, double discount)
        : set_(set), discount_(discount) {
        std::vector<std::size_t> counts;
        for (const auto& arm : set.center) counts.push_back(arm.state_count());
        codec_ = StateCodec(std::move(counts));
    }

    const StateCodec& codec() const { return codec_; }

    double q_value(const Vector& value, std::size_t state, std::size_t action) {
        const ArmModel& arm = set_.center[action];
        const std::size_t x = codec_.local_state(state, action);
        const std::size_t stride = codec_.stride(action);
        const std::size_t base = state - x * stride;
        const std::size_t S = arm.state_count();
        successor_values_.resize(S);
        for (std::size_t y = 0; y < S; ++y) successor_values_[y] = value[base + y * stride];
        const Vector row =
            optimistic_row(arm.transition[x], successor_values_, set_.radii.transition[action][x]);
        double expected = 0.0;
        for (std::size_t y = 0; y < S; ++y) expected += row[y] * successor_values_[y];
        return arm.reward_mean[x] + set_.radii.reward[action][x] + discount_ * expected;
    }

private:
    const ConfidenceSet& set_;
    double discount_;
    StateCodec codec_;
    Vector successor_values_;
};

EviResult run_evi(const ConfidenceSet& set, const Policy* policy, double discount,
                  const EviOptions& options) {
    if (!(discount > 0.0 && discount < 1.0)) throw std::invalid_argument("discount outside (0,1)");
    double count = 1.0;
    for (const auto& arm : set.center) count *= static_cast<double>(arm.state_count());
    if (count > static_cast<double>(options.state_cap)) {
        throw ExponentialBarrier(count, options.state_cap);
    }

    OptimisticBackup backup(set, discount);
    const StateCodec& codec = backup.codec();
    const std::size_t N = codec.state_count();
    const std::size_t n = set.center.size();
    const double threshold = options.tolerance * (1.0 - discount) / (2.0 * discount);

    std::vector<std::size_t> fixed;
    if (policy != nullptr) fixed = tabulate(*policy, codec).actions();

    EviResult out;
    Vector value(N, 0.0);
    if (options.initial_value != nullptr) {
        if (options.initial_value->size() != N) {
            throw std::invalid_argument("warm-start vector has the wrong size");
        }
        value = *options.initial_value;
    }
    Vector next(N);
    std::vector<std::size_t> greedy(N, 0);
    for (;;) {
        double delta = 0.0;
        for (std::size_t s = 0; s < N; ++s) {
            if (policy != nullptr) {
                next[s] = backup.q_value(value, s, fixed[s]);
                greedy[s] = fixed[s];
            } else {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t a = 0; a < n; ++a) {
                    const double q = backup.q_value(value, s, a);
                    if (q > best) {
                        best = q;
                        greedy[s] = a;
                    }
                }
                next[s] = best;
            }
            delta = std::max(delta, std::abs(next[s] - value[s]));
        }
        value.swap(next);
        ++out.iterations;
        out.update_norms.push_back(delta);
        if (delta <= threshold) break;
    }
    out.value = std::move(value);
    out.policy = TabularPolicy(codec, std::move(greedy));
    return out;
}

}  // namespace

EviResult evi_optimistic_plan(const ConfidenceSet& set, double discount, const EviOptions& options) {
    return run_evi(set, nullptr, discount, options);
}

EviResult extended_policy_evaluation(const ConfidenceSet& set, const Policy& policy, double discount,
                                     const EviOptions& options) {
    return run_evi(set, &policy, discount, options);
}

Counterexample build_counterexample(double transition_radius, double mu) {
    Counterexample ce;
    ce.transition_radius = transition_radius;
    ce.mu = mu;

    ArmModel a_hat{{3.0, 4.0, 0.0},
                   {{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}},
                   GaussianReward{1.0}};
    ArmModel arm_b{{3.21, 0.0, 3.21},
                   {{0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}},
                   GaussianReward{1.0}};
    ce.arm_c = ArmModel{{mu}, {{1.0}}, GaussianReward{1.0}};

    ce.set.center = {a_hat, arm_b};
    ce.set.radii.reward = {Vector(3, 0.0), Vector(3, 0.0)};
    ce.set.radii.transition = {Vector(3, transition_radius), Vector(3, 0.0)};

    ArmModel a_first = a_hat;
    a_first.transition[0] = {0.4, 0.6, 0.0};
    ArmModel a_second = a_hat;
    a_second.transition = {{0.6, 0.4, 0.0}, {0.1, 0.0, 0.9}, {0.1, 0.0, 0.9}};

    const std::vector<std::size_t> counts{3, 3};
    ce.first = BanditInstance{{a_first, arm_b}, ce.discount, point_initial(counts, ce.start_first)};
    ce.second = BanditInstance{{a_second, arm_b}, ce.discount, point_initial(counts, ce.start_second)};

    // Priority orders. pi1: A2 > A1 > B1 = B3 > A3 > B2.  pi2: A2 > B1 = B3 > A1, A3 > B2.
    ce.a1_first = IndexPolicy({{4.0, 5.0, 2.0}, {3.0, 1.0, 3.0}});
    ce.b_first = IndexPolicy({{2.0, 5.0, 2.0}, {3.0, 1.0, 3.0}});
    return ce;
}

CounterexampleValues verify_counterexample(const Counterexample& ce, double tolerance) {
    EviOptions options;
    options.tolerance = tolerance;
    const StateCodec codec({3, 3});

    CounterexampleValues v;
    v.optimistic_b_first = extended_policy_evaluation(ce.set, ce.b_first, ce.discount, options)
                               .value[codec.encode(ce.start_first)];
    v.optimal_first =
        optimal_value(assemble_global_mdp(ce.first), ce.discount, tolerance).value[codec.encode(ce.start_first)];
    v.optimistic_a1_first = extended_policy_evaluation(ce.set, ce.a1_first, ce.discount, options)
                                .value[codec.encode(ce.start_second)];
    v.optimal_second = optimal_value(assemble_global_mdp(ce.second), ce.discount, tolerance)
                           .value[codec.encode(ce.start_second)];
    return v;
}

}  // namespace mbandit
