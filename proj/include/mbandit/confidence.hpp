#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mbandit/core.hpp"

namespace mbandit {

/// Per-(arm, local state) visit counts, mean rewards and next-state counts.
class SufficientStats {
public:
    SufficientStats() = default;
    explicit SufficientStats(const std::vector<std::size_t>& state_counts);

    void record(std::size_t arm, std::size_t state, double reward, std::size_t next_state);

    std::size_t arm_count() const { return counts_.size(); }
    std::size_t state_count(std::size_t arm) const { return counts_[arm].size(); }
    std::uint64_t visits(std::size_t arm, std::size_t state) const { return counts_[arm][state]; }
    std::uint64_t total_visits() const;
    /// Empirical mean reward; 0 before the first visit.
    double mean_reward(std::size_t arm, std::size_t state) const { return mean_[arm][state]; }
    /// Empirical next-state frequencies; uniform before the first visit.
    Vector empirical_row(std::size_t arm, std::size_t state) const;
    std::uint64_t transition_count(std::size_t arm, std::size_t state, std::size_t next) const {
        return next_counts_[arm][state][next];
    }

    /// Overwrite the statistics of one state. Used to inject known estimates.
    void set(std::size_t arm, std::size_t state, std::uint64_t visits, double mean_reward,
             const std::vector<std::uint64_t>& next_counts);

    /// The empirical instance (r_hat + reward_shift, Q_hat). `reward_shift` may be empty.
    BanditInstance empirical_instance(const BanditInstance& template_instance,
                                      const std::vector<Vector>& reward_shift = {}) const;

private:
    std::vector<std::vector<std::uint64_t>> counts_;
    std::vector<Vector> mean_;
    std::vector<std::vector<std::vector<std::uint64_t>>> next_counts_;
};

struct ConfidenceRadii {
    std::vector<Vector> reward;      // b_r per (arm, state)
    std::vector<Vector> transition;  // b_Q per (arm, state)
};

/// Parameters of the confidence radius formulas.
struct RadiusContext {
    double states = 1;    // S
    double arms = 1;      // n
    double episodes = 1;  // K
    double time = 1;      // t_k
};

/// b_r = sqrt(log(2 S n K t_k) / (2 max(1, N))).
double ucrl2_reward_radius(const RadiusContext& ctx, std::uint64_t visits);
/// b_Q = sqrt(2 log(S n K 2^S t_k) / max(1, N)).
double ucrl2_transition_radius(const RadiusContext& ctx, std::uint64_t visits);

ConfidenceRadii ucrl2_radii(const SufficientStats& stats, const RadiusContext& ctx);

/// Reward-only bonus b_r / (1 - beta) per (arm, state).
std::vector<Vector> ucbvi_bonus(const SufficientStats& stats, double discount,
                                const RadiusContext& ctx);

/// Rectangular confidence set: per (arm, state) an interval around the centre
/// reward and an L1 ball around the centre transition row.
struct ConfidenceSet {
    std::vector<ArmModel> center;
    ConfidenceRadii radii;

    static ConfidenceSet from_stats(const SufficientStats& stats, ConfidenceRadii radii);

    /// True iff every reward is within b_r and every row within b_Q in L1.
    bool contains(const BanditInstance& instance, double slack = 1e-12) const;
};

/// Row in the L1 ball of `radius` around `center` (intersected with the
/// simplex) maximising sum_y q(y) * value(y). Mass goes to the best successor
/// first and is then removed from the worst successors.
Vector optimistic_row(const Vector& center, const Vector& value, double radius);

/// The planner cannot represent the global state space.
class ExponentialBarrier : public StateSpaceTooLarge {
public:
    ExponentialBarrier(double state_count, std::size_t cap);
};

struct EviOptions {
    double tolerance = 1e-4;
    std::size_t state_cap = default_state_cap;
    /// Starting value vector (warm start); must match the state count if set.
    const Vector* initial_value = nullptr;
};

struct EviResult {
    TabularPolicy policy;
    Vector value;
    std::size_t iterations = 0;
    Vector update_norms;
};

/// Extended value iteration: Jacobi sweeps of
///   V(x) <- max_a [ r_hat(x_a) + b_r(x_a) + beta * max_{q in ball} sum_y q(y) V(x with x_a = y) ].
/// Stops once the sup-norm update is at most tolerance * (1 - beta) / (2 beta).
/// Throws ExponentialBarrier when S^n exceeds the state cap.
EviResult evi_optimistic_plan(const ConfidenceSet& set, double discount, const EviOptions& options = {});

/// sup over the set of V^pi, with the action fixed by `policy`.
EviResult extended_policy_evaluation(const ConfidenceSet& set, const Policy& policy, double discount,
                                     const EviOptions& options = {});

/// The two-arm construction showing that no locally computed index can be
/// optimistic for every member of a confidence set.
struct Counterexample {
    double discount = 0.5;
    double transition_radius = 0.2;
    double mu = 1.0;
    ConfidenceSet set;      // arms {a, b}; only arm a is uncertain
    BanditInstance first;   // M1
    BanditInstance second;  // M2
    ArmModel arm_c;
    IndexPolicy a1_first;   // pi1: A1 above B1/B3
    IndexPolicy b_first;    // pi2: B1/B3 above A1
    GlobalState start_first{0, 2};   // (A1, B3)
    GlobalState start_second{0, 0};  // (A1, B1)
};

Counterexample build_counterexample(double transition_radius = 0.2, double mu = 1.0);

struct CounterexampleValues {
    double optimistic_b_first = 0.0;  // sup_M V^{pi2}_M(A1, B3)
    double optimal_first = 0.0;       // sup_pi V^pi_{M1}(A1, B3)
    double optimistic_a1_first = 0.0; // sup_M V^{pi1}_M(A1, B1)
    double optimal_second = 0.0;      // sup_pi V^pi_{M2}(A1, B1)

    bool first_gap() const { return optimistic_b_first < optimal_first; }
    bool second_gap() const { return optimistic_a1_first < optimal_second; }
    bool holds() const { return first_gap() && second_gap(); }
};

/// Computes the four values with tolerance `tolerance`. Does not throw when the
/// inequalities fail; callers check `holds()`.
CounterexampleValues verify_counterexample(const Counterexample& ce, double tolerance = 1e-6);

}  // namespace mbandit
