#pragma once

#include <cstddef>

#include "mbandit/core.hpp"

namespace mbandit {

/// Gittins indices of one arm.
struct IndexTable {
    Vector values;
    double discount = 0.0;
};

/// Gittins indices of every state of `arm` by largest-index state elimination.
///
/// The remaining states carry an accumulated reward, an accumulated discounted
/// time and a substochastic transition kernel (initially beta * Q). The state
/// with the highest reward/time ratio has the next largest index; it is then
/// folded into the continuation dynamics of the states that remain. Each
/// elimination costs O(S^2), so the whole table costs O(S^3).
///
/// Throws std::invalid_argument if `discount` is outside (0, 1).
IndexTable gittins_indices(const ArmModel& arm, double discount);

/// Index policy built from the Gittins table of every arm of `instance`.
IndexPolicy gittins_policy(const BanditInstance& instance);

/// Exact value of `policy` on `mdp`: solves (I - beta P^pi) V = r^pi directly.
/// Throws std::runtime_error when the solve does not reach a residual of 1e-9.
Vector policy_value_exact(const GlobalMdp& mdp, const Policy& policy, double discount);

/// Sup-norm residual of (I - beta P^pi) V - r^pi.
double bellman_residual(const GlobalMdp& mdp, const TabularPolicy& policy, double discount,
                        const Vector& value);

struct OptimalSolution {
    Vector value;
    TabularPolicy policy;
    std::size_t iterations = 0;
    /// Sup-norm update size of each sweep.
    Vector update_norms;
};

/// Value iteration on the explicit MDP. Stops once the sup-norm update is at
/// most tolerance * (1 - beta) / (2 beta), which puts the value within
/// `tolerance` of the fixed point; the returned policy is greedy.
OptimalSolution optimal_value(const GlobalMdp& mdp, double discount, double tolerance = 1e-8);

}  // namespace mbandit
