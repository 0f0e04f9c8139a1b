#include "mbandit/gittins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mbandit {

namespace {

void check_discount(double discount) {
    if (!(discount > 0.0 && discount < 1.0)) {
        throw std::invalid_argument("discount " + std::to_string(discount) + " outside (0,1)");
    }
}

constexpr std::size_t dense_solve_limit = 2048;

}  // namespace

IndexTable gittins_indices(const ArmModel& arm, double discount) {
    check_discount(discount);
    const std::size_t S = arm.state_count();

    Matrix kernel(S, Vector(S));
    for (std::size_t x = 0; x < S; ++x) {
        for (std::size_t y = 0; y < S; ++y) kernel[x][y] = discount * arm.transition[x][y];
    }
    Vector reward = arm.reward_mean;
    Vector time(S, 1.0);

    std::vector<std::size_t> remaining(S);
    for (std::size_t x = 0; x < S; ++x) remaining[x] = x;

    IndexTable table{Vector(S, 0.0), discount};
    while (!remaining.empty()) {
        // Strict comparison keeps the lowest state id on ties.
        std::size_t pos = 0;
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            const std::size_t x = remaining[i];
            const std::size_t best = remaining[pos];
            if (reward[x] / time[x] > reward[best] / time[best]) pos = i;
        }
        const std::size_t z = remaining[pos];
        table.values[z] = reward[z] / time[z];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pos));

        // From z the chain lingers on its self-loop before leaving; 1 - kernel[z][z] >= 1 - beta.
        const double stay = 1.0 - kernel[z][z];
        for (std::size_t x : remaining) {
            const double w = kernel[x][z] / stay;
            if (w == 0.0) continue;
            reward[x] += w * reward[z];
            time[x] += w * time[z];
            for (std::size_t y : remaining) kernel[x][y] += w * kernel[z][y];
            kernel[x][z] = 0.0;
        }
    }
    return table;
}

IndexPolicy gittins_policy(const BanditInstance& instance) {
    std::vector<Vector> tables;
    tables.reserve(instance.arm_count());
    for (const auto& arm : instance.arms) {
        tables.push_back(gittins_indices(arm, instance.discount).values);
    }
    return IndexPolicy(std::move(tables));
}

double bellman_residual(const GlobalMdp& mdp, const TabularPolicy& policy, double discount,
                        const Vector& value) {
    double worst = 0.0;
    for (std::size_t s = 0; s < mdp.state_count(); ++s) {
        const std::size_t a = policy.act(s);
        double lhs = value[s];
        mdp.for_each_successor(s, a, [&](std::size_t y, double p) { lhs -= discount * p * value[y]; });
        worst = std::max(worst, std::abs(lhs - mdp.reward(s, a)));
    }
    return worst;
}

Vector policy_value_exact(const GlobalMdp& mdp, const Policy& policy, double discount) {
    check_discount(discount);
    const TabularPolicy tab = tabulate(policy, mdp.codec());
    const std::size_t N = mdp.state_count();

    Eigen::VectorXd rhs(static_cast<Eigen::Index>(N));
    for (std::size_t s = 0; s < N; ++s) rhs[static_cast<Eigen::Index>(s)] = mdp.reward(s, tab.act(s));

    Eigen::VectorXd solution;
    if (N <= dense_solve_limit) {
        Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(N),
                                                           static_cast<Eigen::Index>(N));
        for (std::size_t s = 0; s < N; ++s) {
            mdp.for_each_successor(s, tab.act(s), [&](std::size_t y, double p) {
                system(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(y)) -= discount * p;
            });
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
        solution = lu.solve(rhs);
        // One round of iterative refinement.
        solution += lu.solve(rhs - system * solution);
    } else {
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(N * 4);
        for (std::size_t s = 0; s < N; ++s) {
            const auto i = static_cast<Eigen::Index>(s);
            triplets.emplace_back(i, i, 1.0);
            mdp.for_each_successor(s, tab.act(s), [&](std::size_t y, double p) {
                triplets.emplace_back(i, static_cast<Eigen::Index>(y), -discount * p);
            });
        }
        Eigen::SparseMatrix<double> system(static_cast<Eigen::Index>(N),
                                           static_cast<Eigen::Index>(N));
        system.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(system);
        if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorisation failed");
        solution = lu.solve(rhs);
        solution += lu.solve(rhs - system * solution);
    }

    Vector value(solution.data(), solution.data() + solution.size());
    const double residual = bellman_residual(mdp, tab, discount, value);
    if (!(residual <= 1e-9)) {
        throw std::runtime_error("policy evaluation residual " + std::to_string(residual) +
                                 " exceeds 1e-9");
    }
    return value;
}

OptimalSolution optimal_value(const GlobalMdp& mdp, double discount, double tolerance) {
    check_discount(discount);
    const std::size_t N = mdp.state_count();
    const std::size_t n = mdp.action_count();
    const double threshold = tolerance * (1.0 - discount) / (2.0 * discount);

    OptimalSolution out;
    Vector value(N, 0.0), next(N, 0.0);
    std::vector<std::size_t> greedy(N, 0);
    for (;;) {
        double delta = 0.0;
        for (std::size_t s = 0; s < N; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_action = 0;
            for (std::size_t a = 0; a < n; ++a) {
                double q = 0.0;
                mdp.for_each_successor(s, a, [&](std::size_t y, double p) { q += p * value[y]; });
                q = mdp.reward(s, a) + discount * q;
                if (q > best) {
                    best = q;
                    best_action = a;
                }
            }
            next[s] = best;
            greedy[s] = best_action;
            delta = std::max(delta, std::abs(best - value[s]));
        }
        value.swap(next);
        ++out.iterations;
        out.update_norms.push_back(delta);
        if (delta <= threshold) break;
    }
    out.value = std::move(value);
    out.policy = TabularPolicy(mdp.codec(), std::move(greedy));
    return out;
}

}  // namespace mbandit
