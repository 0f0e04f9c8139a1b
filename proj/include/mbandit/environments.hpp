#pragma once

#include <map>
#include <string>
#include <vector>

#include "mbandit/core.hpp"

namespace mbandit {

/// Parameters of one four-state random-walk chain.
struct RandomWalkParams {
    double p_left = 0.1;
    double p_right = 0.2;
    double p_return = 0.3;
    double r_low = 0.2;
    double r_high = 1.0;
};

/// Four-state chain with Bernoulli rewards r_low in state 1 and r_high in state 4.
///   state 1: to 2 w.p. p_right, else stays
///   states 2, 3: left w.p. p_left, right w.p. p_right, else stays
///   state 4: back to 3 w.p. p_return, else stays
ArmModel random_walk_arm(const RandomWalkParams& p);

/// The three chains of the random-walk benchmark.
std::vector<RandomWalkParams> scenario1_chains();

/// Three random-walk chains, discount 0.99, all chains start in state 1.
BanditInstance scenario1_instance(double discount = 0.99);

/// Hazard rates of task `task` (1-based, 1..9) for execution states 1..10, derived
/// from the execution-time law with first hazard 0.1 * task and decay `lambda`.
Vector scenario2_hazard_rates(int task, double lambda = 0.8);

/// Nine tasks with 11 states each (10 execution states plus an absorbing
/// finished state). Reward 1 on completing a task; the last execution state
/// always completes.
BanditInstance scenario2_instance(double discount = 0.99, double lambda = 0.8);

/// Random three-chain random-walk model: rewards uniform on [0,1],
/// (p_left, p_right) from a flat three-way Dirichlet, p_return from a flat
/// two-way Dirichlet.
BanditInstance scenario3_sampler(Rng& rng, double discount = 0.99);

struct ScenarioSpec {
    std::string name;
    std::map<std::string, double> parameters;
};

const std::vector<std::string>& scenario_names();

/// Builds the named scenario. Random scenarios (scenario3_prior_sensitivity,
/// lower_bound) draw from `rng`. Unknown names or parameters throw
/// std::invalid_argument.
BanditInstance make_scenario(const ScenarioSpec& spec, Rng& rng);

}  // namespace mbandit
