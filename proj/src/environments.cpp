#include "mbandit/environments.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/random/gamma_distribution.hpp>

#include "mbandit/confidence.hpp"
#include "mbandit/evaluation.hpp"
#include "mbandit/posterior.hpp"

namespace mbandit {

ArmModel random_walk_arm(const RandomWalkParams& p) {
    ArmModel arm;
    arm.reward_mean = {p.r_low, 0.0, 0.0, p.r_high};
    arm.transition = {
        {1.0 - p.p_right, p.p_right, 0.0, 0.0},
        {p.p_left, 1.0 - p.p_left - p.p_right, p.p_right, 0.0},
        {0.0, p.p_left, 1.0 - p.p_left - p.p_right, p.p_right},
        {0.0, 0.0, p.p_return, 1.0 - p.p_return},
    };
    arm.reward_kind = BernoulliReward{};
    return arm;
}

std::vector<RandomWalkParams> scenario1_chains() {
    return {
        {0.1, 0.2, 0.3, 0.2, 1.0},
        {0.1, 0.5, 0.7, 0.35, 0.7},
        {0.1, 0.4, 0.5, 0.4, 0.65},
    };
}

BanditInstance scenario1_instance(double discount) {
    BanditInstance instance;
    for (const auto& chain : scenario1_chains()) instance.arms.push_back(random_walk_arm(chain));
    instance.discount = discount;
    instance.initial = point_initial(instance.state_counts(), GlobalState(instance.arm_count(), 0));
    return instance;
}

Vector scenario2_hazard_rates(int task, double lambda) {
    if (task < 1 || task > 9) throw std::invalid_argument("task must be in 1..9");
    const double first = 0.1 * task;
    // P(tau = i) for i = 1..10, divided by P(tau >= i). The survival is kept in product
    // form; subtracting the point masses loses most digits by the last states.
    Vector hazard(10);
    for (int i = 1; i <= 10; ++i) {
        const double k = i - 1.0;
        const double survival = std::pow(1.0 - first, k) * std::pow(lambda, k * (k - 1.0) / 2.0);
        const double p_end = i == 1 ? first : (1.0 - (1.0 - first) * std::pow(lambda, k)) * survival;
        hazard[static_cast<std::size_t>(i - 1)] = survival > 0.0 ? p_end / survival : 1.0;
    }
    return hazard;
}

BanditInstance scenario2_instance(double discount, double lambda) {
    constexpr std::size_t S = 11;
    constexpr std::size_t finished = 10;
    BanditInstance instance;
    instance.discount = discount;
    for (int task = 1; task <= 9; ++task) {
        const Vector hazard = scenario2_hazard_rates(task, lambda);
        ArmModel arm;
        arm.transition.assign(S, Vector(S, 0.0));
        arm.reward_mean.assign(S, 0.0);
        Matrix reward(S, Vector(S, 0.0));
        for (std::size_t i = 0; i < finished; ++i) {
            const double p_end = (i + 1 == finished) ? 1.0 : hazard[i];
            arm.transition[i][finished] = p_end;
            if (i + 1 < finished) arm.transition[i][i + 1] = 1.0 - p_end;
            reward[i][finished] = 1.0;
            arm.reward_mean[i] = p_end;
        }
        arm.transition[finished][finished] = 1.0;
        arm.reward_kind = TransitionReward{std::move(reward)};
        instance.arms.push_back(std::move(arm));
    }
    instance.initial = point_initial(instance.state_counts(), GlobalState(instance.arm_count(), 0));
    return instance;
}

BanditInstance scenario3_sampler(Rng& rng, double discount) {
    BanditInstance instance;
    instance.discount = discount;
    for (int chain = 0; chain < 3; ++chain) {
        RandomWalkParams p;
        p.r_low = uniform01(rng);
        p.r_high = uniform01(rng);
        const Vector moves = sample_dirichlet({1.0, 1.0, 1.0}, rng);
        p.p_left = moves[0];
        p.p_right = moves[1];
        p.p_return = sample_dirichlet({1.0, 1.0}, rng)[0];
        instance.arms.push_back(random_walk_arm(p));
    }
    instance.initial = point_initial(instance.state_counts(), GlobalState(instance.arm_count(), 0));
    return instance;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{
        "scenario1_random_walk", "scenario2_task_scheduling", "scenario3_prior_sensitivity",
        "counterexample", "lower_bound"};
    return names;
}

namespace {

class ParameterReader {
public:
    explicit ParameterReader(const ScenarioSpec& spec) : spec_(spec) {}

    double get(const std::string& key, double fallback) {
        used_.push_back(key);
        auto it = spec_.parameters.find(key);
        return it == spec_.parameters.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return spec_.parameters.count(key) > 0; }
    std::size_t get_count(const std::string& key, double fallback) {
        const double v = get(key, fallback);
        if (!(v >= 1.0) || v != std::floor(v)) {
            throw std::invalid_argument("parameter " + key + " must be a positive integer");
        }
        return static_cast<std::size_t>(v);
    }
    void finish() const {
        for (const auto& [key, value] : spec_.parameters) {
            bool known = false;
            for (const auto& u : used_) known = known || u == key;
            if (!known) {
                throw std::invalid_argument("unknown parameter '" + key + "' for scenario " +
                                            spec_.name);
            }
        }
    }

private:
    const ScenarioSpec& spec_;
    std::vector<std::string> used_;
};

}  // namespace

BanditInstance make_scenario(const ScenarioSpec& spec, Rng& rng) {
    ParameterReader params(spec);
    BanditInstance out;
    if (spec.name == "scenario1_random_walk") {
        out = scenario1_instance(params.get("beta", 0.99));
    } else if (spec.name == "scenario2_task_scheduling") {
        const double beta = params.get("beta", 0.99);
        out = scenario2_instance(beta, params.get("lambda", 0.8));
    } else if (spec.name == "scenario3_prior_sensitivity") {
        out = scenario3_sampler(rng, params.get("beta", 0.99));
    } else if (spec.name == "counterexample") {
        const double radius = params.get("radius", 0.2);
        const double mu = params.get("mu", 1.0);
        const double which = params.get("instance", 1.0);
        const Counterexample ce = build_counterexample(radius, mu);
        if (which == 1.0) {
            out = ce.first;
        } else if (which == 2.0) {
            out = ce.second;
        } else {
            throw std::invalid_argument("counterexample instance must be 1 or 2");
        }
    } else if (spec.name == "lower_bound") {
        LowerBoundParams lb;
        lb.states = params.get_count("S", 2);
        lb.arms = params.get_count("n", 2);
        lb.episodes = params.get_count("K", 1000);
        lb.discount = params.get("beta", 0.9);
        if (params.has("gamma") || params.has("gamma_prime")) {
            lb.gap = RewardGap{params.get("gamma", 0.5), params.get("gamma_prime", 0.75)};
        }
        out = lower_bound_instance(lb, rng);
    } else {
        throw std::invalid_argument("unknown scenario '" + spec.name + "'");
    }
    params.finish();
    return out;
}

}  // namespace mbandit
