#include "mbandit/core.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace mbandit {

namespace {

constexpr double row_tolerance = 1e-12;

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

double uniform01(Rng& rng) { return boost::random::uniform_01<double>{}(rng); }

StateSpaceTooLarge::StateSpaceTooLarge(double state_count, std::size_t cap,
                                       const std::string& hint)
    : std::runtime_error("global state space has " + format_double(state_count) +
                         " states, above the cap of " + std::to_string(cap) +
                         (hint.empty() ? "" : "; " + hint)),
      state_count_(state_count) {}

std::string reward_kind_name(const RewardKind& kind) {
    if (std::holds_alternative<BernoulliReward>(kind)) return "bernoulli";
    if (std::holds_alternative<GaussianReward>(kind)) return "gaussian";
    return "on_transition";
}

Matrix identity_matrix(std::size_t size) {
    Matrix m(size, Vector(size, 0.0));
    for (std::size_t i = 0; i < size; ++i) m[i][i] = 1.0;
    return m;
}

InitialDistribution point_initial(const std::vector<std::size_t>& state_counts,
                                  const GlobalState& state) {
    ProductInitial init;
    for (std::size_t a = 0; a < state_counts.size(); ++a) {
        Vector p(state_counts[a], 0.0);
        p.at(state.at(a)) = 1.0;
        init.per_arm.push_back(std::move(p));
    }
    return init;
}

std::vector<std::size_t> BanditInstance::state_counts() const {
    std::vector<std::size_t> counts;
    counts.reserve(arms.size());
    for (const auto& arm : arms) counts.push_back(arm.state_count());
    return counts;
}

double BanditInstance::global_state_count() const {
    double total = 1.0;
    for (const auto& arm : arms) total *= static_cast<double>(arm.state_count());
    return total;
}

GlobalState BanditInstance::sample_initial(Rng& rng) const {
    if (const auto* product = std::get_if<ProductInitial>(&initial)) {
        GlobalState state(arms.size());
        for (std::size_t a = 0; a < arms.size(); ++a) {
            state[a] = sample_categorical(product->per_arm[a], rng);
        }
        return state;
    }
    const auto& coupled = std::get<CoupledInitial>(initial);
    return coupled.states[sample_categorical(coupled.probabilities, rng)];
}

std::vector<Violation> validate_instance(const BanditInstance& instance) {
    std::vector<Violation> out;
    auto error = [&](std::optional<std::size_t> arm, std::optional<std::size_t> row,
                     std::string msg) {
        out.push_back({Severity::error, arm, row, std::move(msg)});
    };

    if (instance.arms.empty()) error(std::nullopt, std::nullopt, "instance has no arms");
    if (!(instance.discount > 0.0 && instance.discount < 1.0)) {
        error(std::nullopt, std::nullopt,
              "discount " + format_double(instance.discount) + " outside (0,1)");
    }

    for (std::size_t a = 0; a < instance.arms.size(); ++a) {
        const ArmModel& arm = instance.arms[a];
        const std::size_t S = arm.state_count();
        if (S == 0) {
            error(a, std::nullopt, "arm has no states");
            continue;
        }
        if (arm.transition.size() != S) {
            error(a, std::nullopt, "transition has " + std::to_string(arm.transition.size()) +
                                       " rows, expected " + std::to_string(S));
            continue;
        }
        for (std::size_t x = 0; x < S; ++x) {
            const Vector& row = arm.transition[x];
            if (row.size() != S) {
                error(a, x, "row has " + std::to_string(row.size()) + " entries, expected " +
                                std::to_string(S));
                continue;
            }
            bool negative = false;
            for (double q : row) negative = negative || !(q >= 0.0);
            if (negative) error(a, x, "negative transition probability");
            const double sum = std::accumulate(row.begin(), row.end(), 0.0);
            if (!(std::abs(sum - 1.0) <= row_tolerance)) {
                error(a, x, "row sum " + format_double(sum) + " ≠ 1");
            }
        }

        if (std::holds_alternative<BernoulliReward>(arm.reward_kind)) {
            for (std::size_t x = 0; x < S; ++x) {
                if (!(arm.reward_mean[x] >= 0.0 && arm.reward_mean[x] <= 1.0)) {
                    error(a, x, "reward " + format_double(arm.reward_mean[x]) + " outside [0,1]");
                }
            }
        } else if (const auto* g = std::get_if<GaussianReward>(&arm.reward_kind)) {
            if (!(g->variance > 0.0)) error(a, std::nullopt, "gaussian variance must be positive");
            for (std::size_t x = 0; x < S; ++x) {
                if (!(arm.reward_mean[x] >= 0.0 && arm.reward_mean[x] <= 1.0)) {
                    out.push_back({Severity::warning, a, x,
                                   "gaussian reward mean " + format_double(arm.reward_mean[x]) +
                                       " outside [0,1]"});
                }
            }
        } else {
            const auto& tr = std::get<TransitionReward>(arm.reward_kind);
            if (tr.reward.size() != S) {
                error(a, std::nullopt, "transition reward matrix has wrong shape");
            } else {
                for (std::size_t x = 0; x < S; ++x) {
                    if (tr.reward[x].size() != S || arm.transition[x].size() != S) {
                        error(a, x, "transition reward row has wrong size");
                        continue;
                    }
                    double mean = 0.0;
                    for (std::size_t y = 0; y < S; ++y) {
                        mean += arm.transition[x][y] * tr.reward[x][y];
                        if (!(tr.reward[x][y] >= 0.0 && tr.reward[x][y] <= 1.0)) {
                            error(a, x, "transition reward outside [0,1]");
                        }
                    }
                    if (!(std::abs(mean - arm.reward_mean[x]) <= 1e-9)) {
                        error(a, x, "reward mean " + format_double(arm.reward_mean[x]) +
                                        " inconsistent with transition rewards " +
                                        format_double(mean));
                    }
                }
            }
        }
    }

    const std::size_t n = instance.arms.size();
    if (const auto* product = std::get_if<ProductInitial>(&instance.initial)) {
        if (product->per_arm.size() != n) {
            error(std::nullopt, std::nullopt, "initial distribution has wrong arm count");
        } else {
            for (std::size_t a = 0; a < n; ++a) {
                const Vector& p = product->per_arm[a];
                if (p.size() != instance.arms[a].state_count()) {
                    error(a, std::nullopt, "initial distribution has wrong size");
                    continue;
                }
                const double sum = std::accumulate(p.begin(), p.end(), 0.0);
                bool negative = false;
                for (double v : p) negative = negative || !(v >= 0.0);
                if (negative || !(std::abs(sum - 1.0) <= row_tolerance)) {
                    error(a, std::nullopt,
                          "initial probabilities sum to " + format_double(sum) + " ≠ 1");
                }
            }
        }
    } else {
        const auto& coupled = std::get<CoupledInitial>(instance.initial);
        if (coupled.states.size() != coupled.probabilities.size() || coupled.states.empty()) {
            error(std::nullopt, std::nullopt, "coupled initial distribution is malformed");
        } else {
            for (const auto& s : coupled.states) {
                bool ok = s.size() == n;
                for (std::size_t a = 0; ok && a < n; ++a) {
                    ok = s[a] < instance.arms[a].state_count();
                }
                if (!ok) error(std::nullopt, std::nullopt, "coupled initial state out of range");
            }
            const double sum =
                std::accumulate(coupled.probabilities.begin(), coupled.probabilities.end(), 0.0);
            if (!(std::abs(sum - 1.0) <= row_tolerance)) {
                error(std::nullopt, std::nullopt,
                      "initial probabilities sum to " + format_double(sum) + " ≠ 1");
            }
        }
    }
    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    for (const auto& v : violations) {
        if (v.severity == Severity::error) return true;
    }
    return false;
}

void require_valid(const BanditInstance& instance) {
    const auto violations = validate_instance(instance);
    if (!has_errors(violations)) return;
    std::ostringstream os;
    os << "invalid bandit instance:";
    for (const auto& v : violations) {
        if (v.severity != Severity::error) continue;
        os << "\n  ";
        if (v.arm) os << "arm " << *v.arm << ": ";
        if (v.row) os << "row " << *v.row << ": ";
        os << v.message;
    }
    throw std::invalid_argument(os.str());
}

StateCodec::StateCodec(std::vector<std::size_t> state_counts)
    : radix_(std::move(state_counts)), stride_(radix_.size()), total_(1) {
    for (std::size_t a = 0; a < radix_.size(); ++a) {
        stride_[a] = total_;
        total_ *= radix_[a];
    }
}

std::size_t StateCodec::encode(const GlobalState& state) const {
    std::size_t id = 0;
    for (std::size_t a = 0; a < radix_.size(); ++a) id += state[a] * stride_[a];
    return id;
}

GlobalState StateCodec::decode(std::size_t id) const {
    GlobalState state(radix_.size());
    for (std::size_t a = 0; a < radix_.size(); ++a) {
        state[a] = id % radix_[a];
        id /= radix_[a];
    }
    return state;
}

std::vector<SparseEntry> GlobalMdp::transition(std::size_t state, std::size_t action) const {
    std::vector<SparseEntry> row;
    for_each_successor(state, action,
                       [&](std::size_t next, double p) { row.push_back({next, p}); });
    return row;
}

GlobalMdp assemble_global_mdp(const BanditInstance& instance, std::size_t state_cap) {
    require_valid(instance);
    const double count = instance.global_state_count();
    if (count > static_cast<double>(state_cap)) throw StateSpaceTooLarge(count, state_cap);

    GlobalMdp mdp;
    mdp.codec_ = StateCodec(instance.state_counts());
    mdp.arms_ = instance.arms;
    const std::size_t n = instance.arm_count();
    mdp.reward_.resize(mdp.codec_.state_count() * n);
    for (std::size_t s = 0; s < mdp.codec_.state_count(); ++s) {
        for (std::size_t a = 0; a < n; ++a) {
            mdp.reward_[s * n + a] = instance.arms[a].reward_mean[mdp.codec_.local_state(s, a)];
        }
    }
    return mdp;
}

std::size_t IndexPolicy::act(const GlobalState& state) const {
    std::size_t best = 0;
    double best_index = index_[0][state[0]];
    for (std::size_t a = 1; a < index_.size(); ++a) {
        const double v = index_[a][state[a]];
        if (v > best_index) {
            best = a;
            best_index = v;
        }
    }
    return best;
}

std::size_t act(const Policy& policy, const GlobalState& state) {
    return std::visit([&](const auto& p) { return p.act(state); }, policy);
}

TabularPolicy tabulate(const Policy& policy, const StateCodec& codec) {
    if (const auto* tab = std::get_if<TabularPolicy>(&policy)) {
        if (tab->codec().radix() == codec.radix()) return *tab;
    }
    std::vector<std::size_t> actions(codec.state_count());
    for (std::size_t s = 0; s < codec.state_count(); ++s) {
        actions[s] = act(policy, codec.decode(s));
    }
    return TabularPolicy(codec, std::move(actions));
}

bool same_decisions(const Policy& a, const Policy& b, const StateCodec& codec) {
    for (std::size_t s = 0; s < codec.state_count(); ++s) {
        const auto state = codec.decode(s);
        if (act(a, state) != act(b, state)) return false;
    }
    return true;
}

std::size_t sample_categorical(const Vector& probabilities, Rng& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] <= 0.0) continue;
        cumulative += probabilities[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    return last_positive;
}

StepOutcome step(const BanditInstance& instance, const GlobalState& state, std::size_t action,
                 Rng& rng) {
    if (action >= instance.arm_count()) {
        throw std::out_of_range("action " + std::to_string(action) + " out of range for " +
                                std::to_string(instance.arm_count()) + " arms");
    }
    const ArmModel& arm = instance.arms[action];
    const std::size_t x = state[action];
    StepOutcome out{0.0, state};
    const std::size_t y = sample_categorical(arm.transition[x], rng);
    out.next_state[action] = y;

    if (std::holds_alternative<BernoulliReward>(arm.reward_kind)) {
        out.reward = uniform01(rng) < arm.reward_mean[x] ? 1.0 : 0.0;
    } else if (const auto* g = std::get_if<GaussianReward>(&arm.reward_kind)) {
        boost::random::normal_distribution<double> normal(arm.reward_mean[x],
                                                          std::sqrt(g->variance));
        out.reward = normal(rng);
    } else {
        out.reward = std::get<TransitionReward>(arm.reward_kind).reward[x][y];
    }
    return out;
}

}  // namespace mbandit
