#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mbandit/random.hpp"

namespace mbandit {

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;

/// Thrown when an explicit global state space would exceed the configured cap.
class StateSpaceTooLarge : public std::runtime_error {
public:
    StateSpaceTooLarge(double state_count, std::size_t cap, const std::string& hint = {});
    double state_count() const { return state_count_; }

private:
    double state_count_;
};

struct BernoulliReward {};

struct GaussianReward {
    double variance = 1.0;
};

/// Deterministic reward paid on each transition x -> y. The state-based mean is
/// then r(x) = sum_y Q(x, y) * reward(x, y).
struct TransitionReward {
    Matrix reward;
};

using RewardKind = std::variant<BernoulliReward, GaussianReward, TransitionReward>;

std::string reward_kind_name(const RewardKind& kind);

/// One rested arm: a Markov reward process on states 0..S-1.
struct ArmModel {
    Vector reward_mean;
    Matrix transition;
    RewardKind reward_kind = BernoulliReward{};

    std::size_t state_count() const { return reward_mean.size(); }
};

/// Identity transition matrix of the given size.
Matrix identity_matrix(std::size_t size);

/// A global state: one local state per arm.
using GlobalState = std::vector<std::size_t>;

/// Independent per-arm starting distributions.
struct ProductInitial {
    std::vector<Vector> per_arm;
};

/// An explicit list of global states with probabilities.
struct CoupledInitial {
    std::vector<GlobalState> states;
    Vector probabilities;
};

using InitialDistribution = std::variant<ProductInitial, CoupledInitial>;

/// Product distribution concentrated on a single global state.
InitialDistribution point_initial(const std::vector<std::size_t>& state_counts,
                                  const GlobalState& state);

struct BanditInstance {
    std::vector<ArmModel> arms;
    double discount = 0.99;
    InitialDistribution initial;

    std::size_t arm_count() const { return arms.size(); }
    std::vector<std::size_t> state_counts() const;
    /// S^n as a floating-point number (it overflows 64 bits for large instances).
    double global_state_count() const;

    GlobalState sample_initial(Rng& rng) const;
};

enum class Severity { error, warning };

struct Violation {
    Severity severity = Severity::error;
    std::optional<std::size_t> arm;
    std::optional<std::size_t> row;
    std::string message;
};

/// Every invariant violation of the instance. Warnings (Gaussian means outside
/// [0, 1]) are reported but do not make the instance invalid.
std::vector<Violation> validate_instance(const BanditInstance& instance);

bool has_errors(const std::vector<Violation>& violations);

/// Throws std::invalid_argument listing the errors, if any.
void require_valid(const BanditInstance& instance);

/// Mixed-radix encoding of global states, arm 0 least significant.
class StateCodec {
public:
    StateCodec() = default;
    explicit StateCodec(std::vector<std::size_t> state_counts);

    std::size_t state_count() const { return total_; }
    std::size_t arm_count() const { return radix_.size(); }
    const std::vector<std::size_t>& radix() const { return radix_; }
    std::size_t stride(std::size_t arm) const { return stride_[arm]; }

    std::size_t encode(const GlobalState& state) const;
    GlobalState decode(std::size_t id) const;
    std::size_t local_state(std::size_t id, std::size_t arm) const {
        return (id / stride_[arm]) % radix_[arm];
    }

private:
    std::vector<std::size_t> radix_;
    std::vector<std::size_t> stride_;
    std::size_t total_ = 0;
};

struct SparseEntry {
    std::size_t state;
    double probability;
};

constexpr std::size_t default_state_cap = 1'000'000;

/// Explicit MDP over the product state space. Transitions follow the rested
/// structure: only the activated arm moves.
class GlobalMdp {
public:
    std::size_t state_count() const { return codec_.state_count(); }
    std::size_t action_count() const { return arms_.size(); }
    const StateCodec& codec() const { return codec_; }

    double reward(std::size_t state, std::size_t action) const {
        return reward_[state * arms_.size() + action];
    }
    /// Sparse row of P^action(state, .), at most S nonzeros.
    std::vector<SparseEntry> transition(std::size_t state, std::size_t action) const;

    template <class Fn>
    void for_each_successor(std::size_t state, std::size_t action, Fn&& fn) const {
        const auto& row = arms_[action].transition[codec_.local_state(state, action)];
        const std::size_t stride = codec_.stride(action);
        const std::size_t base = state - codec_.local_state(state, action) * stride;
        for (std::size_t y = 0; y < row.size(); ++y) {
            if (row[y] != 0.0) fn(base + y * stride, row[y]);
        }
    }

    friend GlobalMdp assemble_global_mdp(const BanditInstance& instance, std::size_t state_cap);

private:
    StateCodec codec_;
    std::vector<ArmModel> arms_;
    Vector reward_;
};

GlobalMdp assemble_global_mdp(const BanditInstance& instance,
                              std::size_t state_cap = default_state_cap);

/// Argmax over per-(arm, local state) indices; ties go to the lowest arm.
class IndexPolicy {
public:
    IndexPolicy() = default;
    explicit IndexPolicy(std::vector<Vector> index) : index_(std::move(index)) {}

    std::size_t act(const GlobalState& state) const;
    double index(std::size_t arm, std::size_t local_state) const { return index_[arm][local_state]; }
    const std::vector<Vector>& table() const { return index_; }
    std::size_t arm_count() const { return index_.size(); }

private:
    std::vector<Vector> index_;
};

/// One action per global state id.
class TabularPolicy {
public:
    TabularPolicy() = default;
    TabularPolicy(StateCodec codec, std::vector<std::size_t> action)
        : codec_(std::move(codec)), action_(std::move(action)) {}

    std::size_t act(const GlobalState& state) const { return action_[codec_.encode(state)]; }
    std::size_t act(std::size_t state_id) const { return action_[state_id]; }
    const std::vector<std::size_t>& actions() const { return action_; }
    const StateCodec& codec() const { return codec_; }

    friend bool operator==(const TabularPolicy& a, const TabularPolicy& b) {
        return a.action_ == b.action_ && a.codec_.radix() == b.codec_.radix();
    }

private:
    StateCodec codec_;
    std::vector<std::size_t> action_;
};

using Policy = std::variant<IndexPolicy, TabularPolicy>;

std::size_t act(const Policy& policy, const GlobalState& state);

/// Materialise any policy over the full state space of `codec`.
TabularPolicy tabulate(const Policy& policy, const StateCodec& codec);

/// Same decisions at every state of the codec's space.
bool same_decisions(const Policy& a, const Policy& b, const StateCodec& codec);

struct StepOutcome {
    double reward;
    GlobalState next_state;
};

/// Draws the active arm's successor, then its reward. Only coordinate `action` changes.
StepOutcome step(const BanditInstance& instance, const GlobalState& state, std::size_t action,
                 Rng& rng);

/// Sample an index from a discrete distribution.
std::size_t sample_categorical(const Vector& probabilities, Rng& rng);

}  // namespace mbandit
