#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "mbandit/core.hpp"

namespace mbandit {

struct DirichletRow {
    Vector concentration;
};

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Gaussian-Gamma reward posterior of one state, tracked through the running
/// count, mean and sum of squared deviations (Welford).
struct GaussGammaParams {
    std::size_t count = 0;
    double mean = 0.0;
    double squared_deviations = 0.0;

    double variance() const { return count == 0 ? 0.0 : squared_deviations / count; }
    /// Posterior of the precision 1/sigma^2.
    double gamma_shape() const;
    double gamma_rate() const;
    /// Posterior of the mean given the precision: Normal(normal_mean, sigma^2 / (N + 1)).
    double normal_mean() const;
};

enum class RewardPrior { beta, gauss_gamma };

struct PriorConfig {
    double dirichlet_concentration = 1.0;
    RewardPrior rewards = RewardPrior::beta;
    double beta_alpha = 1.0;
    double beta_beta = 1.0;
};

struct Observation {
    std::size_t arm;
    std::size_t state;
    double reward;
    std::size_t next_state;
};

struct ArmPosterior {
    std::vector<DirichletRow> transitions;
    std::vector<BetaParams> beta;
    std::vector<GaussGammaParams> gauss_gamma;
};

class PosteriorState {
public:
    PosteriorState() = default;
    PosteriorState(const std::vector<std::size_t>& state_counts, const PriorConfig& prior);

    RewardPrior reward_prior() const { return prior_.rewards; }
    const PriorConfig& prior() const { return prior_; }
    const std::vector<ArmPosterior>& arms() const { return arms_; }
    const ArmPosterior& arm(std::size_t a) const { return arms_[a]; }

    /// Conjugate update with one observed transition and reward. Throws
    /// std::invalid_argument for out-of-range indices and for a non-binary
    /// reward under a Beta prior.
    void update(const Observation& obs);

    friend bool operator==(const PosteriorState&, const PosteriorState&) = default;

private:
    PriorConfig prior_;
    std::vector<ArmPosterior> arms_;
};

inline bool operator==(const DirichletRow& a, const DirichletRow& b) {
    return a.concentration == b.concentration;
}
inline bool operator==(const BetaParams& a, const BetaParams& b) {
    return a.alpha == b.alpha && a.beta == b.beta;
}
inline bool operator==(const GaussGammaParams& a, const GaussGammaParams& b) {
    return a.count == b.count && a.mean == b.mean && a.squared_deviations == b.squared_deviations;
}
inline bool operator==(const PriorConfig& a, const PriorConfig& b) {
    return a.dirichlet_concentration == b.dirichlet_concentration && a.rewards == b.rewards &&
           a.beta_alpha == b.beta_alpha && a.beta_beta == b.beta_beta;
}
inline bool operator==(const ArmPosterior& a, const ArmPosterior& b) {
    return a.transitions == b.transitions && a.beta == b.beta && a.gauss_gamma == b.gauss_gamma;
}

/// Draw from a Dirichlet distribution by normalising independent Gamma draws.
Vector sample_dirichlet(const Vector& concentration, Rng& rng);

double sample_beta(double alpha, double beta, Rng& rng);

/// Draw one model from the posterior. Transition rows come from their
/// Dirichlet, reward means from Beta or from Normal given a Gamma precision.
/// Gaussian-Gamma draws are kept as they are, so the sampled arm is tagged
/// Gaussian with the drawn variance. The template supplies the discount and
/// the initial distribution.
BanditInstance sample_model(const PosteriorState& posterior, const BanditInstance& template_instance,
                            Rng& rng);

}  // namespace mbandit
