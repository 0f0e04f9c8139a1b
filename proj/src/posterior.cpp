#include "mbandit/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace mbandit {

double GaussGammaParams::gamma_shape() const { return (static_cast<double>(count) + 1.0) / 2.0; }

double GaussGammaParams::gamma_rate() const {
    const double N = static_cast<double>(count);
    return 0.5 + squared_deviations / 2.0 + N * mean * mean / (2.0 * (N + 1.0));
}

double GaussGammaParams::normal_mean() const {
    const double N = static_cast<double>(count);
    return N * mean / (N + 1.0);
}

PosteriorState::PosteriorState(const std::vector<std::size_t>& state_counts,
                               const PriorConfig& prior)
    : prior_(prior) {
    if (!(prior.dirichlet_concentration > 0.0)) {
        throw std::invalid_argument("Dirichlet prior concentration must be positive");
    }
    if (!(prior.beta_alpha > 0.0 && prior.beta_beta > 0.0)) {
        throw std::invalid_argument("Beta prior parameters must be positive");
    }
    arms_.reserve(state_counts.size());
    for (std::size_t S : state_counts) {
        ArmPosterior arm;
        arm.transitions.assign(S, DirichletRow{Vector(S, prior.dirichlet_concentration)});
        if (prior.rewards == RewardPrior::beta) {
            arm.beta.assign(S, BetaParams{prior.beta_alpha, prior.beta_beta});
        } else {
            arm.gauss_gamma.assign(S, GaussGammaParams{});
        }
        arms_.push_back(std::move(arm));
    }
}

void PosteriorState::update(const Observation& obs) {
    if (obs.arm >= arms_.size()) throw std::invalid_argument("observation arm out of range");
    ArmPosterior& arm = arms_[obs.arm];
    const std::size_t S = arm.transitions.size();
    if (obs.state >= S || obs.next_state >= S) {
        throw std::invalid_argument("observation state out of range");
    }

    if (prior_.rewards == RewardPrior::beta) {
        BetaParams& b = arm.beta[obs.state];
        if (obs.reward == 1.0) {
            b.alpha += 1.0;
        } else if (obs.reward == 0.0) {
            b.beta += 1.0;
        } else {
            throw std::invalid_argument("Beta posterior needs a binary reward, got " +
                                        std::to_string(obs.reward));
        }
    } else {
        GaussGammaParams& g = arm.gauss_gamma[obs.state];
        g.count += 1;
        const double delta = obs.reward - g.mean;
        g.mean += delta / static_cast<double>(g.count);
        g.squared_deviations += delta * (obs.reward - g.mean);
    }
    arm.transitions[obs.state].concentration[obs.next_state] += 1.0;
}

Vector sample_dirichlet(const Vector& concentration, Rng& rng) {
    Vector draw(concentration.size());
    double total = 0.0;
    for (std::size_t i = 0; i < concentration.size(); ++i) {
        boost::random::gamma_distribution<double> gamma(concentration[i], 1.0);
        draw[i] = gamma(rng);
        total += draw[i];
    }
    if (!(total > 0.0)) {
        // Every Gamma draw underflowed; put the mass on the largest concentration.
        std::fill(draw.begin(), draw.end(), 0.0);
        draw[static_cast<std::size_t>(
            std::max_element(concentration.begin(), concentration.end()) - concentration.begin())] = 1.0;
        return draw;
    }
    for (double& v : draw) v /= total;
    return draw;
}

double sample_beta(double alpha, double beta, Rng& rng) {
    boost::random::beta_distribution<double> dist(alpha, beta);
    return dist(rng);
}

BanditInstance sample_model(const PosteriorState& posterior, const BanditInstance& template_instance,
                            Rng& rng) {
    if (posterior.arms().size() != template_instance.arm_count()) {
        throw std::invalid_argument("posterior arm count does not match the template");
    }
    BanditInstance out;
    out.discount = template_instance.discount;
    out.initial = template_instance.initial;
    out.arms.reserve(template_instance.arm_count());

    for (std::size_t a = 0; a < template_instance.arm_count(); ++a) {
        const ArmPosterior& post = posterior.arm(a);
        const std::size_t S = template_instance.arms[a].state_count();
        if (post.transitions.size() != S) {
            throw std::invalid_argument("posterior shape does not match arm " + std::to_string(a));
        }
        ArmModel arm;
        arm.transition.reserve(S);
        for (std::size_t x = 0; x < S; ++x) {
            arm.transition.push_back(sample_dirichlet(post.transitions[x].concentration, rng));
        }
        arm.reward_mean.resize(S);
        if (posterior.reward_prior() == RewardPrior::beta) {
            for (std::size_t x = 0; x < S; ++x) {
                arm.reward_mean[x] = sample_beta(post.beta[x].alpha, post.beta[x].beta, rng);
            }
            arm.reward_kind = BernoulliReward{};
        } else {
            double variance_sum = 0.0;
            for (std::size_t x = 0; x < S; ++x) {
                const GaussGammaParams& g = post.gauss_gamma[x];
                boost::random::gamma_distribution<double> gamma(g.gamma_shape(), 1.0 / g.gamma_rate());
                const double precision = gamma(rng);
                const double variance = 1.0 / precision;
                boost::random::normal_distribution<double> normal(
                    g.normal_mean(), std::sqrt(variance / (static_cast<double>(g.count) + 1.0)));
                arm.reward_mean[x] = normal(rng);
                variance_sum += variance;
            }
            arm.reward_kind = GaussianReward{variance_sum / static_cast<double>(S)};
        }
        out.arms.push_back(std::move(arm));
    }
    return out;
}

}  // namespace mbandit
