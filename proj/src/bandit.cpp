#include "zpdes/bandit.hpp"

#include <algorithm>
#include <string>

namespace zpdes {

void BanditConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ConfigError("bandit.gamma must be in [0, 1]");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw ConfigError("bandit.beta must be in [0, 1]");
    if (!(eta >= 0.0))
        throw ConfigError("bandit.eta must be >= 0");
}

std::size_t draw_index(const Eigen::Ref<const Eigen::VectorXd>& probabilities, Rng& rng)
{
    const double u = uniform01(rng) * probabilities.sum();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    bool any = false;
    for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
        const double p = probabilities(i);
        if (!(p > 0.0))
            continue;
        cumulative += p;
        last_positive = static_cast<std::size_t>(i);
        any = true;
        if (u < cumulative)
            return last_positive;
    }
    if (!any)
        throw std::invalid_argument("draw_index: no positive probability");
    return last_positive;
}

ExpertWeights::ExpertWeights(const ActivitySpace& space)
{
    experts_.resize(space.groups().size());
    for (std::size_t g = 0; g < space.groups().size(); ++g) {
        for (const auto& p : space.group(g).parameters) {
            const auto n = static_cast<Eigen::Index>(p.values.size());
            experts_[g].push_back({Eigen::VectorXd::Zero(n), ActiveMask::Constant(n, false)});
        }
    }
}

Eigen::VectorXd ExpertWeights::flatten() const
{
    Eigen::Index n = 0;
    for (const auto& g : experts_)
        for (const auto& p : g)
            n += p.weights.size();
    Eigen::VectorXd out(n);
    Eigen::Index offset = 0;
    for (const auto& g : experts_) {
        for (const auto& p : g) {
            out.segment(offset, p.weights.size()) = p.weights;
            offset += p.weights.size();
        }
    }
    return out;
}

ActiveMask ExpertWeights::flatten_active() const
{
    Eigen::Index n = 0;
    for (const auto& g : experts_)
        for (const auto& p : g)
            n += p.active.size();
    ActiveMask out(n);
    Eigen::Index offset = 0;
    for (const auto& g : experts_) {
        for (const auto& p : g) {
            out.segment(offset, p.active.size()) = p.active;
            offset += p.active.size();
        }
    }
    return out;
}

bool ExpertWeights::operator==(const ExpertWeights& other) const
{
    if (experts_.size() != other.experts_.size())
        return false;
    for (std::size_t g = 0; g < experts_.size(); ++g) {
        if (experts_[g].size() != other.experts_[g].size())
            return false;
        for (std::size_t p = 0; p < experts_[g].size(); ++p) {
            const auto& a = experts_[g][p];
            const auto& b = other.experts_[g][p];
            if (a.weights.size() != b.weights.size() || a.weights != b.weights || (a.active != b.active).any())
                return false;
        }
    }
    return true;
}

GroupInstantiation sample_values(const ActivitySpace& space, std::size_t group, const ExpertWeights& weights,
                                 const BanditConfig& config, Rng& rng, SamplingStats* stats)
{
    const auto& params = space.group(group).parameters;
    GroupInstantiation h{group, {}};
    h.selections.reserve(params.size());
    for (std::size_t p = 0; p < params.size(); ++p) {
        const auto& experts = weights.at(ParameterRef{group, p});
        if (!experts.active.any()) {
            throw std::invalid_argument("no active value for parameter "
                                        + space.path_of(ParameterRef{group, p}));
        }
        bool fallback = false;
        const Eigen::VectorXd probs = sampling_probabilities(experts.weights, experts.active, config.gamma, &fallback);
        if (fallback && stats)
            ++stats->uniform_fallbacks;
        h.selections.push_back(draw_index(probs, rng));
    }
    return h;
}

Activity gen_activity(const StochasticActivitySpace& sas, const BanditConfig& config, Rng& rng, SamplingStats* stats)
{
    const auto& space = *sas.space;
    // assemble_activity visits parameters in group order; drawing a whole
    // group per visit keeps the rng consumption identical to sample_values.
    std::size_t current_group = space.groups().size();
    GroupInstantiation current;
    return assemble_activity(space, [&](std::size_t g, std::size_t p) {
        if (g != current_group) {
            current = sample_values(space, g, sas.weights, config, rng, stats);
            current_group = g;
        }
        return current.selections.at(p);
    });
}

void update_weights(ExpertWeights& weights, const Activity& activity, std::span<const double> rewards,
                    const BanditConfig& config)
{
    if (rewards.size() != activity.instantiations.size()) {
        throw std::invalid_argument("update_weights: " + std::to_string(rewards.size()) + " rewards for "
                                    + std::to_string(activity.instantiations.size()) + " instantiations");
    }
    for (std::size_t x = 0; x < activity.instantiations.size(); ++x) {
        const auto& h = activity.instantiations[x];
        const double reward = std::max(rewards[x], 0.0);
        for (std::size_t p = 0; p < h.selections.size(); ++p) {
            double& w = weights.weight(ValueRef{h.group, p, h.selections[p]});
            w = expert_update(w, config.beta, config.eta, reward);
        }
    }
}

} // namespace zpdes
