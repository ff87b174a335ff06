#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "zpdes/activity_space.hpp"
#include "zpdes/rng.hpp"

namespace zpdes {

using ActiveMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

struct BanditConfig {
    double gamma = 0.1; // exploration rate
    double beta = 0.8;  // decay of the old estimate
    double eta = 0.2;   // gain on the new reward

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

/// Mixture of the normalized active weights with a uniform distribution over
/// the active values: p = w~ (1 - gamma) + gamma * xi_u. Inactive entries get
/// probability 0. If every active weight is zero, w~ is replaced by xi_u and
/// `*fallback` (when given) is set. Throws std::invalid_argument when no value
/// is active.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
sampling_probabilities(const Eigen::MatrixBase<Derived>& weights, const ActiveMask& active,
                       typename Derived::Scalar gamma, bool* fallback = nullptr)
{
    using Scalar = typename Derived::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    const Eigen::Index n_active = active.count();
    if (n_active == 0)
        throw std::invalid_argument("sampling_probabilities: no active value");

    const Vector mask = active.template cast<Scalar>().matrix();
    const Vector uniform = mask / static_cast<Scalar>(n_active);
    const Vector masked = weights.cwiseProduct(mask);
    const Scalar total = masked.sum();

    const bool degenerate = !(total > Scalar(0));
    if (fallback)
        *fallback = degenerate;
    const Vector normalized = degenerate ? uniform : Vector(masked / total);
    return normalized * (Scalar(1) - gamma) + uniform * gamma;
}

/// Weight update on a single expert: beta * w + eta * reward.
template <typename Scalar>
constexpr Scalar expert_update(Scalar weight, Scalar beta, Scalar eta, Scalar reward)
{
    return beta * weight + eta * reward;
}

/// Draws an index from a probability vector by inverse CDF. Entries with
/// probability 0 are never returned.
std::size_t draw_index(const Eigen::Ref<const Eigen::VectorXd>& probabilities, Rng& rng);

struct ParameterExperts {
    Eigen::VectorXd weights;
    ActiveMask active;
};

/// One expert vector per parameter of a space (the W_x sets).
class ExpertWeights {
public:
    ExpertWeights() = default;
    /// All weights 0, all values inactive.
    explicit ExpertWeights(const ActivitySpace& space);

    ParameterExperts& at(ParameterRef ref) { return experts_.at(ref.group).at(ref.parameter); }
    const ParameterExperts& at(ParameterRef ref) const { return experts_.at(ref.group).at(ref.parameter); }

    double weight(ValueRef ref) const { return at({ref.group, ref.parameter}).weights(index(ref)); }
    double& weight(ValueRef ref) { return at({ref.group, ref.parameter}).weights(index(ref)); }
    bool active(ValueRef ref) const { return at({ref.group, ref.parameter}).active(index(ref)); }
    void set_active(ValueRef ref, bool on) { at({ref.group, ref.parameter}).active(index(ref)) = on; }

    /// Concatenation of every weight vector in declaration order.
    Eigen::VectorXd flatten() const;
    /// Same order as flatten(), 1 for active values.
    ActiveMask flatten_active() const;

    bool operator==(const ExpertWeights& other) const;

private:
    static Eigen::Index index(ValueRef ref) { return static_cast<Eigen::Index>(ref.value); }

    std::vector<std::vector<ParameterExperts>> experts_;
};

/// A^S: the space together with its experts.
struct StochasticActivitySpace {
    std::shared_ptr<const ActivitySpace> space;
    ExpertWeights weights;
};

struct SamplingStats {
    // times a parameter had only zero-weight active values
    std::size_t uniform_fallbacks = 0;
};

/// Draws one value per parameter of `group`, parameters in declared order.
GroupInstantiation sample_values(const ActivitySpace& space, std::size_t group, const ExpertWeights& weights,
                                 const BanditConfig& config, Rng& rng, SamplingStats* stats = nullptr);

/// Samples the primary group, then every group unlocked by a drawn value.
Activity gen_activity(const StochasticActivitySpace& sas, const BanditConfig& config, Rng& rng,
                      SamplingStats* stats = nullptr);

/// Applies the weight update with reward max(r_x, 0) to every selected value of each
/// instantiation h_x. `rewards` is aligned with activity.instantiations;
/// throws std::invalid_argument on a size mismatch.
void update_weights(ExpertWeights& weights, const Activity& activity, std::span<const double> rewards,
                    const BanditConfig& config);

} // namespace zpdes
