#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "zpdes/bandit.hpp"
#include "zpdes/policy.hpp"

namespace zpdes {

/// Learning progress on one window: mean of the newest d/2 outcomes minus the mean of
/// the d/2 before them. `outcomes` is oldest first; only the last d entries
/// are used. Returns 0 while fewer than d outcomes exist.
double learning_progress(std::span<const std::uint8_t> outcomes, std::size_t d);

struct Requirement {
    ValueRef prerequisite;
    double threshold = 0.0; // success rate the prerequisite must reach
};

/// ZPD rules: thresholds, prerequisite edges and initial active sets.
struct ZpdRules {
    double lambda_zpd = 0.75;   // expansion threshold
    double lambda_deact = 0.9;  // deactivation threshold
    std::size_t zpd_window = 4; // outcomes for a parameter's recent success rate
    std::size_t reward_window = 4; // learning-progress window d, must be even
    double upgrade_boost = 1.5;
    bool quality_upgrade = true;
    std::map<ValueRef, std::vector<Requirement>> requirements;
    // ordered parameters only; missing entries default to the first value
    std::map<ParameterRef, std::vector<std::size_t>> initial_active;

    /// Throws ConfigError on out-of-range thresholds, odd d, cyclic or
    /// dangling requirements, empty initial sets.
    void validate(const ActivitySpace& space) const;
};

/// Parses the `zpd` section of a space config.
ZpdRules parse_zpd_rules(const nlohmann::json& section, const ActivitySpace& space);
nlohmann::json serialize_zpd_rules(const ZpdRules& rules, const ActivitySpace& space);

/// Per-value FIFO of the last `capacity` binary outcomes, with step stamps.
class OutcomeHistory {
public:
    OutcomeHistory() = default;
    OutcomeHistory(const ActivitySpace& space, std::size_t capacity);

    void record(ValueRef ref, bool outcome, std::size_t t);
    /// Records the outcome for every value selected in the activity.
    void record(const Activity& activity, bool outcome, std::size_t t);

    std::vector<std::uint8_t> outcomes(ValueRef ref) const;
    std::vector<std::size_t> stamps(ValueRef ref) const;
    std::size_t size(ValueRef ref) const { return slot(ref).outcomes.size(); }
    bool full(ValueRef ref) const { return size(ref) >= capacity_; }
    /// Mean of the stored outcomes, 0 when empty.
    double success_rate(ValueRef ref) const;
    std::size_t capacity() const { return capacity_; }

private:
    struct Slot {
        std::deque<std::uint8_t> outcomes;
        std::deque<std::size_t> stamps;
    };
    const Slot& slot(ValueRef ref) const { return slots_.at(ref.group).at(ref.parameter).at(ref.value); }
    Slot& slot(ValueRef ref) { return slots_.at(ref.group).at(ref.parameter).at(ref.value); }

    std::size_t capacity_ = 0;
    std::vector<std::vector<std::vector<Slot>>> slots_;
};

/// One reward per instantiation of the activity. A group's reward is
/// the mean learning progress of its selected values' histories.
std::vector<double> compute_reward(const Activity& activity, const OutcomeHistory& histories, std::size_t d);

/// Mutable part of the ZPD beyond the active flags kept in ExpertWeights.
struct ZpdState {
    // ever_activated[group][parameter][value]
    std::vector<std::vector<std::vector<bool>>> ever_activated;
    // recent outcomes of the activities that instantiated each parameter
    std::vector<std::vector<std::deque<std::uint8_t>>> recent;

    bool was_activated(ValueRef ref) const { return ever_activated.at(ref.group).at(ref.parameter).at(ref.value); }
    /// Success rate over a parameter's recent window, 0 when empty.
    double recent_success(ParameterRef ref) const;
    /// Appends the outcome to the window of every parameter the activity used.
    void record(const Activity& activity, bool outcome, std::size_t window);
};

struct ZpdUpdate {
    std::vector<ValueRef> activated;
    std::vector<ValueRef> deactivated;
    std::vector<ValueRef> boosted;
    std::vector<ValueRef> blocked; // candidates held back by requirements
};

/// Uniform weights over the initial active values of every parameter.
void initialize_zpd(const ActivitySpace& space, const ZpdRules& rules, ExpertWeights& weights, ZpdState& state);

/// Groups reachable from the primary group through active values.
std::vector<std::size_t> reachable_groups(const ActivitySpace& space, const ExpertWeights& weights);

/// Requirements of `value` whose prerequisite is below threshold (or has not
/// filled its history window yet).
std::vector<Requirement> unmet_requirements(const ZpdRules& rules, const OutcomeHistory& histories, ValueRef value);

/// Applies the ZPD rules after an answered activity: expansion of ordered
/// parameters whose recent success reaches lambda_zpd (one ladder step per
/// trigger), requirement gating with quality upgrade of blocking
/// prerequisites, and deactivation of mastered values below the highest
/// active value of their ladder.
ZpdUpdate update_zpd(const ActivitySpace& space, const ZpdRules& rules, const OutcomeHistory& histories,
                     ZpdState& state, ExpertWeights& weights);

struct ZpdesConfig {
    BanditConfig bandit;
    ZpdRules rules;
};

struct ZpdesStepRecord {
    std::size_t step = 0;
    Activity activity;
    bool outcome = false;
    std::vector<double> rewards;
    ZpdUpdate zpd;
    Eigen::VectorXd weights;
    ActiveMask active;
};

/// ZPDES sequencing for one learner session.
class ZpdesPolicy : public CurriculumPolicy {
public:
    ZpdesPolicy(std::shared_ptr<const ActivitySpace> space, ZpdesConfig config, std::uint64_t seed);

    Activity next_activity() override;
    PolicyFeedback record_outcome(const Activity& activity, bool solved) override;
    Eigen::VectorXd weight_snapshot() const override { return sas_.weights.flatten(); }

    /// gen_activity -> answer -> compute_reward -> update_weights -> update_zpd.
    ZpdesStepRecord step(const std::function<bool(const Activity&)>& answer);

    const ActivitySpace& space() const { return *sas_.space; }
    const ExpertWeights& weights() const { return sas_.weights; }
    ExpertWeights& weights() { return sas_.weights; }
    const ZpdState& state() const { return state_; }
    const OutcomeHistory& histories() const { return histories_; }
    const ZpdesConfig& config() const { return config_; }
    const SamplingStats& sampling_stats() const { return stats_; }
    std::size_t steps_taken() const { return step_; }

private:
    struct Update {
        std::vector<double> rewards;
        ZpdUpdate zpd;
    };
    Update apply(const Activity& activity, bool solved);

    StochasticActivitySpace sas_;
    ZpdesConfig config_;
    ZpdState state_;
    OutcomeHistory histories_;
    Rng rng_;
    SamplingStats stats_;
    std::size_t step_ = 0;
};

} // namespace zpdes
