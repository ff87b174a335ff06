#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>

#include <json.hpp>

#include "zpdes/kidlearn.hpp"
#include "zpdes/rng.hpp"

namespace zpdes {

using PerType = std::array<double, 4>; // indexed by kidlearn::ExerciseType

/// Simulated student. Competence is a real level per exercise type.
struct LearnerProfile {
    PerType competence{};
    PerType learn_rate{};
    PerType max_competence{};
    double guess = 0.1;
    double slip = 0.05;
    double steepness = 2.5;
    double zpd_band = 1.5;    // half-width of the band where learning happens
    double carry_offset = 0.5; // difficulty added by carried numbers
    std::map<std::string, double> object_preference;
    // success bonus per unit affinity of the chosen objects; 0 = off
    double engagement_gain = 0.0;

    /// Throws ConfigError on guess/slip outside [0,1], guess + slip >= 1,
    /// non-positive steepness, or competence above its cap.
    void validate() const;
};

nlohmann::json profile_to_json(const LearnerProfile& profile);
LearnerProfile profile_from_json(const nlohmann::json& doc);

/// guess + (1 - guess - slip) * sigmoid(k (c - level + 0.5) - offset), with
/// the carry offset applied when carried numbers are present and
/// `engagement` added inside the sigmoid.
double success_probability(const LearnerProfile& profile, const kidlearn::ActivityFeatures& activity,
                           double engagement = 0.0);

/// One trial: Bernoulli(success_probability).
bool respond(const LearnerProfile& profile, const kidlearn::ActivityFeatures& activity, Rng& rng,
             double engagement = 0.0);

/// On success within the band |level - c| <= z, c grows by the learn rate up
/// to the cap. Otherwise nothing changes.
void learn(LearnerProfile& profile, const kidlearn::ActivityFeatures& activity, bool outcome);

/// Sum of the learner's affinities for the objects of an option.
double option_affinity(const LearnerProfile& profile, const kidlearn::ObjectOption& option,
                       const kidlearn::Catalog& catalog);

/// Softmax over option affinities (uniform without preferences).
std::size_t choose_object(const LearnerProfile& profile, const kidlearn::ObjectChoice& choice,
                          const kidlearn::Catalog& catalog, Rng& rng);

struct ExerciseResult {
    bool solved = false;
    int trials = 0;
    std::vector<int> last_submission;
};

/// Plays an exercise through its trials: a successful trial submits the
/// greedy composition of the target, a failed one overshoots by the smallest
/// denomination.
ExerciseResult play_exercise(const LearnerProfile& profile, const kidlearn::ExerciseContent& content, Rng& rng,
                             double engagement = 0.0);

/// Closed interval for a uniform draw; lo == hi is a constant.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct PopulationSpec {
    std::size_t cohort_size = 60;
    std::array<Range, 4> competence{{{0.0, 1.0}, {0.0, 0.5}, {0.0, 0.5}, {0.0, 0.5}}};
    std::array<Range, 4> learn_rate{{{0.05, 0.25}, {0.05, 0.25}, {0.05, 0.25}, {0.05, 0.25}}};
    std::array<Range, 4> max_competence{{{2.0, 7.0}, {1.5, 5.0}, {1.5, 5.0}, {1.5, 5.0}}};
    Range guess{0.05, 0.15};
    Range slip{0.02, 0.1};
    Range steepness{2.5, 2.5};
    Range zpd_band{1.5, 1.5};
    Range carry_offset{0.5, 0.5};
    double affinity_sd = 1.0; // object preferences ~ N(0, sd); 0 = none
    double engagement_gain = 0.0;

    void validate() const;
};

/// Each field is a number (constant), a [lo, hi] pair, or for per-type
/// fields an object keyed by type id. Missing fields keep their defaults.
PopulationSpec parse_population(const nlohmann::json& doc);
nlohmann::json serialize_population(const PopulationSpec& population);

LearnerProfile sample_profile(const PopulationSpec& population, const kidlearn::Catalog& catalog, Rng& rng);

} // namespace zpdes
