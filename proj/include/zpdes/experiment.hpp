#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zpdes/bandit.hpp"
#include "zpdes/kidlearn.hpp"
#include "zpdes/learner.hpp"
#include "zpdes/metrics.hpp"
#include "zpdes/predef_policy.hpp"
#include "zpdes/zpdes_policy.hpp"

namespace zpdes {

inline constexpr std::string_view kVersion = "zpdes 1.0.0";

enum class Condition { predef, pco, zpdes, zco };

std::string_view condition_name(Condition c);
std::optional<Condition> parse_condition(std::string_view name);
/// pco and zco offer an object choice.
bool offers_choice(Condition c);
/// zpdes and zco sequence with ZPDES, the others with Predef.
bool uses_zpdes(Condition c);

struct ExperimentConfig {
    std::vector<Condition> conditions{Condition::predef, Condition::pco, Condition::zpdes, Condition::zco};
    std::size_t steps = 100;
    std::optional<std::uint64_t> seed;
    std::string space = "builtin:kidlearn_space.json";
    std::string predef = "builtin:predef_sequence.json";
    std::string catalog = "builtin:catalog.json";
    std::string denominations = "builtin:denominations.json";
    PopulationSpec population;
    BanditConfig bandit;
    nlohmann::json zpd = nlohmann::json::object(); // merged over the space's zpd section
    MasteryGate mastery;
    std::vector<std::size_t> chronograph_times{1, 8, 20, 50};
    bool write_traces = true;
    bool write_weights = false;

    /// Throws ConfigError: no condition, duplicate condition, zero steps,
    /// missing seed, invalid population or bandit values.
    void validate() const;
};

/// Missing keys keep their defaults. `population` may be an inline object
/// or a source string ("builtin:population.json" or a path).
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
/// Fully resolved form, suitable for a manifest.
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// Shared read-only resources of an experiment.
struct Environment {
    std::shared_ptr<const ActivitySpace> space;
    ZpdRules rules;
    std::shared_ptr<const PredefSequence> sequence;
    std::shared_ptr<const kidlearn::ContentGenerator> content;
};

Environment build_environment(const ExperimentConfig& config);

/// Seeds of one learner. learner = derive_seed(master, "learner/<index>"),
/// each stream = derive_seed(learner, "<stream name>").
struct LearnerSeeds {
    std::uint64_t learner = 0;
    std::uint64_t profile = 0;
    std::uint64_t policy = 0;
    std::uint64_t content = 0;
    std::uint64_t choice = 0;
    std::uint64_t response = 0;
};

LearnerSeeds learner_seeds(std::uint64_t master, std::size_t index);

struct StepRecord {
    std::size_t t = 0;
    Activity activity;
    kidlearn::ExerciseContent content;
    int chosen_option = -1; // -1 without choice
    bool solved = false;
    int trials = 0;
    PolicyFeedback feedback;
    Eigen::VectorXd weights; // only when weights are recorded
};

struct SessionResult {
    std::size_t learner = 0;
    LearnerSeeds seeds;
    LearnerProfile initial_profile;
    LearnerProfile final_profile;
    std::vector<StepRecord> steps;
    SessionTrace trace;
    std::optional<std::string> error;
};

/// One learner under one condition for `config.steps` activities. Errors in
/// sub-operations end the session and are stored in `error`.
SessionResult run_session(const Environment& env, const ExperimentConfig& config, Condition condition,
                          std::size_t learner, bool record_weights);

struct CohortResult {
    Condition condition = Condition::zpdes;
    std::vector<SessionResult> sessions;
};

struct ExperimentResult {
    std::vector<CohortResult> cohorts;
    std::size_t failures = 0;
};

/// All sessions of all conditions on `threads` workers (0 = hardware
/// concurrency). The result does not depend on the thread count.
ExperimentResult run_experiment(const Environment& env, const ExperimentConfig& config, std::size_t threads = 0);

/// learners x steps score matrices of a cohort; failed sessions are skipped.
ConditionScores cohort_scores(const CohortResult& cohort, std::size_t steps);

/// Writes traces, profiles, summaries, chronographs, optional weights and
/// manifest.json under `out`.
void write_outputs(const Environment& env, const ExperimentConfig& config, const ExperimentResult& result, const std::filesystem::path& out);

/// Recomputes summaries and chronographs from a traces/<condition>/ tree.
/// Returns the number of traces read.
std::size_t report_from_traces(const std::filesystem::path& traces, const std::filesystem::path& out,
                               const std::vector<std::size_t>& chronograph_times);

/// Reads a trace file back into a SessionTrace.
SessionTrace read_trace_csv(const std::filesystem::path& path);

/// FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

} // namespace zpdes
