#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "zpdes/policy.hpp"

namespace zpdes {

struct PredefStep {
    std::string id;
    // raw table fields, e.g. {"type": "M", "difficulty": "1", "money": "Real"}
    std::map<std::string, std::string> fields;
    Activity activity;
};

/// Hand-designed linear sequence of fully specified activities.
struct PredefSequence {
    std::string name;
    std::vector<PredefStep> steps;
};

/// Parses a sequence file: `field_map` sends each table column onto a
/// parameter id and translates its cells into value ids; `neutral` marks a
/// cell that must map to nothing or to the translated neutral value. Every
/// step must resolve to a legal activity of `space`; throws ConfigError
/// otherwise.
PredefSequence parse_predef_sequence(const nlohmann::json& doc, const ActivitySpace& space);

struct MasteryGate {
    std::size_t window = 4;   // attempts considered
    std::size_t required = 3; // successes among them to advance

    void validate() const;
};

struct PredefState {
    std::size_t current_index = 0;
    std::deque<std::uint8_t> window; // outcomes on the current step, oldest first
};

/// Activity of the current step (the last step once the sequence is done).
const Activity& predef_next(const PredefState& state, const PredefSequence& sequence);

/// Appends an outcome and advances when the gate passes. Returns true on
/// advance. After the final step the index stays put.
bool predef_record(PredefState& state, const PredefSequence& sequence, bool outcome, const MasteryGate& gate = {});

class PredefPolicy : public CurriculumPolicy {
public:
    PredefPolicy(std::shared_ptr<const PredefSequence> sequence, MasteryGate gate = {});

    Activity next_activity() override;
    PolicyFeedback record_outcome(const Activity& activity, bool solved) override;

    const PredefState& state() const { return state_; }
    const PredefSequence& sequence() const { return *sequence_; }
    /// True once the last step has been passed at least once.
    bool completed() const { return completed_; }

private:
    std::shared_ptr<const PredefSequence> sequence_;
    MasteryGate gate_;
    PredefState state_;
    bool completed_ = false;
};

} // namespace zpdes
