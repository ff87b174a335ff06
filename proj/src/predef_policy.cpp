#include "zpdes/predef_policy.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace zpdes {

namespace {

struct ColumnMap {
    std::string parameter;
    std::map<std::string, std::string> values;
};

} // namespace

PredefSequence parse_predef_sequence(const nlohmann::json& doc, const ActivitySpace& space)
{
    PredefSequence seq;
    std::map<std::string, ColumnMap> columns;
    std::string neutral;
    try {
        seq.name = doc.value("name", std::string("predef"));
        neutral = doc.value("neutral", std::string("-"));
        for (const auto& [column, mapping] : doc.at("field_map").items()) {
            ColumnMap m;
            m.parameter = mapping.at("parameter").get<std::string>();
            m.values = mapping.at("values").get<std::map<std::string, std::string>>();
            columns.emplace(column, std::move(m));
        }
        for (const auto& entry : doc.at("steps")) {
            PredefStep step;
            step.id = entry.at("id").get<std::string>();
            for (const auto& [key, cell] : entry.items()) {
                if (key != "id")
                    step.fields[key] = cell.get<std::string>();
            }
            seq.steps.push_back(std::move(step));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("predef sequence: ") + e.what());
    }
    if (seq.steps.empty())
        throw ConfigError("predef sequence has no steps");

    for (auto& step : seq.steps) {
        std::map<std::string, std::string> assignment; // parameter id -> value id
        std::map<std::string, bool> optional;          // parameter id -> came from a neutral cell
        for (const auto& [column, cell] : step.fields) {
            const auto col = columns.find(column);
            if (col == columns.end())
                throw ConfigError("predef step " + step.id + ": unmapped column " + column);
            const auto val = col->second.values.find(cell);
            if (val == col->second.values.end())
                throw ConfigError("predef step " + step.id + ": no mapping for " + column + "=" + cell);
            assignment[col->second.parameter] = val->second;
            optional[col->second.parameter] = (cell == neutral);
        }

        std::set<std::string> consumed;
        step.activity = assemble_activity(space, [&](std::size_t g, std::size_t p) -> std::size_t {
            const auto& grp = space.group(g);
            const auto& param = grp.parameters[p];
            const auto it = assignment.find(param.id);
            if (it == assignment.end())
                throw ConfigError("predef step " + step.id + ": no value for " + grp.id + "/" + param.id);
            const auto ref = space.find_value(grp.id, param.id, it->second);
            if (!ref)
                throw ConfigError("predef step " + step.id + ": " + it->second + " is not a value of " + grp.id +
                                  "/" + param.id);
            consumed.insert(param.id);
            return ref->value;
        });
        for (const auto& [param, value] : assignment) {
            if (!consumed.contains(param) && !optional[param])
                throw ConfigError("predef step " + step.id + ": " + param + "=" + value +
                                  " does not apply to this activity");
        }
        if (const auto report = validate_activity(space, step.activity); !report)
            throw ConfigError("predef step " + step.id + ": " + report.violations.front());
    }
    return seq;
}

void MasteryGate::validate() const
{
    if (window == 0 || required == 0 || required > window)
        throw ConfigError("predef mastery gate needs 0 < required <= window");
}

const Activity& predef_next(const PredefState& state, const PredefSequence& sequence)
{
    return sequence.steps.at(std::min(state.current_index, sequence.steps.size() - 1)).activity;
}

bool predef_record(PredefState& state, const PredefSequence& sequence, bool outcome, const MasteryGate& gate)
{
    state.window.push_back(outcome ? 1 : 0);
    while (state.window.size() > gate.window)
        state.window.pop_front();
    if (state.window.size() < gate.window)
        return false;
    const auto successes = static_cast<std::size_t>(std::accumulate(state.window.begin(), state.window.end(), 0));
    if (successes < gate.required)
        return false;
    state.window.clear();
    if (state.current_index + 1 < sequence.steps.size())
        ++state.current_index;
    return true;
}

PredefPolicy::PredefPolicy(std::shared_ptr<const PredefSequence> sequence, MasteryGate gate)
    : sequence_(std::move(sequence))
    , gate_(gate)
{
    gate_.validate();
    if (!sequence_ || sequence_->steps.empty())
        throw ConfigError("predef policy needs a non-empty sequence");
}

Activity PredefPolicy::next_activity()
{
    return predef_next(state_, *sequence_);
}

PolicyFeedback PredefPolicy::record_outcome(const Activity&, bool solved)
{
    const bool last = state_.current_index + 1 == sequence_->steps.size();
    if (predef_record(state_, *sequence_, solved, gate_) && last)
        completed_ = true;
    PolicyFeedback fb;
    fb.sequence_index = static_cast<int>(state_.current_index);
    return fb;
}

} // namespace zpdes
