#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zpdes {

/// Raised for malformed configuration (spaces, rules, sequences, experiments).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParameterValue {
    std::string id;
    std::string label;
    std::optional<std::string> dependent_group;
};

struct Parameter {
    std::string id;
    std::vector<ParameterValue> values;
    // true when the value order is a difficulty ladder
    bool ordered_progression = false;
};

struct ParameterGroup {
    std::string id;
    std::vector<Parameter> parameters;
    // declared but never unlocked (allowed to be unreachable)
    bool unused = false;
};

/// Address of one value inside a space: group, parameter within the group,
/// value within the parameter.
struct ValueRef {
    std::size_t group = 0;
    std::size_t parameter = 0;
    std::size_t value = 0;

    auto operator<=>(const ValueRef&) const = default;
};

/// Address of one parameter inside a space.
struct ParameterRef {
    std::size_t group = 0;
    std::size_t parameter = 0;

    auto operator<=>(const ParameterRef&) const = default;
};

/// Hierarchical set of parameter groups. Value -> group links form a DAG
/// rooted at the primary group. Treat as immutable once `validate_space`
/// reports no violations; `link()` must have been called (parsers do it).
class ActivitySpace {
public:
    ActivitySpace() = default;
    ActivitySpace(std::vector<ParameterGroup> groups, std::string primary_group);

    const std::vector<ParameterGroup>& groups() const { return groups_; }
    const ParameterGroup& group(std::size_t index) const { return groups_.at(index); }
    const Parameter& parameter(ParameterRef ref) const;
    const ParameterValue& value(ValueRef ref) const;
    const std::string& primary_group_id() const { return primary_group_; }

    std::optional<std::size_t> find_group(std::string_view id) const;
    std::optional<ParameterRef> find_parameter(std::string_view group, std::string_view parameter) const;
    std::optional<ValueRef> find_value(std::string_view group, std::string_view parameter, std::string_view value) const;

    /// Resolves "group/parameter/value"; throws ConfigError when absent.
    ValueRef resolve_value(std::string_view path) const;
    /// Resolves "group/parameter"; throws ConfigError when absent.
    ParameterRef resolve_parameter(std::string_view path) const;

    std::string path_of(ValueRef ref) const;
    std::string path_of(ParameterRef ref) const;

    /// Index of the primary group. Throws ConfigError if it does not exist.
    std::size_t primary_index() const;
    /// Resolved dependent group of a value, if any and if it exists.
    std::optional<std::size_t> dependent_index(ValueRef ref) const;

    std::size_t value_count() const;
    std::size_t parameter_count() const;

    /// Enumerates every value / parameter in declaration order.
    std::vector<ValueRef> all_values() const;
    std::vector<ParameterRef> all_parameters() const;

    bool operator==(const ActivitySpace& other) const;

private:
    void link();

    std::vector<ParameterGroup> groups_;
    std::string primary_group_;
    // dependent_[group][parameter][value]
    std::vector<std::vector<std::vector<std::optional<std::size_t>>>> dependent_;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
};

ValidationReport validate_space(const ActivitySpace& space);

/// h_x: a choice of one value per parameter of a group.
struct GroupInstantiation {
    std::size_t group = 0;
    std::vector<std::size_t> selections;

    bool operator==(const GroupInstantiation&) const = default;
};

/// e = {h_1, ..., h_ne}; first instantiation is the primary group.
struct Activity {
    std::vector<GroupInstantiation> instantiations;

    bool operator==(const Activity&) const = default;

    bool uses(ValueRef ref) const;
    const GroupInstantiation* find(std::size_t group) const;
    std::vector<ValueRef> selected_values() const;
};

/// Returns the value index for the given parameter of the given group.
using ValueSelector = std::function<std::size_t(std::size_t group, std::size_t parameter)>;

/// Instantiates the primary group, then each group unlocked by a selected
/// value, in first-unlock order. A group is instantiated at most once.
/// Throws std::invalid_argument naming the parameter when the selector
/// returns an out-of-range value.
Activity assemble_activity(const ActivitySpace& space, const ValueSelector& selector);

/// Checks every Activity invariant against the space.
ValidationReport validate_activity(const ActivitySpace& space, const Activity& activity);

/// Stable one-line rendering, e.g. "exercise_type:type=M|level_M:level=1".
std::string describe(const ActivitySpace& space, const Activity& activity);

} // namespace zpdes
