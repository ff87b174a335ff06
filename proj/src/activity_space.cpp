#include "zpdes/activity_space.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace zpdes {

namespace {

std::vector<std::string_view> split_path(std::string_view path)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto slash = path.find('/', start);
        if (slash == std::string_view::npos) {
            parts.push_back(path.substr(start));
            break;
        }
        parts.push_back(path.substr(start, slash - start));
        start = slash + 1;
    }
    return parts;
}

} // namespace

ActivitySpace::ActivitySpace(std::vector<ParameterGroup> groups, std::string primary_group)
    : groups_(std::move(groups))
    , primary_group_(std::move(primary_group))
{
    link();
}

void ActivitySpace::link()
{
    dependent_.clear();
    dependent_.resize(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        const auto& params = groups_[g].parameters;
        dependent_[g].resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            for (const auto& v : params[p].values) {
                dependent_[g][p].push_back(v.dependent_group ? find_group(*v.dependent_group) : std::nullopt);
            }
        }
    }
}

const Parameter& ActivitySpace::parameter(ParameterRef ref) const
{
    return groups_.at(ref.group).parameters.at(ref.parameter);
}

const ParameterValue& ActivitySpace::value(ValueRef ref) const
{
    return groups_.at(ref.group).parameters.at(ref.parameter).values.at(ref.value);
}

std::optional<std::size_t> ActivitySpace::find_group(std::string_view id) const
{
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        if (groups_[g].id == id)
            return g;
    }
    return std::nullopt;
}

std::optional<ParameterRef> ActivitySpace::find_parameter(std::string_view group, std::string_view parameter) const
{
    const auto g = find_group(group);
    if (!g)
        return std::nullopt;
    const auto& params = groups_[*g].parameters;
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (params[p].id == parameter)
            return ParameterRef{*g, p};
    }
    return std::nullopt;
}

std::optional<ValueRef> ActivitySpace::find_value(std::string_view group, std::string_view parameter,
                                                  std::string_view value) const
{
    const auto p = find_parameter(group, parameter);
    if (!p)
        return std::nullopt;
    const auto& values = this->parameter(*p).values;
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (values[v].id == value)
            return ValueRef{p->group, p->parameter, v};
    }
    return std::nullopt;
}

ValueRef ActivitySpace::resolve_value(std::string_view path) const
{
    const auto parts = split_path(path);
    if (parts.size() != 3)
        throw ConfigError("value path must be group/parameter/value: " + std::string(path));
    const auto ref = find_value(parts[0], parts[1], parts[2]);
    if (!ref)
        throw ConfigError("unknown value: " + std::string(path));
    return *ref;
}

ParameterRef ActivitySpace::resolve_parameter(std::string_view path) const
{
    const auto parts = split_path(path);
    if (parts.size() != 2)
        throw ConfigError("parameter path must be group/parameter: " + std::string(path));
    const auto ref = find_parameter(parts[0], parts[1]);
    if (!ref)
        throw ConfigError("unknown parameter: " + std::string(path));
    return *ref;
}

std::string ActivitySpace::path_of(ValueRef ref) const
{
    return path_of(ParameterRef{ref.group, ref.parameter}) + "/" + value(ref).id;
}

std::string ActivitySpace::path_of(ParameterRef ref) const
{
    return groups_.at(ref.group).id + "/" + parameter(ref).id;
}

std::size_t ActivitySpace::primary_index() const
{
    const auto g = find_group(primary_group_);
    if (!g)
        throw ConfigError("primary group not found: " + primary_group_);
    return *g;
}

std::optional<std::size_t> ActivitySpace::dependent_index(ValueRef ref) const
{
    return dependent_.at(ref.group).at(ref.parameter).at(ref.value);
}

std::size_t ActivitySpace::value_count() const
{
    std::size_t n = 0;
    for (const auto& g : groups_)
        for (const auto& p : g.parameters)
            n += p.values.size();
    return n;
}

std::size_t ActivitySpace::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& g : groups_)
        n += g.parameters.size();
    return n;
}

std::vector<ValueRef> ActivitySpace::all_values() const
{
    std::vector<ValueRef> refs;
    for (std::size_t g = 0; g < groups_.size(); ++g)
        for (std::size_t p = 0; p < groups_[g].parameters.size(); ++p)
            for (std::size_t v = 0; v < groups_[g].parameters[p].values.size(); ++v)
                refs.push_back({g, p, v});
    return refs;
}

std::vector<ParameterRef> ActivitySpace::all_parameters() const
{
    std::vector<ParameterRef> refs;
    for (std::size_t g = 0; g < groups_.size(); ++g)
        for (std::size_t p = 0; p < groups_[g].parameters.size(); ++p)
            refs.push_back({g, p});
    return refs;
}

bool ActivitySpace::operator==(const ActivitySpace& other) const
{
    if (primary_group_ != other.primary_group_ || groups_.size() != other.groups_.size())
        return false;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        const auto& a = groups_[g];
        const auto& b = other.groups_[g];
        if (a.id != b.id || a.unused != b.unused || a.parameters.size() != b.parameters.size())
            return false;
        for (std::size_t p = 0; p < a.parameters.size(); ++p) {
            const auto& pa = a.parameters[p];
            const auto& pb = b.parameters[p];
            if (pa.id != pb.id || pa.ordered_progression != pb.ordered_progression
                || pa.values.size() != pb.values.size())
                return false;
            for (std::size_t v = 0; v < pa.values.size(); ++v) {
                const auto& va = pa.values[v];
                const auto& vb = pb.values[v];
                if (va.id != vb.id || va.label != vb.label || va.dependent_group != vb.dependent_group)
                    return false;
            }
        }
    }
    return true;
}

ValidationReport validate_space(const ActivitySpace& space)
{
    ValidationReport report;
    auto& out = report.violations;
    const auto& groups = space.groups();

    if (groups.empty()) {
        out.push_back("space has no groups");
        return report;
    }

    std::set<std::string> group_ids;
    for (const auto& g : groups) {
        if (!group_ids.insert(g.id).second)
            out.push_back("duplicate group id: " + g.id);
        if (g.parameters.empty())
            out.push_back("group has no parameters: " + g.id);
        std::set<std::string> param_ids;
        for (const auto& p : g.parameters) {
            if (!param_ids.insert(p.id).second)
                out.push_back("duplicate parameter id in group " + g.id + ": " + p.id);
            if (p.values.empty())
                out.push_back("parameter has no values: " + g.id + "/" + p.id);
            std::set<std::string> value_ids;
            for (const auto& v : p.values) {
                if (!value_ids.insert(v.id).second)
                    out.push_back("duplicate value id in " + g.id + "/" + p.id + ": " + v.id);
                if (v.dependent_group && !space.find_group(*v.dependent_group))
                    out.push_back("dangling dependent_group " + *v.dependent_group + " on " + g.id + "/"
                                  + p.id + "/" + v.id);
            }
        }
    }

    const auto primary = space.find_group(space.primary_group_id());
    if (!primary) {
        out.push_back("primary group not found: " + space.primary_group_id());
        return report;
    }

    // group -> group edges
    std::vector<std::set<std::size_t>> edges(groups.size());
    for (const auto ref : space.all_values()) {
        if (const auto dep = space.dependent_index(ref))
            edges[ref.group].insert(*dep);
    }

    // cycle detection by DFS colouring over all groups
    std::vector<int> colour(groups.size(), 0);
    bool cyclic = false;
    std::function<void(std::size_t)> visit = [&](std::size_t g) {
        colour[g] = 1;
        for (const auto next : edges[g]) {
            if (colour[next] == 1) {
                if (!cyclic)
                    out.push_back("dependency cycle through group " + groups[next].id);
                cyclic = true;
            } else if (colour[next] == 0) {
                visit(next);
            }
        }
        colour[g] = 2;
    };
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (colour[g] == 0)
            visit(g);
    }

    std::vector<bool> reached(groups.size(), false);
    std::deque<std::size_t> queue{*primary};
    reached[*primary] = true;
    while (!queue.empty()) {
        const auto g = queue.front();
        queue.pop_front();
        for (const auto next : edges[g]) {
            if (!reached[next]) {
                reached[next] = true;
                queue.push_back(next);
            }
        }
    }
    for (std::size_t g = 0; g < groups.size() && !cyclic; ++g) {
        if (g != *primary && edges[g].count(*primary) != 0)
            out.push_back("primary group is unlocked by group " + groups[g].id);
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (!reached[g] && !groups[g].unused)
            out.push_back("group unreachable from primary and not declared unused: " + groups[g].id);
    }
    return report;
}

bool Activity::uses(ValueRef ref) const
{
    const auto* h = find(ref.group);
    return h != nullptr && ref.parameter < h->selections.size() && h->selections[ref.parameter] == ref.value;
}

const GroupInstantiation* Activity::find(std::size_t group) const
{
    for (const auto& h : instantiations) {
        if (h.group == group)
            return &h;
    }
    return nullptr;
}

std::vector<ValueRef> Activity::selected_values() const
{
    std::vector<ValueRef> refs;
    for (const auto& h : instantiations)
        for (std::size_t p = 0; p < h.selections.size(); ++p)
            refs.push_back({h.group, p, h.selections[p]});
    return refs;
}

Activity assemble_activity(const ActivitySpace& space, const ValueSelector& selector)
{
    Activity activity;
    std::vector<bool> queued(space.groups().size(), false);
    std::deque<std::size_t> pending{space.primary_index()};
    queued[pending.front()] = true;

    while (!pending.empty()) {
        const auto g = pending.front();
        pending.pop_front();
        const auto& group = space.group(g);
        GroupInstantiation h{g, {}};
        h.selections.reserve(group.parameters.size());
        for (std::size_t p = 0; p < group.parameters.size(); ++p) {
            const auto v = selector(g, p);
            if (v >= group.parameters[p].values.size()) {
                throw std::invalid_argument("selector returned illegal value index " + std::to_string(v)
                                            + " for parameter " + space.path_of(ParameterRef{g, p}));
            }
            h.selections.push_back(v);
            if (const auto dep = space.dependent_index({g, p, v}); dep && !queued[*dep]) {
                queued[*dep] = true;
                pending.push_back(*dep);
            }
        }
        activity.instantiations.push_back(std::move(h));
    }
    return activity;
}

ValidationReport validate_activity(const ActivitySpace& space, const Activity& activity)
{
    ValidationReport report;
    auto& out = report.violations;
    if (activity.instantiations.empty()) {
        out.push_back("activity has no instantiations");
        return report;
    }
    if (activity.instantiations.front().group != space.primary_index())
        out.push_back("first instantiation is not the primary group");

    std::set<std::size_t> seen;
    std::set<std::size_t> unlocked{space.primary_index()};
    for (const auto& h : activity.instantiations) {
        if (h.group >= space.groups().size()) {
            out.push_back("instantiation of unknown group index " + std::to_string(h.group));
            continue;
        }
        const auto& group = space.group(h.group);
        if (!seen.insert(h.group).second)
            out.push_back("group instantiated twice: " + group.id);
        if (unlocked.count(h.group) == 0)
            out.push_back("group instantiated without being unlocked: " + group.id);
        if (h.selections.size() != group.parameters.size()) {
            out.push_back("group " + group.id + " has " + std::to_string(h.selections.size())
                          + " selections for " + std::to_string(group.parameters.size()) + " parameters");
            continue;
        }
        for (std::size_t p = 0; p < h.selections.size(); ++p) {
            if (h.selections[p] >= group.parameters[p].values.size()) {
                out.push_back("illegal value for " + space.path_of(ParameterRef{h.group, p}));
                continue;
            }
            if (const auto dep = space.dependent_index({h.group, p, h.selections[p]}))
                unlocked.insert(*dep);
        }
    }
    for (const auto g : unlocked) {
        if (seen.count(g) == 0)
            out.push_back("unlocked group not instantiated: " + space.group(g).id);
    }
    return report;
}

std::string describe(const ActivitySpace& space, const Activity& activity)
{
    std::ostringstream os;
    bool first_group = true;
    for (const auto& h : activity.instantiations) {
        if (!first_group)
            os << '|';
        first_group = false;
        const auto& group = space.group(h.group);
        os << group.id << ':';
        for (std::size_t p = 0; p < h.selections.size(); ++p) {
            if (p != 0)
                os << ',';
            os << group.parameters[p].id << '=' << group.parameters[p].values.at(h.selections[p]).id;
        }
    }
    return os.str();
}

} // namespace zpdes
