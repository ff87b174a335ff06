#include "zpdes/space_io.hpp"

#include <fstream>

namespace zpdes {

namespace {

const Json& require(const Json& node, const char* key, std::string_view where)
{
    if (!node.is_object() || !node.contains(key))
        throw ConfigError(std::string(where) + ": missing key '" + key + "'");
    return node.at(key);
}

std::string require_string(const Json& node, const char* key, std::string_view where)
{
    const auto& v = require(node, key, where);
    if (!v.is_string())
        throw ConfigError(std::string(where) + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

ActivitySpace parse_space(const Json& config)
{
    const auto primary = require_string(config, "primary_group", "space");
    const auto& groups_node = require(config, "groups", "space");
    if (!groups_node.is_array())
        throw ConfigError("space: 'groups' must be a list");

    std::vector<ParameterGroup> groups;
    for (const auto& g : groups_node) {
        ParameterGroup group;
        group.id = require_string(g, "id", "group");
        const std::string where = "group " + group.id;
        group.unused = g.value("unused", false);
        const auto& params = require(g, "parameters", where);
        if (!params.is_array())
            throw ConfigError(where + ": 'parameters' must be a list");
        for (const auto& p : params) {
            Parameter param;
            param.id = require_string(p, "id", where);
            const std::string pwhere = where + "/" + param.id;
            param.ordered_progression = p.value("ordered_progression", false);
            const auto& values = require(p, "values", pwhere);
            if (!values.is_array())
                throw ConfigError(pwhere + ": 'values' must be a list");
            for (const auto& v : values) {
                ParameterValue value;
                value.id = require_string(v, "id", pwhere);
                value.label = v.value("label", value.id);
                if (v.contains("dependent_group") && !v.at("dependent_group").is_null())
                    value.dependent_group = require_string(v, "dependent_group", pwhere);
                param.values.push_back(std::move(value));
            }
            group.parameters.push_back(std::move(param));
        }
        groups.push_back(std::move(group));
    }
    return ActivitySpace(std::move(groups), primary);
}

Json serialize_space(const ActivitySpace& space)
{
    Json groups = Json::array();
    for (const auto& g : space.groups()) {
        Json params = Json::array();
        for (const auto& p : g.parameters) {
            Json values = Json::array();
            for (const auto& v : p.values) {
                Json value{{"id", v.id}, {"label", v.label}};
                if (v.dependent_group)
                    value["dependent_group"] = *v.dependent_group;
                values.push_back(std::move(value));
            }
            params.push_back({{"id", p.id}, {"ordered_progression", p.ordered_progression}, {"values", values}});
        }
        Json group{{"id", g.id}, {"parameters", params}};
        if (g.unused)
            group["unused"] = true;
        groups.push_back(std::move(group));
    }
    return Json{{"primary_group", space.primary_group_id()}, {"groups", groups}};
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Json load_json_source(std::string_view source)
{
    constexpr std::string_view prefix = "builtin:";
    if (source.substr(0, prefix.size()) == prefix) {
        const auto name = source.substr(prefix.size());
        try {
            return Json::parse(data::embedded(name));
        } catch (const std::out_of_range&) {
            throw ConfigError("unknown builtin data: " + std::string(name));
        }
    }
    return read_json_file(std::filesystem::path(source));
}

} // namespace zpdes
