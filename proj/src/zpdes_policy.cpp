#include "zpdes/zpdes_policy.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <string>

#include "zpdes/space_io.hpp"

namespace zpdes {

double learning_progress(std::span<const std::uint8_t> outcomes, std::size_t d)
{
    if (d < 2 || outcomes.size() < d)
        return 0.0;
    const auto window = outcomes.last(d);
    const std::size_t half = d / 2;
    const double older = std::accumulate(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(d - half), 0.0);
    const double newer = std::accumulate(window.begin() + static_cast<std::ptrdiff_t>(d - half), window.end(), 0.0);
    return newer / static_cast<double>(half) - older / static_cast<double>(d - half);
}

void ZpdRules::validate(const ActivitySpace& space) const
{
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(lambda_zpd))
        throw ConfigError("zpd.lambda_zpd must be in [0, 1]");
    if (!in_unit(lambda_deact))
        throw ConfigError("zpd.lambda_deact must be in [0, 1]");
    if (zpd_window == 0)
        throw ConfigError("zpd.zpd_window must be >= 1");
    if (reward_window < 2 || reward_window % 2 != 0)
        throw ConfigError("zpd.reward_window must be even and >= 2, got " + std::to_string(reward_window));
    if (!(upgrade_boost > 1.0))
        throw ConfigError("zpd.upgrade_boost must be > 1");

    for (const auto& [value, reqs] : requirements) {
        if (!space.parameter({value.group, value.parameter}).ordered_progression)
            throw ConfigError("requirement on always-active value " + space.path_of(value));
        for (const auto& r : reqs) {
            if (!in_unit(r.threshold))
                throw ConfigError("requirement threshold out of [0, 1] on " + space.path_of(value));
            if (r.prerequisite == value)
                throw ConfigError("value requires itself: " + space.path_of(value));
        }
    }

    // requirement graph must be acyclic
    std::map<ValueRef, int> colour;
    std::function<void(ValueRef)> visit = [&](ValueRef v) {
        colour[v] = 1;
        if (const auto it = requirements.find(v); it != requirements.end()) {
            for (const auto& r : it->second) {
                const int c = colour[r.prerequisite];
                if (c == 1)
                    throw ConfigError("requirement cycle through " + space.path_of(r.prerequisite));
                if (c == 0)
                    visit(r.prerequisite);
            }
        }
        colour[v] = 2;
    };
    for (const auto& entry : requirements) {
        if (colour[entry.first] == 0)
            visit(entry.first);
    }

    for (const auto& [param, values] : initial_active) {
        const auto& p = space.parameter(param);
        if (!p.ordered_progression)
            throw ConfigError("initial_active given for unordered parameter " + space.path_of(param));
        if (values.empty())
            throw ConfigError("initial_active is empty for " + space.path_of(param));
        for (const auto v : values) {
            if (v >= p.values.size())
                throw ConfigError("initial_active index out of range for " + space.path_of(param));
        }
    }
}

ZpdRules parse_zpd_rules(const nlohmann::json& section, const ActivitySpace& space)
{
    ZpdRules rules;
    if (section.is_null())
        return rules;
    if (!section.is_object())
        throw ConfigError("zpd section must be an object");
    try {
        rules.lambda_zpd = section.value("lambda_zpd", rules.lambda_zpd);
        rules.lambda_deact = section.value("lambda_deact", rules.lambda_deact);
        rules.zpd_window = section.value("zpd_window", rules.zpd_window);
        rules.reward_window = section.value("reward_window", rules.reward_window);
        rules.upgrade_boost = section.value("upgrade_boost", rules.upgrade_boost);
        rules.quality_upgrade = section.value("quality_upgrade", rules.quality_upgrade);

        if (section.contains("initial_active")) {
            for (const auto& [path, ids] : section.at("initial_active").items()) {
                const auto param = space.resolve_parameter(path);
                std::vector<std::size_t> indices;
                for (const auto& id : ids) {
                    const auto ref = space.find_value(space.group(param.group).id, space.parameter(param).id,
                                                      id.get<std::string>());
                    if (!ref)
                        throw ConfigError("initial_active: unknown value " + id.get<std::string>() + " in " + path);
                    indices.push_back(ref->value);
                }
                rules.initial_active[param] = std::move(indices);
            }
        }
        if (section.contains("requirements")) {
            for (const auto& entry : section.at("requirements")) {
                const auto value = space.resolve_value(entry.at("value").get<std::string>());
                auto& list = rules.requirements[value];
                for (const auto& r : entry.at("requires")) {
                    list.push_back({space.resolve_value(r.at("value").get<std::string>()),
                                    r.at("threshold").get<double>()});
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("zpd section: ") + e.what());
    }
    rules.validate(space);
    return rules;
}

nlohmann::json serialize_zpd_rules(const ZpdRules& rules, const ActivitySpace& space)
{
    nlohmann::json initial = nlohmann::json::object();
    for (const auto& [param, values] : rules.initial_active) {
        nlohmann::json ids = nlohmann::json::array();
        for (const auto v : values)
            ids.push_back(space.parameter(param).values.at(v).id);
        initial[space.path_of(param)] = ids;
    }
    nlohmann::json reqs = nlohmann::json::array();
    for (const auto& [value, list] : rules.requirements) {
        nlohmann::json needs = nlohmann::json::array();
        for (const auto& r : list)
            needs.push_back({{"value", space.path_of(r.prerequisite)}, {"threshold", r.threshold}});
        reqs.push_back({{"value", space.path_of(value)}, {"requires", needs}});
    }
    return {{"lambda_zpd", rules.lambda_zpd},
            {"lambda_deact", rules.lambda_deact},
            {"zpd_window", rules.zpd_window},
            {"reward_window", rules.reward_window},
            {"upgrade_boost", rules.upgrade_boost},
            {"quality_upgrade", rules.quality_upgrade},
            {"initial_active", initial},
            {"requirements", reqs}};
}

OutcomeHistory::OutcomeHistory(const ActivitySpace& space, std::size_t capacity)
    : capacity_(capacity)
{
    slots_.resize(space.groups().size());
    for (std::size_t g = 0; g < space.groups().size(); ++g) {
        for (const auto& p : space.group(g).parameters)
            slots_[g].emplace_back(p.values.size());
    }
}

void OutcomeHistory::record(ValueRef ref, bool outcome, std::size_t t)
{
    auto& s = slot(ref);
    s.outcomes.push_back(outcome ? 1 : 0);
    s.stamps.push_back(t);
    while (s.outcomes.size() > capacity_) {
        s.outcomes.pop_front();
        s.stamps.pop_front();
    }
}

void OutcomeHistory::record(const Activity& activity, bool outcome, std::size_t t)
{
    for (const auto ref : activity.selected_values())
        record(ref, outcome, t);
}

std::vector<std::uint8_t> OutcomeHistory::outcomes(ValueRef ref) const
{
    const auto& s = slot(ref);
    return {s.outcomes.begin(), s.outcomes.end()};
}

std::vector<std::size_t> OutcomeHistory::stamps(ValueRef ref) const
{
    const auto& s = slot(ref);
    return {s.stamps.begin(), s.stamps.end()};
}

double OutcomeHistory::success_rate(ValueRef ref) const
{
    const auto& s = slot(ref);
    if (s.outcomes.empty())
        return 0.0;
    return std::accumulate(s.outcomes.begin(), s.outcomes.end(), 0.0) / static_cast<double>(s.outcomes.size());
}

std::vector<double> compute_reward(const Activity& activity, const OutcomeHistory& histories, std::size_t d)
{
    std::vector<double> rewards;
    rewards.reserve(activity.instantiations.size());
    for (const auto& h : activity.instantiations) {
        double total = 0.0;
        for (std::size_t p = 0; p < h.selections.size(); ++p) {
            const auto window = histories.outcomes({h.group, p, h.selections[p]});
            total += learning_progress(window, d);
        }
        rewards.push_back(h.selections.empty() ? 0.0 : total / static_cast<double>(h.selections.size()));
    }
    return rewards;
}

double ZpdState::recent_success(ParameterRef ref) const
{
    const auto& w = recent.at(ref.group).at(ref.parameter);
    if (w.empty())
        return 0.0;
    return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

void ZpdState::record(const Activity& activity, bool outcome, std::size_t window)
{
    for (const auto& h : activity.instantiations) {
        for (std::size_t p = 0; p < h.selections.size(); ++p) {
            auto& w = recent.at(h.group).at(p);
            w.push_back(outcome ? 1 : 0);
            while (w.size() > window)
                w.pop_front();
        }
    }
}

void initialize_zpd(const ActivitySpace& space, const ZpdRules& rules, ExpertWeights& weights, ZpdState& state)
{
    weights = ExpertWeights(space);
    state.ever_activated.assign(space.groups().size(), {});
    state.recent.assign(space.groups().size(), {});
    for (std::size_t g = 0; g < space.groups().size(); ++g) {
        const auto& params = space.group(g).parameters;
        state.recent[g].resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            const auto n = params[p].values.size();
            std::vector<bool> on(n, !params[p].ordered_progression);
            if (params[p].ordered_progression) {
                if (const auto it = rules.initial_active.find({g, p}); it != rules.initial_active.end()) {
                    for (const auto v : it->second)
                        on.at(v) = true;
                } else {
                    on.at(0) = true;
                }
            }
            const auto count = static_cast<double>(std::count(on.begin(), on.end(), true));
            auto& experts = weights.at(ParameterRef{g, p});
            for (std::size_t v = 0; v < n; ++v) {
                experts.active(static_cast<Eigen::Index>(v)) = on[v];
                experts.weights(static_cast<Eigen::Index>(v)) = on[v] ? 1.0 / count : 0.0;
            }
            state.ever_activated[g].push_back(std::move(on));
        }
    }
}

std::vector<std::size_t> reachable_groups(const ActivitySpace& space, const ExpertWeights& weights)
{
    std::vector<std::size_t> order{space.primary_index()};
    std::vector<bool> seen(space.groups().size(), false);
    seen[order.front()] = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto g = order[i];
        const auto& params = space.group(g).parameters;
        for (std::size_t p = 0; p < params.size(); ++p) {
            for (std::size_t v = 0; v < params[p].values.size(); ++v) {
                const ValueRef ref{g, p, v};
                if (!weights.active(ref))
                    continue;
                if (const auto dep = space.dependent_index(ref); dep && !seen[*dep]) {
                    seen[*dep] = true;
                    order.push_back(*dep);
                }
            }
        }
    }
    return order;
}

std::vector<Requirement> unmet_requirements(const ZpdRules& rules, const OutcomeHistory& histories, ValueRef value)
{
    std::vector<Requirement> unmet;
    const auto it = rules.requirements.find(value);
    if (it == rules.requirements.end())
        return unmet;
    for (const auto& r : it->second) {
        if (!histories.full(r.prerequisite) || histories.success_rate(r.prerequisite) < r.threshold)
            unmet.push_back(r);
    }
    return unmet;
}

namespace {

std::optional<std::size_t> highest(const std::vector<bool>& flags)
{
    for (std::size_t i = flags.size(); i-- > 0;) {
        if (flags[i])
            return i;
    }
    return std::nullopt;
}

std::vector<bool> active_flags(const ExpertWeights& weights, ParameterRef ref)
{
    const auto& a = weights.at(ref).active;
    std::vector<bool> flags(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i)
        flags[static_cast<std::size_t>(i)] = a(i);
    return flags;
}

// The blocking prerequisite itself when active, else the active frontier of
// its ladder, plus every active value on the chain of groups that leads to it.
void collect_upgrade_targets(const ActivitySpace& space, const ExpertWeights& weights, ValueRef prerequisite,
                             std::set<ValueRef>& targets)
{
    const ParameterRef param{prerequisite.group, prerequisite.parameter};
    if (weights.active(prerequisite)) {
        targets.insert(prerequisite);
    } else if (const auto top = highest(active_flags(weights, param))) {
        targets.insert(ValueRef{param.group, param.parameter, *top});
    }

    std::set<std::size_t> visited{prerequisite.group};
    std::vector<std::size_t> frontier{prerequisite.group};
    while (!frontier.empty()) {
        const auto g = frontier.back();
        frontier.pop_back();
        for (const auto ref : space.all_values()) {
            if (space.dependent_index(ref) != g || !weights.active(ref))
                continue;
            targets.insert(ref);
            if (visited.insert(ref.group).second)
                frontier.push_back(ref.group);
        }
    }
}

} // namespace

ZpdUpdate update_zpd(const ActivitySpace& space, const ZpdRules& rules, const OutcomeHistory& histories,
                     ZpdState& state, ExpertWeights& weights)
{
    ZpdUpdate update;
    std::set<ValueRef> upgrade_targets;

    for (const auto g : reachable_groups(space, weights)) {
        const auto& params = space.group(g).parameters;
        for (std::size_t p = 0; p < params.size(); ++p) {
            if (!params[p].ordered_progression)
                continue;
            auto& window = state.recent[g][p];
            if (window.size() < rules.zpd_window || state.recent_success({g, p}) < rules.lambda_zpd)
                continue;
            window.clear();

            const auto top = highest(state.ever_activated[g][p]);
            const std::size_t candidate = top ? *top + 1 : 0;
            if (candidate >= params[p].values.size())
                continue;
            const ValueRef ref{g, p, candidate};
            const auto unmet = unmet_requirements(rules, histories, ref);
            if (unmet.empty()) {
                auto& experts = weights.at(ParameterRef{g, p});
                double floor = 0.0;
                bool any = false;
                for (Eigen::Index i = 0; i < experts.weights.size(); ++i) {
                    if (!experts.active(i))
                        continue;
                    floor = any ? std::min(floor, experts.weights(i)) : experts.weights(i);
                    any = true;
                }
                experts.weights(static_cast<Eigen::Index>(candidate)) = floor;
                experts.active(static_cast<Eigen::Index>(candidate)) = true;
                state.ever_activated[g][p][candidate] = true;
                update.activated.push_back(ref);
            } else {
                update.blocked.push_back(ref);
                if (rules.quality_upgrade) {
                    for (const auto& r : unmet)
                        collect_upgrade_targets(space, weights, r.prerequisite, upgrade_targets);
                }
            }
        }
    }

    for (const auto ref : upgrade_targets) {
        weights.weight(ref) *= rules.upgrade_boost;
        update.boosted.push_back(ref);
    }

    // Mastered values are dropped only behind the ladder frontier, so each
    // ordered parameter keeps its highest active value.
    for (const auto param : space.all_parameters()) {
        if (!space.parameter(param).ordered_progression)
            continue;
        auto flags = active_flags(weights, param);
        const auto top = highest(flags);
        if (!top)
            continue;
        for (std::size_t v = 0; v < *top; ++v) {
            const ValueRef ref{param.group, param.parameter, v};
            if (flags[v] && histories.full(ref) && histories.success_rate(ref) > rules.lambda_deact) {
                weights.set_active(ref, false);
                update.deactivated.push_back(ref);
            }
        }
    }
    return update;
}

ZpdesPolicy::ZpdesPolicy(std::shared_ptr<const ActivitySpace> space, ZpdesConfig config, std::uint64_t seed)
    : sas_{std::move(space), {}}
    , config_(std::move(config))
    , rng_(seed)
{
    config_.bandit.validate();
    config_.rules.validate(*sas_.space);
    initialize_zpd(*sas_.space, config_.rules, sas_.weights, state_);
    histories_ = OutcomeHistory(*sas_.space, config_.rules.reward_window);
}

Activity ZpdesPolicy::next_activity()
{
    return gen_activity(sas_, config_.bandit, rng_, &stats_);
}

ZpdesPolicy::Update ZpdesPolicy::apply(const Activity& activity, bool solved)
{
    ++step_;
    histories_.record(activity, solved, step_);
    state_.record(activity, solved, config_.rules.zpd_window);
    Update u;
    u.rewards = compute_reward(activity, histories_, config_.rules.reward_window);
    update_weights(sas_.weights, activity, u.rewards, config_.bandit);
    u.zpd = update_zpd(*sas_.space, config_.rules, histories_, state_, sas_.weights);
    return u;
}

PolicyFeedback ZpdesPolicy::record_outcome(const Activity& activity, bool solved)
{
    auto u = apply(activity, solved);
    PolicyFeedback fb;
    fb.rewards = std::move(u.rewards);
    const auto& space = *sas_.space;
    for (const auto r : u.zpd.activated)
        fb.activated.push_back(space.path_of(r));
    for (const auto r : u.zpd.deactivated)
        fb.deactivated.push_back(space.path_of(r));
    for (const auto r : u.zpd.boosted)
        fb.boosted.push_back(space.path_of(r));
    return fb;
}

ZpdesStepRecord ZpdesPolicy::step(const std::function<bool(const Activity&)>& answer)
{
    ZpdesStepRecord rec;
    rec.activity = next_activity();
    rec.outcome = answer(rec.activity);
    auto u = apply(rec.activity, rec.outcome);
    rec.step = step_;
    rec.rewards = std::move(u.rewards);
    rec.zpd = std::move(u.zpd);
    rec.weights = sas_.weights.flatten();
    rec.active = sas_.weights.flatten_active();
    return rec;
}

} // namespace zpdes
