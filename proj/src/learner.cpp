#include "zpdes/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace zpdes {

namespace {

using kidlearn::ExerciseType;

std::size_t type_index(ExerciseType t) { return static_cast<std::size_t>(t); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double draw(const Range& r, Rng& rng)
{
    return r.lo == r.hi ? r.lo : r.lo + (r.hi - r.lo) * uniform01(rng);
}

// Box-Muller on uniform01 so draws do not depend on the standard library.
double standard_normal(Rng& rng)
{
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Range parse_range(const nlohmann::json& j, const std::string& field)
{
    if (j.is_number())
        return {j.get<double>(), j.get<double>()};
    if (j.is_array() && j.size() == 2)
        return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError("population." + field + " must be a number or a [lo, hi] pair");
}

std::array<Range, 4> parse_per_type(const nlohmann::json& j, const std::string& field, std::array<Range, 4> out)
{
    if (!j.is_object()) {
        out.fill(parse_range(j, field));
        return out;
    }
    for (const auto& [key, value] : j.items()) {
        const auto t = kidlearn::type_from_id(key);
        if (!t)
            throw ConfigError("population." + field + ": unknown exercise type " + key);
        out[type_index(*t)] = parse_range(value, field + "." + key);
    }
    return out;
}

nlohmann::json range_json(const Range& r)
{
    return nlohmann::json::array({r.lo, r.hi});
}

nlohmann::json per_type_json(const std::array<Range, 4>& r)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto t : kidlearn::kTypes)
        j[std::string(kidlearn::type_id(t))] = range_json(r[type_index(t)]);
    return j;
}

nlohmann::json per_type_values(const PerType& v)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto t : kidlearn::kTypes)
        j[std::string(kidlearn::type_id(t))] = v[type_index(t)];
    return j;
}

PerType per_type_from(const nlohmann::json& j)
{
    PerType v{};
    for (const auto t : kidlearn::kTypes)
        v[type_index(t)] = j.at(std::string(kidlearn::type_id(t))).get<double>();
    return v;
}

} // namespace

void LearnerProfile::validate() const
{
    if (guess < 0.0 || guess > 1.0 || slip < 0.0 || slip > 1.0 || !(guess + slip < 1.0))
        throw ConfigError("learner profile needs guess, slip in [0, 1] and guess + slip < 1");
    if (!(steepness > 0.0))
        throw ConfigError("learner steepness must be > 0");
    if (zpd_band < 0.0)
        throw ConfigError("learner zpd_band must be >= 0");
    for (std::size_t i = 0; i < 4; ++i) {
        if (competence[i] < 0.0 || competence[i] > max_competence[i])
            throw ConfigError("learner competence must lie in [0, max_competence]");
        if (learn_rate[i] < 0.0)
            throw ConfigError("learner learn_rate must be >= 0");
    }
}

nlohmann::json profile_to_json(const LearnerProfile& p)
{
    return {{"competence", per_type_values(p.competence)},
            {"learn_rate", per_type_values(p.learn_rate)},
            {"max_competence", per_type_values(p.max_competence)},
            {"guess", p.guess},
            {"slip", p.slip},
            {"steepness", p.steepness},
            {"zpd_band", p.zpd_band},
            {"carry_offset", p.carry_offset},
            {"object_preference", p.object_preference},
            {"engagement_gain", p.engagement_gain}};
}

LearnerProfile profile_from_json(const nlohmann::json& doc)
{
    LearnerProfile p;
    try {
        p.competence = per_type_from(doc.at("competence"));
        p.learn_rate = per_type_from(doc.at("learn_rate"));
        p.max_competence = per_type_from(doc.at("max_competence"));
        p.guess = doc.at("guess").get<double>();
        p.slip = doc.at("slip").get<double>();
        p.steepness = doc.at("steepness").get<double>();
        p.zpd_band = doc.at("zpd_band").get<double>();
        p.carry_offset = doc.value("carry_offset", p.carry_offset);
        p.object_preference = doc.value("object_preference", std::map<std::string, double>{});
        p.engagement_gain = doc.value("engagement_gain", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("learner profile: ") + e.what());
    }
    p.validate();
    return p;
}

double success_probability(const LearnerProfile& profile, const kidlearn::ActivityFeatures& activity,
                           double engagement)
{
    const double c = profile.competence[type_index(activity.type)];
    double x = profile.steepness * (c - activity.level + 0.5) + engagement;
    if (activity.carry != kidlearn::Carry::without)
        x -= profile.carry_offset;
    return profile.guess + (1.0 - profile.guess - profile.slip) * sigmoid(x);
}

bool respond(const LearnerProfile& profile, const kidlearn::ActivityFeatures& activity, Rng& rng, double engagement)
{
    return bernoulli(success_probability(profile, activity, engagement), rng);
}

void learn(LearnerProfile& profile, const kidlearn::ActivityFeatures& activity, bool outcome)
{
    const auto i = type_index(activity.type);
    auto& c = profile.competence[i];
    if (outcome && std::abs(activity.level - c) <= profile.zpd_band)
        c = std::min(c + profile.learn_rate[i], profile.max_competence[i]);
}

double option_affinity(const LearnerProfile& profile, const kidlearn::ObjectOption& option,
                       const kidlearn::Catalog& catalog)
{
    double total = 0.0;
    for (const auto& pick : option.objects) {
        const auto it = profile.object_preference.find(catalog.objects.at(pick.object).id);
        if (it != profile.object_preference.end())
            total += it->second;
    }
    return total;
}

std::size_t choose_object(const LearnerProfile& profile, const kidlearn::ObjectChoice& choice,
                          const kidlearn::Catalog& catalog, Rng& rng)
{
    const double a0 = option_affinity(profile, choice.options[0], catalog);
    const double a1 = option_affinity(profile, choice.options[1], catalog);
    // softmax over two options reduces to a sigmoid of the difference
    const double p1 = sigmoid(a1 - a0);
    return bernoulli(p1, rng) ? 1 : 0;
}

ExerciseResult play_exercise(const LearnerProfile& profile, const kidlearn::ExerciseContent& content, Rng& rng,
                             double engagement)
{
    ExerciseResult result;
    kidlearn::Attempt attempt(content);
    const auto correct = kidlearn::greedy_decomposition(content.target_cents, content.wallet);
    auto wrong = kidlearn::greedy_decomposition(content.target_cents + content.wallet.front(), content.wallet);
    while (!attempt.finished()) {
        result.last_submission = respond(profile, content.features, rng, engagement) ? correct : wrong;
        attempt.submit(result.last_submission);
    }
    result.solved = attempt.solved();
    result.trials = attempt.trials_used();
    return result;
}

void PopulationSpec::validate() const
{
    if (cohort_size == 0)
        throw ConfigError("population.cohort_size must be >= 1");
    auto ordered = [](const Range& r) { return r.lo <= r.hi; };
    for (std::size_t i = 0; i < 4; ++i) {
        if (!ordered(competence[i]) || !ordered(learn_rate[i]) || !ordered(max_competence[i]))
            throw ConfigError("population ranges need lo <= hi");
        if (competence[i].lo < 0.0 || learn_rate[i].lo < 0.0 || max_competence[i].lo < 0.0)
            throw ConfigError("population competence, learn_rate and max_competence must be >= 0");
    }
    for (const auto* r : {&guess, &slip, &steepness, &zpd_band, &carry_offset}) {
        if (!ordered(*r))
            throw ConfigError("population ranges need lo <= hi");
    }
    if (guess.lo < 0.0 || slip.lo < 0.0 || !(guess.hi + slip.hi < 1.0))
        throw ConfigError("population guess and slip must be >= 0 with guess + slip < 1");
    if (!(steepness.lo > 0.0))
        throw ConfigError("population.steepness must be > 0");
    if (zpd_band.lo < 0.0)
        throw ConfigError("population.zpd_band must be >= 0");
    if (affinity_sd < 0.0)
        throw ConfigError("population.affinity_sd must be >= 0");
}

PopulationSpec parse_population(const nlohmann::json& doc)
{
    PopulationSpec s;
    try {
        s.cohort_size = doc.value("cohort_size", s.cohort_size);
        if (doc.contains("competence"))
            s.competence = parse_per_type(doc.at("competence"), "competence", s.competence);
        if (doc.contains("learn_rate"))
            s.learn_rate = parse_per_type(doc.at("learn_rate"), "learn_rate", s.learn_rate);
        if (doc.contains("max_competence"))
            s.max_competence = parse_per_type(doc.at("max_competence"), "max_competence", s.max_competence);
        for (auto [name, field] : {std::pair{"guess", &s.guess}, std::pair{"slip", &s.slip},
                                   std::pair{"steepness", &s.steepness}, std::pair{"zpd_band", &s.zpd_band},
                                   std::pair{"carry_offset", &s.carry_offset}}) {
            if (doc.contains(name))
                *field = parse_range(doc.at(name), name);
        }
        s.affinity_sd = doc.value("affinity_sd", s.affinity_sd);
        s.engagement_gain = doc.value("engagement_gain", s.engagement_gain);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("population: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json serialize_population(const PopulationSpec& s)
{
    return {{"cohort_size", s.cohort_size},
            {"competence", per_type_json(s.competence)},
            {"learn_rate", per_type_json(s.learn_rate)},
            {"max_competence", per_type_json(s.max_competence)},
            {"guess", range_json(s.guess)},
            {"slip", range_json(s.slip)},
            {"steepness", range_json(s.steepness)},
            {"zpd_band", range_json(s.zpd_band)},
            {"carry_offset", range_json(s.carry_offset)},
            {"affinity_sd", s.affinity_sd},
            {"engagement_gain", s.engagement_gain}};
}

LearnerProfile sample_profile(const PopulationSpec& pop, const kidlearn::Catalog& catalog, Rng& rng)
{
    LearnerProfile p;
    for (std::size_t i = 0; i < 4; ++i) {
        p.max_competence[i] = draw(pop.max_competence[i], rng);
        p.competence[i] = std::min(draw(pop.competence[i], rng), p.max_competence[i]);
        p.learn_rate[i] = draw(pop.learn_rate[i], rng);
    }
    p.guess = draw(pop.guess, rng);
    p.slip = draw(pop.slip, rng);
    p.steepness = draw(pop.steepness, rng);
    p.zpd_band = draw(pop.zpd_band, rng);
    p.carry_offset = draw(pop.carry_offset, rng);
    p.engagement_gain = pop.engagement_gain;
    if (pop.affinity_sd > 0.0) {
        for (const auto& o : catalog.objects)
            p.object_preference[o.id] = pop.affinity_sd * standard_normal(rng);
    }
    p.validate();
    return p;
}

} // namespace zpdes
