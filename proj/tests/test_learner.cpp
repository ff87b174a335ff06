#include <doctest.h>

#include <cmath>

#include "zpdes/learner.hpp"
#include "zpdes/space_io.hpp"

using namespace zpdes;
using kidlearn::ActivityFeatures;
using kidlearn::ExerciseType;

namespace {

LearnerProfile base_profile()
{
    LearnerProfile p;
    p.competence = {2.0, 1.0, 1.0, 1.0};
    p.learn_rate = {0.2, 0.2, 0.2, 0.2};
    p.max_competence = {6.0, 4.0, 4.0, 4.0};
    p.guess = 0.1;
    p.slip = 0.05;
    p.steepness = 2.5;
    p.zpd_band = 1.5;
    return p;
}

ActivityFeatures at(ExerciseType t, int level)
{
    ActivityFeatures f;
    f.type = t;
    f.level = level;
    return f;
}

} // namespace

TEST_CASE("success probability saturates at guess and 1 - slip")
{
    auto p = base_profile();
    p.competence[0] = 6.0;
    CHECK(success_probability(p, at(ExerciseType::M, 1)) == doctest::Approx(0.95).epsilon(1e-4));
    p.competence[0] = 0.0;
    CHECK(success_probability(p, at(ExerciseType::M, 6)) == doctest::Approx(0.1).epsilon(1e-4));
    p.competence[0] = 2.5;
    CHECK(success_probability(p, at(ExerciseType::M, 3)) == doctest::Approx(0.1 + 0.85 / 2));
}

TEST_CASE("carried numbers make an exercise harder")
{
    const auto p = base_profile();
    auto f = at(ExerciseType::MM, 1);
    const double plain = success_probability(p, f);
    f.carry = kidlearn::Carry::integer;
    CHECK(success_probability(p, f) < plain);
}

TEST_CASE("respond frequency follows the success probability")
{
    const auto p = base_profile();
    const auto f = at(ExerciseType::M, 2);
    Rng rng(1);
    int ok = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        ok += respond(p, f, rng) ? 1 : 0;
    CHECK(ok / static_cast<double>(n) == doctest::Approx(success_probability(p, f)).epsilon(0.02));
}

TEST_CASE("learning happens only inside the band and stops at the cap")
{
    auto p = base_profile();
    learn(p, at(ExerciseType::M, 2), true);
    CHECK(p.competence[0] == doctest::Approx(2.2));
    learn(p, at(ExerciseType::M, 2), false);
    CHECK(p.competence[0] == doctest::Approx(2.2));
    learn(p, at(ExerciseType::M, 6), true);
    CHECK(p.competence[0] == doctest::Approx(2.2));
    for (int i = 0; i < 100; ++i)
        learn(p, at(ExerciseType::M, static_cast<int>(std::round(p.competence[0]))), true);
    CHECK(p.competence[0] == 6.0);
}

TEST_CASE("object choice follows the softmax")
{
    const auto catalog = kidlearn::parse_catalog(load_json_source("builtin:catalog.json"));
    kidlearn::ObjectChoice choice;
    choice.options[0].objects = {{0, 0}};
    choice.options[1].objects = {{1, 0}};
    Rng rng(2);
    auto p = base_profile();
    int right = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        right += static_cast<int>(choose_object(p, choice, catalog, rng));
    CHECK(std::abs(right / static_cast<double>(n) - 0.5) < 0.02);

    p.object_preference[catalog.objects[1].id] = 4.0;
    right = 0;
    for (int i = 0; i < n; ++i)
        right += static_cast<int>(choose_object(p, choice, catalog, rng));
    CHECK(right / static_cast<double>(n) > 0.9);
}

TEST_CASE("play_exercise gives up after three trials")
{
    auto p = base_profile();
    p.guess = 0.0;
    p.slip = 0.999;
    kidlearn::ExerciseContent c;
    c.features = at(ExerciseType::M, 1);
    c.target_cents = 300;
    c.wallet = {1, 2, 5, 10, 20, 50, 100, 200, 500};
    Rng rng(3);
    const auto r = play_exercise(p, c, rng);
    CHECK_FALSE(r.solved);
    CHECK(r.trials == 3);
    CHECK(std::accumulate(r.last_submission.begin(), r.last_submission.end(), 0) == 301);
}

TEST_CASE("population sampling yields valid heterogeneous profiles")
{
    const auto pop = parse_population(load_json_source("builtin:population.json"));
    CHECK(pop.cohort_size == 60);
    const auto catalog = kidlearn::parse_catalog(load_json_source("builtin:catalog.json"));
    Rng rng(4);
    double lo = 1e9;
    double hi = -1e9;
    for (int i = 0; i < 200; ++i) {
        const auto p = sample_profile(pop, catalog, rng);
        CHECK_NOTHROW(p.validate());
        lo = std::min(lo, p.max_competence[0]);
        hi = std::max(hi, p.max_competence[0]);
        CHECK(p.object_preference.size() == catalog.objects.size());
    }
    CHECK(hi - lo > 3.0);
    CHECK(parse_population(serialize_population(pop)).cohort_size == pop.cohort_size);
}

TEST_CASE("profile validation and JSON round trip")
{
    auto p = base_profile();
    p.object_preference["ball"] = 0.5;
    const auto back = profile_from_json(profile_to_json(p));
    CHECK(back.competence == p.competence);
    CHECK(back.object_preference == p.object_preference);
    p.guess = 0.6;
    p.slip = 0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK_THROWS_AS(parse_population(nlohmann::json::parse(R"({"cohort_size":0})")), ConfigError);
    CHECK_THROWS_AS(parse_population(nlohmann::json::parse(R"({"competence":{"Q":1}})")), ConfigError);
}
