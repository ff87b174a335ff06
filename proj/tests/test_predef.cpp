#include <doctest.h>

#include "zpdes/kidlearn.hpp"
#include "zpdes/predef_policy.hpp"
#include "zpdes/space_io.hpp"

using namespace zpdes;

namespace {

struct Fixture {
    kidlearn::KidlearnSpace kid = kidlearn::build_kidlearn_space();
    std::shared_ptr<const PredefSequence> seq = std::make_shared<const PredefSequence>(
        parse_predef_sequence(load_json_source("builtin:predef_sequence.json"), *kid.space));
};

} // namespace

TEST_CASE("shipped sequence has 27 legal steps from G1.1 to G8.8")
{
    Fixture f;
    REQUIRE(f.seq->steps.size() == 27);
    const auto first = kidlearn::decode_activity(*f.kid.space, f.seq->steps.front().activity);
    CHECK(f.seq->steps.front().id == "G1.1");
    CHECK(first.type == kidlearn::ExerciseType::M);
    CHECK(first.level == 1);
    CHECK(first.shape == "real");
    const auto last = kidlearn::decode_activity(*f.kid.space, f.seq->steps[26].activity);
    CHECK(f.seq->steps[26].id == "G8.8");
    CHECK(last.type == kidlearn::ExerciseType::RM);
    CHECK(last.level == 4);
    CHECK(last.carry == kidlearn::Carry::decimal);
    CHECK(last.shape == "token");
    for (const auto& s : f.seq->steps)
        CHECK(validate_activity(*f.kid.space, s.activity).ok());
}

TEST_CASE("verbatim 28-column table also loads")
{
    Fixture f;
    const auto table = parse_predef_sequence(load_json_source(std::string(ZPDES_SOURCE_DIR) + "/data/predef_sequence_table28.json"), *f.kid.space);
    CHECK(table.steps.size() == 28);
}

TEST_CASE("mastery gate on a sliding window")
{
    Fixture f;
    SUBCASE("three of four advances")
    {
        PredefState s;
        for (const bool o : {true, true, true})
            CHECK_FALSE(predef_record(s, *f.seq, o));
        CHECK(predef_record(s, *f.seq, false));
        CHECK(s.current_index == 1);
        CHECK(s.window.empty());
    }
    SUBCASE("sliding evaluation stays on 1010 then 0101")
    {
        PredefState s;
        for (const bool o : {true, false, true, false, true})
            CHECK_FALSE(predef_record(s, *f.seq, o));
        CHECK(s.current_index == 0);
        CHECK(predef_record(s, *f.seq, true)); // last four now 1 0 1 1
        CHECK(s.current_index == 1);
    }
    SUBCASE("all failures never advance")
    {
        PredefState s;
        for (int i = 0; i < 100; ++i)
            predef_record(s, *f.seq, false);
        CHECK(s.current_index == 0);
    }
}

TEST_CASE("the final step repeats after completion")
{
    Fixture f;
    PredefPolicy p(f.seq);
    std::size_t n = 0;
    while (!p.completed()) {
        p.record_outcome(p.next_activity(), true);
        ++n;
    }
    CHECK(n == 108);
    CHECK(p.next_activity() == f.seq->steps.back().activity);
    for (int i = 0; i < 8; ++i)
        p.record_outcome(p.next_activity(), true);
    CHECK(p.state().current_index == 26);
}

TEST_CASE("sequence parse errors")
{
    Fixture f;
    auto doc = load_json_source("builtin:predef_sequence.json");
    SUBCASE("unknown cell")
    {
        doc["steps"][0]["money"] = "Gold";
        CHECK_THROWS_AS(parse_predef_sequence(doc, *f.kid.space), ConfigError);
    }
    SUBCASE("a non-neutral field the activity cannot carry")
    {
        doc["steps"][3]["cents"] = "x€x"; // G2.1 is MM, which has no presentation
        CHECK_THROWS_AS(parse_predef_sequence(doc, *f.kid.space), ConfigError);
    }
    SUBCASE("level outside the ladder")
    {
        doc["steps"][3]["difficulty"] = "6";
        CHECK_THROWS_AS(parse_predef_sequence(doc, *f.kid.space), ConfigError);
    }
    SUBCASE("no steps")
    {
        doc["steps"] = nlohmann::json::array();
        CHECK_THROWS_AS(parse_predef_sequence(doc, *f.kid.space), ConfigError);
    }
}
