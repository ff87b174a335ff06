#include <doctest.h>

#include <algorithm>
#include <vector>

#include "fixtures.hpp"
#include "zpdes/kidlearn.hpp"
#include "zpdes/zpdes_policy.hpp"

using namespace zpdes;

namespace {

// Mean of the newest half minus mean of the older half of the last d entries.
double two_half_oracle(const std::vector<std::uint8_t>& h, std::size_t d)
{
    if (h.size() < d)
        return 0.0;
    double older = 0.0;
    double newer = 0.0;
    const std::size_t start = h.size() - d;
    for (std::size_t i = 0; i < d / 2; ++i)
        older += h[start + i];
    for (std::size_t i = d / 2; i < d; ++i)
        newer += h[start + i];
    return newer / static_cast<double>(d / 2) - older / static_cast<double>(d / 2);
}

// Activity picking value index `pick[group id]` everywhere (0 when absent).
Activity pick(const ActivitySpace& space, std::map<std::string, std::size_t> choice)
{
    return assemble_activity(space, [&](std::size_t g, std::size_t) {
        const auto it = choice.find(space.group(g).id);
        return it == choice.end() ? std::size_t{0} : it->second;
    });
}

ZpdRules blocked_rules(const ActivitySpace& space, bool upgrade)
{
    ZpdRules r;
    r.requirements[space.resolve_value("level_B/level/2")] = {{space.resolve_value("level_A/level/3"), 0.8}};
    r.quality_upgrade = upgrade;
    return r;
}

} // namespace

TEST_CASE("learning progress equals the two-half oracle")
{
    Rng rng(17);
    for (const std::size_t d : {2u, 4u, 6u, 8u}) {
        for (int trial = 0; trial < 500; ++trial) {
            std::vector<std::uint8_t> h(uniform_index(12, rng));
            for (auto& x : h)
                x = bernoulli(0.5, rng) ? 1 : 0;
            CHECK(learning_progress(h, d) == two_half_oracle(h, d));
        }
    }
    const std::vector<std::uint8_t> ones(4, 1);
    const std::vector<std::uint8_t> zeros(4, 0);
    const std::vector<std::uint8_t> rising{0, 0, 1, 1};
    const std::vector<std::uint8_t> short_history{0, 1, 1};
    CHECK(learning_progress(ones, 4) == 0.0);
    CHECK(learning_progress(zeros, 4) == 0.0);
    CHECK(learning_progress(rising, 4) == 1.0);
    CHECK(learning_progress(short_history, 4) == 0.0);
}

TEST_CASE("compute_reward averages learning progress over a group's values")
{
    const auto space = fixtures::space_from(R"({"primary_group":"g","groups":[{"id":"g","parameters":[
      {"id":"p","values":[{"id":"a"}]},{"id":"q","values":[{"id":"b"},{"id":"c"}]}]}]})");
    OutcomeHistory h(space, 4);
    for (const bool o : {false, false, true, true})
        h.record(ValueRef{0, 0, 0}, o, 0);
    for (const bool o : {true, true, true, true})
        h.record(ValueRef{0, 1, 0}, o, 0);
    const auto a = pick(space, {});
    const auto r = compute_reward(a, h, 4);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(0.5));
}

TEST_CASE("outcome history keeps the last capacity outcomes")
{
    const auto space = fixtures::space_from(fixtures::single_ladder(2));
    OutcomeHistory h(space, 4);
    const ValueRef v{0, 0, 0};
    for (int i = 0; i < 6; ++i)
        h.record(v, i % 2 == 0, static_cast<std::size_t>(i + 1));
    CHECK(h.size(v) == 4);
    CHECK(h.full(v));
    CHECK(h.stamps(v) == std::vector<std::size_t>{3, 4, 5, 6});
    CHECK(h.success_rate(v) == doctest::Approx(0.5));
}

TEST_CASE("initial ZPD of the Kidlearn space starts at M level 1")
{
    const auto kid = kidlearn::build_kidlearn_space();
    ZpdesPolicy policy(kid.space, ZpdesConfig{BanditConfig{}, kid.rules}, 1);
    const auto& s = *kid.space;
    const auto& w = policy.weights();
    CHECK(w.active(s.resolve_value("exercise_type/type/M")));
    CHECK_FALSE(w.active(s.resolve_value("exercise_type/type/MM")));
    CHECK(w.weight(s.resolve_value("exercise_type/type/M")) == 1.0);
    CHECK(w.active(s.resolve_value("level_M/level/1")));
    CHECK_FALSE(w.active(s.resolve_value("level_M/level/2")));
    CHECK(w.active(s.resolve_value("modality_M/shape/token")));
    CHECK(w.weight(s.resolve_value("modality_M/shape/token")) == 0.5);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const auto a = policy.next_activity();
        const auto f = kidlearn::decode_activity(s, a);
        CHECK(f.type == kidlearn::ExerciseType::M);
        CHECK(f.level == 1);
        CHECK(f.presentation == kidlearn::Presentation::integer);
    }
}

TEST_CASE("expansion activates one ladder step with the minimum active weight")
{
    auto space = fixtures::shared_space(fixtures::single_ladder(4));
    ZpdesPolicy policy(space, ZpdesConfig{}, 3);
    const auto first = pick(*space, {});
    for (int i = 0; i < 3; ++i)
        CHECK(policy.record_outcome(first, true).activated.empty());
    const auto fb = policy.record_outcome(first, true);
    REQUIRE(fb.activated.size() == 1);
    CHECK(fb.activated[0] == "g/p/2");
    const double w1 = policy.weights().weight({0, 0, 0});
    const double w2 = policy.weights().weight({0, 0, 1});
    CHECK(w2 == doctest::Approx(w1));
    CHECK_FALSE(policy.weights().active({0, 0, 2}));
    // the trigger window was consumed, so the next success does not expand again
    CHECK(policy.record_outcome(first, true).activated.empty());
}

TEST_CASE("low recent success does not expand")
{
    auto space = fixtures::shared_space(fixtures::single_ladder(4));
    ZpdesPolicy policy(space, ZpdesConfig{}, 3);
    const auto first = pick(*space, {});
    for (const bool o : {true, false, true, false, true, false, true, false})
        CHECK(policy.record_outcome(first, o).activated.empty());
}

TEST_CASE("a requirement blocks expansion and quality upgrade boosts the prerequisite chain")
{
    auto space = fixtures::shared_space(fixtures::two_ladders(5));
    const auto& s = *space;
    ZpdesConfig cfg;
    cfg.rules = blocked_rules(s, true);
    ZpdesPolicy policy(space, cfg, 4);
    const auto b1 = pick(s, {{"root", 1}});
    const double a_type = policy.weights().weight(s.resolve_value("root/type/A"));
    const double a1 = policy.weights().weight(s.resolve_value("level_A/level/1"));
    PolicyFeedback fb;
    for (int i = 0; i < 4; ++i)
        fb = policy.record_outcome(b1, true);
    CHECK(fb.activated.empty());
    CHECK_FALSE(policy.weights().active(s.resolve_value("level_B/level/2")));
    CHECK(std::find(fb.boosted.begin(), fb.boosted.end(), "level_A/level/1") != fb.boosted.end());
    CHECK(std::find(fb.boosted.begin(), fb.boosted.end(), "root/type/A") != fb.boosted.end());
    CHECK(policy.weights().weight(s.resolve_value("root/type/A")) == doctest::Approx(1.5 * a_type));
    CHECK(policy.weights().weight(s.resolve_value("level_A/level/1")) == doctest::Approx(1.5 * a1));
}

TEST_CASE("without quality upgrade the blocked candidate boosts nothing")
{
    auto space = fixtures::shared_space(fixtures::two_ladders(5));
    const auto& s = *space;
    ZpdesConfig cfg;
    cfg.rules = blocked_rules(s, false);
    ZpdesPolicy policy(space, cfg, 4);
    const auto b1 = pick(s, {{"root", 1}});
    for (int i = 0; i < 8; ++i)
        CHECK(policy.record_outcome(b1, true).boosted.empty());
    CHECK_FALSE(policy.weights().active(s.resolve_value("level_B/level/2")));
}

TEST_CASE("a met requirement lets the candidate activate")
{
    auto space = fixtures::shared_space(fixtures::two_ladders(5));
    const auto& s = *space;
    ZpdesConfig cfg;
    cfg.rules = blocked_rules(s, true);
    cfg.rules.initial_active[s.resolve_parameter("level_A/level")] = {0, 1, 2};
    ZpdesPolicy policy(space, cfg, 4);
    const auto a3 = pick(s, {{"root", 0}, {"level_A", 2}});
    for (int i = 0; i < 4; ++i)
        policy.record_outcome(a3, true);
    const auto b1 = pick(s, {{"root", 1}});
    PolicyFeedback fb;
    for (int i = 0; i < 4; ++i)
        fb = policy.record_outcome(b1, true);
    CHECK(std::find(fb.activated.begin(), fb.activated.end(), "level_B/level/2") != fb.activated.end());
}

TEST_CASE("mastered values behind the frontier are deactivated and never come back")
{
    auto space = fixtures::shared_space(fixtures::single_ladder(4));
    ZpdesConfig cfg;
    cfg.rules.initial_active[{0, 0}] = {0, 1};
    ZpdesPolicy policy(space, cfg, 9);
    const auto v1 = pick(*space, {});
    PolicyFeedback fb;
    for (int i = 0; i < 4; ++i)
        fb = policy.record_outcome(v1, true);
    CHECK(std::find(fb.deactivated.begin(), fb.deactivated.end(), "g/p/1") != fb.deactivated.end());
    CHECK_FALSE(policy.weights().active({0, 0, 0}));
    for (int i = 0; i < 40; ++i) {
        auto a = policy.next_activity();
        CHECK(a.instantiations[0].selections[0] != 0);
        policy.record_outcome(a, i % 3 == 0);
    }
}

TEST_CASE("the highest active value of a ladder is kept even when mastered")
{
    auto space = fixtures::shared_space(fixtures::single_ladder(1));
    ZpdesPolicy policy(space, ZpdesConfig{}, 9);
    const auto v1 = pick(*space, {});
    for (int i = 0; i < 10; ++i)
        CHECK(policy.record_outcome(v1, true).deactivated.empty());
    CHECK(policy.weights().active({0, 0, 0}));
}

TEST_CASE("ZPD rule validation")
{
    const auto space = fixtures::space_from(fixtures::two_ladders(5));
    ZpdRules r;
    CHECK_NOTHROW(r.validate(space));
    r.reward_window = 3;
    CHECK_THROWS_AS(r.validate(space), ConfigError);
    r = ZpdRules{};
    r.upgrade_boost = 1.0;
    CHECK_THROWS_AS(r.validate(space), ConfigError);
    r = ZpdRules{};
    const auto a2 = space.resolve_value("level_A/level/2");
    const auto b2 = space.resolve_value("level_B/level/2");
    r.requirements[a2] = {{b2, 0.5}};
    r.requirements[b2] = {{a2, 0.5}};
    CHECK_THROWS_AS(r.validate(space), ConfigError);
    r = ZpdRules{};
    r.initial_active[space.resolve_parameter("level_A/level")] = {};
    CHECK_THROWS_AS(r.validate(space), ConfigError);
    r = ZpdRules{};
    r.requirements[space.resolve_value("root/type/B")] = {{a2, 0.5}};
    CHECK_THROWS_AS(r.validate(space), ConfigError);
}

TEST_CASE("shipped ZPD rules round-trip through JSON")
{
    const auto kid = kidlearn::build_kidlearn_space();
    const auto j = serialize_zpd_rules(kid.rules, *kid.space);
    const auto back = parse_zpd_rules(j, *kid.space);
    CHECK(serialize_zpd_rules(back, *kid.space) == j);
    CHECK(kid.rules.requirements.size() == 13);
}

TEST_CASE("same seed and same answers give the same weight trajectory")
{
    const auto kid = kidlearn::build_kidlearn_space();
    auto run = [&](std::uint64_t seed) {
        ZpdesPolicy policy(kid.space, ZpdesConfig{BanditConfig{}, kid.rules}, seed);
        Rng answers(99);
        std::vector<Eigen::VectorXd> out;
        for (int t = 0; t < 300; ++t)
            out.push_back(policy.step([&](const Activity&) { return bernoulli(0.8, answers); }).weights);
        return out;
    };
    CHECK(run(5) == run(5));
    CHECK(run(5) != run(6));
}
