#include <doctest.h>

#include <algorithm>
#include <climits>
#include <numeric>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "zpdes/kidlearn.hpp"

using namespace zpdes;
using namespace zpdes::kidlearn;

namespace {

struct Fixture {
    KidlearnSpace kid = build_kidlearn_space();
    ContentGenerator gen{kid.space, load_domain_data("builtin:catalog.json", "builtin:denominations.json")};

    // Activity by type, level and modality value ids (absent ones take the first value).
    Activity make(const std::string& type, int level, std::map<std::string, std::string> modality = {}) const
    {
        const auto& s = *kid.space;
        return assemble_activity(s, [&](std::size_t g, std::size_t p) -> std::size_t {
            const auto& param = s.group(g).parameters[p];
            std::string id;
            if (param.id == "type")
                id = type;
            else if (param.id == "level")
                id = std::to_string(level);
            else if (modality.contains(param.id))
                id = modality.at(param.id);
            else
                return 0;
            return s.find_value(s.group(g).id, param.id, id).value().value;
        });
    }
};

int units(int cents) { return (cents / 100) % 10; }
int tenths(int cents) { return (cents / 10) % 10; }

} // namespace

TEST_CASE("Kidlearn space has 18 ladder cells")
{
    Fixture f;
    int cells = 0;
    for (const auto t : kTypes) {
        const auto g = f.kid.space->find_group("level_" + std::string(type_id(t)));
        REQUIRE(g);
        const auto n = static_cast<int>(f.kid.space->group(*g).parameters.front().values.size());
        CHECK(n == max_level(t));
        cells += n;
    }
    CHECK(cells == 18);
}

TEST_CASE("M level 1 prices are single euro pieces")
{
    Fixture f;
    Rng rng(1);
    const auto a = f.make("M", 1, {{"presentation", "integer"}, {"shape", "real"}});
    std::set<int> prices;
    for (int i = 0; i < 500; ++i) {
        const auto c = f.gen.generate(a, rng);
        REQUIRE(c.objects.size() == 1);
        prices.insert(c.target_cents);
        CHECK(greedy_decomposition(c.target_cents, c.wallet).size() == 1);
        CHECK_FALSE(c.show_cents);
    }
    CHECK(prices == std::set<int>{100, 200, 500});
}

TEST_CASE("carry constraints on the operand digits")
{
    Fixture f;
    Rng rng(2);
    for (int level = 1; level <= 4; ++level) {
        for (int i = 0; i < 200; ++i) {
            const auto with = f.gen.generate(f.make("MM", level, {{"carry", "integer"}}), rng);
            CHECK(units(with.objects[0].price_cents) + units(with.objects[1].price_cents) >= 10);
            const auto without = f.gen.generate(f.make("MM", level, {{"carry", "without"}}), rng);
            CHECK(units(without.objects[0].price_cents) + units(without.objects[1].price_cents) < 10);
            const auto dec = f.gen.generate(f.make("RM", level, {{"carry", "decimal"}}), rng);
            CHECK(dec.show_cents);
            CHECK(tenths(dec.objects[0].price_cents) + tenths(dec.objects[1].price_cents) + tenths(dec.target_cents) >=
                  10);
        }
    }
}

TEST_CASE("merchant exercises ask for the change")
{
    Fixture f;
    Rng rng(3);
    for (int i = 0; i < 300; ++i) {
        const auto c = f.gen.generate(f.make("R", 1 + i % 4), rng);
        CHECK(c.role == Role::merchant);
        CHECK(c.target_cents > 0);
        CHECK(c.paid_cents - c.objects[0].price_cents == c.target_cents);
    }
}

TEST_CASE("greedy decomposition is optimal for the shipped denominations")
{
    const auto data = load_domain_data("builtin:catalog.json", "builtin:denominations.json");
    for (const auto& [id, set] : data.denominations) {
        for (int amount = 1; amount <= 3000; amount += 7) {
            const auto g = greedy_decomposition(amount, set.values);
            REQUIRE_FALSE(g.empty());
            CHECK(std::accumulate(g.begin(), g.end(), 0) == amount);
            CHECK(static_cast<int>(g.size()) == fixtures::min_pieces(amount, set.values));
        }
    }
}

TEST_CASE("verify_answer examples")
{
    ExerciseContent c;
    c.target_cents = 250;
    c.wallet = {1, 2, 5, 10, 20, 50, 100, 200, 500};
    const std::vector<int> right{200, 50};
    const std::vector<int> short_by_ten{200, 20, 20};
    CHECK(verify_answer(c, right, 0).verdict == Verdict::correct);
    const auto once = verify_answer(c, short_by_ten, 0);
    CHECK(once.verdict == Verdict::incorrect);
    CHECK(once.trials_left == 2);

    Attempt attempt(c);
    attempt.submit(short_by_ten);
    attempt.submit(short_by_ten);
    const auto last = attempt.submit(short_by_ten);
    CHECK(last.verdict == Verdict::failed);
    CHECK(last.solution == std::vector<int>{200, 50});
    CHECK(attempt.finished());
    CHECK_FALSE(attempt.solved());
    CHECK_THROWS_AS(attempt.submit(right), std::logic_error);

    const std::vector<int> foreign{125, 125};
    CHECK(verify_answer(c, foreign, 0).verdict == Verdict::incorrect);
}

TEST_CASE("object choice offers two distinct sets and leaves the parameterization alone")
{
    Fixture f;
    Rng rng(4);
    const auto a = f.make("MM", 2);
    for (int i = 0; i < 200; ++i) {
        const auto choice = f.gen.offer_choice(a, rng);
        CHECK(choice.options[0].objects.size() == 2);
        CHECK(choice.options[0] != choice.options[1]);
        Rng r0(100 + static_cast<std::uint64_t>(i));
        Rng r1(100 + static_cast<std::uint64_t>(i));
        const auto c0 = f.gen.generate(a, r0, &choice.options[0]);
        const auto c1 = f.gen.generate(a, r1, &choice.options[1]);
        CHECK(c0.features == c1.features);
        CHECK(c0.target_cents == c1.target_cents);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(c0.objects[k].price_cents == c1.objects[k].price_cents);
    }
}

TEST_CASE("choice positions are uniform")
{
    Fixture f;
    Rng rng(5);
    const auto a = f.make("M", 1);
    int left_lower = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto choice = f.gen.offer_choice(a, rng);
        left_lower += choice.options[0].objects[0].object < choice.options[1].objects[0].object ? 1 : 0;
    }
    CHECK(std::abs(left_lower / static_cast<double>(n) - 0.5) < 0.02);
}

TEST_CASE("a catalog smaller than a choice reuses objects with skins")
{
    auto data = load_domain_data("builtin:catalog.json", "builtin:denominations.json");
    data.catalog.objects.resize(1);
    const auto kid = build_kidlearn_space();
    ContentGenerator gen(kid.space, data);
    Rng rng(6);
    const Fixture f;
    const auto choice = gen.offer_choice(f.make("MM", 1), rng);
    CHECK(choice.reused);
    CHECK(choice.options[0] != choice.options[1]);
}

TEST_CASE("mean minimal piece count does not decrease with level")
{
    Fixture f;
    Rng rng(7);
    for (const auto t : kTypes) {
        double previous = 0.0;
        for (int level = 1; level <= max_level(t); ++level) {
            const auto a = f.make(std::string(type_id(t)), level);
            double total = 0.0;
            const int n = 1500;
            for (int i = 0; i < n; ++i) {
                const auto c = f.gen.generate(a, rng);
                total += fixtures::min_pieces(c.target_cents, c.wallet);
            }
            const double mean = total / n;
            CHECK_MESSAGE(mean >= previous, type_id(t), " level ", level);
            previous = mean;
        }
    }
}

TEST_CASE("decode_activity reads the domain parameters")
{
    Fixture f;
    const auto a = f.make("R", 3, {{"presentation", "x,x€"}, {"carry", "decimal"}, {"shape", "token"}});
    const auto d = decode_activity(*f.kid.space, a);
    CHECK(d.type == ExerciseType::R);
    CHECK(d.level == 3);
    CHECK(d.presentation == Presentation::comma);
    CHECK(d.carry == Carry::decimal);
    CHECK(d.shape == "token");
    CHECK(d.shows_cents());
}

TEST_CASE("data file errors")
{
    CHECK_THROWS_AS(parse_catalog(nlohmann::json::parse(R"({"objects":[]})")), ConfigError);
    CHECK_THROWS_AS(parse_denominations(nlohmann::json::parse(R"({"real":{"values":[2,5]}})")), ConfigError);
}
