#include "zpdes/kidlearn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "zpdes/space_io.hpp"

namespace zpdes::kidlearn {

namespace {

constexpr std::array<int, 3> kEasy{1, 2, 5};
constexpr std::array<int, 6> kHard{3, 4, 6, 7, 8, 9};
constexpr int kMaxDraws = 2000;

int digit(std::span<const int> set, Rng& rng)
{
    return set[uniform_index(set.size(), rng)];
}

// Euro part by level: units, then tens, then hundreds, easy digits give way
// to hard ones as the level rises.
int draw_euros(int level, Rng& rng)
{
    switch (level) {
    case 1: return digit(kEasy, rng);
    case 2: return digit(kHard, rng);
    case 3: return 10 * digit(kEasy, rng) + digit(kHard, rng);
    case 4: return 10 * digit(kHard, rng) + digit(kHard, rng);
    case 5: return 100 * digit(kEasy, rng) + 10 * digit(kHard, rng) + digit(kHard, rng);
    case 6: return 100 * digit(kHard, rng) + 10 * digit(kHard, rng) + digit(kHard, rng);
    default: throw std::invalid_argument("no price scheme for level " + std::to_string(level));
    }
}

int draw_amount(int level, bool show_cents, Rng& rng)
{
    int cents = 100 * draw_euros(level, rng);
    if (show_cents)
        cents += 10 * (level == 1 ? digit(kEasy, rng) : digit(kHard, rng));
    return cents;
}

int units_digit(int cents) { return (cents / 100) % 10; }
int tenths_digit(int cents) { return (cents / 10) % 10; }

bool carry_holds(Carry carry, bool show_cents, std::span<const int> operands)
{
    int units = 0;
    int tenths = 0;
    for (const int x : operands) {
        units += units_digit(x);
        tenths += tenths_digit(x);
    }
    switch (carry) {
    case Carry::without: return units < 10 && (!show_cents || tenths < 10);
    case Carry::integer: return units >= 10 && (!show_cents || tenths < 10);
    case Carry::decimal: return tenths >= 10;
    }
    return false;
}

const GroupInstantiation* find_parameter(const ActivitySpace& space, const Activity& activity, std::string_view id,
                                         std::size_t& index)
{
    for (const auto& h : activity.instantiations) {
        const auto& params = space.group(h.group).parameters;
        for (std::size_t p = 0; p < params.size(); ++p) {
            if (params[p].id == id) {
                index = p;
                return &h;
            }
        }
    }
    return nullptr;
}

std::optional<std::string> selected_id(const ActivitySpace& space, const Activity& activity, std::string_view id)
{
    std::size_t p = 0;
    const auto* h = find_parameter(space, activity, id, p);
    if (!h)
        return std::nullopt;
    return space.group(h->group).parameters[p].values.at(h->selections.at(p)).id;
}

} // namespace

std::string_view type_id(ExerciseType type)
{
    static constexpr std::array<std::string_view, 4> ids{"M", "MM", "R", "RM"};
    return ids.at(static_cast<std::size_t>(type));
}

std::optional<ExerciseType> type_from_id(std::string_view id)
{
    for (const auto t : kTypes) {
        if (type_id(t) == id)
            return t;
    }
    return std::nullopt;
}

int max_level(ExerciseType type) { return type == ExerciseType::M ? 6 : 4; }

int object_count(ExerciseType type)
{
    return type == ExerciseType::MM || type == ExerciseType::RM ? 2 : 1;
}

Role role_of(ExerciseType type)
{
    return type == ExerciseType::R || type == ExerciseType::RM ? Role::merchant : Role::customer;
}

ActivityFeatures decode_activity(const ActivitySpace& space, const Activity& activity)
{
    ActivityFeatures f;
    const auto type = selected_id(space, activity, "type");
    const auto level = selected_id(space, activity, "level");
    if (!type || !level)
        throw std::invalid_argument("activity has no type or level: " + describe(space, activity));
    const auto t = type_from_id(*type);
    if (!t)
        throw std::invalid_argument("unknown exercise type " + *type);
    f.type = *t;
    f.level = std::stoi(*level);

    if (const auto pres = selected_id(space, activity, "presentation")) {
        if (*pres == "integer")
            f.presentation = Presentation::integer;
        else if (*pres == "x€x")
            f.presentation = Presentation::euro_sign;
        else if (*pres == "x,x€")
            f.presentation = Presentation::comma;
        else
            throw std::invalid_argument("unknown presentation " + *pres);
    }
    if (const auto carry = selected_id(space, activity, "carry")) {
        if (*carry == "without")
            f.carry = Carry::without;
        else if (*carry == "integer")
            f.carry = Carry::integer;
        else if (*carry == "decimal")
            f.carry = Carry::decimal;
        else
            throw std::invalid_argument("unknown carry " + *carry);
    }
    if (const auto shape = selected_id(space, activity, "shape"))
        f.shape = *shape;
    return f;
}

Catalog parse_catalog(const nlohmann::json& doc)
{
    Catalog c;
    try {
        for (const auto& o : doc.at("objects")) {
            CatalogObject obj{o.at("id").get<std::string>(), o.value("name", o.at("id").get<std::string>()),
                              o.at("min_cents").get<int>(), o.at("max_cents").get<int>()};
            if (obj.min_cents <= 0 || obj.max_cents < obj.min_cents)
                throw ConfigError("catalog object " + obj.id + " has an invalid price range");
            c.objects.push_back(std::move(obj));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("catalog: ") + e.what());
    }
    if (c.objects.empty())
        throw ConfigError("catalog is empty");
    return c;
}

std::map<std::string, DenominationSet> parse_denominations(const nlohmann::json& doc)
{
    std::map<std::string, DenominationSet> sets;
    try {
        for (const auto& [id, entry] : doc.items()) {
            DenominationSet s{id, entry.value("label", id), entry.at("values").get<std::vector<int>>()};
            std::sort(s.values.begin(), s.values.end());
            if (s.values.empty() || s.values.front() <= 0)
                throw ConfigError("denomination set " + id + " needs positive values");
            if (s.values.front() != 1)
                throw ConfigError("denomination set " + id + " must contain 1 cent so every amount is payable");
            sets.emplace(id, std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("denominations: ") + e.what());
    }
    return sets;
}

DomainData load_domain_data(const std::string& catalog_source, const std::string& denominations_source)
{
    return {parse_catalog(load_json_source(catalog_source)),
            parse_denominations(load_json_source(denominations_source))};
}

KidlearnSpace load_space(const nlohmann::json& doc)
{
    auto space = std::make_shared<const ActivitySpace>(parse_space(doc));
    if (const auto report = validate_space(*space); !report)
        throw ConfigError("invalid activity space: " + report.violations.front());
    auto rules = parse_zpd_rules(doc.contains("zpd") ? doc.at("zpd") : nlohmann::json(), *space);
    return {std::move(space), std::move(rules)};
}

KidlearnSpace build_kidlearn_space()
{
    return load_space(load_json_source("builtin:kidlearn_space.json"));
}

PriceRange price_range(int level, bool show_cents)
{
    static constexpr std::array<PriceRange, 6> euros{{{1, 5}, {3, 9}, {13, 59}, {33, 99}, {133, 599}, {333, 999}}};
    if (level < 1 || level > 6)
        throw std::invalid_argument("no price range for level " + std::to_string(level));
    const auto r = euros[static_cast<std::size_t>(level - 1)];
    const int low_tenths = show_cents ? (level == 1 ? 1 : 3) : 0;
    const int high_tenths = show_cents ? 9 : 0;
    return {100 * r.min_cents + 10 * low_tenths, 100 * r.max_cents + 10 * high_tenths};
}

std::vector<int> greedy_decomposition(int amount, std::span<const int> denominations)
{
    std::vector<int> sorted(denominations.begin(), denominations.end());
    std::sort(sorted.rbegin(), sorted.rend());
    std::vector<int> out;
    for (const int d : sorted) {
        while (d > 0 && amount >= d) {
            amount -= d;
            out.push_back(d);
        }
    }
    if (amount != 0)
        return {};
    return out;
}

VerifyResult verify_answer(const ExerciseContent& content, std::span<const int> submitted, int trials_used)
{
    VerifyResult r;
    const bool legal = std::all_of(submitted.begin(), submitted.end(), [&](int d) {
        return std::binary_search(content.wallet.begin(), content.wallet.end(), d);
    });
    const long total = std::accumulate(submitted.begin(), submitted.end(), 0L);
    const int used = trials_used + 1;
    r.trials_left = std::max(0, content.max_trials - used);
    if (legal && total == content.target_cents) {
        r.verdict = Verdict::correct;
        return r;
    }
    if (r.trials_left > 0) {
        r.verdict = Verdict::incorrect;
        return r;
    }
    r.verdict = Verdict::failed;
    r.solution = greedy_decomposition(content.target_cents, content.wallet);
    return r;
}

Attempt::Attempt(const ExerciseContent& content)
    : content_(&content)
{
}

VerifyResult Attempt::submit(std::span<const int> submitted)
{
    if (finished())
        throw std::logic_error("exercise already finished");
    auto r = verify_answer(*content_, submitted, trials_used_);
    ++trials_used_;
    solved_ = r.verdict == Verdict::correct;
    return r;
}

ContentGenerator::ContentGenerator(std::shared_ptr<const ActivitySpace> space, DomainData data)
    : space_(std::move(space))
    , data_(std::move(data))
{
    if (data_.catalog.objects.empty())
        throw ConfigError("content generator needs a non-empty catalog");
    for (const auto& g : space_->groups()) {
        for (const auto& p : g.parameters) {
            if (p.id != "shape")
                continue;
            for (const auto& v : p.values) {
                if (!data_.denominations.contains(v.id))
                    throw ConfigError("no denomination set for money shape " + v.id);
            }
        }
    }
}

std::vector<std::size_t> ContentGenerator::eligible_objects(const ActivityFeatures& features) const
{
    const auto range = price_range(features.level, features.shows_cents());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < data_.catalog.objects.size(); ++i) {
        const auto& o = data_.catalog.objects[i];
        if (o.min_cents <= range.max_cents && o.max_cents >= range.min_cents)
            out.push_back(i);
    }
    if (out.empty()) {
        out.resize(data_.catalog.objects.size());
        std::iota(out.begin(), out.end(), std::size_t{0});
    }
    return out;
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng)
{
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[uniform_index(i, rng)]);
}

// First `count` picks of a shuffled pool, cycling with new skins when short.
std::vector<ObjectPick> take(const std::vector<std::size_t>& pool, std::size_t count)
{
    std::vector<ObjectPick> picks;
    for (std::size_t i = 0; i < count; ++i)
        picks.push_back({pool[i % pool.size()], static_cast<int>(i / pool.size())});
    return picks;
}

} // namespace

ObjectOption ContentGenerator::draw_objects(const ActivityFeatures& features, Rng& rng) const
{
    auto pool = eligible_objects(features);
    shuffle(pool, rng);
    return {take(pool, static_cast<std::size_t>(object_count(features.type)))};
}

ObjectChoice ContentGenerator::offer_choice(const Activity& activity, Rng& rng) const
{
    const auto features = decode_activity(*space_, activity);
    const auto n = static_cast<std::size_t>(object_count(features.type));
    auto pool = eligible_objects(features);
    shuffle(pool, rng);
    const auto picks = take(pool, 2 * n);
    ObjectChoice choice;
    choice.reused = pool.size() < 2 * n;
    choice.options[0].objects.assign(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(n));
    choice.options[1].objects.assign(picks.begin() + static_cast<std::ptrdiff_t>(n), picks.end());
    if (bernoulli(0.5, rng))
        std::swap(choice.options[0], choice.options[1]);
    return choice;
}

ExerciseContent ContentGenerator::generate(const Activity& activity, Rng& rng, const ObjectOption* objects) const
{
    ExerciseContent c;
    c.features = decode_activity(*space_, activity);
    const auto& f = c.features;
    if (f.level < 1 || f.level > max_level(f.type))
        throw ConfigError("level " + std::to_string(f.level) + " out of range in " + describe(*space_, activity));
    c.role = role_of(f.type);
    c.show_cents = f.shows_cents();
    c.wallet = data_.denominations.at(f.shape).values;

    const auto n = static_cast<std::size_t>(object_count(f.type));
    const bool merchant = c.role == Role::merchant;
    // carry only constrains types that add amounts
    const bool constrained = !(f.type == ExerciseType::M);

    std::vector<int> prices(n);
    int change = 0;
    bool found = false;
    for (int draw = 0; draw < kMaxDraws && !found; ++draw) {
        for (auto& p : prices)
            p = draw_amount(f.level, c.show_cents, rng);
        std::vector<int> operands = prices;
        if (merchant) {
            change = draw_amount(f.level, c.show_cents, rng);
            operands.push_back(change);
        }
        found = !constrained || carry_holds(f.carry, c.show_cents, operands);
    }
    if (!found)
        throw ConfigError("no content satisfies the constraints of " + describe(*space_, activity));

    const ObjectOption picks = objects ? *objects : draw_objects(f, rng);
    if (picks.objects.size() != n)
        throw std::invalid_argument("object option has the wrong size for " + describe(*space_, activity));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& obj = data_.catalog.objects.at(picks.objects[i].object);
        c.objects.push_back({obj.id, picks.objects[i].skin, prices[i]});
    }

    const int total = std::accumulate(prices.begin(), prices.end(), 0);
    if (merchant) {
        c.paid_cents = total + change;
        c.target_cents = change;
    } else {
        c.target_cents = total;
    }
    return c;
}

} // namespace zpdes::kidlearn
