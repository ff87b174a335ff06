#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zpdes/activity_space.hpp"
#include "zpdes/rng.hpp"
#include "zpdes/zpdes_policy.hpp"

namespace zpdes::kidlearn {

enum class ExerciseType : int { M = 0, MM = 1, R = 2, RM = 3 };
inline constexpr std::array<ExerciseType, 4> kTypes{ExerciseType::M, ExerciseType::MM, ExerciseType::R,
                                                    ExerciseType::RM};

std::string_view type_id(ExerciseType type);
std::optional<ExerciseType> type_from_id(std::string_view id);
/// 6 for M, 4 otherwise.
int max_level(ExerciseType type);
/// 1 for M and R, 2 for MM and RM.
int object_count(ExerciseType type);

enum class Role { customer, merchant };
Role role_of(ExerciseType type);

enum class Presentation { integer, euro_sign, comma }; // "integer", "x€x", "x,x€"
enum class Carry { without, integer, decimal };

/// The domain reading of an activity of the Kidlearn space.
struct ActivityFeatures {
    ExerciseType type = ExerciseType::M;
    int level = 1;
    Presentation presentation = Presentation::integer;
    Carry carry = Carry::without;
    std::string shape = "real";

    bool shows_cents() const { return presentation != Presentation::integer || carry == Carry::decimal; }
    bool operator==(const ActivityFeatures&) const = default;
};

/// Reads the type, level, presentation, carry and shape parameters of an
/// activity by parameter id. Throws std::invalid_argument if type or level
/// is missing.
ActivityFeatures decode_activity(const ActivitySpace& space, const Activity& activity);

struct CatalogObject {
    std::string id;
    std::string name;
    int min_cents = 0;
    int max_cents = 0;
};

struct Catalog {
    std::vector<CatalogObject> objects;
};

struct DenominationSet {
    std::string id;
    std::string label;
    std::vector<int> values; // cents, ascending
};

struct DomainData {
    Catalog catalog;
    std::map<std::string, DenominationSet> denominations; // keyed by shape value id
};

Catalog parse_catalog(const nlohmann::json& doc);
std::map<std::string, DenominationSet> parse_denominations(const nlohmann::json& doc);
DomainData load_domain_data(const std::string& catalog_source, const std::string& denominations_source);

struct KidlearnSpace {
    std::shared_ptr<const ActivitySpace> space;
    ZpdRules rules;
};

/// Space and ZPD rules from a space config document ({primary_group, groups,
/// zpd}); throws ConfigError when the space is invalid.
KidlearnSpace load_space(const nlohmann::json& doc);
/// The shipped Kidlearn activity graph.
KidlearnSpace build_kidlearn_space();

struct PriceRange {
    int min_cents = 0;
    int max_cents = 0;
};

/// Range of single-object prices generated at a level (cents shown or not).
PriceRange price_range(int level, bool show_cents);

struct ObjectPick {
    std::size_t object = 0; // catalog index
    int skin = 0;           // > 0 when the object is repeated

    bool operator==(const ObjectPick&) const = default;
};

struct ObjectOption {
    std::vector<ObjectPick> objects;

    bool operator==(const ObjectOption&) const = default;
};

/// Two candidate object sets for one parameterization; options[0] is shown
/// on the left.
struct ObjectChoice {
    std::array<ObjectOption, 2> options;
    bool reused = false; // catalog too small, skins were used
};

struct PricedObject {
    std::string id;
    int skin = 0;
    int price_cents = 0;
};

struct ExerciseContent {
    ActivityFeatures features;
    Role role = Role::customer;
    std::vector<PricedObject> objects;
    int paid_cents = 0; // merchant types: amount handed over by the customer
    int target_cents = 0;
    bool show_cents = false;
    std::vector<int> wallet; // available denominations, ascending, unlimited supply
    int max_trials = 3;
};

/// Largest-denomination-first decomposition; empty if none exists.
std::vector<int> greedy_decomposition(int amount, std::span<const int> denominations);

enum class Verdict { correct, incorrect, failed };

struct VerifyResult {
    Verdict verdict = Verdict::incorrect;
    int trials_left = 0;
    std::vector<int> solution; // set on failure
};

/// Checks one submission given the trials already used on the exercise.
VerifyResult verify_answer(const ExerciseContent& content, std::span<const int> submitted, int trials_used);

/// Trial bookkeeping for one exercise.
class Attempt {
public:
    explicit Attempt(const ExerciseContent& content);

    VerifyResult submit(std::span<const int> submitted);
    bool finished() const { return solved_ || trials_used_ >= content_->max_trials; }
    bool solved() const { return solved_; }
    int trials_used() const { return trials_used_; }

private:
    const ExerciseContent* content_;
    int trials_used_ = 0;
    bool solved_ = false;
};

class ContentGenerator {
public:
    ContentGenerator(std::shared_ptr<const ActivitySpace> space, DomainData data);

    /// Prices, objects, payment and wallet for an activity. Objects come from
    /// `objects` when given, otherwise from `rng`. Throws ConfigError when
    /// the activity's constraints cannot be met.
    ExerciseContent generate(const Activity& activity, Rng& rng, const ObjectOption* objects = nullptr) const;

    /// Two distinct object sets fitting the activity's price class, in
    /// random left/right order.
    ObjectChoice offer_choice(const Activity& activity, Rng& rng) const;

    const DomainData& data() const { return data_; }
    const ActivitySpace& space() const { return *space_; }

private:
    std::vector<std::size_t> eligible_objects(const ActivityFeatures& features) const;
    ObjectOption draw_objects(const ActivityFeatures& features, Rng& rng) const;

    std::shared_ptr<const ActivitySpace> space_;
    DomainData data_;
};

} // namespace zpdes::kidlearn
