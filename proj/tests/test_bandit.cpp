#include <doctest.h>

#include <vector>

#include "fixtures.hpp"
#include "zpdes/bandit.hpp"

using namespace zpdes;

namespace {

// p_i by the textbook formula, one entry at a time.
std::vector<double> mixture_oracle(const std::vector<double>& w, const std::vector<bool>& on, double gamma)
{
    double total = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (on[i]) {
            total += w[i];
            ++count;
        }
    }
    std::vector<double> p(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!on[i])
            continue;
        const double tilde = total > 0.0 ? w[i] / total : 1.0 / count;
        p[i] = tilde * (1.0 - gamma) + gamma / count;
    }
    return p;
}

} // namespace

TEST_CASE("sampling_probabilities matches the mixture formula")
{
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + uniform_index(8, rng);
        std::vector<double> w(n);
        std::vector<bool> on(n);
        Eigen::VectorXd wv(static_cast<Eigen::Index>(n));
        ActiveMask mask(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = uniform01(rng) * 3.0;
            on[i] = i == 0 || uniform01(rng) < 0.7;
            wv(static_cast<Eigen::Index>(i)) = w[i];
            mask(static_cast<Eigen::Index>(i)) = on[i];
        }
        const double gamma = uniform01(rng);
        const auto p = sampling_probabilities(wv, mask, gamma);
        const auto expect = mixture_oracle(w, on, gamma);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(p(static_cast<Eigen::Index>(i)) == doctest::Approx(expect[i]).epsilon(1e-14));
        CHECK(p.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("all-zero active weights fall back to uniform")
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
    ActiveMask on(3);
    on << true, false, true;
    bool fallback = false;
    const auto p = sampling_probabilities(w, on, 0.3, &fallback);
    CHECK(fallback);
    CHECK(p(0) == doctest::Approx(0.5));
    CHECK(p(1) == 0.0);
    CHECK(p(2) == doctest::Approx(0.5));
}

TEST_CASE("no active value is an error")
{
    Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
    ActiveMask on = ActiveMask::Constant(2, false);
    CHECK_THROWS_AS(sampling_probabilities(w, on, 0.1), std::invalid_argument);
}

TEST_CASE("draw_index never returns a zero-probability entry")
{
    Eigen::VectorXd p(4);
    p << 0.0, 0.5, 0.0, 0.5;
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const auto k = draw_index(p, rng);
        CHECK((k == 1 || k == 3));
    }
}

TEST_CASE("expert_update examples")
{
    CHECK(expert_update(1.0, 0.8, 0.2, 0.5) == doctest::Approx(0.9));
    CHECK(expert_update(0.0, 0.8, 0.2, 1.0) == doctest::Approx(0.2));
    CHECK(expert_update(2.0, 1.0, 0.0, 7.0) == 2.0);
}

TEST_CASE("update_weights clamps negative rewards and touches only selected values")
{
    const auto space = fixtures::space_from(fixtures::two_ladders(3));
    ExpertWeights w(space);
    for (const auto ref : space.all_values()) {
        w.weight(ref) = 1.0;
        w.set_active(ref, true);
    }
    const auto activity = assemble_activity(space, [](std::size_t, std::size_t) { return std::size_t{0}; });
    const std::vector<double> rewards{-0.5, 0.5};
    update_weights(w, activity, rewards, BanditConfig{});
    CHECK(w.weight(space.resolve_value("root/type/A")) == doctest::Approx(0.8));
    CHECK(w.weight(space.resolve_value("level_A/level/1")) == doctest::Approx(0.9));
    CHECK(w.weight(space.resolve_value("level_A/level/2")) == 1.0);
    CHECK(w.weight(space.resolve_value("root/type/B")) == 1.0);
    const std::vector<double> wrong{0.1};
    CHECK_THROWS_AS(update_weights(w, activity, wrong, BanditConfig{}), std::invalid_argument);
}

TEST_CASE("gen_activity samples only active values")
{
    auto space = fixtures::shared_space(fixtures::two_ladders(4));
    StochasticActivitySpace sas{space, ExpertWeights(*space)};
    for (const auto ref : space->all_values())
        sas.weights.weight(ref) = 1.0;
    sas.weights.set_active(space->resolve_value("root/type/A"), true);
    sas.weights.set_active(space->resolve_value("level_A/level/2"), true);
    sas.weights.set_active(space->resolve_value("level_A/level/3"), true);
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const auto a = gen_activity(sas, BanditConfig{}, rng);
        for (const auto ref : a.selected_values())
            CHECK(sas.weights.active(ref));
    }
}

TEST_CASE("bandit config validation")
{
    CHECK_THROWS_AS((BanditConfig{1.5, 0.8, 0.2}.validate()), ConfigError);
    CHECK_THROWS_AS((BanditConfig{0.1, -0.1, 0.2}.validate()), ConfigError);
    CHECK_NOTHROW(BanditConfig{}.validate());
}
