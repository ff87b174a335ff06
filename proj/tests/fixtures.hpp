#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "zpdes/space_io.hpp"

namespace fixtures {

inline zpdes::ActivitySpace space_from(const std::string& json)
{
    return zpdes::parse_space(zpdes::Json::parse(json));
}

inline std::shared_ptr<const zpdes::ActivitySpace> shared_space(const std::string& json)
{
    return std::make_shared<const zpdes::ActivitySpace>(space_from(json));
}

inline std::string ladder_values(int n)
{
    std::string out;
    for (int i = 1; i <= n; ++i)
        out += std::string(i > 1 ? "," : "") + "{\"id\":\"" + std::to_string(i) + "\"}";
    return out;
}

/// Unordered type {A, B}, each unlocking an n-level ordered ladder.
inline std::string two_ladders(int n = 5)
{
    return R"({"primary_group":"root","groups":[
      {"id":"root","parameters":[{"id":"type","ordered_progression":false,"values":[
        {"id":"A","dependent_group":"level_A"},{"id":"B","dependent_group":"level_B"}]}]},
      {"id":"level_A","parameters":[{"id":"level","ordered_progression":true,"values":[)" +
           ladder_values(n) + R"(]}]},
      {"id":"level_B","parameters":[{"id":"level","ordered_progression":true,"values":[)" +
           ladder_values(n) + R"(]}]}]})";
}

/// One group, one ordered parameter with n values.
inline std::string single_ladder(int n = 4)
{
    return R"({"primary_group":"g","groups":[{"id":"g","parameters":[
      {"id":"p","ordered_progression":true,"values":[)" +
           ladder_values(n) + R"(]}]}]})";
}

/// Independent Student t CDF by composite Simpson quadrature of the density.
inline double student_t_cdf_quadrature(double t, double df)
{
    const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
    auto f = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
    const double a = std::abs(t);
    const int n = 20000;
    const double h = a / n;
    double s = f(0.0) + f(a);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    const double half = s * h / 3.0;
    return t >= 0 ? 0.5 + half : 0.5 - half;
}

/// Minimal number of pieces by dynamic programming, INT_MAX if impossible.
/// Tables are built once per wallet up to the largest amount asked so far.
inline int min_pieces(int amount, const std::vector<int>& denominations)
{
    static std::map<std::vector<int>, std::vector<int>> tables;
    auto& best = tables[denominations];
    if (best.empty())
        best.push_back(0);
    for (int a = static_cast<int>(best.size()); a <= amount; ++a) {
        int b = INT_MAX;
        for (const int d : denominations) {
            if (d <= a && best[static_cast<std::size_t>(a - d)] != INT_MAX)
                b = std::min(b, best[static_cast<std::size_t>(a - d)] + 1);
        }
        best.push_back(b);
    }
    return best[static_cast<std::size_t>(amount)];
}

} // namespace fixtures
