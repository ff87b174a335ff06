#include "zpdes/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace zpdes {

ScoreTable ScoreTable::kidlearn()
{
    return {{{"M", 1, 1.0, 6}, {"MM", 2, 2.0, 4}, {"R", 3, 3.0, 4}, {"RM", 4, 4.0, 4}}};
}

double ScoreTable::max_score() const
{
    double s = 0.0;
    for (const auto& e : types)
        s += e.factor * e.max_level;
    return s;
}

std::size_t ScoreTable::cell_count() const
{
    std::size_t n = 0;
    for (const auto& e : types)
        n += static_cast<std::size_t>(e.max_level);
    return n;
}

std::size_t ScoreTable::cell_index(int type, int level) const
{
    const auto& e = types.at(static_cast<std::size_t>(type));
    if (level < 1 || level > e.max_level)
        throw std::out_of_range("level " + std::to_string(level) + " outside the " + e.type + " ladder");
    std::size_t offset = 0;
    for (int i = 0; i < type; ++i)
        offset += static_cast<std::size_t>(types[static_cast<std::size_t>(i)].max_level);
    return offset + static_cast<std::size_t>(level - 1);
}

std::string ScoreTable::cell_name(std::size_t cell) const
{
    for (const auto& e : types) {
        if (cell < static_cast<std::size_t>(e.max_level))
            return e.type + std::to_string(cell + 1);
        cell -= static_cast<std::size_t>(e.max_level);
    }
    throw std::out_of_range("no such chronograph cell");
}

void SessionTrace::append(int type, int level, bool outcome)
{
    steps.push_back({steps.size() + 1, type, level, outcome});
}

double recent_success(const SessionTrace& trace, std::size_t t, int type, int level, std::size_t window)
{
    const std::size_t end = std::min(t, trace.steps.size());
    std::size_t seen = 0;
    std::size_t ok = 0;
    for (std::size_t i = end; i-- > 0 && seen < window;) {
        const auto& s = trace.steps[i];
        if (s.type == type && s.level == level) {
            ++seen;
            ok += s.outcome ? 1 : 0;
        }
    }
    return seen == 0 ? 0.0 : static_cast<double>(ok) / static_cast<double>(seen);
}

namespace {

// highest[type] and recent success per (type, level) up to t
struct Reach {
    std::vector<int> highest;
    std::vector<std::vector<double>> delta;
};

Reach reach_at(const SessionTrace& trace, std::size_t t, const ScoreTable& table)
{
    Reach r;
    r.highest.assign(table.types.size(), 0);
    r.delta.resize(table.types.size());
    for (std::size_t i = 0; i < table.types.size(); ++i)
        r.delta[i].assign(static_cast<std::size_t>(table.types[i].max_level) + 1, -1.0);
    const std::size_t end = std::min(t, trace.steps.size());
    for (std::size_t i = 0; i < end; ++i) {
        const auto& s = trace.steps[i];
        auto& h = r.highest.at(static_cast<std::size_t>(s.type));
        h = std::max(h, s.level);
        r.delta[static_cast<std::size_t>(s.type)].at(static_cast<std::size_t>(s.level)) = 0.0;
    }
    for (std::size_t i = 0; i < table.types.size(); ++i) {
        for (std::size_t j = 1; j < r.delta[i].size(); ++j) {
            if (r.delta[i][j] >= 0.0)
                r.delta[i][j] = recent_success(trace, t, static_cast<int>(i), static_cast<int>(j));
        }
    }
    return r;
}

} // namespace

double score_reached(const SessionTrace& trace, std::size_t t, const ScoreTable& table)
{
    const auto r = reach_at(trace, t, table);
    double s = 0.0;
    for (std::size_t i = 0; i < table.types.size(); ++i)
        s += r.highest[i] * table.types[i].factor;
    return s;
}

double score_success(const SessionTrace& trace, std::size_t t, const ScoreTable& table)
{
    const auto r = reach_at(trace, t, table);
    double s = 0.0;
    for (std::size_t i = 0; i < table.types.size(); ++i) {
        double best = 0.0;
        for (std::size_t j = 1; j < r.delta[i].size(); ++j) {
            if (r.delta[i][j] >= 0.0)
                best = std::max(best, r.delta[i][j] * static_cast<double>(j));
        }
        s += best * table.types[i].factor;
    }
    return s;
}

Eigen::Matrix2Xd score_curves(const SessionTrace& trace, std::size_t steps, const ScoreTable& table)
{
    Eigen::Matrix2Xd out(2, static_cast<Eigen::Index>(steps));
    for (std::size_t t = 1; t <= steps; ++t) {
        const auto col = static_cast<Eigen::Index>(t - 1);
        out(0, col) = score_reached(trace, t, table);
        out(1, col) = score_success(trace, t, table);
    }
    return out;
}

Chronograph chronograph(std::span<const SessionTrace> cohort, std::size_t t, const ScoreTable& table)
{
    Chronograph c;
    c.t = t;
    const auto cells = static_cast<Eigen::Index>(table.cell_count());
    const auto learners = static_cast<Eigen::Index>(cohort.size());
    for (Eigen::Index i = 0; i < cells; ++i)
        c.cells.push_back(table.cell_name(static_cast<std::size_t>(i)));
    c.state = Eigen::MatrixXi::Zero(cells, learners);
    c.success = Eigen::MatrixXd::Zero(cells, learners);
    for (Eigen::Index l = 0; l < learners; ++l) {
        const auto& trace = cohort[static_cast<std::size_t>(l)];
        const std::size_t end = std::min(t, trace.steps.size());
        for (std::size_t i = 0; i < end; ++i) {
            const auto& s = trace.steps[i];
            const auto row = static_cast<Eigen::Index>(table.cell_index(s.type, s.level));
            c.state(row, l) = static_cast<int>(CellState::explored);
        }
        if (t >= 1 && t <= trace.steps.size()) {
            const auto& s = trace.steps[t - 1];
            c.state(static_cast<Eigen::Index>(table.cell_index(s.type, s.level)), l) =
                static_cast<int>(CellState::current);
        }
        for (Eigen::Index row = 0; row < cells; ++row) {
            if (c.state(row, l) == static_cast<int>(CellState::never))
                continue;
            // recover (type, level) from the row
            int type = 0;
            auto rest = row;
            while (rest >= table.types[static_cast<std::size_t>(type)].max_level)
                rest -= table.types[static_cast<std::size_t>(type++)].max_level;
            c.success(row, l) = recent_success(trace, t, type, static_cast<int>(rest) + 1);
        }
    }
    return c;
}

void write_chronograph_csv(std::ostream& out, const Chronograph& chrono, bool header)
{
    static constexpr const char* names[] = {"never", "explored", "current"};
    if (header)
        out << "t,learner,activity,state,success_rate\n";
    for (Eigen::Index l = 0; l < chrono.state.cols(); ++l) {
        for (Eigen::Index row = 0; row < chrono.state.rows(); ++row) {
            out << chrono.t << ',' << l << ',' << chrono.cells[static_cast<std::size_t>(row)] << ','
                << names[chrono.state(row, l)] << ',' << format_number(chrono.success(row, l)) << '\n';
        }
    }
}

WelchResult welch_test(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b)
{
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("welch_test needs at least 2 observations per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = a.mean();
    const double mb = b.mean();
    const double va = (a.array() - ma).square().sum() / (na - 1.0);
    const double vb = (b.array() - mb).square().sum() / (nb - 1.0);
    const double sa = va / na;
    const double sb = vb / nb;

    WelchResult r;
    if (!(sa + sb > 0.0)) {
        r.degenerate = true;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

CurveSummary summarize(const Eigen::Ref<const Eigen::MatrixXd>& scores)
{
    CurveSummary s;
    const double n = static_cast<double>(scores.rows());
    s.mean = scores.colwise().mean();
    if (scores.rows() < 2) {
        s.sem = Eigen::RowVectorXd::Zero(scores.cols());
        return s;
    }
    const Eigen::RowVectorXd var = (scores.rowwise() - s.mean).array().square().colwise().sum() / (n - 1.0);
    s.sem = (var.array() / n).sqrt().matrix();
    return s;
}

const PairwiseTests& CohortSummary::between(std::size_t a, std::size_t b) const
{
    if (a > b)
        std::swap(a, b);
    for (const auto& t : tests) {
        if (t.a == a && t.b == b)
            return t;
    }
    throw std::out_of_range("no test between the given conditions");
}

CohortSummary cohort_summary(std::span<const ConditionScores> conditions)
{
    CohortSummary out;
    if (conditions.empty())
        return out;
    const auto steps = conditions.front().reached.cols();
    for (const auto& c : conditions) {
        if (c.reached.rows() < 2 || c.success.rows() < 2)
            throw std::invalid_argument("cohort_summary needs at least 2 learners in condition " + c.condition);
        if (c.reached.cols() != steps || c.success.cols() != steps || c.success.rows() != c.reached.rows())
            throw std::invalid_argument("cohort_summary: score matrices of " + c.condition + " have the wrong shape");
        out.conditions.push_back(c.condition);
        out.reached.push_back(summarize(c.reached));
        out.success.push_back(summarize(c.success));
    }
    for (std::size_t a = 0; a < conditions.size(); ++a) {
        for (std::size_t b = a + 1; b < conditions.size(); ++b) {
            PairwiseTests pt{a, b, {}, {}};
            for (Eigen::Index t = 0; t < steps; ++t) {
                pt.reached.push_back(welch_test(conditions[a].reached.col(t), conditions[b].reached.col(t)));
                pt.success.push_back(welch_test(conditions[a].success.col(t), conditions[b].success.col(t)));
            }
            out.tests.push_back(std::move(pt));
        }
    }
    return out;
}

void write_summary_csv(std::ostream& out, const CohortSummary& summary, std::size_t condition)
{
    out << "condition,t,reached_mean,reached_sem,success_mean,success_sem";
    for (std::size_t o = 0; o < summary.conditions.size(); ++o) {
        if (o == condition)
            continue;
        const auto& name = summary.conditions[o];
        out << ",p_reached_vs_" << name << ",degenerate_reached_vs_" << name << ",p_success_vs_" << name
            << ",degenerate_success_vs_" << name;
    }
    out << '\n';
    const auto& r = summary.reached.at(condition);
    const auto& s = summary.success.at(condition);
    for (Eigen::Index t = 0; t < r.mean.size(); ++t) {
        out << summary.conditions[condition] << ',' << t + 1 << ',' << format_number(r.mean(t)) << ','
            << format_number(r.sem(t)) << ',' << format_number(s.mean(t)) << ',' << format_number(s.sem(t));
        for (std::size_t o = 0; o < summary.conditions.size(); ++o) {
            if (o == condition)
                continue;
            const auto& pt = summary.between(condition, o);
            const auto& wr = pt.reached[static_cast<std::size_t>(t)];
            const auto& ws = pt.success[static_cast<std::size_t>(t)];
            out << ',' << format_number(wr.p) << ',' << (wr.degenerate ? 1 : 0) << ',' << format_number(ws.p) << ','
                << (ws.degenerate ? 1 : 0);
        }
        out << '\n';
    }
}

std::string format_number(double x)
{
    if (x == 0.0)
        return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace zpdes
