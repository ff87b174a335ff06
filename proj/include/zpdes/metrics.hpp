#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zpdes {

struct ScoreEntry {
    std::string type;
    int index = 0;
    double factor = 0.0;
    int max_level = 0;
};

/// Per-type factor and ladder length of the activity score.
struct ScoreTable {
    std::vector<ScoreEntry> types;

    /// M, MM, R, RM with factors 1..4 and ladders 6, 4, 4, 4.
    static ScoreTable kidlearn();

    /// Score of a learner at the top of every ladder.
    double max_score() const;
    std::size_t cell_count() const;
    /// Row of (type, level) in chronograph matrices; level starts at 1.
    std::size_t cell_index(int type, int level) const;
    std::string cell_name(std::size_t cell) const;
};

struct TraceStep {
    std::size_t t = 0;
    int type = 0;  // row of ScoreTable::types
    int level = 0; // 1-based
    bool outcome = false;
};

/// Ordered record of one session; t runs 1, 2, ... without gaps.
struct SessionTrace {
    std::vector<TraceStep> steps;

    void append(int type, int level, bool outcome);
    std::size_t size() const { return steps.size(); }
};

/// Success rate over the last `window` attempts at (type, level) up to t,
/// fewer when fewer exist; 0 when never attempted.
double recent_success(const SessionTrace& trace, std::size_t t, int type, int level, std::size_t window = 4);

/// Sum over types of factor x highest level presented by time t.
double score_reached(const SessionTrace& trace, std::size_t t, const ScoreTable& table = ScoreTable::kidlearn());

/// Sum over types of factor x max over reached levels of level x recent
/// success.
double score_success(const SessionTrace& trace, std::size_t t, const ScoreTable& table = ScoreTable::kidlearn());

/// Both scores for t = 1..steps, as rows 0 (reached) and 1 (success). Steps
/// past the end of the trace repeat the last value.
Eigen::Matrix2Xd score_curves(const SessionTrace& trace, std::size_t steps,
                              const ScoreTable& table = ScoreTable::kidlearn());

enum class CellState : int { never = 0, explored = 1, current = 2 };

/// cells x learners at one time step.
struct Chronograph {
    std::size_t t = 0;
    std::vector<std::string> cells;
    Eigen::MatrixXi state;
    Eigen::MatrixXd success; // recent success of explored cells, 0 elsewhere
};

Chronograph chronograph(std::span<const SessionTrace> cohort, std::size_t t,
                        const ScoreTable& table = ScoreTable::kidlearn());

/// Long format: t,learner,activity,state,success_rate.
void write_chronograph_csv(std::ostream& out, const Chronograph& chrono, bool header = true);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool degenerate = false; // both samples without variance, p forced to 1
};

/// Two-sided Welch t-test; each sample needs at least 2 observations.
WelchResult welch_test(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

struct CurveSummary {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd sem;
};

/// Column mean and standard error of the mean of a learners x steps matrix.
CurveSummary summarize(const Eigen::Ref<const Eigen::MatrixXd>& scores);

struct ConditionScores {
    std::string condition;
    Eigen::MatrixXd reached; // learners x steps
    Eigen::MatrixXd success;
};

struct PairwiseTests {
    std::size_t a = 0;
    std::size_t b = 0;
    std::vector<WelchResult> reached; // per step
    std::vector<WelchResult> success;
};

struct CohortSummary {
    std::vector<std::string> conditions;
    std::vector<CurveSummary> reached;
    std::vector<CurveSummary> success;
    std::vector<PairwiseTests> tests; // every unordered pair, a < b

    const PairwiseTests& between(std::size_t a, std::size_t b) const;
};

/// Throws std::invalid_argument when a condition has fewer than 2 learners
/// or step counts differ.
CohortSummary cohort_summary(std::span<const ConditionScores> conditions);

/// One row per step: condition,t,reached_mean,reached_sem,success_mean,
/// success_sem, then p and degenerate flag against every other condition.
void write_summary_csv(std::ostream& out, const CohortSummary& summary, std::size_t condition);

/// Shortest round-trip decimal text, stable across runs.
std::string format_number(double x);

} // namespace zpdes
