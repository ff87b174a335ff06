#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zpdes/activity_space.hpp"

namespace zpdes {

/// What a policy did with one answered activity; recorded in traces.
struct PolicyFeedback {
    std::vector<double> rewards;          // per instantiation, before clamping
    std::vector<std::string> activated;   // value paths
    std::vector<std::string> deactivated; // value paths
    std::vector<std::string> boosted;     // value paths
    int sequence_index = -1;              // Predef step index after the update
};

/// Common surface of the sequencing policies (ZPDES and Predef).
class CurriculumPolicy {
public:
    virtual ~CurriculumPolicy() = default;

    virtual Activity next_activity() = 0;
    virtual PolicyFeedback record_outcome(const Activity& activity, bool solved) = 0;
    /// Flattened expert weights; empty for policies without experts.
    virtual Eigen::VectorXd weight_snapshot() const { return {}; }
};

} // namespace zpdes
