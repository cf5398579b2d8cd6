#pragma once

#include <map>
#include <string>
#include <vector>

#include "tid/network.hpp"

namespace tid {

// Observed states, variable id -> state label. Slice-qualified variables use
// the flattened "<variable>@<slice>" ids.
struct Evidence {
    Assignment assignments;

    [[nodiscard]] bool empty() const { return assignments.empty(); }
    void set(const std::string& id, const std::string& state) {
        assignments[id] = state;
    }
};

// Posterior over the joint states of `scope`, row-major with the last
// variable fastest.
struct Distribution {
    std::vector<std::string> scope;
    std::vector<std::vector<std::string>> states;  // per scope variable
    std::vector<double> probabilities;

    // P(scope = given states); the assignment must cover the whole scope.
    [[nodiscard]] double at(const Assignment& assignment) const;
    [[nodiscard]] double operator[](size_t i) const {
        return probabilities[i];
    }
};

// Real-valued table over an ordered variable scope; the standard intermediary
// for elimination.
struct Factor {
    std::vector<int> scope;  // registry indices, strictly increasing
    std::vector<long> cards;
    std::vector<double> table;  // row-major, last scope variable fastest
};

// P(query | evidence) by variable elimination with the min-fill heuristic
// (ties to the lowest variable id). Deterministic for fixed inputs. Throws
// InferenceError on zero-probability evidence.
[[nodiscard]] Distribution posterior(const Network& net,
                                     const Evidence& evidence,
                                     const std::vector<std::string>& query);

// Reference implementation by full-joint summation; guarded to joint tables
// of at most 2^24 cells.
[[nodiscard]] Distribution enumerate_posterior(
    const Network& net, const Evidence& evidence,
    const std::vector<std::string>& query);

// log P(case assignments), unobserved variables summed out. Returns -infinity
// for an impossible case (the explicit sentinel; callers decide how to flag).
[[nodiscard]] double log_likelihood(const Network& net, const Evidence& item);

struct DecisionOutcome {
    int chosen = 0;                     // index into the decision's states
    std::string chosen_action;
    std::vector<double> expected_loss;  // one entry per action
};

// Expected loss per action of the single decision node, summing value-node
// loss tables over the posterior of their chance parents; picks the argmin
// (ties to the lowest action index).
[[nodiscard]] DecisionOutcome evaluate_decision(const Network& net,
                                                const Evidence& evidence);

}  // namespace tid
