#pragma once

#include <string>
#include <vector>

#include "tid/inference.hpp"
#include "tid/temporal.hpp"

namespace tid {

struct CaseRecord {
    int slice = 0;
    std::string variable;
    std::string state;
};

struct Case {
    std::string id;
    std::vector<CaseRecord> records;

    // var@slice -> state, the flattened-network view of the case.
    [[nodiscard]] Assignment flattened() const;
};

struct CaseSet {
    std::vector<Case> cases;

    [[nodiscard]] size_t size() const { return cases.size(); }
};

// Forward (ancestral) sampling of complete trajectories from the flattened
// network; every chance node is recorded, so simulated cases carry the
// findings alongside the true latent and disease states. Identical output for
// identical (net, count, seed).
[[nodiscard]] CaseSet simulate(const TemporalNetwork& net, int count,
                               uint64_t seed);

// Line-oriented case file: mandatory "case_id, slice, variable, state"
// header, one record per line, '#' comments, UTF-8.
[[nodiscard]] std::string write_cases(const CaseSet& cases);
[[nodiscard]] CaseSet parse_cases(const std::string& text);
[[nodiscard]] CaseSet load_cases(const std::string& path);
void save_cases(const CaseSet& cases, const std::string& path);

// Evidence/target split of one case against a flattened network: the target
// is the query variables' joint state at the target slice; the evidence is
// the case's finding-tagged records, or every non-target record when the
// network has no finding tags.
struct CaseView {
    Evidence evidence;
    Assignment target;  // flattened ids -> state
};

[[nodiscard]] CaseView split_case(const Case& item, const Network& flattened,
                                  const std::vector<std::string>& query_vars,
                                  int target_slice);

}  // namespace tid
