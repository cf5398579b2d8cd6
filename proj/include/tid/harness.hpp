#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tid/kb.hpp"
#include "tid/selection.hpp"

namespace tid {

// Full description of one experiment run. Every random draw flows from
// `seed`; there is no wall-clock entropy anywhere.
struct ExperimentConfig {
    std::string kb = "builtin:aap";  // path, or builtin:aap for the fixture
    int slice_count = 5;
    uint64_t seed = 0;
    bool seed_set = false;  // the seed is mandatory in config files
    int case_count = 2000;
    int eval_case_count = 24;
    std::string canonical;
    std::vector<CandidateSpec> candidates;
    std::vector<Criterion> criteria;
    std::vector<std::string> query;  // empty: disease-tagged slice variables
    Observations observations;       // empty: replicate the whole template
    double kappa_weight = 0.0;
    int ri_theta_samples = 16;
    int ri_datasets = 64;
    int ri_cases = 200;
    std::optional<LossSpec> loss;
};

// The bundled pilot: 5 tailored slices of the AAP presentation, candidates
// markov(1)/markov(2)/driving/observable, criteria AIC/BIC/RI/LOGSCORE0,
// canonical = markov(1). Monte Carlo sizes are trimmed for desk-scale runs.
[[nodiscard]] ExperimentConfig default_pilot_config();

[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
[[nodiscard]] std::string emit_config(const ExperimentConfig& config);

struct CandidateReport {
    std::string label;
    long nodes = 0;        // |V^N|
    long arcs = 0;         // |A^N|
    long free_params = 0;
    double wall_ms = 0.0;  // human table only; never in the machine format
};

struct Report {
    std::string version;
    std::string config_hash;  // hex FNV-1a of the canonical config emission
    uint64_t seed = 0;
    std::vector<std::string> criteria;
    std::vector<CandidateReport> candidates;
    std::vector<std::vector<double>> scores;      // [criterion][candidate]
    std::map<std::string, std::string> selected;  // criterion -> label
};

// Deterministic-content equality (wall time excluded).
[[nodiscard]] bool report_equal(const Report& a, const Report& b);

// Builds the canonical model, simulates training and evaluation cases,
// estimates every candidate, scores every (candidate, criterion) pair and
// assembles the report. Errors carry the candidate/criterion coordinate.
[[nodiscard]] Report run_pilot(const ExperimentConfig& config);

enum class ReportFormat { table, machine };

[[nodiscard]] std::string emit_report(const Report& report,
                                      ReportFormat format);
[[nodiscard]] Report parse_report(const std::string& machine_text);

// The estimation/scoring inputs run_pilot derives from a config; exposed for
// the CLI subcommands that need the pieces (simulate, estimate, score).
struct PilotSetup {
    KnowledgeBase kb;
    SliceSequence slices;
    TemporalNetwork canonical_truth;
    std::vector<std::string> query;
    int target_slice = 0;
};

[[nodiscard]] PilotSetup prepare_pilot(const ExperimentConfig& config);

}  // namespace tid
