#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tid/cases.hpp"
#include "tid/inference.hpp"
#include "tid/temporal.hpp"

namespace tid {

// Ordered registry of temporal parameter blocks: one block per (variable,
// lag) family the policy could generate. Indicator vectors are defined over
// this registry.
struct BlockRegistry {
    std::vector<std::pair<std::string, int>> blocks;  // sorted (id, lag)

    [[nodiscard]] static BlockRegistry from_policy(
        const TemporalArcPolicy& policy, const SliceSequence& slices);
    [[nodiscard]] int index_of(const std::string& variable, int lag) const;
    [[nodiscard]] size_t size() const { return blocks.size(); }
};

// gamma in {0,1}^p over a block registry; a 0 bit removes that family's arcs
// before estimation ("estimated by zero" realized as arc removal, since a
// literal all-zero row is not a distribution).
struct IndicatorVector {
    std::vector<uint8_t> bits;

    [[nodiscard]] static IndicatorVector ones(size_t n) {
        return {std::vector<uint8_t>(n, 1)};
    }
    [[nodiscard]] static IndicatorVector zeros(size_t n) {
        return {std::vector<uint8_t>(n, 0)};
    }
    [[nodiscard]] int count() const;  // |gamma|
};

struct CandidateSpec {
    std::string label;
    TemporalArcPolicy policy;
    std::optional<IndicatorVector> gamma;  // default: all ones
};

struct CandidateModel {
    std::string label;
    TemporalArcPolicy policy;
    BlockRegistry registry;
    IndicatorVector gamma;
    TemporalNetwork model;  // estimated, flattened
    long free_param_count = 0;

    // Flattened CPT entries in node order; theta-hat as one vector.
    [[nodiscard]] std::vector<double> theta_hat() const;
};

// Relative-frequency estimation with add-alpha smoothing over complete-data
// counts, pooled across slices per conditioning signature (child variable
// plus its (parent variable, lag) list). Blocks with gamma = 0 contribute no
// parameters: their arcs are removed before estimation. Cases must record
// every variable a counted signature touches.
[[nodiscard]] CandidateModel estimate(const CandidateSpec& spec,
                                      const SliceSequence& structure,
                                      const CaseSet& data, double alpha = 1.0);

// Sum over chance nodes of rows x (domain size - 1).
[[nodiscard]] long free_parameter_count(const Network& flattened);

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

enum class ErrorMeasure { sse, neg_log_likelihood, predictive_risk };

[[nodiscard]] std::string to_string(ErrorMeasure f);

// Upsilon = f + g with g = free_param_count * sigma2 * Pi; the ratio-form
// flag marks the risk-inflation criterion, which bypasses f + g.
struct Criterion {
    std::string label;
    ErrorMeasure f = ErrorMeasure::sse;
    double pi = 0.0;
    bool pi_is_log_n = false;
    double sigma2 = 1.0;
    bool ratio_form = false;

    [[nodiscard]] static Criterion aic();        // Pi = 2
    [[nodiscard]] static Criterion bic();        // Pi = log n
    [[nodiscard]] static Criterion logscore0();  // f = -log P, Pi = 0
    [[nodiscard]] static Criterion risk_inflation_preset();
    [[nodiscard]] static Criterion generic(ErrorMeasure f, double pi,
                                           double sigma2 = 1.0);
    [[nodiscard]] double resolve_pi(long n) const;
};

// Fixed evaluation inputs: held-out cases, the query variables, and the slice
// at which they are read.
struct EvalSpec {
    CaseSet cases;
    std::vector<std::string> query;
    int target_slice = 0;
};

// Concatenation over evaluation cases of the posterior marginals of each
// query variable at the target slice given the case's findings. This is the
// comparison vector for SSE between models of different structure.
[[nodiscard]] std::vector<double> reference_vector(const Network& flattened,
                                                   const EvalSpec& eval);

// Squared Euclidean distance between two comparison vectors.
[[nodiscard]] double sse(const std::vector<double>& a,
                         const std::vector<double>& b);

struct RiskInflationOptions {
    int theta_samples = 16;       // finite-max approximation of the sup
    int datasets_per_theta = 64;  // Monte Carlo datasets per theta
    int cases_per_dataset = 200;
    uint64_t seed = 0;
    double alpha = 1.0;
};

struct PredictiveRiskOptions {
    int datasets = 16;
    int cases_per_dataset = 200;
    uint64_t seed = 0;
    double alpha = 1.0;
};

struct RiskInflationInputs {
    CandidateSpec reference;                    // gamma*
    std::vector<TemporalNetwork> theta_samples; // true-model samples
    SliceSequence structure;
    RiskInflationOptions options;
};

struct PredictiveRiskInputs {
    TemporalNetwork theta_true;
    SliceSequence structure;
    PredictiveRiskOptions options;
};

struct EvalContext {
    EvalSpec eval;
    std::vector<double> reference;  // canonical model's comparison vector
    long n_train = 1;
    // kappa: optional computation penalty, kappa_weight * |A^N| of the
    // candidate; off (0) by default.
    double kappa_weight = 0.0;
    std::optional<RiskInflationInputs> ri;
    std::optional<PredictiveRiskInputs> pr;
};

// f(model) under the chosen error measure: mean-per-case SSE against the
// context's reference vector, total sequential log score, or Monte Carlo
// predictive risk.
[[nodiscard]] double error_measure(const CandidateModel& model,
                                   const EvalContext& ctx, ErrorMeasure f);

[[nodiscard]] double criterion_value(const CandidateModel& model,
                                     const EvalContext& ctx,
                                     const Criterion& criterion);

// Argmin of criterion_value; ties break to fewer free parameters, then to the
// lexicographically smaller label. Returns an index into `candidates`.
[[nodiscard]] size_t select(const std::vector<CandidateModel>& candidates,
                            const EvalContext& ctx,
                            const Criterion& criterion);

// sup over the theta samples of the candidate-to-reference risk ratio, each
// risk a Monte Carlo mean of squared estimation error over datasets drawn
// from the theta sample. The sup is a finite max over the supplied samples.
// The data streams are keyed by (theta index, dataset index) only, so the
// candidate and the reference see identical datasets and RI(gamma*) is
// exactly 1. Throws on a zero reference risk ("degenerate reference").
[[nodiscard]] double risk_inflation(
    const CandidateSpec& candidate, const CandidateSpec& reference,
    const std::vector<TemporalNetwork>& theta_samples,
    const SliceSequence& structure, const EvalSpec& eval,
    const RiskInflationOptions& options);

struct PredictiveRiskResult {
    double value = 0.0;
    bool degenerate = false;  // zero-variance generator: all datasets equal
};

[[nodiscard]] PredictiveRiskResult predictive_risk(
    const CandidateSpec& candidate, const TemporalNetwork& theta_true,
    const SliceSequence& structure, const EvalSpec& eval,
    const PredictiveRiskOptions& options);

// ---------------------------------------------------------------------------
// Sequential log score
// ---------------------------------------------------------------------------

struct LogScoreResult {
    double total = 0.0;
    std::vector<double> per_case;
    bool impossible = false;  // some case had probability zero
};

// Supports monitoring as data arrives: feed cases one at a time.
class LogScoreAccumulator {
public:
    LogScoreAccumulator(const Network& flattened,
                        std::vector<std::string> query, int target_slice);
    double add(const Case& item);  // returns the per-case score
    [[nodiscard]] const LogScoreResult& result() const { return result_; }

private:
    const Network& net_;
    std::vector<std::string> query_;
    int target_slice_;
    LogScoreResult result_;
};

// S = sum over cases of -log P(target | evidence), plus the per-case trace.
[[nodiscard]] LogScoreResult sequential_log_score(
    const Network& flattened, const CaseSet& cases,
    const std::vector<std::string>& query, int target_slice);

// ---------------------------------------------------------------------------
// Decision-theoretic risk
// ---------------------------------------------------------------------------

struct LossSpec {
    std::string world_var;  // variable defining the world states
    std::vector<std::string> actions;
    std::vector<std::vector<double>> table;  // [world state][action]
};

// Total rule over the finding space: act `action_if_reached` when the
// posterior of (disease = state) under the evaluated model reaches the
// threshold, `action_otherwise` (the default action) below it.
struct DecisionRule {
    std::string disease;
    std::string state;
    double threshold = 0.5;
    int action_if_reached = 0;
    int action_otherwise = 0;
};

struct RiskOptions {
    long enumeration_guard = 1L << 16;  // max finding configurations
    int mc_samples = 0;                 // 0 = exact enumeration only
    uint64_t seed = 0;
};

// R(theta, rule) = E over finding configurations X of the expected loss of
// the rule's action; exact enumeration when the finding space fits the guard,
// Monte Carlo (documented sample count and seed) when enabled.
[[nodiscard]] double risk(const LossSpec& loss, const DecisionRule& rule,
                          const Network& model,
                          const RiskOptions& options = {});

using ParameterPrior = std::vector<std::pair<double, Network>>;

// r(prior, rule) = prior-weighted average of risk; weights must sum to 1.
[[nodiscard]] double bayes_risk(const LossSpec& loss, const DecisionRule& rule,
                                const ParameterPrior& prior,
                                const RiskOptions& options = {});

// Argmin of bayes_risk over the supplied rule family; ties break to the
// lowest threshold. Returns an index into `rules`.
[[nodiscard]] size_t bayes_rule(const LossSpec& loss,
                                const ParameterPrior& prior,
                                const std::vector<DecisionRule>& rules,
                                const RiskOptions& options = {});

// Seeded perturbation of a model's parameters; used to build theta-sample
// sets for the risk-inflation sup.
[[nodiscard]] TemporalNetwork perturbed_model(const TemporalNetwork& base,
                                              double weight, uint64_t seed,
                                              uint64_t index);

}  // namespace tid
