#include "tid/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace tid {

BlockRegistry BlockRegistry::from_policy(const TemporalArcPolicy& policy,
                                         const SliceSequence& slices) {
    BlockRegistry reg;
    std::set<std::pair<std::string, int>> seen;
    for (const auto& arc : generate_arcs(policy, slices))
        seen.insert({arc.to_var, arc.lag()});
    reg.blocks.assign(seen.begin(), seen.end());
    return reg;
}

int BlockRegistry::index_of(const std::string& variable, int lag) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].first == variable && blocks[i].second == lag)
            return static_cast<int>(i);
    return -1;
}

int IndicatorVector::count() const {
    int c = 0;
    for (uint8_t b : bits) c += b ? 1 : 0;
    return c;
}

std::vector<double> CandidateModel::theta_hat() const {
    std::vector<double> out;
    for (const auto& node : model.flattened.nodes()) {
        if (!node.cpt) continue;
        for (const auto& row : node.cpt->rows)
            out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

long free_parameter_count(const Network& flattened) {
    long total = 0;
    for (const auto& node : flattened.nodes()) {
        if (node.kind != NodeKind::chance) continue;
        total += flattened.row_count(node) * (node.variable.cardinality() - 1);
    }
    return total;
}

namespace {

// Conditioning signature of one counted table: child variable plus its
// (parent variable, lag) list, lag 0 meaning within-slice.
struct Signature {
    std::string child;
    std::vector<std::pair<std::string, int>> parents;

    bool operator<(const Signature& other) const {
        if (child != other.child) return child < other.child;
        return parents < other.parents;
    }
};

struct CountTable {
    std::vector<int> parent_cards;
    int child_card = 0;
    std::vector<std::vector<double>> counts;  // [row][child state]
};

const std::string& case_value(const Case& item, const Assignment& flat,
                              const std::string& var, int slice) {
    auto it = flat.find(slice_id(var, slice));
    if (it == flat.end())
        throw InferenceError("case '" + item.id + "' is missing a value for '" +
                             var + "' at slice " + std::to_string(slice) +
                             "; estimation needs complete data");
    return it->second;
}

}  // namespace

CandidateModel estimate(const CandidateSpec& spec,
                        const SliceSequence& structure, const CaseSet& data,
                        double alpha) {
    CandidateModel out;
    out.label = spec.label;
    out.policy = spec.policy;
    out.registry = BlockRegistry::from_policy(spec.policy, structure);
    out.gamma = spec.gamma ? *spec.gamma
                           : IndicatorVector::ones(out.registry.size());
    if (out.gamma.bits.size() != out.registry.size())
        throw InferenceError("indicator vector length " +
                             std::to_string(out.gamma.bits.size()) +
                             " does not match registry size " +
                             std::to_string(out.registry.size()));

    // gamma = 0 removes the whole (variable, lag) family before estimation.
    std::vector<TemporalArc> arcs;
    for (const auto& arc : generate_arcs(spec.policy, structure)) {
        int block = out.registry.index_of(arc.to_var, arc.lag());
        if (block >= 0 && out.gamma.bits[block]) arcs.push_back(arc);
    }

    std::map<std::pair<int, std::string>, std::vector<TemporalArc>> incoming;
    for (const auto& arc : arcs)
        incoming[{arc.to_slice, arc.to_var}].push_back(arc);

    // Which signature each (slice, node) instance contributes counts to.
    std::map<Signature, CountTable> tables;
    std::map<std::pair<int, std::string>, Signature> instance_sig;
    const int horizon = structure.horizon();
    for (int t = 0; t <= horizon; ++t) {
        const Network& g = structure.slices[t];
        for (const auto& node : g.nodes()) {
            if (node.kind != NodeKind::chance) continue;
            Signature sig;
            sig.child = node.id();
            for (const auto& p : node.parents) sig.parents.emplace_back(p, 0);
            auto inc = incoming.find({t, node.id()});
            if (inc != incoming.end()) {
                std::vector<std::pair<std::string, int>> temporal;
                for (const auto& arc : inc->second)
                    temporal.emplace_back(arc.from_var, arc.lag());
                for (const auto& tp :
                     TransitionTable::canonical_parents(temporal))
                    sig.parents.push_back(tp);
            }
            instance_sig[{t, node.id()}] = sig;
            if (!tables.count(sig)) {
                CountTable table;
                long rows = 1;
                for (const auto& [pv, lag] : sig.parents) {
                    int card = structure.slices[lag == 0 ? t : t - lag]
                                   .node(pv)
                                   .variable.cardinality();
                    table.parent_cards.push_back(card);
                    rows *= card;
                }
                table.child_card = node.variable.cardinality();
                table.counts.assign(rows,
                                    std::vector<double>(table.child_card, 0.0));
                tables.emplace(sig, std::move(table));
            }
        }
    }

    // Pool counts across slices per signature.
    for (const auto& item : data.cases) {
        Assignment flat = item.flattened();
        for (const auto& [key, sig] : instance_sig) {
            const auto& [t, child] = key;
            const Network& g = structure.slices[t];
            const Node& node = g.node(child);
            CountTable& table = tables.at(sig);
            long row = 0;
            for (size_t i = 0; i < sig.parents.size(); ++i) {
                const auto& [pv, lag] = sig.parents[i];
                const std::string& state = case_value(item, flat, pv, t - lag);
                int s = structure.slices[t - lag]
                            .node(pv)
                            .variable.state_index(state);
                if (s < 0)
                    throw InferenceError("case '" + item.id + "': '" + state +
                                         "' is not a state of '" + pv + "'");
                row = row * table.parent_cards[i] + s;
            }
            const std::string& cstate = case_value(item, flat, child, t);
            int cs = node.variable.state_index(cstate);
            if (cs < 0)
                throw InferenceError("case '" + item.id + "': '" + cstate +
                                     "' is not a state of '" + child + "'");
            table.counts[row][cs] += 1.0;
        }
    }

    // Laplace rows.
    auto estimate_rows = [&](const CountTable& table) {
        Cpt cpt;
        for (const auto& row : table.counts) {
            double total = 0.0;
            for (double c : row) total += c;
            std::vector<double> probs(row.size());
            double denom = total + alpha * row.size();
            for (size_t s = 0; s < row.size(); ++s)
                probs[s] = (row[s] + alpha) / denom;
            cpt.rows.push_back(std::move(probs));
        }
        return cpt;
    };

    // Estimated slices: within-slice CPTs from the pooled lag-0 signatures.
    SliceSequence estimated = structure;
    TransitionSpecSet est_transitions;
    std::set<Signature> transition_done;
    for (const auto& [key, sig] : instance_sig) {
        const auto& [t, child] = key;
        bool temporal = false;
        for (const auto& [pv, lag] : sig.parents)
            if (lag > 0) temporal = true;
        if (!temporal) {
            estimated.slices[t].set_cpt(child, estimate_rows(tables.at(sig)));
        } else if (!transition_done.count(sig)) {
            transition_done.insert(sig);
            TransitionTable tt;
            tt.child = child;
            for (const auto& [pv, lag] : sig.parents)
                if (lag > 0) tt.temporal_parents.emplace_back(pv, lag);
            tt.table = estimate_rows(tables.at(sig));
            est_transitions.add(std::move(tt));
        }
    }

    out.model = unroll_arcs(estimated, arcs, est_transitions, spec.policy);
    out.free_param_count = free_parameter_count(out.model.flattened);
    return out;
}

std::string to_string(ErrorMeasure f) {
    switch (f) {
        case ErrorMeasure::sse: return "sse";
        case ErrorMeasure::neg_log_likelihood: return "nll";
        case ErrorMeasure::predictive_risk: return "predictive_risk";
    }
    return "sse";
}

Criterion Criterion::aic() {
    Criterion c;
    c.label = "AIC";
    c.f = ErrorMeasure::sse;
    c.pi = 2.0;
    return c;
}

Criterion Criterion::bic() {
    Criterion c;
    c.label = "BIC";
    c.f = ErrorMeasure::sse;
    c.pi_is_log_n = true;
    return c;
}

Criterion Criterion::logscore0() {
    Criterion c;
    c.label = "LOGSCORE0";
    c.f = ErrorMeasure::neg_log_likelihood;
    c.pi = 0.0;
    return c;
}

Criterion Criterion::risk_inflation_preset() {
    Criterion c;
    c.label = "RI";
    c.ratio_form = true;
    return c;
}

Criterion Criterion::generic(ErrorMeasure f, double pi, double sigma2) {
    Criterion c;
    c.label = "custom";
    c.f = f;
    c.pi = pi;
    c.sigma2 = sigma2;
    return c;
}

double Criterion::resolve_pi(long n) const {
    if (n < 1) throw InferenceError("criterion requires case count n >= 1");
    double value = pi_is_log_n ? std::log(static_cast<double>(n)) : pi;
    if (value < 0.0)
        throw InferenceError("penalty coefficient must be non-negative");
    return value;
}

std::vector<double> reference_vector(const Network& flattened,
                                     const EvalSpec& eval) {
    std::vector<double> out;
    for (const auto& item : eval.cases.cases) {
        // Query coordinates are excluded from the evidence even when the
        // network has no finding tags (then evidence = all other records).
        CaseView view =
            split_case(item, flattened, eval.query, eval.target_slice);
        for (const auto& q : eval.query) {
            Distribution marginal = posterior(
                flattened, view.evidence, {slice_id(q, eval.target_slice)});
            out.insert(out.end(), marginal.probabilities.begin(),
                       marginal.probabilities.end());
        }
    }
    return out;
}

double sse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw InferenceError("comparison vectors differ in dimension: " +
                             std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double total = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        total += d * d;
    }
    return total;
}

double error_measure(const CandidateModel& model, const EvalContext& ctx,
                     ErrorMeasure f) {
    switch (f) {
        case ErrorMeasure::sse: {
            auto vec = reference_vector(model.model.flattened, ctx.eval);
            size_t n = std::max<size_t>(1, ctx.eval.cases.size());
            return sse(vec, ctx.reference) / static_cast<double>(n);
        }
        case ErrorMeasure::neg_log_likelihood: {
            return sequential_log_score(model.model.flattened, ctx.eval.cases,
                                        ctx.eval.query, ctx.eval.target_slice)
                .total;
        }
        case ErrorMeasure::predictive_risk: {
            if (!ctx.pr)
                throw InferenceError(
                    "predictive_risk error measure needs the true model in "
                    "the evaluation context");
            CandidateSpec spec{model.label, model.policy, model.gamma};
            return predictive_risk(spec, ctx.pr->theta_true,
                                   ctx.pr->structure, ctx.eval,
                                   ctx.pr->options)
                .value;
        }
    }
    throw InferenceError("unknown error measure");
}

double criterion_value(const CandidateModel& model, const EvalContext& ctx,
                       const Criterion& criterion) {
    if (criterion.sigma2 < 0.0)
        throw InferenceError("sigma^2 must be non-negative");
    if (criterion.ratio_form) {
        if (!ctx.ri)
            throw InferenceError(
                "risk-inflation criterion needs theta samples and a reference "
                "candidate in the evaluation context");
        CandidateSpec spec{model.label, model.policy, model.gamma};
        return risk_inflation(spec, ctx.ri->reference, ctx.ri->theta_samples,
                              ctx.ri->structure, ctx.eval, ctx.ri->options);
    }
    double f = error_measure(model, ctx, criterion.f);
    double penalty = static_cast<double>(model.free_param_count) *
                     criterion.sigma2 * criterion.resolve_pi(ctx.n_train);
    if (ctx.kappa_weight != 0.0) {
        long arcs = count_elements(model.model).arcs;
        penalty += ctx.kappa_weight * static_cast<double>(arcs);
    }
    return f + penalty;
}

size_t select(const std::vector<CandidateModel>& candidates,
              const EvalContext& ctx, const Criterion& criterion) {
    if (candidates.empty())
        throw InferenceError("select needs at least one candidate");
    size_t best = 0;
    double best_value = criterion_value(candidates[0], ctx, criterion);
    for (size_t i = 1; i < candidates.size(); ++i) {
        double value = criterion_value(candidates[i], ctx, criterion);
        bool better = value < best_value;
        if (value == best_value) {
            if (candidates[i].free_param_count <
                candidates[best].free_param_count)
                better = true;
            else if (candidates[i].free_param_count ==
                         candidates[best].free_param_count &&
                     candidates[i].label < candidates[best].label)
                better = true;
        }
        if (better) {
            best = i;
            best_value = value;
        }
    }
    return best;
}

namespace {

// Mean over datasets drawn from `truth` of the squared estimation error of
// the candidate, measured on reference vectors. Streams are keyed by
// (theta index, dataset index) so every candidate sees the same data.
double monte_carlo_risk(const CandidateSpec& candidate,
                        const TemporalNetwork& truth,
                        const SliceSequence& structure, const EvalSpec& eval,
                        const std::vector<double>& truth_vector, int datasets,
                        int cases_per_dataset, uint64_t seed,
                        uint64_t theta_index, double alpha) {
    double total = 0.0;
    for (int d = 0; d < datasets; ++d) {
        uint64_t data_seed =
            fnv1a64("ri-data", seed ^ (theta_index * 0x9e3779b97f4a7c15ull)) +
            static_cast<uint64_t>(d);
        CaseSet dataset = simulate(truth, cases_per_dataset, data_seed);
        CandidateModel fitted = estimate(candidate, structure, dataset, alpha);
        auto vec = reference_vector(fitted.model.flattened, eval);
        total += sse(vec, truth_vector);
    }
    return total / datasets;
}

}  // namespace

double risk_inflation(const CandidateSpec& candidate,
                      const CandidateSpec& reference,
                      const std::vector<TemporalNetwork>& theta_samples,
                      const SliceSequence& structure, const EvalSpec& eval,
                      const RiskInflationOptions& options) {
    if (theta_samples.empty())
        throw InferenceError("risk inflation needs at least one theta sample");
    if (options.datasets_per_theta < 1 || options.cases_per_dataset < 1)
        throw InferenceError("risk inflation Monte Carlo sizes must be >= 1");

    double worst = -std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < theta_samples.size(); ++s) {
        const TemporalNetwork& truth = theta_samples[s];
        auto truth_vector = reference_vector(truth.flattened, eval);
        double numerator = monte_carlo_risk(
            candidate, truth, structure, eval, truth_vector,
            options.datasets_per_theta, options.cases_per_dataset,
            options.seed, s, options.alpha);
        double denominator = monte_carlo_risk(
            reference, truth, structure, eval, truth_vector,
            options.datasets_per_theta, options.cases_per_dataset,
            options.seed, s, options.alpha);
        if (denominator == 0.0) {
            if (numerator == 0.0) {
                worst = std::max(worst, 1.0);
                continue;
            }
            throw InferenceError(
                "degenerate reference: the ideal model has zero risk");
        }
        worst = std::max(worst, numerator / denominator);
    }
    return worst;
}

PredictiveRiskResult predictive_risk(const CandidateSpec& candidate,
                                     const TemporalNetwork& theta_true,
                                     const SliceSequence& structure,
                                     const EvalSpec& eval,
                                     const PredictiveRiskOptions& options) {
    if (options.datasets < 1)
        throw InferenceError("predictive risk needs at least one dataset");
    auto truth_vector = reference_vector(theta_true.flattened, eval);
    PredictiveRiskResult result;
    double total = 0.0;
    std::set<uint64_t> dataset_hashes;
    for (int d = 0; d < options.datasets; ++d) {
        uint64_t data_seed = fnv1a64("pr-data", options.seed) +
                             static_cast<uint64_t>(d);
        CaseSet dataset =
            simulate(theta_true, options.cases_per_dataset, data_seed);
        dataset_hashes.insert(fnv1a64(write_cases(dataset)));
        CandidateModel fitted =
            estimate(candidate, structure, dataset, options.alpha);
        auto vec = reference_vector(fitted.model.flattened, eval);
        total += sse(vec, truth_vector);
    }
    result.value = total / options.datasets;
    result.degenerate = options.datasets > 1 && dataset_hashes.size() == 1;
    return result;
}

LogScoreAccumulator::LogScoreAccumulator(const Network& flattened,
                                         std::vector<std::string> query,
                                         int target_slice)
    : net_(flattened), query_(std::move(query)), target_slice_(target_slice) {
    if (query_.empty())
        throw InferenceError("sequential log score needs a target query");
}

double LogScoreAccumulator::add(const Case& item) {
    CaseView view = split_case(item, net_, query_, target_slice_);
    std::vector<std::string> target_ids;
    for (const auto& q : query_)
        target_ids.push_back(slice_id(q, target_slice_));
    double score;
    try {
        Distribution joint = posterior(net_, view.evidence, target_ids);
        double p = joint.at(view.target);
        if (p > 0.0) {
            score = -std::log(p);
        } else {
            score = std::numeric_limits<double>::infinity();
            result_.impossible = true;
        }
    } catch (const InferenceError&) {
        // zero-probability evidence: the case itself is impossible
        score = std::numeric_limits<double>::infinity();
        result_.impossible = true;
    }
    result_.per_case.push_back(score);
    result_.total += score;
    return score;
}

LogScoreResult sequential_log_score(const Network& flattened,
                                    const CaseSet& cases,
                                    const std::vector<std::string>& query,
                                    int target_slice) {
    LogScoreAccumulator acc(flattened, query, target_slice);
    for (const auto& item : cases.cases) acc.add(item);
    return acc.result();
}

namespace {

void check_loss(const LossSpec& loss, const Network& model) {
    if (!model.has_node(loss.world_var))
        throw InferenceError("loss world variable '" + loss.world_var +
                             "' is not in the model");
    const Variable& world = model.node(loss.world_var).variable;
    if (static_cast<int>(loss.table.size()) != world.cardinality())
        throw InferenceError("loss table rows must cover every world state");
    for (const auto& row : loss.table) {
        if (row.size() != loss.actions.size())
            throw InferenceError("loss table row width must equal the action "
                                 "count");
        for (double v : row)
            if (!std::isfinite(v))
                throw InferenceError("loss entries must be finite");
    }
}

int rule_action(const DecisionRule& rule, const LossSpec& loss,
                const Network& model, const Evidence& evidence) {
    Distribution post = posterior(model, evidence, {rule.disease});
    Assignment key;
    key[rule.disease] = rule.state;
    double p = post.at(key);
    int a = p >= rule.threshold ? rule.action_if_reached
                                : rule.action_otherwise;
    if (a < 0 || a >= static_cast<int>(loss.actions.size()))
        throw InferenceError("decision rule action index out of range");
    return a;
}

double expected_loss_given(const LossSpec& loss, const Network& model,
                           const Evidence& evidence, int action) {
    Distribution post = posterior(model, evidence, {loss.world_var});
    double total = 0.0;
    for (size_t w = 0; w < post.probabilities.size(); ++w)
        total += post.probabilities[w] * loss.table[w][action];
    return total;
}

}  // namespace

double risk(const LossSpec& loss, const DecisionRule& rule,
            const Network& model, const RiskOptions& options) {
    model.require_valid();
    check_loss(loss, model);
    if (!model.has_node(rule.disease))
        throw InferenceError("rule disease '" + rule.disease +
                             "' is not in the model");

    std::vector<const Node*> findings;
    for (const auto& node : model.nodes())
        if (node.kind == NodeKind::chance &&
            node.variable.tag == VariableTag::finding)
            findings.push_back(&node);
    if (findings.empty())
        throw InferenceError("risk needs finding-tagged variables to span the "
                             "observation space");

    long configs = 1;
    for (const Node* f : findings) {
        configs *= f->variable.cardinality();
        if (configs > options.enumeration_guard) break;
    }

    if (configs <= options.enumeration_guard) {
        double total = 0.0;
        for (long c = 0; c < configs; ++c) {
            long rem = c;
            Evidence evidence;
            for (size_t i = findings.size(); i-- > 0;) {
                int card = findings[i]->variable.cardinality();
                evidence.set(findings[i]->id(),
                             findings[i]->variable.states[rem % card]);
                rem /= card;
            }
            double log_px = log_likelihood(model, evidence);
            if (!std::isfinite(log_px)) continue;  // unreachable configuration
            double px = std::exp(log_px);
            int action = rule_action(rule, loss, model, evidence);
            total += px * expected_loss_given(loss, model, evidence, action);
        }
        return total;
    }

    if (options.mc_samples < 1)
        throw InferenceError(
            "finding space exceeds the enumeration guard; enable Monte Carlo "
            "sampling (mc_samples) to approximate the risk");
    auto gen = seed_stream(options.seed, "risk-mc");
    auto order = model.topological_order();
    double total = 0.0;
    for (int s = 0; s < options.mc_samples; ++s) {
        Assignment sampled;
        for (size_t idx : order) {
            const Node& node = model.nodes()[idx];
            if (node.kind != NodeKind::chance) continue;
            long row = model.row_index(node, sampled);
            int st = sample_categorical(node.cpt->rows[row], gen);
            sampled[node.id()] = node.variable.states[st];
        }
        Evidence evidence;
        for (const Node* f : findings)
            evidence.set(f->id(), sampled.at(f->id()));
        int action = rule_action(rule, loss, model, evidence);
        total += expected_loss_given(loss, model, evidence, action);
    }
    return total / options.mc_samples;
}

double bayes_risk(const LossSpec& loss, const DecisionRule& rule,
                  const ParameterPrior& prior, const RiskOptions& options) {
    if (prior.empty()) throw InferenceError("empty parameter prior");
    double weight_sum = 0.0;
    for (const auto& [w, net] : prior) weight_sum += w;
    if (std::abs(weight_sum - 1.0) > 1e-9)
        throw InferenceError("prior weights must sum to 1 (got " +
                             format_double(weight_sum) + ")");
    double total = 0.0;
    for (const auto& [w, net] : prior)
        total += w * risk(loss, rule, net, options);
    return total;
}

size_t bayes_rule(const LossSpec& loss, const ParameterPrior& prior,
                  const std::vector<DecisionRule>& rules,
                  const RiskOptions& options) {
    if (rules.empty()) throw InferenceError("empty decision rule list");
    size_t best = 0;
    double best_risk = bayes_risk(loss, rules[0], prior, options);
    for (size_t i = 1; i < rules.size(); ++i) {
        double r = bayes_risk(loss, rules[i], prior, options);
        if (r < best_risk ||
            (r == best_risk && rules[i].threshold < rules[best].threshold)) {
            best = i;
            best_risk = r;
        }
    }
    return best;
}

TemporalNetwork perturbed_model(const TemporalNetwork& base, double weight,
                                uint64_t seed, uint64_t index) {
    TemporalNetwork out = base;
    auto gen = seed_stream(seed, "theta-jitter", index);
    for (auto& id : out.flattened.node_ids()) {
        Node& node = out.flattened.node(id);
        if (!node.cpt) continue;
        for (auto& row : node.cpt->rows) {
            double total = 0.0;
            std::vector<double> mixed(row.size());
            for (size_t s = 0; s < row.size(); ++s) {
                double u = 0.05 + 0.95 * uniform01(gen);
                mixed[s] = (1.0 - weight) * row[s] + weight * u;
                total += mixed[s];
            }
            for (size_t s = 0; s < row.size(); ++s) row[s] = mixed[s] / total;
        }
    }
    return out;
}

}  // namespace tid
