#include "tid/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "lexer.hpp"
#include "tid/aap.hpp"
#include "tid/text_format.hpp"

namespace tid {

namespace {

using detail::Lexer;
using detail::Tok;
using detail::parse_id_list;
using detail::parse_number;
using detail::parse_number_list;

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    return out;
}

}  // namespace

ExperimentConfig default_pilot_config() {
    ExperimentConfig cfg;
    cfg.kb = "builtin:aap";
    cfg.slice_count = 5;
    cfg.seed = 20230817;
    cfg.seed_set = true;
    cfg.case_count = 2000;
    cfg.eval_case_count = 24;
    cfg.canonical = "markov1";
    cfg.query = {"App", "NSAP"};

    for (int t = 0; t < cfg.slice_count; ++t)
        cfg.observations.per_slice.push_back(aap::presentation());

    cfg.candidates.push_back({"markov1", TemporalArcPolicy::markov(1), {}});
    cfg.candidates.push_back({"markov2", TemporalArcPolicy::markov(2), {}});
    cfg.candidates.push_back(
        {"driving", TemporalArcPolicy::driving(aap::driving_set(), 1), {}});
    cfg.candidates.push_back(
        {"observable",
         TemporalArcPolicy::observable(aap::presented_findings(), 1),
         {}});

    // sigma^2 for the SSE-based presets is scaled so the parameter penalty is
    // commensurate with the mean-per-case SSE of the reference vectors.
    Criterion aic = Criterion::aic();
    aic.sigma2 = 1e-4;
    Criterion bic = Criterion::bic();
    bic.sigma2 = 1e-4;
    cfg.criteria = {aic, bic, Criterion::risk_inflation_preset(),
                    Criterion::logscore0()};

    cfg.ri_theta_samples = 6;
    cfg.ri_datasets = 12;
    cfg.ri_cases = 200;
    return cfg;
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

namespace {

TemporalArcPolicy parse_policy(Lexer& lex, const std::string& kind_word) {
    TemporalArcPolicy policy;
    if (kind_word == "markov")
        policy.kind = PolicyKind::markov;
    else if (kind_word == "driving")
        policy.kind = PolicyKind::driving;
    else if (kind_word == "observable")
        policy.kind = PolicyKind::observable;
    else if (kind_word == "custom")
        policy.kind = PolicyKind::custom;
    else
        lex.fail("unknown policy kind '" + kind_word + "'");
    return policy;
}

Criterion parse_criterion_body(Lexer& lex, const std::string& label) {
    Criterion c;
    c.label = label;
    bool preset_seen = false;
    while (lex.peek().kind == Tok::word) {
        std::string key = lex.peek().text;
        // a word that is not a criterion field starts the next entry
        if (key != "preset" && key != "f" && key != "pi" && key != "sigma2")
            break;
        lex.take();
        lex.expect(Tok::equals, "'='");
        if (key == "preset") {
            std::string p = lex.expect(Tok::word, "preset name").text;
            std::string keep_label = c.label;
            if (p == "aic")
                c = Criterion::aic();
            else if (p == "bic")
                c = Criterion::bic();
            else if (p == "ri")
                c = Criterion::risk_inflation_preset();
            else if (p == "logscore0")
                c = Criterion::logscore0();
            else
                lex.fail("unknown criterion preset '" + p + "'");
            c.label = keep_label;
            preset_seen = true;
        } else if (key == "f") {
            std::string f = lex.expect(Tok::word, "error measure").text;
            if (f == "sse")
                c.f = ErrorMeasure::sse;
            else if (f == "nll")
                c.f = ErrorMeasure::neg_log_likelihood;
            else if (f == "predictive_risk")
                c.f = ErrorMeasure::predictive_risk;
            else
                lex.fail("unknown error measure '" + f + "'");
        } else if (key == "pi") {
            if (lex.peek().text == "logn") {
                lex.take();
                c.pi_is_log_n = true;
            } else {
                c.pi = parse_number(lex);
            }
        } else if (key == "sigma2") {
            c.sigma2 = parse_number(lex);
        } else {
            lex.fail("unknown criterion field '" + key + "'");
        }
    }
    (void)preset_seen;
    return c;
}

std::string policy_to_config(const TemporalArcPolicy& policy) {
    std::ostringstream os;
    os << to_string(policy.kind);
    if (policy.kind != PolicyKind::custom)
        os << " order=" << policy.order;
    if (!policy.scope.empty())
        os << " scope={ " << join_ids(policy.scope) << " }";
    if (!policy.custom_arcs.empty()) {
        os << " arcs={";
        for (size_t i = 0; i < policy.custom_arcs.size(); ++i) {
            const auto& a = policy.custom_arcs[i];
            os << (i ? ", " : " ") << slice_id(a.from_var, a.from_slice)
               << " -> " << slice_id(a.to_var, a.to_slice);
        }
        os << " }";
    }
    return os.str();
}

std::string criterion_to_config(const Criterion& c) {
    std::ostringstream os;
    if (c.ratio_form) {
        os << "preset=ri";
        return os.str();
    }
    os << "f=" << to_string(c.f) << " pi=";
    if (c.pi_is_log_n)
        os << "logn";
    else
        os << format_double(c.pi);
    if (c.sigma2 != 1.0) os << " sigma2=" << format_double(c.sigma2);
    return os.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    Lexer lex(text);
    ExperimentConfig cfg;
    cfg.candidates.clear();
    cfg.criteria.clear();

    while (lex.peek().kind != Tok::end) {
        std::string section = lex.expect(Tok::word, "section").text;
        lex.expect(Tok::lbrace, "'{'");
        if (section == "experiment") {
            while (lex.peek().kind != Tok::rbrace) {
                std::string key = lex.expect(Tok::word, "setting").text;
                if (key == "kb") {
                    // paths may carry colons (builtin:aap)
                    cfg.kb = lex.expect(Tok::word, "kb path").text;
                    while (lex.peek().kind == Tok::colon) {
                        lex.take();
                        cfg.kb += ":" + lex.expect(Tok::word, "kb path").text;
                    }
                } else if (key == "slices")
                    cfg.slice_count = (int)parse_number(lex);
                else if (key == "seed") {
                    cfg.seed = (uint64_t)parse_number(lex);
                    cfg.seed_set = true;
                } else if (key == "cases")
                    cfg.case_count = (int)parse_number(lex);
                else if (key == "eval_cases")
                    cfg.eval_case_count = (int)parse_number(lex);
                else if (key == "canonical")
                    cfg.canonical = lex.expect(Tok::word, "label").text;
                else if (key == "query")
                    cfg.query = parse_id_list(lex);
                else if (key == "kappa_weight")
                    cfg.kappa_weight = parse_number(lex);
                else if (key == "ri_theta_samples")
                    cfg.ri_theta_samples = (int)parse_number(lex);
                else if (key == "ri_datasets")
                    cfg.ri_datasets = (int)parse_number(lex);
                else if (key == "ri_cases")
                    cfg.ri_cases = (int)parse_number(lex);
                else
                    lex.fail("unknown experiment setting '" + key + "'");
            }
            lex.take();
        } else if (section == "candidates") {
            while (lex.peek().kind != Tok::rbrace) {
                CandidateSpec spec;
                spec.label = lex.expect(Tok::word, "candidate label").text;
                lex.expect(Tok::colon, "':'");
                spec.policy =
                    parse_policy(lex, lex.expect(Tok::word, "policy").text);
                while (lex.peek().kind == Tok::word &&
                       lex.peek().text != "markov" &&
                       lex.peek().text != "driving" &&
                       lex.peek().text != "observable" &&
                       lex.peek().text != "custom") {
                    // lookahead: a new entry starts with "label :"
                    std::string key = lex.peek().text;
                    if (key != "order" && key != "scope" && key != "arcs" &&
                        key != "gamma")
                        break;
                    lex.take();
                    lex.expect(Tok::equals, "'='");
                    if (key == "order") {
                        spec.policy.order = (int)parse_number(lex);
                    } else if (key == "scope") {
                        spec.policy.scope = parse_id_list(lex);
                    } else if (key == "arcs") {
                        lex.expect(Tok::lbrace, "'{'");
                        while (lex.peek().kind != Tok::rbrace) {
                            auto [fv, fs] = split_slice_id(
                                lex.expect(Tok::word, "arc source").text);
                            lex.expect(Tok::arrow, "'->'");
                            auto [tv, ts] = split_slice_id(
                                lex.expect(Tok::word, "arc target").text);
                            spec.policy.custom_arcs.push_back({fv, fs, tv, ts});
                            if (lex.peek().kind == Tok::comma) lex.take();
                        }
                        lex.take();
                    } else {  // gamma bit string
                        std::string bits =
                            lex.expect(Tok::word, "gamma bits").text;
                        IndicatorVector iv;
                        for (char b : bits) {
                            if (b != '0' && b != '1')
                                lex.fail("gamma must be a 0/1 string");
                            iv.bits.push_back(b == '1');
                        }
                        spec.gamma = std::move(iv);
                    }
                }
                cfg.candidates.push_back(std::move(spec));
            }
            lex.take();
        } else if (section == "criteria") {
            while (lex.peek().kind != Tok::rbrace) {
                std::string label =
                    lex.expect(Tok::word, "criterion label").text;
                lex.expect(Tok::colon, "':'");
                cfg.criteria.push_back(parse_criterion_body(lex, label));
            }
            lex.take();
        } else if (section == "observations") {
            while (lex.peek().kind != Tok::rbrace) {
                int slice = (int)parse_number(lex);
                lex.expect(Tok::colon, "':'");
                ObservationSet obs;
                while (lex.peek().kind == Tok::word) {
                    std::string var = lex.take().text;
                    lex.expect(Tok::equals, "'='");
                    obs[var] = lex.expect(Tok::word, "state").text;
                    if (lex.peek().kind == Tok::comma)
                        lex.take();
                    else
                        break;
                }
                if (slice < 0) lex.fail("negative slice index");
                if ((int)cfg.observations.per_slice.size() <= slice)
                    cfg.observations.per_slice.resize(slice + 1);
                cfg.observations.per_slice[slice] = std::move(obs);
            }
            lex.take();
        } else if (section == "loss") {
            LossSpec loss;
            while (lex.peek().kind != Tok::rbrace) {
                std::string key = lex.expect(Tok::word, "loss field").text;
                if (key == "world") {
                    loss.world_var = lex.expect(Tok::word, "variable").text;
                } else if (key == "actions") {
                    loss.actions = parse_id_list(lex);
                } else if (key == "row") {
                    lex.expect(Tok::word, "world state");
                    lex.expect(Tok::colon, "':'");
                    loss.table.push_back(parse_number_list(lex));
                } else {
                    lex.fail("unknown loss field '" + key + "'");
                }
            }
            lex.take();
            cfg.loss = std::move(loss);
        } else {
            lex.fail("unknown section '" + section + "'");
        }
    }
    if (!cfg.seed_set)
        throw ConfigError("config must set an explicit seed (no wall-clock "
                          "entropy)");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    try {
        return parse_config(read_file(path));
    } catch (const FormatError& e) {
        throw ConfigError(std::string(e.what()) + " in '" + path + "'");
    }
}

std::string emit_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "experiment {\n";
    os << "  kb " << cfg.kb << "\n";
    os << "  slices " << cfg.slice_count << "\n";
    os << "  seed " << cfg.seed << "\n";
    os << "  cases " << cfg.case_count << "\n";
    os << "  eval_cases " << cfg.eval_case_count << "\n";
    if (!cfg.canonical.empty()) os << "  canonical " << cfg.canonical << "\n";
    if (!cfg.query.empty())
        os << "  query { " << join_ids(cfg.query) << " }\n";
    if (cfg.kappa_weight != 0.0)
        os << "  kappa_weight " << format_double(cfg.kappa_weight) << "\n";
    os << "  ri_theta_samples " << cfg.ri_theta_samples << "\n";
    os << "  ri_datasets " << cfg.ri_datasets << "\n";
    os << "  ri_cases " << cfg.ri_cases << "\n";
    os << "}\n";

    if (!cfg.candidates.empty()) {
        os << "\ncandidates {\n";
        for (const auto& spec : cfg.candidates) {
            os << "  " << spec.label << " : " << policy_to_config(spec.policy);
            if (spec.gamma) {
                os << " gamma=";
                for (uint8_t b : spec.gamma->bits) os << (b ? '1' : '0');
            }
            os << "\n";
        }
        os << "}\n";
    }

    if (!cfg.criteria.empty()) {
        os << "\ncriteria {\n";
        for (const auto& c : cfg.criteria)
            os << "  " << c.label << " : " << criterion_to_config(c) << "\n";
        os << "}\n";
    }

    if (!cfg.observations.per_slice.empty()) {
        os << "\nobservations {\n";
        for (size_t t = 0; t < cfg.observations.per_slice.size(); ++t) {
            os << "  " << t << " :";
            const auto& obs = cfg.observations.per_slice[t];
            size_t i = 0;
            for (const auto& [var, state] : obs) {
                os << (i ? ", " : " ") << var << "=" << state;
                ++i;
            }
            os << "\n";
        }
        os << "}\n";
    }

    if (cfg.loss) {
        os << "\nloss {\n";
        os << "  world " << cfg.loss->world_var << "\n";
        os << "  actions { " << join_ids(cfg.loss->actions) << " }\n";
        for (size_t w = 0; w < cfg.loss->table.size(); ++w) {
            os << "  row s" << w << " : (";
            for (size_t a = 0; a < cfg.loss->table[w].size(); ++a)
                os << (a ? ", " : " ")
                   << format_double(cfg.loss->table[w][a]);
            os << " )\n";
        }
        os << "}\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Pilot runner
// ---------------------------------------------------------------------------

namespace {

void validate_config(const ExperimentConfig& cfg) {
    if (!cfg.seed_set) throw ConfigError("config seed is mandatory");
    if (cfg.slice_count < 1) throw ConfigError("slices must be >= 1");
    if (cfg.case_count < 1) throw ConfigError("cases must be >= 1");
    if (cfg.eval_case_count < 1) throw ConfigError("eval_cases must be >= 1");
    if (cfg.candidates.empty()) throw ConfigError("no candidates configured");
    std::set<std::string> labels;
    for (const auto& c : cfg.candidates)
        if (!labels.insert(c.label).second)
            throw ConfigError("duplicate candidate label '" + c.label + "'");
    if (!labels.count(cfg.canonical))
        throw ConfigError("canonical label '" + cfg.canonical +
                          "' is not a candidate");
    if (cfg.criteria.empty()) throw ConfigError("no criteria configured");
    std::set<std::string> crit;
    for (const auto& c : cfg.criteria)
        if (!crit.insert(c.label).second)
            throw ConfigError("duplicate criterion label '" + c.label + "'");
    if (!cfg.observations.per_slice.empty() &&
        (int)cfg.observations.per_slice.size() != cfg.slice_count)
        throw ConfigError("observations must cover every slice (got " +
                          std::to_string(cfg.observations.per_slice.size()) +
                          " of " + std::to_string(cfg.slice_count) + ")");
}

const CandidateSpec& find_candidate(const ExperimentConfig& cfg,
                                    const std::string& label) {
    for (const auto& c : cfg.candidates)
        if (c.label == label) return c;
    throw ConfigError("unknown candidate '" + label + "'");
}

std::vector<TemporalArc> gamma_filtered_arcs(const CandidateSpec& spec,
                                             const SliceSequence& slices) {
    auto registry = BlockRegistry::from_policy(spec.policy, slices);
    IndicatorVector gamma =
        spec.gamma ? *spec.gamma : IndicatorVector::ones(registry.size());
    if (gamma.bits.size() != registry.size())
        throw ConfigError("gamma length mismatch for '" + spec.label + "'");
    std::vector<TemporalArc> arcs;
    for (const auto& arc : generate_arcs(spec.policy, slices)) {
        int block = registry.index_of(arc.to_var, arc.lag());
        if (block >= 0 && gamma.bits[block]) arcs.push_back(arc);
    }
    return arcs;
}

}  // namespace

PilotSetup prepare_pilot(const ExperimentConfig& cfg) {
    validate_config(cfg);
    PilotSetup setup;
    setup.kb = cfg.kb == "builtin:aap" ? aap::knowledge_base()
                                       : load_kb(cfg.kb);

    if (cfg.observations.per_slice.empty()) {
        Network slice = bn_portion(setup.kb.net);
        for (int t = 0; t < cfg.slice_count; ++t)
            setup.slices.slices.push_back(slice);
    } else {
        SliceSequence tailored =
            tailor_sequence(setup.kb, cfg.observations);
        for (auto& slice : tailored.slices)
            setup.slices.slices.push_back(bn_portion(slice));
    }
    for (const auto& slice : setup.slices.slices) slice.require_valid();

    setup.target_slice = cfg.slice_count - 1;
    setup.query = cfg.query;
    if (setup.query.empty())
        setup.query =
            setup.slices.slices.back().ids_of_tag(VariableTag::disease);
    if (setup.query.empty())
        throw ConfigError("no evaluation query variables (none tagged "
                          "disease; set query explicitly)");
    for (const auto& q : setup.query)
        if (!setup.slices.slices[setup.target_slice].has_node(q))
            throw ConfigError("query variable '" + q +
                              "' is not in the final slice");

    const CandidateSpec& canonical = find_candidate(cfg, cfg.canonical);
    setup.canonical_truth =
        unroll_arcs(setup.slices, gamma_filtered_arcs(canonical, setup.slices),
                    setup.kb.transitions, canonical.policy);
    return setup;
}

Report run_pilot(const ExperimentConfig& cfg) {
    PilotSetup setup = prepare_pilot(cfg);

    CaseSet train = simulate(setup.canonical_truth, cfg.case_count, cfg.seed);
    CaseSet eval_cases = simulate(setup.canonical_truth, cfg.eval_case_count,
                                  fnv1a64("eval-cases", cfg.seed));

    EvalContext ctx;
    ctx.eval.cases = std::move(eval_cases);
    ctx.eval.query = setup.query;
    ctx.eval.target_slice = setup.target_slice;
    ctx.reference = reference_vector(setup.canonical_truth.flattened,
                                     ctx.eval);
    ctx.n_train = cfg.case_count;
    ctx.kappa_weight = cfg.kappa_weight;

    bool needs_pr = false;
    for (const auto& c : cfg.criteria)
        needs_pr |= !c.ratio_form && c.f == ErrorMeasure::predictive_risk;
    if (needs_pr) {
        PredictiveRiskInputs pr;
        pr.theta_true = setup.canonical_truth;
        pr.structure = setup.slices;
        pr.options.datasets = cfg.ri_datasets;
        pr.options.cases_per_dataset = cfg.ri_cases;
        pr.options.seed = cfg.seed;
        ctx.pr = std::move(pr);
    }

    bool needs_ri = false;
    for (const auto& c : cfg.criteria) needs_ri |= c.ratio_form;
    if (needs_ri) {
        RiskInflationInputs ri;
        ri.reference = find_candidate(cfg, cfg.canonical);
        for (int s = 0; s < cfg.ri_theta_samples; ++s)
            ri.theta_samples.push_back(perturbed_model(
                setup.canonical_truth, 0.35, cfg.seed, (uint64_t)s));
        ri.structure = setup.slices;
        ri.options.theta_samples = cfg.ri_theta_samples;
        ri.options.datasets_per_theta = cfg.ri_datasets;
        ri.options.cases_per_dataset = cfg.ri_cases;
        ri.options.seed = cfg.seed;
        ctx.ri = std::move(ri);
    }

    Report report;
    report.version = kVersion;
    report.config_hash = [&] {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx",
                      (unsigned long long)fnv1a64(emit_config(cfg)));
        return std::string(buf);
    }();
    report.seed = cfg.seed;
    for (const auto& c : cfg.criteria) report.criteria.push_back(c.label);
    report.scores.assign(cfg.criteria.size(),
                         std::vector<double>(cfg.candidates.size(), 0.0));

    std::vector<CandidateModel> models;
    for (const auto& spec : cfg.candidates) {
        auto t0 = std::chrono::steady_clock::now();
        CandidateModel model;
        try {
            model = estimate(spec, setup.slices, train);
        } catch (const std::exception& e) {
            throw InferenceError("candidate '" + spec.label +
                                 "': " + e.what());
        }
        ElementCounts counts = count_elements(model.model);
        CandidateReport cr;
        cr.label = spec.label;
        cr.nodes = counts.nodes;
        cr.arcs = counts.arcs;
        cr.free_params = model.free_param_count;

        for (size_t ci = 0; ci < cfg.criteria.size(); ++ci) {
            try {
                report.scores[ci][models.size()] =
                    criterion_value(model, ctx, cfg.criteria[ci]);
            } catch (const std::exception& e) {
                throw InferenceError("candidate '" + spec.label +
                                     "', criterion '" +
                                     cfg.criteria[ci].label + "': " +
                                     e.what());
            }
        }
        auto t1 = std::chrono::steady_clock::now();
        cr.wall_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.candidates.push_back(std::move(cr));
        models.push_back(std::move(model));
    }

    for (size_t ci = 0; ci < cfg.criteria.size(); ++ci) {
        size_t best = select(models, ctx, cfg.criteria[ci]);
        report.selected[cfg.criteria[ci].label] = models[best].label;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report formats
// ---------------------------------------------------------------------------

bool report_equal(const Report& a, const Report& b) {
    if (a.version != b.version || a.config_hash != b.config_hash ||
        a.seed != b.seed || a.criteria != b.criteria ||
        a.selected != b.selected || a.scores.size() != b.scores.size() ||
        a.candidates.size() != b.candidates.size())
        return false;
    for (size_t i = 0; i < a.candidates.size(); ++i) {
        const auto& x = a.candidates[i];
        const auto& y = b.candidates[i];
        if (x.label != y.label || x.nodes != y.nodes || x.arcs != y.arcs ||
            x.free_params != y.free_params)
            return false;
    }
    for (size_t i = 0; i < a.scores.size(); ++i)
        if (a.scores[i] != b.scores[i]) return false;
    return true;
}

std::string emit_report(const Report& report, ReportFormat format) {
    std::ostringstream os;
    if (format == ReportFormat::machine) {
        os << "tidreport 1\n";
        os << "version " << report.version << "\n";
        os << "config.hash " << report.config_hash << "\n";
        os << "config.seed " << report.seed << "\n";
        os << "criteria " << join_ids(report.criteria) << "\n";
        for (const auto& c : report.candidates) {
            os << "candidate." << c.label << ".nodes " << c.nodes << "\n";
            os << "candidate." << c.label << ".arcs " << c.arcs << "\n";
            os << "candidate." << c.label << ".free_params " << c.free_params
               << "\n";
        }
        for (size_t ci = 0; ci < report.criteria.size(); ++ci)
            for (size_t mi = 0; mi < report.candidates.size(); ++mi)
                os << "score." << report.criteria[ci] << "."
                   << report.candidates[mi].label << " "
                   << format_double(report.scores[ci][mi]) << "\n";
        for (const auto& [criterion, label] : report.selected)
            os << "selected." << criterion << " " << label << "\n";
        return os.str();
    }

    // human table
    os << "pilot report (version " << report.version << ", config "
       << report.config_hash << ", seed " << report.seed << ")\n\n";
    size_t width = 12;
    for (const auto& c : report.candidates)
        width = std::max(width, c.label.size() + 2);
    auto pad = [&](const std::string& s) {
        std::string out = s;
        while (out.size() < width) out += ' ';
        return out;
    };
    os << pad("criterion");
    for (const auto& c : report.candidates) os << pad(c.label);
    os << "selected\n";
    for (size_t ci = 0; ci < report.criteria.size(); ++ci) {
        os << pad(report.criteria[ci]);
        for (size_t mi = 0; mi < report.candidates.size(); ++mi) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", report.scores[ci][mi]);
            os << pad(buf);
        }
        os << report.selected.at(report.criteria[ci]) << "\n";
    }
    os << "\n" << pad("candidate") << pad("|V^N|") << pad("|A^N|")
       << pad("free params") << "wall ms\n";
    for (const auto& c : report.candidates) {
        char buf[32];
        os << pad(c.label);
        std::snprintf(buf, sizeof buf, "%ld", c.nodes);
        os << pad(buf);
        std::snprintf(buf, sizeof buf, "%ld", c.arcs);
        os << pad(buf);
        std::snprintf(buf, sizeof buf, "%ld", c.free_params);
        os << pad(buf);
        std::snprintf(buf, sizeof buf, "%.1f", c.wall_ms);
        os << buf << "\n";
    }
    return os.str();
}

Report parse_report(const std::string& machine_text) {
    std::istringstream is(machine_text);
    std::string line;
    Report report;
    bool header = false;
    std::map<std::string, size_t> candidate_index;
    std::map<std::string, size_t> criterion_index;

    auto split2 = [](const std::string& s) {
        auto sp = s.find(' ');
        if (sp == std::string::npos)
            throw FormatError("bad report line: '" + s + "'");
        return std::pair(s.substr(0, sp), s.substr(sp + 1));
    };

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (!header) {
            if (line != "tidreport 1")
                throw FormatError("not a machine-readable report");
            header = true;
            continue;
        }
        auto [key, value] = split2(line);
        if (key == "version") {
            report.version = value;
        } else if (key == "config.hash") {
            report.config_hash = value;
        } else if (key == "config.seed") {
            report.seed = std::strtoull(value.c_str(), nullptr, 10);
        } else if (key == "criteria") {
            std::istringstream cs(value);
            std::string item;
            while (std::getline(cs, item, ',')) {
                while (!item.empty() && item.front() == ' ')
                    item.erase(item.begin());
                criterion_index[item] = report.criteria.size();
                report.criteria.push_back(item);
            }
            report.scores.assign(report.criteria.size(), {});
        } else if (key.rfind("candidate.", 0) == 0) {
            std::string rest = key.substr(10);
            auto dot = rest.rfind('.');
            std::string label = rest.substr(0, dot);
            std::string field = rest.substr(dot + 1);
            if (!candidate_index.count(label)) {
                candidate_index[label] = report.candidates.size();
                report.candidates.push_back({label, 0, 0, 0, 0.0});
                for (auto& row : report.scores)
                    row.resize(report.candidates.size(), 0.0);
            }
            CandidateReport& c = report.candidates[candidate_index[label]];
            long v = std::strtol(value.c_str(), nullptr, 10);
            if (field == "nodes")
                c.nodes = v;
            else if (field == "arcs")
                c.arcs = v;
            else if (field == "free_params")
                c.free_params = v;
            else
                throw FormatError("unknown candidate field '" + field + "'");
        } else if (key.rfind("score.", 0) == 0) {
            std::string rest = key.substr(6);
            auto dot = rest.find('.');
            std::string criterion = rest.substr(0, dot);
            std::string label = rest.substr(dot + 1);
            if (!criterion_index.count(criterion) ||
                !candidate_index.count(label))
                throw FormatError("score line before declarations: " + line);
            auto& row = report.scores[criterion_index[criterion]];
            row.resize(report.candidates.size(), 0.0);
            row[candidate_index[label]] =
                std::strtod(value.c_str(), nullptr);
        } else if (key.rfind("selected.", 0) == 0) {
            report.selected[key.substr(9)] = value;
        } else {
            throw FormatError("unknown report line: '" + line + "'");
        }
    }
    if (!header) throw FormatError("empty report");
    return report;
}

}  // namespace tid
