#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "tid/aap.hpp"
#include "tid/harness.hpp"
#include "tid/text_format.hpp"

namespace {

using namespace tid;

std::vector<std::string> split_ids(const std::string& text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        std::string item = text.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        size_t a = item.find_first_not_of(" \t");
        size_t b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

KnowledgeBase open_kb(const std::string& ref) {
    return ref == "builtin:aap" ? aap::knowledge_base() : load_kb(ref);
}

ExperimentConfig open_config(const std::string& path, bool use_default) {
    if (use_default) return default_pilot_config();
    if (path.empty())
        throw ConfigError("pass --config <file> or --default");
    return load_config(path);
}

int cmd_validate(const std::string& path) {
    NetworkDocument doc = load_network(path);
    ValidationReport report = doc.net.validate();
    if (report.empty()) {
        std::cout << "ok: " << doc.net.name << " (" << doc.net.size()
                  << " nodes)\n";
        return 0;
    }
    for (const auto& v : report) {
        std::cout << v.code << " at " << v.subject;
        if (v.row >= 0) std::cout << " row " << v.row;
        std::cout << ": " << v.detail << "\n";
    }
    return 1;
}

int cmd_infer(const std::string& path, const std::string& evidence_text,
              const std::string& query_text, bool use_oracle) {
    NetworkDocument doc = load_network(path);
    Evidence evidence{parse_assignment(evidence_text)};
    auto query = split_ids(query_text);
    Distribution dist = use_oracle
                            ? enumerate_posterior(doc.net, evidence, query)
                            : posterior(doc.net, evidence, query);
    std::vector<size_t> cfg(dist.scope.size(), 0);
    for (size_t cell = 0; cell < dist.probabilities.size(); ++cell) {
        for (size_t i = 0; i < dist.scope.size(); ++i)
            std::cout << (i ? ", " : "") << dist.scope[i] << "="
                      << dist.states[i][cfg[i]];
        std::cout << " : " << format_double(dist.probabilities[cell]) << "\n";
        for (size_t i = dist.scope.size(); i-- > 0;) {
            if (++cfg[i] < dist.states[i].size()) break;
            cfg[i] = 0;
        }
    }
    return 0;
}

int cmd_tailor(const std::string& kb_ref, const std::string& obs_text,
               const std::string& out_path) {
    KnowledgeBase kb = open_kb(kb_ref);
    ObservationSet obs;
    for (const auto& [var, state] : parse_assignment(obs_text))
        obs[var] = state;
    Network slice = tailor(kb, obs);
    long findings = slice.ids_of_tag(VariableTag::finding).size();
    long latents = slice.ids_of_tag(VariableTag::latent).size();
    long diseases = slice.ids_of_tag(VariableTag::disease).size();
    std::cout << "tailored: " << slice.size() << " nodes (" << findings
              << " findings, " << latents << " latents, " << diseases
              << " diseases)\n";
    if (!out_path.empty()) {
        save_network(NetworkDocument{slice, {}, {}}, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_unroll(const std::string& kb_ref, int slices,
               const std::string& policy_kind, int order,
               const std::string& scope_text, const std::string& obs_text,
               const std::string& out_path) {
    KnowledgeBase kb = open_kb(kb_ref);
    SliceSequence seq;
    Network base = bn_portion(kb.net);
    if (!obs_text.empty()) {
        ObservationSet obs;
        for (const auto& [var, state] : parse_assignment(obs_text))
            obs[var] = state;
        base = bn_portion(tailor(kb, obs));
    }
    for (int t = 0; t < slices; ++t) seq.slices.push_back(base);

    TemporalArcPolicy policy;
    if (policy_kind == "markov")
        policy = TemporalArcPolicy::markov(order);
    else if (policy_kind == "driving")
        policy = TemporalArcPolicy::driving(split_ids(scope_text), order);
    else if (policy_kind == "observable")
        policy = TemporalArcPolicy::observable(split_ids(scope_text), order);
    else
        throw ConfigError("unknown policy '" + policy_kind + "'");

    TemporalNetwork tn = unroll(seq, policy, kb.transitions);
    ElementCounts counts = count_elements(tn);
    std::cout << "|V^N| " << counts.nodes << ", |A^N| " << counts.arcs
              << ", temporal arcs per boundary:";
    for (long a : counts.temporal_per_slice) std::cout << " " << a;
    std::cout << "\n";
    if (!out_path.empty()) {
        save_network(NetworkDocument{tn.flattened, {}, {}}, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, bool use_default, int count,
                 const std::string& out_path) {
    ExperimentConfig cfg = open_config(config_path, use_default);
    PilotSetup setup = prepare_pilot(cfg);
    CaseSet cases = simulate(setup.canonical_truth,
                             count > 0 ? count : cfg.case_count, cfg.seed);
    if (out_path.empty()) {
        std::cout << write_cases(cases);
    } else {
        save_cases(cases, out_path);
        std::cout << "wrote " << cases.size() << " cases to " << out_path
                  << "\n";
    }
    return 0;
}

int cmd_estimate(const std::string& config_path, bool use_default,
                 const std::string& label, const std::string& cases_path,
                 const std::string& out_path) {
    ExperimentConfig cfg = open_config(config_path, use_default);
    PilotSetup setup = prepare_pilot(cfg);
    CaseSet cases = cases_path.empty()
                        ? simulate(setup.canonical_truth, cfg.case_count,
                                   cfg.seed)
                        : load_cases(cases_path);
    for (const auto& spec : cfg.candidates) {
        if (spec.label != label) continue;
        CandidateModel model = estimate(spec, setup.slices, cases);
        std::cout << "candidate " << label << ": free parameters "
                  << model.free_param_count << ", gamma blocks "
                  << model.registry.size() << "\n";
        for (size_t i = 0; i < model.registry.blocks.size(); ++i)
            std::cout << "  block " << i << ": "
                      << model.registry.blocks[i].first << " lag "
                      << model.registry.blocks[i].second
                      << (model.gamma.bits[i] ? "" : " (off)") << "\n";
        if (!out_path.empty()) {
            save_network(NetworkDocument{model.model.flattened, {}, {}},
                         out_path);
            std::cout << "wrote " << out_path << "\n";
        }
        return 0;
    }
    throw ConfigError("unknown candidate '" + label + "'");
}

int cmd_score(const std::string& net_path, const std::string& cases_path,
              const std::string& query_text, int slice) {
    NetworkDocument doc = load_network(net_path);
    CaseSet cases = load_cases(cases_path);
    auto query = split_ids(query_text);
    LogScoreResult result =
        sequential_log_score(doc.net, cases, query, slice);
    for (size_t i = 0; i < result.per_case.size(); ++i)
        std::cout << cases.cases[i].id << " "
                  << format_double(result.per_case[i]) << "\n";
    std::cout << "total " << format_double(result.total)
              << (result.impossible ? " (impossible case present)" : "")
              << "\n";
    return 0;
}

int cmd_select(const std::string& config_path, bool use_default,
               const std::string& criterion_label) {
    ExperimentConfig cfg = open_config(config_path, use_default);
    Report report = run_pilot(cfg);
    for (size_t ci = 0; ci < report.criteria.size(); ++ci) {
        if (!criterion_label.empty() &&
            report.criteria[ci] != criterion_label)
            continue;
        std::cout << report.criteria[ci] << " -> "
                  << report.selected.at(report.criteria[ci]) << "\n";
    }
    return 0;
}

int cmd_pilot(const std::string& config_path, bool use_default,
              const std::string& out_path, const std::string& format,
              const std::string& emit_config_path) {
    ExperimentConfig cfg = open_config(config_path, use_default);
    if (!emit_config_path.empty()) {
        write_file(emit_config_path, emit_config(cfg));
        std::cout << "wrote " << emit_config_path << "\n";
        return 0;
    }
    Report report = run_pilot(cfg);
    ReportFormat fmt =
        format == "machine" ? ReportFormat::machine : ReportFormat::table;
    std::string text = emit_report(report, fmt);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
        std::cout << emit_report(report, ReportFormat::table);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& format) {
    Report report = parse_report(read_file(in_path));
    std::cout << emit_report(report, format == "machine"
                                         ? ReportFormat::machine
                                         : ReportFormat::table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal influence diagram toolkit"};
    app.require_subcommand(1);

    std::string net_path, kb_ref = "builtin:aap", evidence, query, obs;
    std::string config_path, out_path, cases_path, label, criterion, in_path;
    std::string format = "table", emit_cfg;
    bool use_oracle = false, use_default = false;
    int slices = 2, order = 1, count = 0, target_slice = 0;
    std::string policy = "markov", scope;

    auto* validate = app.add_subcommand("validate", "check a network file");
    validate->add_option("net", net_path, "network file")->required();

    auto* infer = app.add_subcommand("infer", "posterior query");
    infer->add_option("net", net_path)->required();
    infer->add_option("--evidence", evidence, "var=state,... assignments");
    infer->add_option("--query", query, "query variable ids")->required();
    infer->add_flag("--oracle", use_oracle, "use full-joint enumeration");

    auto* tailor_cmd = app.add_subcommand("tailor", "tailor a KB to findings");
    tailor_cmd->add_option("--kb", kb_ref, "KB file or builtin:aap");
    tailor_cmd->add_option("--obs", obs, "finding=state,...")->required();
    tailor_cmd->add_option("--out", out_path, "write the tailored slice");

    auto* unroll_cmd = app.add_subcommand("unroll", "build a temporal network");
    unroll_cmd->add_option("--kb", kb_ref);
    unroll_cmd->add_option("--slices", slices)->check(CLI::PositiveNumber);
    unroll_cmd->add_option("--policy", policy, "markov|driving|observable");
    unroll_cmd->add_option("--order", order)->check(CLI::PositiveNumber);
    unroll_cmd->add_option("--scope", scope, "subset for driving/observable");
    unroll_cmd->add_option("--obs", obs, "tailor each slice to findings");
    unroll_cmd->add_option("--out", out_path, "write the flattened network");

    auto* simulate_cmd = app.add_subcommand("simulate", "sample cases");
    simulate_cmd->add_option("--config", config_path);
    simulate_cmd->add_flag("--default", use_default, "builtin pilot config");
    simulate_cmd->add_option("--count", count);
    simulate_cmd->add_option("--out", out_path);

    auto* estimate_cmd =
        app.add_subcommand("estimate", "fit one candidate from cases");
    estimate_cmd->add_option("--config", config_path);
    estimate_cmd->add_flag("--default", use_default);
    estimate_cmd->add_option("--candidate", label)->required();
    estimate_cmd->add_option("--cases", cases_path,
                             "case file (default: simulate)");
    estimate_cmd->add_option("--out", out_path, "write the estimated network");

    auto* score_cmd =
        app.add_subcommand("score", "sequential log score of a network");
    score_cmd->add_option("--net", net_path, "flattened network")->required();
    score_cmd->add_option("--cases", cases_path)->required();
    score_cmd->add_option("--query", query, "target variables")->required();
    score_cmd->add_option("--slice", target_slice, "target slice");

    auto* select_cmd =
        app.add_subcommand("select", "run the pipeline, print selections");
    select_cmd->add_option("--config", config_path);
    select_cmd->add_flag("--default", use_default);
    select_cmd->add_option("--criterion", criterion, "restrict to one");

    auto* pilot_cmd = app.add_subcommand("pilot", "run the full experiment");
    pilot_cmd->add_option("--config", config_path);
    pilot_cmd->add_flag("--default", use_default);
    pilot_cmd->add_option("--out", out_path, "report file");
    pilot_cmd->add_option("--format", format, "table|machine");
    pilot_cmd->add_option("--emit-config", emit_cfg,
                          "write the resolved config and exit");

    auto* report_cmd = app.add_subcommand("report", "re-render a report");
    report_cmd->add_option("--in", in_path, "machine-readable report file")
        ->required();
    report_cmd->add_option("--format", format, "table|machine");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) return cmd_validate(net_path);
        if (app.got_subcommand(infer))
            return cmd_infer(net_path, evidence, query, use_oracle);
        if (app.got_subcommand(tailor_cmd))
            return cmd_tailor(kb_ref, obs, out_path);
        if (app.got_subcommand(unroll_cmd))
            return cmd_unroll(kb_ref, slices, policy, order, scope, obs,
                              out_path);
        if (app.got_subcommand(simulate_cmd))
            return cmd_simulate(config_path, use_default, count, out_path);
        if (app.got_subcommand(estimate_cmd))
            return cmd_estimate(config_path, use_default, label, cases_path,
                                out_path);
        if (app.got_subcommand(score_cmd))
            return cmd_score(net_path, cases_path, query, target_slice);
        if (app.got_subcommand(select_cmd))
            return cmd_select(config_path, use_default, criterion);
        if (app.got_subcommand(pilot_cmd))
            return cmd_pilot(config_path, use_default, out_path, format,
                             emit_cfg);
        if (app.got_subcommand(report_cmd))
            return cmd_report(in_path, format);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const InferenceError& e) {
        std::cerr << "inference error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
