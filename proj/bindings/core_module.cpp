#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tid/aap.hpp"
#include "tid/harness.hpp"
#include "tid/text_format.hpp"

namespace py = pybind11;
using namespace tid;

namespace {

Evidence evidence_from_dict(const std::map<std::string, std::string>& items) {
    Evidence ev;
    for (const auto& [var, state] : items) ev.set(var, state);
    return ev;
}

py::dict distribution_to_dict(const Distribution& dist) {
    py::dict out;
    out["scope"] = dist.scope;
    out["states"] = dist.states;
    out["probabilities"] = dist.probabilities;
    return out;
}

py::list violations_to_list(const ValidationReport& report) {
    py::list out;
    for (const auto& v : report) {
        py::dict item;
        item["code"] = v.code;
        item["subject"] = v.subject;
        item["detail"] = v.detail;
        if (v.row >= 0) item["row"] = v.row;
        out.append(item);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "temporal Bayesian network construction and model selection";
    m.attr("__version__") = kVersion;

    py::register_exception<FormatError>(m, "FormatError");
    py::register_exception<ValidationError>(m, "NetworkValidationError");
    py::register_exception<InferenceError>(m, "InferenceError");
    py::register_exception<ConfigError>(m, "ConfigError");

    py::enum_<VariableTag>(m, "VariableTag")
        .value("finding", VariableTag::finding)
        .value("latent", VariableTag::latent)
        .value("disease", VariableTag::disease)
        .value("other", VariableTag::other);

    py::enum_<PolicyKind>(m, "PolicyKind")
        .value("markov", PolicyKind::markov)
        .value("driving", PolicyKind::driving)
        .value("observable", PolicyKind::observable)
        .value("custom", PolicyKind::custom);

    py::class_<Network>(m, "Network")
        .def_property_readonly("name",
                               [](const Network& n) { return n.name; })
        .def("__len__", &Network::size)
        .def("node_ids", &Network::node_ids)
        .def("ids_of_tag", &Network::ids_of_tag)
        .def("arcs", &Network::arcs)
        .def("validate",
             [](const Network& n) { return violations_to_list(n.validate()); })
        .def("is_valid", &Network::is_valid)
        .def("to_text", [](const Network& n) { return emit_network(n); });

    py::class_<TemporalArcPolicy>(m, "TemporalArcPolicy")
        .def_static("markov", &TemporalArcPolicy::markov, py::arg("order") = 1)
        .def_static("driving", &TemporalArcPolicy::driving, py::arg("subset"),
                    py::arg("order") = 1)
        .def_static("observable", &TemporalArcPolicy::observable,
                    py::arg("subset"), py::arg("order") = 1)
        .def_property_readonly(
            "kind", [](const TemporalArcPolicy& p) { return p.kind; });

    py::class_<TemporalArc>(m, "TemporalArc")
        .def_readonly("from_var", &TemporalArc::from_var)
        .def_readonly("from_slice", &TemporalArc::from_slice)
        .def_readonly("to_var", &TemporalArc::to_var)
        .def_readonly("to_slice", &TemporalArc::to_slice)
        .def("lag", &TemporalArc::lag);

    py::class_<SliceSequence>(m, "SliceSequence")
        .def("__len__",
             [](const SliceSequence& s) { return s.slices.size(); })
        .def("slice", [](const SliceSequence& s, size_t i) {
            return s.slices.at(i);
        });

    py::class_<TemporalNetwork>(m, "TemporalNetwork")
        .def_property_readonly(
            "flattened",
            [](const TemporalNetwork& tn) { return tn.flattened; })
        .def_property_readonly(
            "arcs", [](const TemporalNetwork& tn) { return tn.arcs; })
        .def("counts", [](const TemporalNetwork& tn) {
            ElementCounts c = count_elements(tn);
            py::dict out;
            out["nodes"] = c.nodes;
            out["arcs"] = c.arcs;
            out["temporal_per_slice"] = c.temporal_per_slice;
            return out;
        });

    py::class_<KnowledgeBase>(m, "KnowledgeBase")
        .def_property_readonly(
            "net", [](const KnowledgeBase& kb) { return kb.net; })
        .def("findings", &KnowledgeBase::findings)
        .def("latents", &KnowledgeBase::latents)
        .def("diseases", &KnowledgeBase::diseases);

    py::class_<CaseSet>(m, "CaseSet")
        .def("__len__", &CaseSet::size)
        .def("to_text", [](const CaseSet& c) { return write_cases(c); });

    py::class_<CandidateModel>(m, "CandidateModel")
        .def_readonly("label", &CandidateModel::label)
        .def_readonly("free_param_count", &CandidateModel::free_param_count)
        .def_property_readonly(
            "network",
            [](const CandidateModel& m_) { return m_.model.flattened; })
        .def_property_readonly("model", [](const CandidateModel& m_) {
            return m_.model;
        });

    py::class_<Report>(m, "Report")
        .def_readonly("criteria", &Report::criteria)
        .def_readonly("selected", &Report::selected)
        .def_readonly("scores", &Report::scores)
        .def("to_text", [](const Report& r, const std::string& format) {
            return emit_report(r, format == "machine" ? ReportFormat::machine
                                                      : ReportFormat::table);
        }, py::arg("format") = "table");

    // --- file formats -----------------------------------------------------
    m.def("parse_network",
          [](const std::string& text) { return parse_network(text).net; },
          "Parse a network document; returns the network itself.");
    m.def("load_network",
          [](const std::string& path) { return load_network(path).net; });
    m.def("emit_network",
          [](const Network& net) { return emit_network(net); });
    m.def("load_kb", &load_kb);
    m.def("kb_to_text", [](const KnowledgeBase& kb) {
        return emit_network(kb_to_document(kb));
    });
    m.def("parse_cases", &parse_cases);
    m.def("aap_knowledge_base", &aap::knowledge_base,
          "The bundled synthetic acute-abdominal-pain knowledge base.");
    m.def("aap_mini_network", &aap::mini_network);
    m.def("aap_presentation", &aap::presentation);

    // --- inference ---------------------------------------------------------
    m.def(
        "posterior",
        [](const Network& net, const std::map<std::string, std::string>& ev,
           const std::vector<std::string>& query) {
            return distribution_to_dict(
                posterior(net, evidence_from_dict(ev), query));
        },
        py::arg("net"), py::arg("evidence"), py::arg("query"));
    m.def(
        "enumerate_posterior",
        [](const Network& net, const std::map<std::string, std::string>& ev,
           const std::vector<std::string>& query) {
            return distribution_to_dict(
                enumerate_posterior(net, evidence_from_dict(ev), query));
        },
        py::arg("net"), py::arg("evidence"), py::arg("query"));
    m.def(
        "log_likelihood",
        [](const Network& net, const std::map<std::string, std::string>& ev) {
            return log_likelihood(net, evidence_from_dict(ev));
        },
        py::arg("net"), py::arg("case_assignments"));
    m.def(
        "joint_probability",
        [](const Network& net, const std::map<std::string, std::string>& a) {
            Assignment full(a.begin(), a.end());
            return joint_probability(net, full);
        },
        py::arg("net"), py::arg("assignment"));
    m.def(
        "evaluate_decision",
        [](const Network& net, const std::map<std::string, std::string>& ev) {
            DecisionOutcome out =
                evaluate_decision(net, evidence_from_dict(ev));
            py::dict d;
            d["chosen"] = out.chosen;
            d["chosen_action"] = out.chosen_action;
            d["expected_loss"] = out.expected_loss;
            return d;
        },
        py::arg("net"), py::arg("evidence"));

    // --- temporal construction ---------------------------------------------
    m.def("tailor", &tailor, py::arg("kb"), py::arg("observations"));
    m.def(
        "tailor_sequence",
        [](const KnowledgeBase& kb,
           const std::vector<ObservationSet>& per_slice) {
            Observations obs;
            obs.per_slice = per_slice;
            return tailor_sequence(kb, obs);
        },
        py::arg("kb"), py::arg("observations"));
    m.def(
        "replicate_slices",
        [](const Network& slice, int count) {
            SliceSequence seq;
            for (int i = 0; i < count; ++i) seq.slices.push_back(slice);
            return seq;
        },
        py::arg("slice"), py::arg("count"));
    m.def("bn_portion", &bn_portion);
    m.def("generate_arcs", &generate_arcs, py::arg("policy"),
          py::arg("slices"));
    m.def(
        "unroll_kb",
        [](const SliceSequence& slices, const TemporalArcPolicy& policy,
           const KnowledgeBase& kb) {
            return unroll(slices, policy, kb.transitions);
        },
        py::arg("slices"), py::arg("policy"), py::arg("kb"),
        "Unroll a slice sequence using the KB's bundled transition tables.");
    m.def(
        "partition",
        [](const Network& slice, const std::vector<std::string>& dynamic) {
            Partition p = partition(slice, dynamic);
            py::dict out;
            out["dynamic"] = p.dynamic;
            out["static"] = p.static_vars;
            out["independent"] = p.independent;
            return out;
        },
        py::arg("slice"), py::arg("dynamic_ids"));

    // --- simulation, estimation, scoring ------------------------------------
    m.def("simulate", &simulate, py::arg("net"), py::arg("count"),
          py::arg("seed"));
    m.def(
        "estimate",
        [](const std::string& label, const TemporalArcPolicy& policy,
           const SliceSequence& structure, const CaseSet& data,
           double alpha) {
            return estimate({label, policy, {}}, structure, data, alpha);
        },
        py::arg("label"), py::arg("policy"), py::arg("structure"),
        py::arg("data"), py::arg("alpha") = 1.0);
    m.def(
        "sequential_log_score",
        [](const Network& flattened, const CaseSet& cases,
           const std::vector<std::string>& query, int target_slice) {
            LogScoreResult r =
                sequential_log_score(flattened, cases, query, target_slice);
            py::dict out;
            out["total"] = r.total;
            out["per_case"] = r.per_case;
            out["impossible"] = r.impossible;
            return out;
        },
        py::arg("net"), py::arg("cases"), py::arg("query"),
        py::arg("target_slice"));

    // --- experiment harness --------------------------------------------------
    m.def("default_pilot_config", [] {
        return emit_config(default_pilot_config());
    });
    m.def(
        "run_pilot",
        [](const std::string& config_text) {
            return run_pilot(parse_config(config_text));
        },
        py::arg("config_text"),
        "Run an experiment from its config text and return the report.");
    m.def("parse_report", &parse_report);
}
