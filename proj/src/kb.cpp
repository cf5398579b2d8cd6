#include "tid/kb.hpp"

#include <algorithm>
#include <set>

namespace tid {

ValidationReport validate_kb(const KnowledgeBase& kb) {
    ValidationReport report = kb.net.validate();

    // Findings must be explainable: some disease or latent ancestor.
    for (const auto& id : kb.findings()) {
        bool explained = false;
        for (const auto& anc : ancestors_of(kb.net, {id})) {
            if (anc == id) continue;
            auto tag = kb.net.node(anc).variable.tag;
            if (tag == VariableTag::disease || tag == VariableTag::latent)
                explained = true;
        }
        if (!explained)
            report.push_back({"unexplained-finding", id,
                              "no disease or latent ancestor", -1});
    }
    return report;
}

namespace {

void check_observation(const KnowledgeBase& kb, const std::string& id,
                       const std::string& state) {
    if (!kb.net.has_node(id))
        throw ValidationError("observation names unknown variable '" + id +
                              "'");
    const Node& node = kb.net.node(id);
    if (node.variable.tag != VariableTag::finding)
        throw ValidationError("observation names non-finding variable '" + id +
                              "'");
    if (node.variable.state_index(state) < 0)
        throw ValidationError("'" + state + "' is not a state of '" + id +
                              "'");
}

}  // namespace

Network tailor(const KnowledgeBase& kb, const ObservationSet& observations) {
    kb.net.require_valid();
    std::vector<std::string> seeds;
    for (const auto& [id, state] : observations) {
        check_observation(kb, id, state);
        seeds.push_back(id);
    }

    // Scaffolding: decision and value nodes plus the value nodes' chance
    // parents (the permanent query set), whose own ancestors come along so
    // the result stays parent-closed.
    std::vector<std::string> scaffolding;
    for (const auto& node : kb.net.nodes()) {
        if (node.kind == NodeKind::decision) scaffolding.push_back(node.id());
        if (node.kind == NodeKind::value) {
            scaffolding.push_back(node.id());
            for (const auto& p : node.parents)
                if (kb.net.node(p).kind == NodeKind::chance)
                    seeds.push_back(p);
        }
    }

    std::vector<std::string> keep = ancestors_of(kb.net, seeds);
    keep.insert(keep.end(), scaffolding.begin(), scaffolding.end());
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

    Network slice = induced_subnetwork(kb.net, keep);
    slice.name = kb.net.name;
    return slice;
}

SliceSequence tailor_sequence(const KnowledgeBase& kb,
                              const Observations& observations) {
    SliceSequence seq;
    for (const auto& obs : observations.per_slice)
        seq.slices.push_back(tailor(kb, obs));
    return seq;
}

KnowledgeBase kb_from_document(NetworkDocument doc) {
    KnowledgeBase kb;
    kb.net = std::move(doc.net);
    kb.transitions = std::move(doc.transitions);
    if (doc.policy) kb.default_policy = *doc.policy;
    return kb;
}

KnowledgeBase load_kb(const std::string& path) {
    return kb_from_document(load_network(path));
}

NetworkDocument kb_to_document(const KnowledgeBase& kb) {
    NetworkDocument doc;
    doc.net = kb.net;
    doc.transitions = kb.transitions;
    doc.policy = kb.default_policy;
    return doc;
}

}  // namespace tid
