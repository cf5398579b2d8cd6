#pragma once

#include <map>
#include <string>
#include <vector>

#include "tid/network.hpp"
#include "tid/temporal.hpp"
#include "tid/text_format.hpp"

namespace tid {

// Template network over the full domain vocabulary, plus the transition
// tables and the default temporal policy used when unrolling tailored
// sequences. Immutable after load; tailoring is pure.
struct KnowledgeBase {
    Network net;
    TransitionSpecSet transitions;
    TemporalArcPolicy default_policy = TemporalArcPolicy::markov(1);

    [[nodiscard]] std::vector<std::string> findings() const {
        return net.ids_of_tag(VariableTag::finding);
    }
    [[nodiscard]] std::vector<std::string> diseases() const {
        return net.ids_of_tag(VariableTag::disease);
    }
    [[nodiscard]] std::vector<std::string> latents() const {
        return net.ids_of_tag(VariableTag::latent);
    }
};

// Per-slice observed findings, finding id -> state label.
using ObservationSet = std::map<std::string, std::string>;

struct Observations {
    std::vector<ObservationSet> per_slice;  // index = time slice
};

// Template validity plus KB-specific invariants: every finding reachable from
// a disease or latent node, observations-to-be must name finding variables.
[[nodiscard]] ValidationReport validate_kb(const KnowledgeBase& kb);

// Subnetwork induced by the observed findings' ancestor closure plus the
// decision/value scaffolding (value nodes keep their chance parents, so the
// scaffolded diseases are always present). Throws on an observation naming an
// unknown or non-finding variable.
[[nodiscard]] Network tailor(const KnowledgeBase& kb,
                             const ObservationSet& observations);

// One tailored network per slice; a variable appears in slice t iff it
// appears in tailor(kb, O_t).
[[nodiscard]] SliceSequence tailor_sequence(const KnowledgeBase& kb,
                                            const Observations& observations);

[[nodiscard]] KnowledgeBase kb_from_document(NetworkDocument doc);
[[nodiscard]] KnowledgeBase load_kb(const std::string& path);
[[nodiscard]] NetworkDocument kb_to_document(const KnowledgeBase& kb);

}  // namespace tid
