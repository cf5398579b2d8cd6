#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tid/kb.hpp"

// Bundled acute-abdominal-pain fixtures. Structure and variable roles follow
// the published domain descriptions; every probability is synthetic, drawn
// from the fixed seed below. No clinical validity is claimed (see
// data/PROVENANCE.md).
namespace tid::aap {

inline constexpr uint64_t kSeed = 424242;

// Full knowledge base: 52 findings, 20 intermediate (latent) disease states,
// 4 diseases, one treatment decision and one value node scaffolded onto the
// App/NSAP pair. Deterministic; data/aap_kb.tid is its canonical emission.
[[nodiscard]] KnowledgeBase knowledge_base();

// The seven-finding initial presentation; tailoring the KB to it yields the
// 13-chance-node slice (7 findings, 4 latents, 2 diseases) used by the pilot.
[[nodiscard]] ObservationSet presentation();
[[nodiscard]] std::vector<std::string> presented_findings();

// Findings that arrive at the second visit (anorexia, guarding).
[[nodiscard]] std::vector<std::string> followup_findings();

// The six evolving latent/disease variables for the driving policy.
[[nodiscard]] std::vector<std::string> driving_set();

// Hand-parameterized six-chance-node diagnosis network with decision and
// value nodes, for decision-machinery tests and small demos.
[[nodiscard]] Network mini_network();

}  // namespace tid::aap
