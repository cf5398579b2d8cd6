#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tid/network.hpp"

namespace tid {

// Node ids in a flattened temporal network are "<variable>@<slice>".
[[nodiscard]] std::string slice_id(const std::string& variable, int slice);
// Splits "App@3" into ("App", 3); a plain id maps to slice 0.
[[nodiscard]] std::pair<std::string, int> split_slice_id(const std::string& id);

struct SliceSequence {
    std::vector<Network> slices;  // G_0 .. G_N, contiguous from 0

    [[nodiscard]] int horizon() const {  // N
        return static_cast<int>(slices.size()) - 1;
    }
};

// Arc from (variable, slice t-k) to (variable, slice t), k >= 1.
struct TemporalArc {
    std::string from_var;
    int from_slice = 0;
    std::string to_var;
    int to_slice = 0;

    [[nodiscard]] int lag() const { return to_slice - from_slice; }
    auto operator<=>(const TemporalArc&) const = default;
};

enum class PolicyKind { markov, driving, observable, custom };

[[nodiscard]] std::string to_string(PolicyKind kind);

// Rule generating the temporal arcs. The non-custom kinds generate self-arcs
// (v at t-j -> v at t for 1 <= j <= order) over their scope: every shared
// chance variable for markov, an explicit subset for driving/observable.
// Cross-variable temporal arcs are expressible through the custom kind.
struct TemporalArcPolicy {
    PolicyKind kind = PolicyKind::markov;
    int order = 1;
    std::vector<std::string> scope;        // driving / observable subset
    std::vector<TemporalArc> custom_arcs;  // custom kind only

    static TemporalArcPolicy markov(int order = 1);
    static TemporalArcPolicy driving(std::vector<std::string> subset,
                                     int order = 1);
    static TemporalArcPolicy observable(std::vector<std::string> subset,
                                        int order = 1);
    static TemporalArcPolicy custom(std::vector<TemporalArc> arcs);
};

// psi = dynamic ∪ static ∪ independent, disjoint.
struct Partition {
    std::vector<std::string> dynamic;
    std::vector<std::string> static_vars;
    std::vector<std::string> independent;
};

// Joint conditional table for a temporal child: rows condition on the child's
// within-slice parents (in slice parent order) followed by the temporal
// parents in canonical order (lag ascending, then variable id).
struct TransitionTable {
    std::string child;
    std::vector<std::pair<std::string, int>> temporal_parents;  // (var, lag)
    Cpt table;

    [[nodiscard]] static std::vector<std::pair<std::string, int>>
    canonical_parents(std::vector<std::pair<std::string, int>> parents);
};

struct TransitionSpecSet {
    std::vector<TransitionTable> tables;

    [[nodiscard]] const TransitionTable* find(
        const std::string& child,
        const std::vector<std::pair<std::string, int>>& temporal_parents) const;
    void add(TransitionTable table);  // replaces an existing signature
};

struct ElementCounts {
    long nodes = 0;                       // |V^N|
    long arcs = 0;                        // |A^N|
    std::vector<long> temporal_per_slice; // |A_tau(t)| for t = 1..N
};

// Slice sequence joined by temporal arcs, plus the flattened single network
// over "<variable>@<slice>" ids that the inference machinery consumes.
struct TemporalNetwork {
    SliceSequence slices;
    TemporalArcPolicy policy;
    std::vector<TemporalArc> arcs;
    Network flattened;
};

// Applies the policy to the slice sequence. Deterministic order:
// (to_slice, to_var, lag). Scope variables must exist in at least one slice;
// a non-custom order larger than the last slice index is an error when the
// sequence has two or more slices (a single slice has no temporal structure).
[[nodiscard]] std::vector<TemporalArc> generate_arcs(
    const TemporalArcPolicy& policy, const SliceSequence& slices);

// Builds the flattened network. Within-slice arcs and CPTs are preserved;
// each temporal child's CPT is replaced by its joint transition table, which
// must be present in `transitions` for the exact conditioning signature.
[[nodiscard]] TemporalNetwork unroll(const SliceSequence& slices,
                                     const TemporalArcPolicy& policy,
                                     const TransitionSpecSet& transitions);

// Same construction over an explicit arc set (already validated/generated);
// `policy` is recorded on the result but not re-applied.
[[nodiscard]] TemporalNetwork unroll_arcs(const SliceSequence& slices,
                                          std::vector<TemporalArc> arcs,
                                          const TransitionSpecSet& transitions,
                                          const TemporalArcPolicy& policy);

// dynamic = given ids; independent = no directed path to or from any dynamic
// variable; static = the remainder.
[[nodiscard]] Partition partition(const Network& slice,
                                  const std::vector<std::string>& dynamic_ids);

[[nodiscard]] ElementCounts count_elements(const TemporalNetwork& tn);

}  // namespace tid
