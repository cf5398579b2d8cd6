#include "tid/temporal.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <map>
#include <set>

namespace tid {

std::string slice_id(const std::string& variable, int slice) {
    return variable + "@" + std::to_string(slice);
}

std::pair<std::string, int> split_slice_id(const std::string& id) {
    auto pos = id.rfind('@');
    if (pos == std::string::npos) return {id, 0};
    const std::string tail = id.substr(pos + 1);
    char* end = nullptr;
    long slice = std::strtol(tail.c_str(), &end, 10);
    if (end == tail.c_str() || *end != '\0')
        return {id, 0};  // '@' was part of the name itself
    return {id.substr(0, pos), static_cast<int>(slice)};
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::markov: return "markov";
        case PolicyKind::driving: return "driving";
        case PolicyKind::observable: return "observable";
        case PolicyKind::custom: return "custom";
    }
    return "markov";
}

TemporalArcPolicy TemporalArcPolicy::markov(int order) {
    TemporalArcPolicy p;
    p.kind = PolicyKind::markov;
    p.order = order;
    return p;
}

TemporalArcPolicy TemporalArcPolicy::driving(std::vector<std::string> subset,
                                             int order) {
    TemporalArcPolicy p;
    p.kind = PolicyKind::driving;
    p.order = order;
    p.scope = std::move(subset);
    return p;
}

TemporalArcPolicy TemporalArcPolicy::observable(std::vector<std::string> subset,
                                                int order) {
    TemporalArcPolicy p;
    p.kind = PolicyKind::observable;
    p.order = order;
    p.scope = std::move(subset);
    return p;
}

TemporalArcPolicy TemporalArcPolicy::custom(std::vector<TemporalArc> arcs) {
    TemporalArcPolicy p;
    p.kind = PolicyKind::custom;
    p.order = 0;
    p.custom_arcs = std::move(arcs);
    return p;
}

std::vector<std::pair<std::string, int>> TransitionTable::canonical_parents(
    std::vector<std::pair<std::string, int>> parents) {
    std::sort(parents.begin(), parents.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second < b.second;
                  return a.first < b.first;
              });
    return parents;
}

const TransitionTable* TransitionSpecSet::find(
    const std::string& child,
    const std::vector<std::pair<std::string, int>>& temporal_parents) const {
    auto canon = TransitionTable::canonical_parents(temporal_parents);
    for (const auto& t : tables)
        if (t.child == child && t.temporal_parents == canon) return &t;
    return nullptr;
}

void TransitionSpecSet::add(TransitionTable table) {
    table.temporal_parents =
        TransitionTable::canonical_parents(table.temporal_parents);
    for (auto& t : tables) {
        if (t.child == table.child &&
            t.temporal_parents == table.temporal_parents) {
            t = std::move(table);
            return;
        }
    }
    tables.push_back(std::move(table));
}

std::vector<TemporalArc> generate_arcs(const TemporalArcPolicy& policy,
                                       const SliceSequence& slices) {
    const int n = slices.horizon();
    if (n < 0) throw ValidationError("empty slice sequence");

    std::vector<TemporalArc> arcs;
    if (policy.kind == PolicyKind::custom) {
        for (const auto& a : policy.custom_arcs) {
            if (a.lag() < 1)
                throw ValidationError("temporal arc must run forward in time: " +
                                      a.from_var);
            if (a.from_slice < 0 || a.to_slice > n)
                throw ValidationError("temporal arc slice out of range for '" +
                                      a.to_var + "' (lag exceeds slice count)");
            auto check = [&](const std::string& var, int t) {
                const Network& g = slices.slices[t];
                if (!g.has_node(var) ||
                    g.node(var).kind != NodeKind::chance)
                    throw ValidationError("variable '" + var +
                                          "' is not a chance node in slice " +
                                          std::to_string(t));
            };
            check(a.from_var, a.from_slice);
            check(a.to_var, a.to_slice);
            arcs.push_back(a);
        }
    } else {
        if (policy.order < 1)
            throw ValidationError("temporal policy order must be >= 1");
        if (n >= 1 && policy.order > n)
            throw ValidationError("policy lag " + std::to_string(policy.order) +
                                  " exceeds slice count " +
                                  std::to_string(n + 1));
        // Scope: every shared chance variable for markov, the explicit subset
        // otherwise. Subset ids must exist somewhere in the sequence.
        std::set<std::string> scope;
        if (policy.kind == PolicyKind::markov) {
            for (const auto& g : slices.slices)
                for (const auto& node : g.nodes())
                    if (node.kind == NodeKind::chance) scope.insert(node.id());
        } else {
            for (const auto& id : policy.scope) {
                bool found = false;
                for (const auto& g : slices.slices)
                    if (g.has_node(id) &&
                        g.node(id).kind == NodeKind::chance)
                        found = true;
                if (!found)
                    throw ValidationError(
                        "unknown variable in policy scope: '" + id + "'");
                scope.insert(id);
            }
        }
        for (int t = 1; t <= n; ++t) {
            for (int lag = 1; lag <= std::min(policy.order, t); ++lag) {
                for (const auto& v : scope) {
                    const Network& from = slices.slices[t - lag];
                    const Network& to = slices.slices[t];
                    if (from.has_node(v) && to.has_node(v) &&
                        from.node(v).kind == NodeKind::chance &&
                        to.node(v).kind == NodeKind::chance)
                        arcs.push_back({v, t - lag, v, t});
                }
            }
        }
    }
    std::sort(arcs.begin(), arcs.end(), [](const TemporalArc& a,
                                           const TemporalArc& b) {
        if (a.to_slice != b.to_slice) return a.to_slice < b.to_slice;
        if (a.to_var != b.to_var) return a.to_var < b.to_var;
        if (a.lag() != b.lag()) return a.lag() < b.lag();
        return a.from_var < b.from_var;
    });
    arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
    return arcs;
}

TemporalNetwork unroll(const SliceSequence& slices,
                       const TemporalArcPolicy& policy,
                       const TransitionSpecSet& transitions) {
    return unroll_arcs(slices, generate_arcs(policy, slices), transitions,
                       policy);
}

TemporalNetwork unroll_arcs(const SliceSequence& slices,
                            std::vector<TemporalArc> arcs,
                            const TransitionSpecSet& transitions,
                            const TemporalArcPolicy& policy) {
    for (const auto& g : slices.slices) g.require_valid();

    TemporalNetwork tn;
    tn.slices = slices;
    tn.policy = policy;
    tn.arcs = std::move(arcs);

    // Temporal in-arcs per (slice, child variable).
    std::map<std::pair<int, std::string>, std::vector<TemporalArc>> incoming;
    for (const auto& a : tn.arcs)
        incoming[{a.to_slice, a.to_var}].push_back(a);

    Network flat;
    flat.name = slices.slices.front().name.empty()
                    ? std::string("unrolled")
                    : slices.slices.front().name + "-unrolled";
    const int n = slices.horizon();
    for (int t = 0; t <= n; ++t) {
        const Network& g = slices.slices[t];
        for (const auto& src : g.nodes()) {
            Node node = src;
            node.variable.id = slice_id(src.id(), t);
            node.parents.clear();
            for (const auto& p : src.parents)
                node.parents.push_back(slice_id(p, t));

            auto it = incoming.find({t, src.id()});
            if (it != incoming.end()) {
                if (src.kind != NodeKind::chance)
                    throw ValidationError("temporal arc into non-chance node '" +
                                          src.id() + "'");
                std::vector<std::pair<std::string, int>> tparents;
                for (const auto& a : it->second)
                    tparents.emplace_back(a.from_var, a.lag());
                tparents = TransitionTable::canonical_parents(tparents);

                const TransitionTable* spec =
                    transitions.find(src.id(), tparents);
                if (!spec) {
                    std::string sig;
                    for (const auto& [v, lag] : tparents)
                        sig += " " + v + "[-" + std::to_string(lag) + "]";
                    throw ValidationError(
                        "missing transition table for temporal child '" +
                        src.id() + "' conditioned on" + sig);
                }
                for (const auto& [v, lag] : tparents)
                    node.parents.push_back(slice_id(v, t - lag));

                long expect_rows = 1;
                for (const auto& p : src.parents)
                    expect_rows *= g.node(p).variable.cardinality();
                for (const auto& [v, lag] : tparents)
                    expect_rows *=
                        slices.slices[t - lag].node(v).variable.cardinality();
                if (static_cast<long>(spec->table.rows.size()) != expect_rows)
                    throw ValidationError(
                        "transition table for '" + src.id() + "' has " +
                        std::to_string(spec->table.rows.size()) +
                        " rows, parents require " +
                        std::to_string(expect_rows));
                node.cpt = spec->table;
            }
            flat.add_node(std::move(node));
        }
    }
    flat.require_valid();
    tn.flattened = std::move(flat);
    return tn;
}

Partition partition(const Network& slice,
                    const std::vector<std::string>& dynamic_ids) {
    std::set<std::string> dynamic;
    for (const auto& id : dynamic_ids) {
        if (!slice.has_node(id))
            throw ValidationError("unknown variable in partition: '" + id +
                                  "'");
        dynamic.insert(id);
    }

    // Reachability to or from the dynamic set, over the undirected union of
    // forward and backward closures.
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& [from, to] : slice.arcs()) children[from].push_back(to);

    std::set<std::string> touched;
    std::deque<std::string> frontier(dynamic.begin(), dynamic.end());
    for (const auto& id : dynamic) touched.insert(id);
    // descendants
    while (!frontier.empty()) {
        auto id = frontier.front();
        frontier.pop_front();
        for (const auto& c : children[id])
            if (touched.insert(c).second) frontier.push_back(c);
    }
    // ancestors
    for (const auto& id :
         ancestors_of(slice, {dynamic.begin(), dynamic.end()}))
        touched.insert(id);

    Partition part;
    for (const auto& node : slice.nodes()) {
        const auto& id = node.id();
        if (dynamic.count(id))
            part.dynamic.push_back(id);
        else if (touched.count(id))
            part.static_vars.push_back(id);
        else
            part.independent.push_back(id);
    }
    return part;
}

ElementCounts count_elements(const TemporalNetwork& tn) {
    ElementCounts counts;
    for (const auto& g : tn.slices.slices) {
        counts.nodes += static_cast<long>(g.size());
        counts.arcs += static_cast<long>(g.arcs().size());
    }
    counts.temporal_per_slice.assign(
        std::max(0, tn.slices.horizon()), 0);
    for (const auto& a : tn.arcs) {
        counts.arcs += 1;
        counts.temporal_per_slice[a.to_slice - 1] += 1;
    }
    return counts;
}

}  // namespace tid
