#include "tid/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <functional>
#include <set>

namespace tid {

namespace {
constexpr double kRowSumTolerance = 1e-12;
}

std::string to_string(VariableTag tag) {
    switch (tag) {
        case VariableTag::finding: return "finding";
        case VariableTag::latent: return "latent";
        case VariableTag::disease: return "disease";
        case VariableTag::other: return "other";
    }
    return "other";
}

std::string to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::chance: return "chance";
        case NodeKind::decision: return "decision";
        case NodeKind::value: return "value";
    }
    return "chance";
}

int Variable::state_index(const std::string& label) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i] == label) return static_cast<int>(i);
    return -1;
}

void Network::add_node(Node node) {
    if (index_.count(node.id()))
        throw ValidationError("duplicate node id: " + node.id());
    index_.emplace(node.id(), nodes_.size());
    nodes_.push_back(std::move(node));
}

void Network::add_node(Variable variable, NodeKind kind,
                       std::vector<std::string> parents) {
    Node n;
    n.variable = std::move(variable);
    n.kind = kind;
    n.parents = std::move(parents);
    add_node(std::move(n));
}

void Network::set_cpt(const std::string& node_id, Cpt cpt) {
    node(node_id).cpt = std::move(cpt);
}

void Network::set_loss(const std::string& node_id, std::vector<double> loss) {
    node(node_id).loss = std::move(loss);
}

bool Network::has_node(const std::string& id) const {
    return index_.count(id) != 0;
}

const Node& Network::node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw ValidationError("unknown node id: " + id);
    return nodes_[it->second];
}

Node& Network::node(const std::string& id) {
    auto it = index_.find(id);
    if (it == index_.end())
        throw ValidationError("unknown node id: " + id);
    return nodes_[it->second];
}

std::vector<std::string> Network::node_ids() const {
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) out.push_back(n.id());
    return out;
}

std::vector<std::string> Network::ids_of_kind(NodeKind kind) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.kind == kind) out.push_back(n.id());
    return out;
}

std::vector<std::string> Network::ids_of_tag(VariableTag tag) const {
    std::vector<std::string> out;
    for (const auto& n : nodes_)
        if (n.variable.tag == tag) out.push_back(n.id());
    return out;
}

std::vector<std::pair<std::string, std::string>> Network::arcs() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& n : nodes_)
        for (const auto& p : n.parents) out.emplace_back(p, n.id());
    return out;
}

long Network::row_count(const Node& n) const {
    long rows = 1;
    for (const auto& pid : n.parents) {
        if (!has_node(pid)) return -1;
        rows *= node(pid).variable.cardinality();
    }
    return rows;
}

long Network::row_index(const Node& n, const Assignment& assignment) const {
    long idx = 0;
    for (const auto& pid : n.parents) {
        const Variable& pv = node(pid).variable;
        auto it = assignment.find(pid);
        if (it == assignment.end())
            throw InferenceError("assignment missing parent '" + pid +
                                 "' of node '" + n.id() + "'");
        int s = pv.state_index(it->second);
        if (s < 0)
            throw InferenceError("'" + it->second + "' is not a state of '" +
                                 pid + "'");
        idx = idx * pv.cardinality() + s;
    }
    return idx;
}

std::vector<int> Network::row_config(const Node& n, long row) const {
    std::vector<int> cfg(n.parents.size(), 0);
    for (size_t i = n.parents.size(); i-- > 0;) {
        int card = node(n.parents[i]).variable.cardinality();
        cfg[i] = static_cast<int>(row % card);
        row /= card;
    }
    return cfg;
}

namespace {

// Smallest cycle reachable from unvisited nodes, reported once with its node
// ids sorted, so the violation is deterministic.
std::optional<std::vector<std::string>> find_cycle(const Network& net) {
    const auto& nodes = net.nodes();
    std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
    std::vector<std::string> stack;

    std::function<std::optional<std::vector<std::string>>(const std::string&)>
        visit = [&](const std::string& id)
        -> std::optional<std::vector<std::string>> {
        color[id] = 1;
        stack.push_back(id);
        if (net.has_node(id)) {
            for (const auto& p : net.node(id).parents) {
                if (!net.has_node(p)) continue;
                int c = color[p];
                if (c == 1) {
                    auto it = std::find(stack.begin(), stack.end(), p);
                    std::vector<std::string> cyc(it, stack.end());
                    std::sort(cyc.begin(), cyc.end());
                    return cyc;
                }
                if (c == 0) {
                    if (auto found = visit(p)) return found;
                }
            }
        }
        stack.pop_back();
        color[id] = 2;
        return std::nullopt;
    };

    for (const auto& n : nodes) {
        if (color[n.id()] == 0) {
            if (auto found = visit(n.id())) return found;
        }
    }
    return std::nullopt;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

ValidationReport Network::validate() const {
    ValidationReport report;
    auto add = [&](std::string code, std::string subject, std::string detail,
                   long row = -1) {
        report.push_back({std::move(code), std::move(subject),
                          std::move(detail), row});
    };

    // Per-node checks in id order so the report is deterministic.
    std::vector<const Node*> ordered;
    ordered.reserve(nodes_.size());
    for (const auto& n : nodes_) ordered.push_back(&n);
    std::sort(ordered.begin(), ordered.end(),
              [](const Node* a, const Node* b) { return a->id() < b->id(); });

    for (const Node* np : ordered) {
        const Node& n = *np;
        const std::string& id = n.id();
        if (n.kind != NodeKind::value && n.variable.states.size() < 2)
            add("domain-too-small", id,
                "domain must have at least 2 states");
        std::set<std::string> seen_states(n.variable.states.begin(),
                                          n.variable.states.end());
        if (seen_states.size() != n.variable.states.size())
            add("duplicate-state", id, "state labels repeat within domain");

        bool parents_ok = true;
        std::set<std::string> seen_parents;
        for (const auto& p : n.parents) {
            if (!has_node(p)) {
                add("unknown-parent", id, "parent '" + p + "' does not exist");
                parents_ok = false;
            } else if (node(p).kind == NodeKind::value) {
                add("value-node-has-child", p,
                    "value node '" + p + "' is a parent of '" + id + "'");
            }
            if (!seen_parents.insert(p).second) {
                add("duplicate-parent", id, "parent '" + p + "' repeats");
                parents_ok = false;
            }
        }

        if (n.kind == NodeKind::chance) {
            if (!n.cpt) {
                add("missing-cpt", id, "chance node has no CPT");
            } else if (parents_ok) {
                long rows = row_count(n);
                if (static_cast<long>(n.cpt->rows.size()) != rows) {
                    add("cpt-row-count", id,
                        "expected " + std::to_string(rows) + " rows, got " +
                            std::to_string(n.cpt->rows.size()));
                } else {
                    for (long r = 0; r < rows; ++r) {
                        const auto& row = n.cpt->rows[r];
                        if (static_cast<int>(row.size()) !=
                            n.variable.cardinality()) {
                            add("cpt-row-width", id,
                                "row width does not match domain size", r);
                            continue;
                        }
                        double sum = 0.0;
                        bool in_range = true;
                        for (double p : row) {
                            sum += p;
                            if (p < 0.0 || p > 1.0) in_range = false;
                        }
                        if (!in_range)
                            add("probability-out-of-range", id,
                                "entries must lie in [0, 1]", r);
                        if (std::abs(sum - 1.0) > kRowSumTolerance)
                            add("row-not-normalized", id,
                                "row sums to " + format_double(sum), r);
                    }
                }
            }
        } else if (n.kind == NodeKind::decision) {
            if (n.cpt)
                add("decision-node-has-cpt", id,
                    "decision nodes carry no CPT");
        } else {  // value
            if (!n.loss) {
                add("missing-loss", id, "value node has no loss table");
            } else if (parents_ok) {
                long rows = row_count(n);
                if (static_cast<long>(n.loss->size()) != rows)
                    add("loss-row-count", id,
                        "expected " + std::to_string(rows) + " entries, got " +
                            std::to_string(n.loss->size()));
                for (size_t r = 0; r < n.loss->size(); ++r)
                    if (!std::isfinite((*n.loss)[r]))
                        add("loss-not-finite", id, "loss entry is not finite",
                            static_cast<long>(r));
            }
            if (n.cpt)
                add("value-node-has-cpt", id, "value nodes carry no CPT");
        }
    }

    if (auto cyc = find_cycle(*this))
        add("cycle", join(*cyc, ","), "arcs form a directed cycle");

    return report;
}

void Network::require_valid() const {
    auto report = validate();
    if (report.empty()) return;
    const Violation& v = report.front();
    throw ValidationError("invalid network '" + name + "': " + v.code + " at " +
                          v.subject + " (" + v.detail + ")");
}

std::vector<size_t> Network::topological_order() const {
    std::vector<size_t> order;
    std::map<std::string, int> pending;
    std::deque<size_t> ready;
    for (size_t i = 0; i < nodes_.size(); ++i) {
        int deg = 0;
        for (const auto& p : nodes_[i].parents)
            if (has_node(p)) ++deg;
        pending[nodes_[i].id()] = deg;
        if (deg == 0) ready.push_back(i);
    }
    std::vector<std::vector<size_t>> children(nodes_.size());
    for (size_t i = 0; i < nodes_.size(); ++i)
        for (const auto& p : nodes_[i].parents) {
            auto it = index_.find(p);
            if (it != index_.end()) children[it->second].push_back(i);
        }
    while (!ready.empty()) {
        size_t i = ready.front();
        ready.pop_front();
        order.push_back(i);
        for (size_t c : children[i])
            if (--pending[nodes_[c].id()] == 0) ready.push_back(c);
    }
    if (order.size() != nodes_.size())
        throw ValidationError("network '" + name + "' contains a cycle");
    return order;
}

double joint_probability(const Network& net, const Assignment& assignment) {
    net.require_valid();
    double product = 1.0;
    for (const auto& n : net.nodes()) {
        if (n.kind != NodeKind::chance) continue;
        auto it = assignment.find(n.id());
        if (it == assignment.end())
            throw InferenceError("assignment missing chance node '" + n.id() +
                                 "'");
        int s = n.variable.state_index(it->second);
        if (s < 0)
            throw InferenceError("'" + it->second + "' is not a state of '" +
                                 n.id() + "'");
        long row = net.row_index(n, assignment);
        product *= n.cpt->rows[row][s];
    }
    return product;
}

std::vector<std::string> ancestors_of(const Network& net,
                                      const std::vector<std::string>& ids) {
    std::set<std::string> seen;
    std::deque<std::string> frontier;
    for (const auto& id : ids)
        if (seen.insert(id).second) frontier.push_back(id);
    while (!frontier.empty()) {
        std::string id = frontier.front();
        frontier.pop_front();
        if (!net.has_node(id)) continue;
        for (const auto& p : net.node(id).parents)
            if (seen.insert(p).second) frontier.push_back(p);
    }
    return {seen.begin(), seen.end()};
}

Network induced_subnetwork(const Network& net,
                           const std::vector<std::string>& keep) {
    std::set<std::string> kept(keep.begin(), keep.end());
    Network out;
    out.name = net.name;
    for (const auto& n : net.nodes()) {
        if (!kept.count(n.id())) continue;
        Node copy = n;
        if (n.kind == NodeKind::decision) {
            // Decision nodes may cite informational parents that were pruned.
            std::vector<std::string> parents;
            for (const auto& p : n.parents)
                if (kept.count(p)) parents.push_back(p);
            copy.parents = std::move(parents);
        }
        out.add_node(std::move(copy));
    }
    return out;
}

Network bn_portion(const Network& net) {
    std::vector<std::string> keep;
    for (const auto& n : net.nodes())
        if (n.kind == NodeKind::chance) keep.push_back(n.id());
    Network out = induced_subnetwork(net, keep);
    out.name = net.name;
    return out;
}

}  // namespace tid
