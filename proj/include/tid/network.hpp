#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tid/common.hpp"

namespace tid {

enum class VariableTag { finding, latent, disease, other };
enum class NodeKind { chance, decision, value };

[[nodiscard]] std::string to_string(VariableTag tag);
[[nodiscard]] std::string to_string(NodeKind kind);

struct Variable {
    std::string id;
    std::string name;  // human label; empty means "same as id"
    std::vector<std::string> states;
    VariableTag tag = VariableTag::other;

    // -1 when the label is not a state of this variable.
    [[nodiscard]] int state_index(const std::string& label) const;
    [[nodiscard]] int cardinality() const {
        return static_cast<int>(states.size());
    }
};

// One conditional table. rows[r] is the distribution over the child's states
// for parent configuration r. Rows are ordered lexicographically by parent
// states in the node's parent order, first parent most significant.
struct Cpt {
    std::vector<std::vector<double>> rows;
};

struct Node {
    Variable variable;
    NodeKind kind = NodeKind::chance;
    std::vector<std::string> parents;        // ordered; fixes CPT row indexing
    std::optional<Cpt> cpt;                  // chance nodes
    std::optional<std::vector<double>> loss; // value nodes, one entry per parent config

    [[nodiscard]] const std::string& id() const { return variable.id; }
};

struct Violation {
    std::string code;     // "cycle", "row-not-normalized", ...
    std::string subject;  // offending node/variable id (comma list for cycles)
    std::string detail;
    long row = -1;  // CPT/loss row when applicable
};
using ValidationReport = std::vector<Violation>;

// A full assignment, variable id -> state label. std::map keeps iteration
// deterministic.
using Assignment = std::map<std::string, std::string>;

// Directed graphical model over discrete variables with optional decision and
// value nodes. Mutable while being assembled by a single owner; immutable (and
// safe to share across threads) once handed to the operations below, all of
// which take it by const reference.
//
// Invalid structures are representable on purpose: validate() reports
// violations as data, and every operation with a validity precondition calls
// require_valid() to fail fast instead.
class Network {
public:
    std::string name;

    void add_node(Node node);
    void add_node(Variable variable, NodeKind kind,
                  std::vector<std::string> parents = {});
    void set_cpt(const std::string& node_id, Cpt cpt);
    // Value-node tables are stored as loss; text files carry utilities and the
    // loader negates them (and the emitter negates back).
    void set_loss(const std::string& node_id, std::vector<double> loss);

    [[nodiscard]] bool has_node(const std::string& id) const;
    [[nodiscard]] const Node& node(const std::string& id) const;
    [[nodiscard]] Node& node(const std::string& id);
    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }
    [[nodiscard]] size_t size() const { return nodes_.size(); }

    [[nodiscard]] std::vector<std::string> node_ids() const;  // insertion order
    [[nodiscard]] std::vector<std::string> ids_of_kind(NodeKind kind) const;
    [[nodiscard]] std::vector<std::string> ids_of_tag(VariableTag tag) const;
    // (from, to) pairs; per-child arcs follow the child's parent order.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> arcs() const;

    // Number of parent configurations = CPT/loss row count for the node.
    [[nodiscard]] long row_count(const Node& node) const;
    // Row selected by a full assignment of the node's parents.
    [[nodiscard]] long row_index(const Node& node,
                                 const Assignment& assignment) const;
    // Inverse of the row indexing: parent states for a given row.
    [[nodiscard]] std::vector<int> row_config(const Node& node, long row) const;

    [[nodiscard]] ValidationReport validate() const;
    [[nodiscard]] bool is_valid() const { return validate().empty(); }
    // Throws ValidationError describing the first violation.
    void require_valid() const;

    // Topological order of node indices; throws ValidationError on a cycle.
    [[nodiscard]] std::vector<size_t> topological_order() const;

private:
    std::vector<Node> nodes_;
    std::map<std::string, size_t> index_;
};

// Product over chance nodes of the CPT entry selected by the assignment,
// which must cover every chance node. Decision nodes contribute no factor but
// may appear as parents, in which case the assignment must cover them too.
[[nodiscard]] double joint_probability(const Network& net,
                                       const Assignment& assignment);

// Structural helpers shared by the temporal and kb modules.
[[nodiscard]] std::vector<std::string> ancestors_of(
    const Network& net, const std::vector<std::string>& ids);
// Induced subnetwork on `keep` (must be closed under chance/value parents).
[[nodiscard]] Network induced_subnetwork(const Network& net,
                                         const std::vector<std::string>& keep);
// Chance nodes only; drops decision and value nodes.
[[nodiscard]] Network bn_portion(const Network& net);

}  // namespace tid
