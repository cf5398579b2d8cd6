#include "tid/text_format.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lexer.hpp"

namespace tid {

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;
using detail::parse_number;
using detail::parse_number_list;
using detail::parse_id_list;

// One "Var=state" or "Var[-k]=state" conditioner.
struct CondKey {
    std::string var;
    int lag = 0;
    std::string state;
};

std::vector<CondKey> parse_cond_keys(Lexer& lex) {
    std::vector<CondKey> keys;
    while (true) {
        CondKey k;
        k.var = lex.expect(Tok::word, "variable id").text;
        if (lex.peek().kind == Tok::lbracket) {
            lex.take();
            double lag = parse_number(lex);
            lex.expect(Tok::rbracket, "']'");
            k.lag = static_cast<int>(-lag);
            if (k.lag < 1) lex.fail("lag must be negative, e.g. [-1]");
        }
        lex.expect(Tok::equals, "'='");
        k.state = lex.expect(Tok::word, "state label").text;
        keys.push_back(std::move(k));
        if (lex.peek().kind != Tok::comma) break;
        lex.take();
    }
    return keys;
}

int state_index_or_fail(Lexer& lex, const Network& net, const std::string& var,
                        const std::string& state) {
    if (!net.has_node(var)) lex.fail("unknown variable '" + var + "'");
    int s = net.node(var).variable.state_index(state);
    if (s < 0) lex.fail("'" + state + "' is not a state of '" + var + "'");
    return s;
}

void parse_variables(Lexer& lex, Network& net,
                     std::map<std::string, Variable>& vars,
                     std::vector<std::string>& order) {
    lex.expect(Tok::lbrace, "'{'");
    while (lex.peek().kind != Tok::rbrace) {
        Variable v;
        v.id = lex.expect(Tok::word, "variable id").text;
        if (lex.peek().kind == Tok::str) v.name = lex.take().text;
        v.states = parse_id_list(lex);
        if (vars.count(v.id)) lex.fail("duplicate variable '" + v.id + "'");
        order.push_back(v.id);
        vars.emplace(v.id, std::move(v));
    }
    lex.take();
    (void)net;
}

NodeKind parse_kind(Lexer& lex) {
    Token t = lex.expect(Tok::word, "node kind");
    if (t.text == "chance") return NodeKind::chance;
    if (t.text == "decision") return NodeKind::decision;
    if (t.text == "value") return NodeKind::value;
    lex.fail("unknown node kind '" + t.text + "'");
}

VariableTag parse_tag_name(Lexer& lex, const std::string& word) {
    if (word == "finding") return VariableTag::finding;
    if (word == "latent") return VariableTag::latent;
    if (word == "disease") return VariableTag::disease;
    if (word == "other") return VariableTag::other;
    lex.fail("unknown tag '" + word + "'");
}

}  // namespace

NetworkDocument parse_network(const std::string& text) {
    Lexer lex(text);
    NetworkDocument doc;

    lex.expect(Tok::word, "'network'");
    doc.net.name = lex.expect(Tok::word, "network name").text;

    std::map<std::string, Variable> vars;
    std::vector<std::string> var_order;
    bool nodes_done = false;

    while (lex.peek().kind != Tok::end) {
        Token section = lex.expect(Tok::word, "section name");
        if (section.text == "variables") {
            parse_variables(lex, doc.net, vars, var_order);
        } else if (section.text == "nodes") {
            lex.expect(Tok::lbrace, "'{'");
            while (lex.peek().kind != Tok::rbrace) {
                std::string id = lex.expect(Tok::word, "node id").text;
                NodeKind kind = parse_kind(lex);
                auto it = vars.find(id);
                if (it == vars.end())
                    lex.fail("node '" + id + "' has no variable declaration");
                doc.net.add_node(it->second, kind);
            }
            lex.take();
            nodes_done = true;
        } else if (section.text == "arcs") {
            if (!nodes_done) lex.fail("arcs section before nodes section");
            lex.expect(Tok::lbrace, "'{'");
            while (lex.peek().kind != Tok::rbrace) {
                std::string from = lex.expect(Tok::word, "arc source").text;
                lex.expect(Tok::arrow, "'->'");
                std::string to = lex.expect(Tok::word, "arc target").text;
                if (!doc.net.has_node(to))
                    lex.fail("arc target '" + to + "' is not a node");
                doc.net.node(to).parents.push_back(from);
            }
            lex.take();
        } else if (section.text == "cpts" || section.text == "utilities") {
            const bool is_cpt = section.text == "cpts";
            lex.expect(Tok::lbrace, "'{'");
            while (lex.peek().kind != Tok::rbrace) {
                std::string child = lex.expect(Tok::word, "node id").text;
                if (!doc.net.has_node(child))
                    lex.fail("unknown node '" + child + "'");
                Node& node = doc.net.node(child);
                Assignment row_key;
                if (lex.peek().kind == Tok::pipe) {
                    lex.take();
                    for (const auto& k : parse_cond_keys(lex)) {
                        if (k.lag != 0)
                            lex.fail("lagged conditioner outside transitions");
                        state_index_or_fail(lex, doc.net, k.var, k.state);
                        row_key[k.var] = k.state;
                    }
                }
                for (const auto& p : node.parents)
                    if (!row_key.count(p))
                        lex.fail("row for '" + child + "' missing parent '" +
                                 p + "'");
                if (row_key.size() != node.parents.size())
                    lex.fail("row for '" + child +
                             "' conditions on a non-parent");
                long row = doc.net.row_index(node, row_key);
                lex.expect(Tok::colon, "':'");
                if (is_cpt) {
                    if (!node.cpt) {
                        node.cpt = Cpt{};
                        node.cpt->rows.assign(
                            std::max<long>(doc.net.row_count(node), 0), {});
                    }
                    if (row < static_cast<long>(node.cpt->rows.size()) &&
                        !node.cpt->rows[row].empty())
                        lex.fail("duplicate CPT row for '" + child + "'");
                    node.cpt->rows[row] = parse_number_list(lex);
                } else {
                    if (!node.loss) {
                        node.loss = std::vector<double>(
                            std::max<long>(doc.net.row_count(node), 0), 0.0);
                    }
                    // Utilities on disk, loss in memory.
                    (*node.loss)[row] = -parse_number(lex);
                }
            }
            lex.take();
        } else if (section.text == "tags") {
            lex.expect(Tok::lbrace, "'{'");
            while (lex.peek().kind != Tok::rbrace) {
                VariableTag tag =
                    parse_tag_name(lex, lex.expect(Tok::word, "tag").text);
                for (const auto& id : parse_id_list(lex)) {
                    if (!doc.net.has_node(id))
                        lex.fail("tagged id '" + id + "' is not a node");
                    doc.net.node(id).variable.tag = tag;
                }
            }
            lex.take();
        } else if (section.text == "temporal") {
            lex.expect(Tok::lbrace, "'{'");
            TemporalArcPolicy policy;
            bool have_policy = false;
            struct RawRow {
                std::vector<CondKey> keys;
                std::vector<double> probs;
                int line;
            };
            std::map<std::pair<std::string, std::vector<std::pair<std::string, int>>>,
                     std::vector<RawRow>>
                groups;
            while (lex.peek().kind != Tok::rbrace) {
                Token head = lex.expect(Tok::word, "temporal field");
                if (head.text == "kind") {
                    Token k = lex.expect(Tok::word, "policy kind");
                    have_policy = true;
                    if (k.text == "markov")
                        policy.kind = PolicyKind::markov;
                    else if (k.text == "driving")
                        policy.kind = PolicyKind::driving;
                    else if (k.text == "observable")
                        policy.kind = PolicyKind::observable;
                    else if (k.text == "custom")
                        policy.kind = PolicyKind::custom;
                    else
                        lex.fail("unknown policy kind '" + k.text + "'");
                } else if (head.text == "order") {
                    policy.order = static_cast<int>(parse_number(lex));
                } else if (head.text == "scope") {
                    policy.scope = parse_id_list(lex);
                } else if (head.text == "arcs") {
                    lex.expect(Tok::lbrace, "'{'");
                    while (lex.peek().kind != Tok::rbrace) {
                        auto [fv, fs] = split_slice_id(
                            lex.expect(Tok::word, "arc source").text);
                        lex.expect(Tok::arrow, "'->'");
                        auto [tv, ts] = split_slice_id(
                            lex.expect(Tok::word, "arc target").text);
                        policy.custom_arcs.push_back({fv, fs, tv, ts});
                    }
                    lex.take();
                } else if (head.text == "transitions") {
                    lex.expect(Tok::lbrace, "'{'");
                    while (lex.peek().kind != Tok::rbrace) {
                        RawRow raw;
                        raw.line = lex.peek().line;
                        std::string child =
                            lex.expect(Tok::word, "child id").text;
                        if (!doc.net.has_node(child))
                            lex.fail("unknown transition child '" + child +
                                     "'");
                        lex.expect(Tok::pipe, "'|'");
                        raw.keys = parse_cond_keys(lex);
                        lex.expect(Tok::colon, "':'");
                        raw.probs = parse_number_list(lex);
                        std::vector<std::pair<std::string, int>> sig;
                        for (const auto& k : raw.keys)
                            if (k.lag > 0) sig.emplace_back(k.var, k.lag);
                        sig = TransitionTable::canonical_parents(sig);
                        groups[{child, sig}].push_back(std::move(raw));
                    }
                    lex.take();
                } else {
                    lex.fail("unknown temporal field '" + head.text + "'");
                }
            }
            lex.take();
            if (have_policy) doc.policy = policy;

            // Assemble each group into a complete joint table.
            for (auto& [key, rows] : groups) {
                const auto& [child, sig] = key;
                const Node& node = doc.net.node(child);
                TransitionTable table;
                table.child = child;
                table.temporal_parents = sig;
                long row_count = 1;
                for (const auto& p : node.parents)
                    row_count *= doc.net.node(p).variable.cardinality();
                for (const auto& [v, lag] : sig) {
                    if (!doc.net.has_node(v))
                        throw FormatError("unknown temporal parent '" + v +
                                          "'");
                    row_count *= doc.net.node(v).variable.cardinality();
                }
                table.table.rows.assign(row_count, {});
                for (const auto& raw : rows) {
                    long idx = 0;
                    auto advance = [&](const std::string& var, int lag) {
                        for (const auto& k : raw.keys) {
                            if (k.var == var && k.lag == lag) {
                                int s = state_index_or_fail(lex, doc.net, var,
                                                            k.state);
                                idx = idx * doc.net.node(var)
                                                 .variable.cardinality() +
                                      s;
                                return;
                            }
                        }
                        throw FormatError(
                            "line " + std::to_string(raw.line) +
                            ": transition row for '" + var + "' missing " +
                            (lag ? "lagged " : "") + "conditioner '" + var +
                            "'");
                    };
                    if (raw.keys.size() !=
                        node.parents.size() + sig.size())
                        throw FormatError("line " + std::to_string(raw.line) +
                                          ": transition row for '" + child +
                                          "' has wrong conditioner count");
                    for (const auto& p : node.parents) advance(p, 0);
                    for (const auto& [v, lag] : sig) advance(v, lag);
                    if (!table.table.rows[idx].empty())
                        throw FormatError("line " + std::to_string(raw.line) +
                                          ": duplicate transition row for '" +
                                          child + "'");
                    table.table.rows[idx] = raw.probs;
                }
                for (long r = 0; r < row_count; ++r)
                    if (table.table.rows[r].empty())
                        throw FormatError("transition table for '" + child +
                                          "' is missing row " +
                                          std::to_string(r));
                doc.transitions.add(std::move(table));
            }
        } else {
            lex.fail("unknown section '" + section.text + "'");
        }
    }
    return doc;
}

NetworkDocument load_network(const std::string& path) {
    return parse_network(read_file(path));
}

namespace {

std::vector<const Node*> sorted_nodes(const Network& net) {
    std::vector<const Node*> out;
    for (const auto& n : net.nodes()) out.push_back(&n);
    std::sort(out.begin(), out.end(),
              [](const Node* a, const Node* b) { return a->id() < b->id(); });
    return out;
}

void emit_row_key(std::ostream& os, const Network& net, const Node& node,
                  long row,
                  const std::vector<std::pair<std::string, int>>& lagged) {
    if (node.parents.empty() && lagged.empty()) return;
    os << " |";
    auto cfg = net.row_config(node, row);
    const char* sep = " ";
    for (size_t i = 0; i < node.parents.size(); ++i) {
        const auto& pv = net.node(node.parents[i]).variable;
        os << sep << node.parents[i] << "=" << pv.states[cfg[i]];
        sep = ", ";
    }
    (void)lagged;
}

}  // namespace

std::string emit_network(const NetworkDocument& doc) {
    const Network& net = doc.net;
    std::ostringstream os;
    os << "network " << (net.name.empty() ? "unnamed" : net.name) << "\n";

    auto nodes = sorted_nodes(net);

    os << "\nvariables {\n";
    for (const Node* n : nodes) {
        os << "  " << n->id();
        if (!n->variable.name.empty() && n->variable.name != n->id())
            os << " \"" << n->variable.name << "\"";
        os << " {";
        for (size_t i = 0; i < n->variable.states.size(); ++i)
            os << (i ? ", " : " ") << n->variable.states[i];
        os << " }\n";
    }
    os << "}\n";

    os << "\nnodes {\n";
    for (const Node* n : nodes)
        os << "  " << n->id() << " " << to_string(n->kind) << "\n";
    os << "}\n";

    bool any_arcs = false;
    for (const Node* n : nodes) any_arcs |= !n->parents.empty();
    if (any_arcs) {
        os << "\narcs {\n";
        for (const Node* n : nodes)
            for (const auto& p : n->parents)
                os << "  " << p << " -> " << n->id() << "\n";
        os << "}\n";
    }

    bool any_cpt = false;
    for (const Node* n : nodes) any_cpt |= n->cpt.has_value();
    if (any_cpt) {
        os << "\ncpts {\n";
        for (const Node* n : nodes) {
            if (!n->cpt) continue;
            for (size_t r = 0; r < n->cpt->rows.size(); ++r) {
                os << "  " << n->id();
                emit_row_key(os, net, *n, static_cast<long>(r), {});
                os << " : (";
                const auto& row = n->cpt->rows[r];
                for (size_t i = 0; i < row.size(); ++i)
                    os << (i ? ", " : " ") << format_double(row[i]);
                os << " )\n";
            }
        }
        os << "}\n";
    }

    bool any_loss = false;
    for (const Node* n : nodes) any_loss |= n->loss.has_value();
    if (any_loss) {
        os << "\nutilities {\n";
        for (const Node* n : nodes) {
            if (!n->loss) continue;
            for (size_t r = 0; r < n->loss->size(); ++r) {
                os << "  " << n->id();
                emit_row_key(os, net, *n, static_cast<long>(r), {});
                os << " : " << format_double(-(*n->loss)[r]) << "\n";
            }
        }
        os << "}\n";
    }

    bool any_tag = false;
    for (const Node* n : nodes)
        any_tag |= n->variable.tag != VariableTag::other;
    if (any_tag) {
        os << "\ntags {\n";
        for (VariableTag tag : {VariableTag::finding, VariableTag::latent,
                                VariableTag::disease}) {
            std::vector<std::string> ids;
            for (const Node* n : nodes)
                if (n->variable.tag == tag) ids.push_back(n->id());
            if (ids.empty()) continue;
            os << "  " << to_string(tag) << " {";
            for (size_t i = 0; i < ids.size(); ++i)
                os << (i ? ", " : " ") << ids[i];
            os << " }\n";
        }
        os << "}\n";
    }

    if (doc.policy || !doc.transitions.tables.empty()) {
        os << "\ntemporal {\n";
        if (doc.policy) {
            os << "  kind " << to_string(doc.policy->kind) << "\n";
            if (doc.policy->kind != PolicyKind::custom)
                os << "  order " << doc.policy->order << "\n";
            if (!doc.policy->scope.empty()) {
                os << "  scope {";
                for (size_t i = 0; i < doc.policy->scope.size(); ++i)
                    os << (i ? ", " : " ") << doc.policy->scope[i];
                os << " }\n";
            }
            if (!doc.policy->custom_arcs.empty()) {
                os << "  arcs {\n";
                for (const auto& a : doc.policy->custom_arcs)
                    os << "    " << slice_id(a.from_var, a.from_slice) << " -> "
                       << slice_id(a.to_var, a.to_slice) << "\n";
                os << "  }\n";
            }
        }
        if (!doc.transitions.tables.empty()) {
            std::vector<const TransitionTable*> tables;
            for (const auto& t : doc.transitions.tables) tables.push_back(&t);
            std::sort(tables.begin(), tables.end(),
                      [](const TransitionTable* a, const TransitionTable* b) {
                          if (a->child != b->child) return a->child < b->child;
                          return a->temporal_parents < b->temporal_parents;
                      });
            os << "  transitions {\n";
            for (const TransitionTable* t : tables) {
                const Node& node = net.node(t->child);
                std::vector<int> cards;
                for (const auto& p : node.parents)
                    cards.push_back(net.node(p).variable.cardinality());
                for (const auto& [v, lag] : t->temporal_parents)
                    cards.push_back(net.node(v).variable.cardinality());
                for (size_t r = 0; r < t->table.rows.size(); ++r) {
                    // decode row into per-parent state indices
                    std::vector<int> cfg(cards.size(), 0);
                    long rem = static_cast<long>(r);
                    for (size_t i = cards.size(); i-- > 0;) {
                        cfg[i] = static_cast<int>(rem % cards[i]);
                        rem /= cards[i];
                    }
                    os << "    " << t->child << " |";
                    const char* sep = " ";
                    size_t k = 0;
                    for (const auto& p : node.parents) {
                        os << sep << p << "="
                           << net.node(p).variable.states[cfg[k++]];
                        sep = ", ";
                    }
                    for (const auto& [v, lag] : t->temporal_parents) {
                        os << sep << v << "[-" << lag << "]="
                           << net.node(v).variable.states[cfg[k++]];
                        sep = ", ";
                    }
                    os << " : (";
                    const auto& row = t->table.rows[r];
                    for (size_t i = 0; i < row.size(); ++i)
                        os << (i ? ", " : " ") << format_double(row[i]);
                    os << " )\n";
                }
            }
            os << "  }\n";
        }
        os << "}\n";
    }
    return os.str();
}

std::string emit_network(const Network& net) {
    NetworkDocument doc;
    doc.net = net;
    return emit_network(doc);
}

void save_network(const NetworkDocument& doc, const std::string& path) {
    write_file(path, emit_network(doc));
}

Assignment parse_assignment(const std::string& text) {
    Assignment out;
    size_t pos = 0;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t");
        size_t b = s.find_last_not_of(" \t");
        if (a == std::string::npos) return std::string();
        return s.substr(a, b - a + 1);
    };
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        std::string item = text.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? text.size() : comma + 1;
        item = trim(item);
        if (item.empty()) continue;
        size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw FormatError("assignment item '" + item +
                              "' is not var=state");
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << text;
}

}  // namespace tid
