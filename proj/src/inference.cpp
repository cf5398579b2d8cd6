#include "tid/inference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace tid {

namespace {

constexpr long kEnumerationGuard = 1L << 24;

// Dense per-query view of a network: chance nodes get factor tables, decision
// nodes must be fixed by the evidence if anything depends on them.
struct Engine {
    const Network& net;
    std::vector<const Node*> vars;          // registry: chance + decision
    std::map<std::string, int> index;
    std::vector<int> evidence_state;        // -1 when unobserved

    explicit Engine(const Network& n) : net(n) {
        for (const auto& node : net.nodes()) {
            if (node.kind == NodeKind::value) continue;
            index.emplace(node.id(), static_cast<int>(vars.size()));
            vars.push_back(&node);
        }
        evidence_state.assign(vars.size(), -1);
    }

    int var_of(const std::string& id) const {
        auto it = index.find(id);
        if (it == index.end())
            throw InferenceError("unknown variable '" + id + "'");
        return it->second;
    }

    void apply_evidence(const Evidence& evidence) {
        for (const auto& [id, state] : evidence.assignments) {
            int v = var_of(id);
            int s = vars[v]->variable.state_index(state);
            if (s < 0)
                throw InferenceError("'" + state + "' is not a state of '" +
                                     id + "'");
            evidence_state[v] = s;
        }
    }

    long card(int v) const { return vars[v]->variable.cardinality(); }

    // One factor per chance node: scope = parents + child in registry order.
    std::vector<Factor> build_factors() const {
        std::vector<Factor> factors;
        for (size_t v = 0; v < vars.size(); ++v) {
            const Node& node = *vars[v];
            if (node.kind != NodeKind::chance) continue;
            Factor f;
            std::vector<int> raw_scope;  // parents then child, CPT layout
            for (const auto& p : node.parents) {
                auto it = index.find(p);
                if (it == index.end())
                    throw InferenceError("parent '" + p +
                                         "' of '" + node.id() +
                                         "' is not a chance or decision node");
                raw_scope.push_back(it->second);
            }
            raw_scope.push_back(static_cast<int>(v));

            // Table in raw order, then reorder into ascending registry order.
            std::vector<long> raw_cards;
            long cells = 1;
            for (int rv : raw_scope) {
                raw_cards.push_back(card(rv));
                cells *= card(rv);
            }
            std::vector<double> raw_table(cells);
            const long child_card = card(static_cast<int>(v));
            for (size_t row = 0; row < node.cpt->rows.size(); ++row)
                for (long s = 0; s < child_card; ++s)
                    raw_table[static_cast<long>(row) * child_card + s] =
                        node.cpt->rows[row][s];

            std::vector<int> order(raw_scope.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = (int)i;
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return raw_scope[a] < raw_scope[b];
            });
            f.scope.resize(order.size());
            f.cards.resize(order.size());
            for (size_t i = 0; i < order.size(); ++i) {
                f.scope[i] = raw_scope[order[i]];
                f.cards[i] = raw_cards[order[i]];
            }
            f.table.assign(cells, 0.0);
            // walk raw indices, scatter into sorted layout
            std::vector<long> raw_stride(raw_scope.size(), 1);
            for (size_t i = raw_scope.size(); i-- > 1;)
                raw_stride[i - 1] = raw_stride[i] * raw_cards[i];
            for (long cell = 0; cell < cells; ++cell) {
                long sorted_idx = 0;
                for (size_t i = 0; i < order.size(); ++i) {
                    long s = (cell / raw_stride[order[i]]) % raw_cards[order[i]];
                    sorted_idx = sorted_idx * f.cards[i] + s;
                }
                f.table[sorted_idx] = raw_table[cell];
            }
            factors.push_back(std::move(f));
        }
        return factors;
    }
};

Factor restrict_factor(const Factor& f, int var, long state) {
    auto it = std::find(f.scope.begin(), f.scope.end(), var);
    if (it == f.scope.end()) return f;
    size_t pos = static_cast<size_t>(it - f.scope.begin());
    Factor out;
    out.scope = f.scope;
    out.cards = f.cards;
    out.scope.erase(out.scope.begin() + pos);
    out.cards.erase(out.cards.begin() + pos);
    long cells = 1;
    for (long c : out.cards) cells *= c;
    out.table.assign(cells, 0.0);

    std::vector<long> stride(f.scope.size(), 1);
    for (size_t i = f.scope.size(); i-- > 1;)
        stride[i - 1] = stride[i] * f.cards[i];
    for (long cell = 0; cell < cells; ++cell) {
        long rem = cell, src = 0;
        // rebuild source index inserting `state` at pos
        std::vector<long> cfg(out.scope.size());
        for (size_t i = out.scope.size(); i-- > 0;) {
            cfg[i] = rem % out.cards[i];
            rem /= out.cards[i];
        }
        size_t oi = 0;
        for (size_t i = 0; i < f.scope.size(); ++i)
            src += stride[i] * (i == pos ? state : cfg[oi++]);
        out.table[cell] = f.table[src];
    }
    return out;
}

Factor multiply(const Factor& a, const Factor& b) {
    Factor out;
    std::set<int> scope_set(a.scope.begin(), a.scope.end());
    scope_set.insert(b.scope.begin(), b.scope.end());
    out.scope.assign(scope_set.begin(), scope_set.end());
    std::map<int, long> card_of;
    for (size_t i = 0; i < a.scope.size(); ++i) card_of[a.scope[i]] = a.cards[i];
    for (size_t i = 0; i < b.scope.size(); ++i) card_of[b.scope[i]] = b.cards[i];
    long cells = 1;
    for (int v : out.scope) {
        out.cards.push_back(card_of[v]);
        cells *= card_of[v];
    }
    out.table.assign(cells, 0.0);

    auto strides_for = [&](const Factor& f) {
        // stride of each out-scope var inside f's table (0 when absent)
        std::vector<long> fs(f.scope.size(), 1);
        for (size_t i = f.scope.size(); i-- > 1;)
            fs[i - 1] = fs[i] * f.cards[i];
        std::vector<long> out_strides(out.scope.size(), 0);
        for (size_t i = 0; i < out.scope.size(); ++i) {
            auto it = std::find(f.scope.begin(), f.scope.end(), out.scope[i]);
            if (it != f.scope.end())
                out_strides[i] = fs[it - f.scope.begin()];
        }
        return out_strides;
    };
    auto sa = strides_for(a);
    auto sb = strides_for(b);

    std::vector<long> cfg(out.scope.size(), 0);
    long ia = 0, ib = 0;
    for (long cell = 0; cell < cells; ++cell) {
        out.table[cell] = a.table[ia] * b.table[ib];
        // odometer increment
        for (size_t i = out.scope.size(); i-- > 0;) {
            ++cfg[i];
            ia += sa[i];
            ib += sb[i];
            if (cfg[i] < out.cards[i]) break;
            ia -= sa[i] * out.cards[i];
            ib -= sb[i] * out.cards[i];
            cfg[i] = 0;
        }
    }
    return out;
}

Factor marginalize(const Factor& f, int var) {
    auto it = std::find(f.scope.begin(), f.scope.end(), var);
    if (it == f.scope.end()) return f;
    size_t pos = static_cast<size_t>(it - f.scope.begin());
    Factor out;
    out.scope = f.scope;
    out.cards = f.cards;
    out.scope.erase(out.scope.begin() + pos);
    out.cards.erase(out.cards.begin() + pos);
    long cells = 1;
    for (long c : out.cards) cells *= c;
    out.table.assign(cells, 0.0);

    std::vector<long> stride(f.scope.size(), 1);
    for (size_t i = f.scope.size(); i-- > 1;)
        stride[i - 1] = stride[i] * f.cards[i];
    for (long cell = 0; cell < cells; ++cell) {
        long rem = cell, base = 0;
        std::vector<long> cfg(out.scope.size());
        for (size_t i = out.scope.size(); i-- > 0;) {
            cfg[i] = rem % out.cards[i];
            rem /= out.cards[i];
        }
        size_t oi = 0;
        for (size_t i = 0; i < f.scope.size(); ++i)
            if (i != pos) base += stride[i] * cfg[oi++];
        double sum = 0.0;
        for (long s = 0; s < f.cards[pos]; ++s)
            sum += f.table[base + stride[pos] * s];
        out.table[cell] = sum;
    }
    return out;
}

// Min-fill elimination order over the interaction graph of the factors;
// ties break toward the lexicographically smallest variable id.
std::vector<int> elimination_order(const Engine& eng,
                                   const std::vector<Factor>& factors,
                                   const std::set<int>& keep) {
    std::set<int> remaining;
    std::map<int, std::set<int>> adj;
    for (const auto& f : factors)
        for (int v : f.scope) {
            if (keep.count(v)) continue;
            remaining.insert(v);
        }
    for (const auto& f : factors)
        for (int v : f.scope)
            for (int w : f.scope)
                if (v != w) adj[v].insert(w);

    std::vector<int> order;
    while (!remaining.empty()) {
        int best = -1;
        long best_fill = -1;
        for (int v : remaining) {
            std::vector<int> nb;
            for (int w : adj[v])
                if (w != v && (remaining.count(w) || keep.count(w)))
                    nb.push_back(w);
            long fill = 0;
            for (size_t i = 0; i < nb.size(); ++i)
                for (size_t j = i + 1; j < nb.size(); ++j)
                    if (!adj[nb[i]].count(nb[j])) ++fill;
            if (best < 0 || fill < best_fill ||
                (fill == best_fill &&
                 eng.vars[v]->id() < eng.vars[best]->id())) {
                best = v;
                best_fill = fill;
            }
        }
        order.push_back(best);
        std::vector<int> nb;
        for (int w : adj[best])
            if (w != best && (remaining.count(w) || keep.count(w)))
                nb.push_back(w);
        for (size_t i = 0; i < nb.size(); ++i)
            for (size_t j = i + 1; j < nb.size(); ++j) {
                adj[nb[i]].insert(nb[j]);
                adj[nb[j]].insert(nb[i]);
            }
        remaining.erase(best);
    }
    return order;
}

// Runs elimination and returns the unnormalized joint factor over `query`
// (empty query -> scalar factor holding P(evidence)).
Factor eliminate(const Engine& eng, std::vector<Factor> factors,
                 const std::set<int>& query) {
    for (int order_var : elimination_order(eng, factors, query)) {
        std::vector<Factor> bucket;
        std::vector<Factor> rest;
        for (auto& f : factors) {
            if (std::find(f.scope.begin(), f.scope.end(), order_var) !=
                f.scope.end())
                bucket.push_back(std::move(f));
            else
                rest.push_back(std::move(f));
        }
        Factor product;
        product.table = {1.0};
        for (const auto& f : bucket) product = multiply(product, f);
        rest.push_back(marginalize(product, order_var));
        factors = std::move(rest);
    }
    Factor joint;
    joint.table = {1.0};
    for (const auto& f : factors) joint = multiply(joint, f);
    return joint;
}

Distribution normalize_to_distribution(const Engine& eng, const Factor& joint,
                                       const std::vector<int>& query_vars) {
    double total = 0.0;
    for (double x : joint.table) total += x;
    if (!(total > 0.0))
        throw InferenceError("inconsistent evidence: zero probability");
    Distribution dist;
    for (int v : query_vars) {
        dist.scope.push_back(eng.vars[v]->id());
        dist.states.push_back(eng.vars[v]->variable.states);
    }
    dist.probabilities.reserve(joint.table.size());
    for (double x : joint.table) dist.probabilities.push_back(x / total);
    return dist;
}

std::vector<int> resolve_query(const Engine& eng,
                               const std::vector<std::string>& query) {
    std::vector<int> vars;
    for (const auto& id : query) vars.push_back(eng.var_of(id));
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    if (vars.empty()) throw InferenceError("empty query");
    return vars;
}

void check_decisions_assigned(const Engine& eng,
                              const std::vector<Factor>& factors) {
    for (const auto& f : factors)
        for (int v : f.scope)
            if (eng.vars[v]->kind == NodeKind::decision &&
                eng.evidence_state[v] < 0)
                throw InferenceError("decision node '" + eng.vars[v]->id() +
                                     "' must be assigned for inference");
}

}  // namespace

double Distribution::at(const Assignment& assignment) const {
    long idx = 0;
    for (size_t i = 0; i < scope.size(); ++i) {
        auto it = assignment.find(scope[i]);
        if (it == assignment.end())
            throw InferenceError("distribution lookup missing '" + scope[i] +
                                 "'");
        const auto& labels = states[i];
        auto pos = std::find(labels.begin(), labels.end(), it->second);
        if (pos == labels.end())
            throw InferenceError("'" + it->second + "' is not a state of '" +
                                 scope[i] + "'");
        idx = idx * static_cast<long>(labels.size()) +
              (pos - labels.begin());
    }
    return probabilities[idx];
}

Distribution posterior(const Network& net, const Evidence& evidence,
                       const std::vector<std::string>& query) {
    net.require_valid();
    Engine eng(net);
    eng.apply_evidence(evidence);
    auto factors = eng.build_factors();
    check_decisions_assigned(eng, factors);
    for (auto& f : factors)
        for (size_t v = 0; v < eng.vars.size(); ++v)
            if (eng.evidence_state[v] >= 0)
                f = restrict_factor(f, static_cast<int>(v),
                                    eng.evidence_state[v]);

    auto query_vars = resolve_query(eng, query);
    for (int v : query_vars)
        if (eng.evidence_state[v] >= 0)
            throw InferenceError("query variable '" + eng.vars[v]->id() +
                                 "' is also evidence");
    std::set<int> keep(query_vars.begin(), query_vars.end());
    Factor joint = eliminate(eng, std::move(factors), keep);

    // eliminate() returns scope sorted ascending = query_vars order
    return normalize_to_distribution(eng, joint, query_vars);
}

Distribution enumerate_posterior(const Network& net, const Evidence& evidence,
                                 const std::vector<std::string>& query) {
    net.require_valid();
    Engine eng(net);
    eng.apply_evidence(evidence);

    long cells = 1;
    for (size_t v = 0; v < eng.vars.size(); ++v) {
        if (eng.vars[v]->kind != NodeKind::chance) continue;
        cells *= eng.card(static_cast<int>(v));
        if (cells > kEnumerationGuard)
            throw InferenceError(
                "joint table exceeds the enumeration guard (2^24 cells)");
    }

    auto query_vars = resolve_query(eng, query);
    for (int v : query_vars)
        if (eng.evidence_state[v] >= 0)
            throw InferenceError("query variable '" + eng.vars[v]->id() +
                                 "' is also evidence");

    std::vector<long> query_cards;
    long out_cells = 1;
    for (int v : query_vars) {
        query_cards.push_back(eng.card(v));
        out_cells *= eng.card(v);
    }
    std::vector<double> accum(out_cells, 0.0);

    // Odometer over all chance variables; decision variables must be fixed if
    // they are parents (row_index will complain otherwise).
    std::vector<int> chance_vars;
    for (size_t v = 0; v < eng.vars.size(); ++v)
        if (eng.vars[v]->kind == NodeKind::chance)
            chance_vars.push_back(static_cast<int>(v));

    std::vector<int> state(eng.vars.size(), 0);
    for (size_t v = 0; v < eng.vars.size(); ++v)
        if (eng.evidence_state[v] >= 0) state[v] = eng.evidence_state[v];

    std::function<void(size_t, double)> walk = [&](size_t i, double prob) {
        if (prob == 0.0) return;
        if (i == chance_vars.size()) {
            long idx = 0;
            for (size_t q = 0; q < query_vars.size(); ++q)
                idx = idx * query_cards[q] + state[query_vars[q]];
            accum[idx] += prob;
            return;
        }
        int v = chance_vars[i];
        const Node& node = *eng.vars[v];
        auto row_of = [&]() {
            long row = 0;
            for (const auto& p : node.parents) {
                int pv = eng.var_of(p);
                if (eng.vars[pv]->kind == NodeKind::decision &&
                    eng.evidence_state[pv] < 0)
                    throw InferenceError("decision node '" + p +
                                         "' must be assigned for inference");
                row = row * eng.card(pv) + state[pv];
            }
            return row;
        };
        long row = row_of();
        if (eng.evidence_state[v] >= 0) {
            walk(i + 1, prob * node.cpt->rows[row][state[v]]);
            return;
        }
        for (int s = 0; s < eng.card(v); ++s) {
            state[v] = s;
            walk(i + 1, prob * node.cpt->rows[row][s]);
        }
        state[v] = 0;
    };
    walk(0, 1.0);

    double total = 0.0;
    for (double x : accum) total += x;
    if (!(total > 0.0))
        throw InferenceError("inconsistent evidence: zero probability");
    Distribution dist;
    for (size_t q = 0; q < query_vars.size(); ++q) {
        dist.scope.push_back(eng.vars[query_vars[q]]->id());
        dist.states.push_back(eng.vars[query_vars[q]]->variable.states);
    }
    for (double x : accum) dist.probabilities.push_back(x / total);
    return dist;
}

double log_likelihood(const Network& net, const Evidence& item) {
    net.require_valid();
    if (item.empty()) return 0.0;
    Engine eng(net);
    eng.apply_evidence(item);
    auto factors = eng.build_factors();
    check_decisions_assigned(eng, factors);
    for (auto& f : factors)
        for (size_t v = 0; v < eng.vars.size(); ++v)
            if (eng.evidence_state[v] >= 0)
                f = restrict_factor(f, static_cast<int>(v),
                                    eng.evidence_state[v]);
    Factor scalar = eliminate(eng, std::move(factors), {});
    double p = scalar.table.empty() ? 0.0 : scalar.table[0];
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log(p);
}

DecisionOutcome evaluate_decision(const Network& net,
                                  const Evidence& evidence) {
    net.require_valid();
    auto decisions = net.ids_of_kind(NodeKind::decision);
    if (decisions.size() != 1)
        throw InferenceError("expected exactly one decision node, found " +
                             std::to_string(decisions.size()));
    const Node& decision = net.node(decisions.front());
    auto values = net.ids_of_kind(NodeKind::value);
    if (values.empty())
        throw InferenceError("network has no value node");

    DecisionOutcome outcome;
    const int n_actions = decision.variable.cardinality();
    outcome.expected_loss.assign(n_actions, 0.0);

    for (int a = 0; a < n_actions; ++a) {
        Evidence with_action = evidence;
        with_action.set(decision.id(), decision.variable.states[a]);
        double total = 0.0;
        for (const auto& vid : values) {
            const Node& value = net.node(vid);
            // Chance parents get a joint posterior; decision parents are
            // fixed by the action.
            std::vector<std::string> chance_parents;
            for (const auto& p : value.parents)
                if (net.node(p).kind == NodeKind::chance)
                    chance_parents.push_back(p);
            if (chance_parents.empty()) {
                Assignment key;
                key[decision.id()] = decision.variable.states[a];
                total += (*value.loss)[net.row_index(value, key)];
                continue;
            }
            Distribution post = posterior(net, with_action, chance_parents);
            // Walk the joint posterior (scope is sorted by registry order =
            // network insertion order) and pick the matching loss rows.
            std::vector<long> cfg(post.scope.size(), 0);
            for (size_t cell = 0; cell < post.probabilities.size(); ++cell) {
                Assignment key;
                for (size_t i = 0; i < post.scope.size(); ++i)
                    key[post.scope[i]] =
                        net.node(post.scope[i]).variable.states[cfg[i]];
                key[decision.id()] = decision.variable.states[a];
                total += post.probabilities[cell] *
                         (*value.loss)[net.row_index(value, key)];
                for (size_t i = post.scope.size(); i-- > 0;) {
                    if (++cfg[i] < static_cast<long>(post.states[i].size()))
                        break;
                    cfg[i] = 0;
                }
            }
        }
        outcome.expected_loss[a] = total;
    }
    outcome.chosen = 0;
    for (int a = 1; a < n_actions; ++a)
        if (outcome.expected_loss[a] <
            outcome.expected_loss[outcome.chosen])
            outcome.chosen = a;
    outcome.chosen_action = decision.variable.states[outcome.chosen];
    return outcome;
}

}  // namespace tid
