#pragma once

// Shared generators for the unit and acceptance suites.

#include <random>
#include <string>
#include <vector>

#include "tid/inference.hpp"
#include "tid/kb.hpp"
#include "tid/network.hpp"

namespace tidtest {

inline std::vector<double> random_row(int card, std::mt19937_64& gen) {
    std::vector<double> row(card);
    double total = 0.0;
    for (int s = 0; s < card; ++s) {
        row[s] = 0.05 + 0.9 * tid::uniform01(gen);
        total += row[s];
    }
    for (double& x : row) x /= total;
    return row;
}

// Random DAG over binary variables v0..v{n-1}; node i draws parents from the
// earlier nodes.
inline tid::Network random_network(int n_nodes, std::mt19937_64& gen,
                                   int max_parents = 3) {
    tid::Network net;
    net.name = "random";
    for (int i = 0; i < n_nodes; ++i) {
        tid::Variable v;
        v.id = "v" + std::to_string(i);
        v.states = {"f", "t"};
        std::vector<std::string> parents;
        for (int j = 0; j < i && (int)parents.size() < max_parents; ++j)
            if (tid::uniform01(gen) < 0.3)
                parents.push_back("v" + std::to_string(j));
        net.add_node(v, tid::NodeKind::chance, parents);
    }
    for (const auto& id : net.node_ids()) {
        tid::Cpt cpt;
        long rows = net.row_count(net.node(id));
        for (long r = 0; r < rows; ++r) cpt.rows.push_back(random_row(2, gen));
        net.set_cpt(id, std::move(cpt));
    }
    return net;
}

inline tid::Evidence random_evidence(const tid::Network& net, int count,
                                     std::mt19937_64& gen) {
    tid::Evidence ev;
    auto ids = net.node_ids();
    for (int k = 0; k < count && !ids.empty(); ++k) {
        size_t pick = (size_t)(tid::uniform01(gen) * ids.size());
        pick = std::min(pick, ids.size() - 1);
        const tid::Node& node = net.node(ids[pick]);
        int s = tid::uniform01(gen) < 0.5 ? 0 : 1;
        ev.set(node.id(), node.variable.states[s]);
        ids.erase(ids.begin() + pick);
    }
    return ev;
}

// Small KB with tagged layers (diseases -> latents -> findings) plus a
// decision/value scaffold attached to the diseases, mirroring the bundled
// fixture's shape.
inline tid::KnowledgeBase random_kb(int n_diseases, int n_latents,
                                    int n_findings, std::mt19937_64& gen) {
    tid::Network net;
    net.name = "random_kb";
    std::vector<std::string> diseases, latents, findings;
    for (int i = 0; i < n_diseases; ++i) {
        tid::Variable v;
        v.id = "d" + std::to_string(i);
        v.states = {"absent", "present"};
        v.tag = tid::VariableTag::disease;
        net.add_node(v, tid::NodeKind::chance);
        diseases.push_back(v.id);
    }
    for (int i = 0; i < n_latents; ++i) {
        tid::Variable v;
        v.id = "l" + std::to_string(i);
        v.states = {"no", "yes"};
        v.tag = tid::VariableTag::latent;
        std::vector<std::string> parents;
        parents.push_back(diseases[i % diseases.size()]);
        if (i > 0 && tid::uniform01(gen) < 0.4)
            parents.push_back(latents[(size_t)(tid::uniform01(gen) * i)]);
        net.add_node(v, tid::NodeKind::chance, parents);
        latents.push_back(v.id);
    }
    for (int i = 0; i < n_findings; ++i) {
        tid::Variable v;
        v.id = "f" + std::to_string(i);
        v.states = {"no", "yes"};
        v.tag = tid::VariableTag::finding;
        std::vector<std::string> parents;
        parents.push_back(latents[i % latents.size()]);
        net.add_node(v, tid::NodeKind::chance, parents);
        findings.push_back(v.id);
    }
    for (const auto& id : net.node_ids()) {
        tid::Cpt cpt;
        long rows = net.row_count(net.node(id));
        for (long r = 0; r < rows; ++r) cpt.rows.push_back(random_row(2, gen));
        net.set_cpt(id, std::move(cpt));
    }

    tid::Variable treat;
    treat.id = "treat";
    treat.states = {"wait", "act"};
    net.add_node(treat, tid::NodeKind::decision);
    tid::Variable util;
    util.id = "util";
    util.states = {"u"};
    std::vector<std::string> uparents = {diseases[0], "treat"};
    net.add_node(util, tid::NodeKind::value, uparents);
    net.set_loss("util", {0.0, 4.0, 15.0, 2.0});

    tid::KnowledgeBase kb;
    kb.net = std::move(net);
    return kb;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace tidtest
