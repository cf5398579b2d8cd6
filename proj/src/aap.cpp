#include "tid/aap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tid::aap {

namespace {

const std::vector<std::string> kYesNo = {"no", "yes"};
const std::vector<std::string> kDisease = {"absent", "present"};
const std::vector<std::string> kSeverity = {"none", "mild", "severe"};
const std::vector<std::string> kWbc = {"normal", "elevated", "high"};

// Probability row concentrated around the given activity level in [0, 1],
// with seeded jitter. Higher activity shifts mass toward higher states.
std::vector<double> synthetic_row(int card, double activity,
                                  std::mt19937_64& gen, double sharpness) {
    std::vector<double> w(card);
    double total = 0.0;
    for (int s = 0; s < card; ++s) {
        double center = card == 1 ? 0.0 : double(s) / (card - 1);
        double d = activity - center;
        w[s] = std::exp(-sharpness * d * d) + 0.08 + 0.10 * uniform01(gen);
        total += w[s];
    }
    for (double& x : w) x /= total;
    return w;
}

double state_fraction(int state, int card) {
    return card == 1 ? 0.0 : double(state) / (card - 1);
}

// Mean activity of a parent configuration.
double config_activity(const std::vector<int>& cfg,
                       const std::vector<int>& cards) {
    if (cfg.empty()) return 0.0;
    double sum = 0.0;
    for (size_t i = 0; i < cfg.size(); ++i)
        sum += state_fraction(cfg[i], cards[i]);
    return sum / cfg.size();
}

void fill_cpt(Network& net, const std::string& id, double root_activity,
              double sharpness = 4.0) {
    Node& node = net.node(id);
    auto gen = seed_stream(kSeed, "cpt:" + id);
    Cpt cpt;
    long rows = net.row_count(node);
    std::vector<int> cards;
    for (const auto& p : node.parents)
        cards.push_back(net.node(p).variable.cardinality());
    for (long r = 0; r < rows; ++r) {
        auto cfg = net.row_config(node, r);
        double activity = node.parents.empty()
                              ? root_activity
                              : 0.08 + 0.84 * config_activity(cfg, cards);
        cpt.rows.push_back(
            synthetic_row(node.variable.cardinality(), activity, gen,
                          sharpness));
    }
    net.set_cpt(id, std::move(cpt));
}

// Joint transition table for `child` over (within-slice parents, self lags).
TransitionTable make_transition(const Network& net, const std::string& child,
                                const std::vector<int>& lags) {
    const Node& node = net.node(child);
    const int card = node.variable.cardinality();

    TransitionTable table;
    table.child = child;
    for (int lag : lags) table.temporal_parents.emplace_back(child, lag);
    table.temporal_parents =
        TransitionTable::canonical_parents(table.temporal_parents);

    std::vector<int> cards;
    for (const auto& p : node.parents)
        cards.push_back(net.node(p).variable.cardinality());
    const size_t n_within = cards.size();
    for (size_t i = 0; i < table.temporal_parents.size(); ++i)
        cards.push_back(card);

    long rows = 1;
    for (int c : cards) rows *= c;

    std::string stream = "trans:" + child;
    for (int lag : lags) stream += ":" + std::to_string(lag);
    auto gen = seed_stream(kSeed, stream);

    for (long r = 0; r < rows; ++r) {
        std::vector<int> cfg(cards.size());
        long rem = r;
        for (size_t i = cards.size(); i-- > 0;) {
            cfg[i] = static_cast<int>(rem % cards[i]);
            rem /= cards[i];
        }
        double within = 0.0;
        if (n_within > 0) {
            std::vector<int> wc(cfg.begin(), cfg.begin() + n_within);
            std::vector<int> wcards(cards.begin(), cards.begin() + n_within);
            within = config_activity(wc, wcards);
        }
        double prev1 = state_fraction(cfg[n_within], card);
        double activity;
        if (lags.size() == 1) {
            activity = n_within ? 0.62 * prev1 + 0.38 * within
                                : 0.85 * prev1 + 0.075;
        } else {
            double prev2 = state_fraction(cfg[n_within + 1], card);
            activity = n_within
                           ? 0.42 * prev1 + 0.30 * prev2 + 0.28 * within
                           : 0.52 * prev1 + 0.40 * prev2 + 0.04;
        }
        table.table.rows.push_back(synthetic_row(card, activity, gen, 6.0));
    }
    return table;
}

Variable make_var(std::string id, std::vector<std::string> states,
                  VariableTag tag, std::string name = "") {
    Variable v;
    v.id = std::move(id);
    v.name = std::move(name);
    v.states = std::move(states);
    v.tag = tag;
    return v;
}

}  // namespace

std::vector<std::string> presented_findings() {
    return {"ABS", "RLQ-T", "N", "V", "WBC", "Fever", "Rebound"};
}

ObservationSet presentation() {
    return {{"ABS", "yes"},  {"RLQ-T", "yes"}, {"N", "yes"},
            {"V", "yes"},    {"WBC", "elevated"}, {"Fever", "yes"},
            {"Rebound", "yes"}};
}

std::vector<std::string> followup_findings() { return {"A", "G"}; }

std::vector<std::string> driving_set() {
    return {"App", "NSAP", "A-Obs", "Perf-App", "Inflamm", "Perit"};
}

KnowledgeBase knowledge_base() {
    Network net;
    net.name = "aap_kb";

    // Diseases.
    net.add_node(make_var("App", kDisease, VariableTag::disease,
                          "Appendicitis"),
                 NodeKind::chance);
    net.add_node(make_var("NSAP", kDisease, VariableTag::disease,
                          "Non-specific abdominal pain"),
                 NodeKind::chance);
    net.add_node(make_var("Chole", kDisease, VariableTag::disease,
                          "Cholecystitis"),
                 NodeKind::chance);
    net.add_node(make_var("GE", kDisease, VariableTag::disease,
                          "Gastroenteritis"),
                 NodeKind::chance);

    // Core latents from the appendicitis physiology.
    net.add_node(make_var("A-Obs", kYesNo, VariableTag::latent,
                          "Appendiceal obstruction"),
                 NodeKind::chance, {"App"});
    net.add_node(make_var("Perf-App", kYesNo, VariableTag::latent,
                          "Perforated appendix"),
                 NodeKind::chance, {"App"});
    net.add_node(make_var("Inflamm", kSeverity, VariableTag::latent,
                          "Inflammation"),
                 NodeKind::chance, {"A-Obs", "Perf-App", "NSAP"});
    net.add_node(make_var("Perit", kYesNo, VariableTag::latent,
                          "Peritonitis"),
                 NodeKind::chance, {"Perf-App"});

    // Remaining latent block, fanned out from the other diseases.
    auto add_latent = [&](const std::string& id,
                          std::vector<std::string> parents) {
        net.add_node(make_var(id, kYesNo, VariableTag::latent),
                     NodeKind::chance, std::move(parents));
    };
    add_latent("L05", {"Chole"});
    add_latent("L06", {"Chole"});
    add_latent("L07", {"Chole"});
    add_latent("L08", {"GE"});
    add_latent("L09", {"GE"});
    add_latent("L10", {"NSAP"});
    add_latent("L11", {"L05"});
    add_latent("L12", {"L05", "L06"});
    add_latent("L13", {"L06"});
    add_latent("L14", {"L07", "GE"});
    add_latent("L15", {"L08"});
    add_latent("L16", {"L08", "L09"});
    add_latent("L17", {"L09"});
    add_latent("L18", {"L10"});
    add_latent("L19", {"L10", "Chole"});
    add_latent("L20", {"L14", "L15"});

    // Findings named in the domain literature.
    auto add_finding = [&](const std::string& id,
                           std::vector<std::string> parents,
                           std::vector<std::string> states = kYesNo,
                           std::string name = "") {
        net.add_node(make_var(id, std::move(states), VariableTag::finding,
                              std::move(name)),
                     NodeKind::chance, std::move(parents));
    };
    add_finding("ABS", {"Perit"}, kYesNo, "Absent bowel sounds");
    add_finding("RLQ-T", {"Inflamm"}, kYesNo,
                "Right lower quadrant tenderness");
    add_finding("N", {"Inflamm"}, kYesNo, "Nausea");
    add_finding("V", {"Inflamm"}, kYesNo, "Vomiting");
    add_finding("WBC", {"Inflamm"}, kWbc, "White blood count");
    add_finding("Fever", {"Inflamm"});
    add_finding("Rebound", {"Perit"}, kYesNo, "Rebound tenderness");
    add_finding("A", {"Inflamm"}, kYesNo, "Anorexia");
    add_finding("G", {"Perit"}, kYesNo, "Muscular guarding");

    // Synthetic findings under the latent block: 43 more for 52 in total.
    std::vector<std::string> pool;
    for (int i = 5; i <= 20; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "L%02d", i);
        pool.emplace_back(buf);
    }
    for (int i = 0; i < 43; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "F%02d", 10 + i);
        std::vector<std::string> parents = {pool[i % pool.size()]};
        if (i % 3 == 0) {
            const std::string& second = pool[(i * 5 + 7) % pool.size()];
            if (second != parents[0]) parents.push_back(second);
        }
        add_finding(buf, std::move(parents));
    }

    // Treatment scaffolding on the App/NSAP pair.
    net.add_node(make_var("Treat", {"wait", "operate"}, VariableTag::other,
                          "Treatment"),
                 NodeKind::decision);
    net.add_node(make_var("Util", {"u"}, VariableTag::other, "Utility"),
                 NodeKind::value, {"App", "NSAP", "Treat"});

    // Loss rows over (App, NSAP, Treat) in row-index order.
    net.set_loss("Util", {
                             0.0,  6.0,   // absent, absent: wait / operate
                             2.0,  7.0,   // absent, present
                             20.0, 1.0,   // present, absent
                             20.0, 2.0,   // present, present
                         });

    // Parameters: seeded synthetic rows, diseases kept lower-prior.
    for (const auto& node : net.node_ids()) {
        const Node& n = net.node(node);
        if (n.kind != NodeKind::chance) continue;
        double root_activity =
            n.variable.tag == VariableTag::disease ? 0.16 : 0.3;
        fill_cpt(net, node, root_activity);
    }

    KnowledgeBase kb;
    kb.net = std::move(net);
    kb.default_policy = TemporalArcPolicy::markov(1);
    for (const auto& id : kb.net.node_ids()) {
        if (kb.net.node(id).kind != NodeKind::chance) continue;
        kb.transitions.add(make_transition(kb.net, id, {1}));
        kb.transitions.add(make_transition(kb.net, id, {1, 2}));
    }
    return kb;
}

Network mini_network() {
    Network net;
    net.name = "aap_mini";
    net.add_node(make_var("App", kDisease, VariableTag::disease,
                          "Appendicitis"),
                 NodeKind::chance);
    net.add_node(make_var("NSAP", kDisease, VariableTag::disease,
                          "Non-specific abdominal pain"),
                 NodeKind::chance);
    net.add_node(make_var("Inflamm", kSeverity, VariableTag::latent,
                          "Inflammation"),
                 NodeKind::chance, {"App", "NSAP"});
    net.add_node(make_var("V", kYesNo, VariableTag::finding, "Vomiting"),
                 NodeKind::chance, {"Inflamm"});
    net.add_node(make_var("RLQ-T", kYesNo, VariableTag::finding,
                          "Right lower quadrant tenderness"),
                 NodeKind::chance, {"Inflamm"});
    net.add_node(make_var("N", kYesNo, VariableTag::finding, "Nausea"),
                 NodeKind::chance, {"Inflamm"});
    net.add_node(make_var("Treat", {"wait", "operate"}, VariableTag::other),
                 NodeKind::decision);
    net.add_node(make_var("Util", {"u"}, VariableTag::other), NodeKind::value,
                 {"App", "Treat"});

    net.set_cpt("App", Cpt{{{0.85, 0.15}}});
    net.set_cpt("NSAP", Cpt{{{0.7, 0.3}}});
    net.set_cpt("Inflamm", Cpt{{
                                {0.90, 0.08, 0.02},
                                {0.30, 0.50, 0.20},
                                {0.10, 0.40, 0.50},
                                {0.05, 0.35, 0.60},
                            }});
    net.set_cpt("V", Cpt{{{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.8}}});
    net.set_cpt("RLQ-T", Cpt{{{0.85, 0.15}, {0.4, 0.6}, {0.1, 0.9}}});
    net.set_cpt("N", Cpt{{{0.8, 0.2}, {0.45, 0.55}, {0.25, 0.75}}});
    net.set_loss("Util", {0.0, 5.0, 18.0, 2.0});
    return net;
}

}  // namespace tid::aap
