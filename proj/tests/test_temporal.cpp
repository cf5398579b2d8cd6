#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "tid/aap.hpp"
#include "tid/temporal.hpp"

using namespace tid;

namespace {

Network one_var_slice(const std::vector<double>& prior) {
    Network net;
    net.name = "walk";
    Variable x{"x", "", {"lo", "hi"}, VariableTag::other};
    net.add_node(x, NodeKind::chance);
    net.set_cpt("x", Cpt{{prior}});
    return net;
}

TransitionSpecSet self_transition(const std::string& var,
                                  const std::vector<std::vector<double>>& t) {
    TransitionTable table;
    table.child = var;
    table.temporal_parents = {{var, 1}};
    table.table.rows = t;
    TransitionSpecSet set;
    set.add(std::move(table));
    return set;
}

SliceSequence replicate(const Network& slice, int count) {
    SliceSequence seq;
    for (int i = 0; i < count; ++i) seq.slices.push_back(slice);
    return seq;
}

}  // namespace

TEST_CASE("markov(1) over two identical slices yields one self-arc per var") {
    auto gen = seed_stream(21, "arcs");
    Network slice = tidtest::random_network(5, gen);
    auto arcs = generate_arcs(TemporalArcPolicy::markov(1),
                              replicate(slice, 2));
    CHECK(arcs.size() == 5);
    for (const auto& a : arcs) {
        CHECK(a.from_var == a.to_var);
        CHECK(a.lag() == 1);
    }
}

TEST_CASE("driving policy restricts arcs to the evolving subset") {
    KnowledgeBase kb = aap::knowledge_base();
    Network slice = bn_portion(tailor(kb, aap::presentation()));
    auto arcs = generate_arcs(
        TemporalArcPolicy::driving(aap::driving_set(), 1),
        replicate(slice, 2));
    CHECK(arcs.size() == 6);  // latents and diseases only, no findings
    std::set<std::string> touched;
    for (const auto& a : arcs) {
        touched.insert(a.to_var);
        CHECK(slice.node(a.to_var).variable.tag != VariableTag::finding);
    }
    CHECK(touched.count("Inflamm"));
    CHECK(touched.count("App"));
}

TEST_CASE("markov(2) over three slices enumerates every (t-j, t) pair") {
    Network slice = one_var_slice({0.5, 0.5});
    auto arcs = generate_arcs(TemporalArcPolicy::markov(2),
                              replicate(slice, 3));
    REQUIRE(arcs.size() == 3);  // 0->1, 1->2, 0->2
    std::set<std::pair<int, int>> pairs;
    for (const auto& a : arcs) pairs.insert({a.from_slice, a.to_slice});
    CHECK(pairs == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {0, 2}});
}

TEST_CASE("policy errors: unknown scope variable, lag beyond horizon") {
    Network slice = one_var_slice({0.5, 0.5});
    CHECK_THROWS_AS((void)generate_arcs(TemporalArcPolicy::driving({"nope"}),
                                        replicate(slice, 2)),
                    ValidationError);
    CHECK_THROWS_AS((void)generate_arcs(TemporalArcPolicy::markov(3),
                                        replicate(slice, 2)),
                    ValidationError);
}

TEST_CASE("single slice accepts any policy and stays unchanged") {
    Network slice = one_var_slice({0.25, 0.75});
    SliceSequence seq = replicate(slice, 1);
    TemporalNetwork tn =
        unroll(seq, TemporalArcPolicy::markov(3), TransitionSpecSet{});
    CHECK(tn.arcs.empty());
    CHECK(tn.flattened.size() == 1);
    CHECK(tn.flattened.node("x@0").cpt->rows[0][1] == doctest::Approx(0.75));
    ElementCounts counts = count_elements(tn);
    CHECK(counts.nodes == 1);
    CHECK(counts.arcs == 0);
    CHECK(counts.temporal_per_slice.empty());
}

TEST_CASE("unroll counts follow the union formulas on a 3-node slice") {
    // slice: a -> b -> c (2 within-slice arcs), 3 shared variables
    Network slice;
    Variable a{"a", "", {"f", "t"}, VariableTag::other};
    Variable b{"b", "", {"f", "t"}, VariableTag::other};
    Variable c{"c", "", {"f", "t"}, VariableTag::other};
    slice.add_node(a, NodeKind::chance);
    slice.add_node(b, NodeKind::chance, {"a"});
    slice.add_node(c, NodeKind::chance, {"b"});
    slice.set_cpt("a", Cpt{{{0.5, 0.5}}});
    slice.set_cpt("b", Cpt{{{0.8, 0.2}, {0.3, 0.7}}});
    slice.set_cpt("c", Cpt{{{0.9, 0.1}, {0.4, 0.6}}});

    TransitionSpecSet transitions;
    {
        TransitionTable t;
        t.child = "a";
        t.temporal_parents = {{"a", 1}};
        t.table.rows = {{0.9, 0.1}, {0.2, 0.8}};
        transitions.add(t);
        TransitionTable tb;
        tb.child = "b";
        tb.temporal_parents = {{"b", 1}};
        // rows over (a within, b[-1])
        tb.table.rows = {{0.7, 0.3}, {0.1, 0.9}, {0.6, 0.4}, {0.2, 0.8}};
        transitions.add(tb);
        TransitionTable tc;
        tc.child = "c";
        tc.temporal_parents = {{"c", 1}};
        tc.table.rows = {{0.5, 0.5}, {0.3, 0.7}, {0.8, 0.2}, {0.35, 0.65}};
        transitions.add(tc);
    }
    TemporalNetwork tn = unroll(replicate(slice, 2),
                                TemporalArcPolicy::markov(1), transitions);
    ElementCounts counts = count_elements(tn);
    CHECK(counts.nodes == 6);            // |V^N| = 3 + 3
    CHECK(counts.arcs == 2 + 2 + 3);     // within + within + temporal
    REQUIRE(counts.temporal_per_slice.size() == 1);
    CHECK(counts.temporal_per_slice[0] == 3);
    CHECK(tn.flattened.is_valid());
    CHECK(tn.flattened.size() == 6);
    CHECK(tn.flattened.arcs().size() == 7);

    // temporal child's CPT conditions jointly on within + temporal parents
    const Node& b1 = tn.flattened.node("b@1");
    REQUIRE(b1.parents.size() == 2);
    CHECK(b1.parents[0] == "a@1");
    CHECK(b1.parents[1] == "b@0");
    CHECK(b1.cpt->rows.size() == 4);
}

TEST_CASE("missing transition table is a construction error") {
    Network slice = one_var_slice({0.5, 0.5});
    CHECK_THROWS_WITH_AS(
        (void)unroll(replicate(slice, 2), TemporalArcPolicy::markov(1),
                     TransitionSpecSet{}),
        doctest::Contains("missing transition table"), ValidationError);
}

TEST_CASE("transition row-count mismatch is a construction error") {
    Network slice = one_var_slice({0.5, 0.5});
    TransitionSpecSet bad = self_transition("x", {{0.9, 0.1}});  // 1 row, need 2
    CHECK_THROWS_WITH_AS((void)unroll(replicate(slice, 2),
                                      TemporalArcPolicy::markov(1), bad),
                         doctest::Contains("rows"), ValidationError);
}

TEST_CASE("pilot slice unrolls to the 65-node, 117-arc network") {
    KnowledgeBase kb = aap::knowledge_base();
    Network slice = bn_portion(tailor(kb, aap::presentation()));
    CHECK(slice.size() == 13);
    TemporalNetwork tn = unroll(replicate(slice, 5),
                                TemporalArcPolicy::markov(1), kb.transitions);
    ElementCounts counts = count_elements(tn);
    CHECK(counts.nodes == 65);
    CHECK(counts.temporal_per_slice ==
          std::vector<long>{13, 13, 13, 13});
    long within = 5 * (long)slice.arcs().size();
    CHECK(counts.arcs == within + 52);
}

TEST_CASE("partition: all-dynamic leaves nothing static or independent") {
    auto gen = seed_stream(22, "partition");
    Network slice = tidtest::random_network(6, gen);
    Partition p = partition(slice, slice.node_ids());
    CHECK(p.dynamic.size() == 6);
    CHECK(p.static_vars.empty());
    CHECK(p.independent.empty());
}

TEST_CASE("partition on the App chain marks connected vars static") {
    Network slice;
    for (const char* id : {"App", "A-Obs", "Inflamm", "V"}) {
        Variable v{id, "", {"f", "t"}, VariableTag::other};
        slice.add_node(v, NodeKind::chance);
    }
    slice.node("A-Obs").parents = {"App"};
    slice.node("Inflamm").parents = {"A-Obs"};
    slice.node("V").parents = {"Inflamm"};
    for (const auto& id : slice.node_ids()) {
        Cpt cpt;
        long rows = slice.row_count(slice.node(id));
        for (long r = 0; r < rows; ++r) cpt.rows.push_back({0.5, 0.5});
        slice.set_cpt(id, std::move(cpt));
    }
    Partition p = partition(slice, {"Inflamm"});
    CHECK(p.dynamic == std::vector<std::string>{"Inflamm"});
    // ancestors and descendants of the evolving inflammation are static
    CHECK(p.static_vars == std::vector<std::string>{"App", "A-Obs", "V"});
    CHECK(p.independent.empty());
}

TEST_CASE("partition: disconnected component is independent") {
    Network slice;
    for (const char* id : {"a", "b", "c", "d"}) {
        Variable v{id, "", {"f", "t"}, VariableTag::other};
        slice.add_node(v, NodeKind::chance);
    }
    slice.node("b").parents = {"a"};
    slice.node("d").parents = {"c"};
    for (const auto& id : slice.node_ids()) {
        Cpt cpt;
        long rows = slice.row_count(slice.node(id));
        for (long r = 0; r < rows; ++r) cpt.rows.push_back({0.5, 0.5});
        slice.set_cpt(id, std::move(cpt));
    }
    Partition p = partition(slice, {"a"});
    CHECK(p.dynamic == std::vector<std::string>{"a"});
    CHECK(p.static_vars == std::vector<std::string>{"b"});
    CHECK(p.independent == std::vector<std::string>{"c", "d"});
    CHECK_THROWS_AS((void)partition(slice, {"zz"}), ValidationError);
}

TEST_CASE("driving ∪ observable equals driving over the union when disjoint") {
    KnowledgeBase kb = aap::knowledge_base();
    Network slice = bn_portion(tailor(kb, aap::presentation()));
    SliceSequence seq = replicate(slice, 3);

    auto d = aap::driving_set();
    auto x = aap::presented_findings();
    auto arcs_d = generate_arcs(TemporalArcPolicy::driving(d, 1), seq);
    auto arcs_x = generate_arcs(TemporalArcPolicy::observable(x, 1), seq);
    std::vector<std::string> both = d;
    both.insert(both.end(), x.begin(), x.end());
    auto arcs_union =
        generate_arcs(TemporalArcPolicy::driving(both, 1), seq);

    std::set<TemporalArc> merged(arcs_d.begin(), arcs_d.end());
    merged.insert(arcs_x.begin(), arcs_x.end());
    CHECK(merged == std::set<TemporalArc>(arcs_union.begin(),
                                          arcs_union.end()));
}

TEST_CASE("markov(1) marginals follow prior times the transition power") {
    Network slice = one_var_slice({0.9, 0.1});
    const std::vector<std::vector<double>> t = {{0.8, 0.2}, {0.3, 0.7}};
    TemporalNetwork tn = unroll(replicate(slice, 7),
                                TemporalArcPolicy::markov(1),
                                self_transition("x", t));
    double p[2] = {0.9, 0.1};
    for (int slice_t = 1; slice_t <= 6; ++slice_t) {
        double next[2] = {p[0] * t[0][0] + p[1] * t[1][0],
                          p[0] * t[0][1] + p[1] * t[1][1]};
        p[0] = next[0];
        p[1] = next[1];
        Distribution post = posterior(tn.flattened, {},
                                      {slice_id("x", slice_t)});
        CHECK(std::abs(post.probabilities[0] - p[0]) < 1e-9);
        CHECK(std::abs(post.probabilities[1] - p[1]) < 1e-9);
    }
}

TEST_CASE("without temporal arcs the slices are mutually independent") {
    auto gen = seed_stream(23, "independence");
    Network slice = tidtest::random_network(4, gen);
    SliceSequence seq = replicate(slice, 3);
    TemporalNetwork tn = unroll(seq, TemporalArcPolicy::custom({}),
                                TransitionSpecSet{});
    Evidence ev;
    ev.set("v0@0", "t");
    ev.set("v2@1", "f");
    Distribution with_ev =
        enumerate_posterior(tn.flattened, ev, {"v1@2"});
    Distribution without =
        enumerate_posterior(tn.flattened, {}, {"v1@2"});
    CHECK(tidtest::max_abs_diff(with_ev.probabilities,
                                without.probabilities) < 1e-9);
}

TEST_CASE("tailored sequences skip temporal in-arcs for missing variables") {
    KnowledgeBase kb = aap::knowledge_base();
    Observations obs;
    obs.per_slice.push_back(aap::presentation());
    ObservationSet second = aap::presentation();
    second["A"] = "yes";
    second["G"] = "yes";
    obs.per_slice.push_back(second);
    SliceSequence seq;
    for (auto& s : tailor_sequence(kb, obs).slices)
        seq.slices.push_back(bn_portion(s));

    CHECK(seq.slices[0].size() == 13);
    CHECK(seq.slices[1].size() == 15);  // A and G arrive in slice 2
    TemporalNetwork tn = unroll(seq, TemporalArcPolicy::markov(1),
                                kb.transitions);
    // A@1 exists but has no temporal parent (absent from slice 0)
    const Node& a1 = tn.flattened.node("A@1");
    for (const auto& p : a1.parents) CHECK(p == "Inflamm@1");
    CHECK(tn.flattened.is_valid());
}
