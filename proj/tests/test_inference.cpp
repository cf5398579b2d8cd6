#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tid/aap.hpp"
#include "tid/inference.hpp"

using namespace tid;

namespace {

Network deterministic_chain() {
    Network net;
    Variable a{"a", "", {"f", "t"}, VariableTag::other};
    Variable b{"b", "", {"f", "t"}, VariableTag::other};
    net.add_node(a, NodeKind::chance);
    net.add_node(b, NodeKind::chance, {"a"});
    net.set_cpt("a", Cpt{{{0.4, 0.6}}});
    net.set_cpt("b", Cpt{{{1.0, 0.0}, {0.0, 1.0}}});  // b copies a
    return net;
}

}  // namespace

TEST_CASE("posterior with no evidence returns the prior") {
    Network net;
    Variable a{"a", "", {"s0", "s1"}, VariableTag::other};
    net.add_node(a, NodeKind::chance);
    net.set_cpt("a", Cpt{{{0.3, 0.7}}});
    Distribution d = posterior(net, {}, {"a"});
    CHECK(d.probabilities[0] == doctest::Approx(0.3));
    CHECK(d.probabilities[1] == doctest::Approx(0.7));
}

TEST_CASE("deterministic link inverts exactly") {
    Network net = deterministic_chain();
    Evidence ev;
    ev.set("b", "t");
    Distribution d = posterior(net, ev, {"a"});
    CHECK(d.probabilities[0] == doctest::Approx(0.0));
    CHECK(d.probabilities[1] == doctest::Approx(1.0));
}

TEST_CASE("zero-probability evidence raises inconsistent-evidence") {
    Network net = deterministic_chain();
    net.set_cpt("a", Cpt{{{1.0, 0.0}}});  // a always f, so b always f
    Evidence ev;
    ev.set("b", "t");
    CHECK_THROWS_WITH_AS((void)posterior(net, ev, {"a"}),
                         doctest::Contains("inconsistent evidence"),
                         InferenceError);
}

TEST_CASE("elimination matches the enumeration oracle on random networks") {
    for (uint64_t trial = 0; trial < 40; ++trial) {
        auto gen = seed_stream(11, "ve-vs-enum", trial);
        Network net = tidtest::random_network(10, gen);
        Evidence ev = tidtest::random_evidence(net, 3, gen);
        // query: two unobserved variables
        std::vector<std::string> query;
        for (const auto& id : net.node_ids()) {
            if (ev.assignments.count(id)) continue;
            query.push_back(id);
            if (query.size() == 2) break;
        }
        REQUIRE(query.size() == 2);
        Distribution fast, slow;
        try {
            fast = posterior(net, ev, query);
            slow = enumerate_posterior(net, ev, query);
        } catch (const InferenceError&) {
            continue;  // evidence happened to be impossible; both must throw
        }
        REQUIRE(fast.probabilities.size() == slow.probabilities.size());
        CHECK(tidtest::max_abs_diff(fast.probabilities, slow.probabilities) <
              1e-9);
    }
}

TEST_CASE("oracle on an independent pair ignores evidence on the other node") {
    Network net;
    Variable p{"p", "", {"f", "t"}, VariableTag::other};
    Variable q{"q", "", {"f", "t"}, VariableTag::other};
    net.add_node(p, NodeKind::chance);
    net.add_node(q, NodeKind::chance);
    net.set_cpt("p", Cpt{{{0.25, 0.75}}});
    net.set_cpt("q", Cpt{{{0.5, 0.5}}});
    Evidence ev;
    ev.set("q", "t");
    Distribution d = enumerate_posterior(net, ev, {"p"});
    CHECK(d.probabilities[0] == doctest::Approx(0.25));
}

TEST_CASE("log likelihood basics") {
    Network net;
    Variable a{"a", "", {"f", "t"}, VariableTag::other};
    net.add_node(a, NodeKind::chance);
    net.set_cpt("a", Cpt{{{0.5, 0.5}}});
    Evidence full;
    full.set("a", "t");
    CHECK(log_likelihood(net, full) == doctest::Approx(std::log(0.5)));
    CHECK(log_likelihood(net, {}) == 0.0);

    net.set_cpt("a", Cpt{{{1.0, 0.0}}});
    CHECK(std::isinf(log_likelihood(net, full)));
    CHECK(log_likelihood(net, full) < 0);
}

TEST_CASE("log likelihood equals the oracle marginal on a partial case") {
    auto gen = seed_stream(12, "ll-oracle");
    Network net = tidtest::random_network(8, gen);
    Evidence ev = tidtest::random_evidence(net, 4, gen);
    // oracle: sum the joint over the unobserved variables
    double p = 0.0;
    for (long cell = 0; cell < (1 << 8); ++cell) {
        Assignment full;
        bool compatible = true;
        for (int i = 0; i < 8; ++i) {
            std::string id = "v" + std::to_string(i);
            std::string state = (cell >> i) & 1 ? "t" : "f";
            auto it = ev.assignments.find(id);
            if (it != ev.assignments.end() && it->second != state)
                compatible = false;
            full[id] = state;
        }
        if (compatible) p += joint_probability(net, full);
    }
    CHECK(log_likelihood(net, ev) == doctest::Approx(std::log(p)).epsilon(1e-9));
}

TEST_CASE("log likelihood is monotone non-increasing in added evidence") {
    auto gen = seed_stream(13, "ll-monotone");
    Network net = tidtest::random_network(9, gen);
    Evidence ev;
    double last = 0.0;
    for (int i = 0; i < 5; ++i) {
        ev.set("v" + std::to_string(i), uniform01(gen) < 0.5 ? "f" : "t");
        double ll = log_likelihood(net, ev);
        CHECK(ll <= last + 1e-12);
        last = ll;
    }
}

TEST_CASE("decision ties break to the lowest action index") {
    Network net = aap::mini_network();
    net.set_loss("Util", {3.0, 3.0, 3.0, 3.0});  // action-independent
    DecisionOutcome out = evaluate_decision(net, {});
    CHECK(out.chosen == 0);
    CHECK(out.chosen_action == "wait");
    CHECK(out.expected_loss[0] == doctest::Approx(out.expected_loss[1]));
}

TEST_CASE("certain disease forces the treating action") {
    Network net;
    Variable d{"d", "", {"absent", "present"}, VariableTag::disease};
    net.add_node(d, NodeKind::chance);
    net.set_cpt("d", Cpt{{{0.0, 1.0}}});
    Variable act{"act", "", {"treat", "wait"}, VariableTag::other};
    net.add_node(act, NodeKind::decision);
    Variable u{"u", "", {"u"}, VariableTag::other};
    net.add_node(u, NodeKind::value, {"d", "act"});
    net.set_loss("u", {0.0, 0.0, 1.0, 10.0});
    DecisionOutcome out = evaluate_decision(net, {});
    CHECK(out.chosen_action == "treat");
    CHECK(out.expected_loss[0] == doctest::Approx(1.0));
    CHECK(out.expected_loss[1] == doctest::Approx(10.0));
}

TEST_CASE("expected losses match a full-joint oracle on the mini net") {
    Network net = aap::mini_network();
    Evidence ev;
    ev.set("V", "yes");
    ev.set("RLQ-T", "yes");
    DecisionOutcome out = evaluate_decision(net, ev);

    // oracle: enumerate the joint over (App, NSAP, Inflamm) and the findings
    Distribution post = enumerate_posterior(net, ev, {"App"});
    const auto& loss = *net.node("Util").loss;
    double wait_loss =
        post.probabilities[0] * loss[0] + post.probabilities[1] * loss[2];
    double operate_loss =
        post.probabilities[0] * loss[1] + post.probabilities[1] * loss[3];
    CHECK(out.expected_loss[0] == doctest::Approx(wait_loss).epsilon(1e-9));
    CHECK(out.expected_loss[1] ==
          doctest::Approx(operate_loss).epsilon(1e-9));
}

TEST_CASE("operations reject structurally invalid networks") {
    Network net = deterministic_chain();
    net.node("b").cpt->rows[0] = {0.6, 0.6};
    REQUIRE_FALSE(net.is_valid());
    CHECK_THROWS_AS((void)posterior(net, {}, {"a"}), ValidationError);
    CHECK_THROWS_AS((void)enumerate_posterior(net, {}, {"a"}),
                    ValidationError);
    CHECK_THROWS_AS((void)log_likelihood(net, Evidence{{{"a", "t"}}}),
                    ValidationError);
    CHECK_THROWS_AS((void)joint_probability(net, {{"a", "t"}, {"b", "t"}}),
                    ValidationError);
}

TEST_CASE("decision on the tailored presentation slice matches the oracle") {
    // appendicitis-favoring findings on the bundled 15-node tailored slice
    tid::KnowledgeBase kb = aap::knowledge_base();
    Network slice = tailor(kb, aap::presentation());
    Evidence ev;
    for (const auto& [var, state] : aap::presentation()) ev.set(var, state);
    DecisionOutcome out = evaluate_decision(slice, ev);

    // oracle: full-joint posterior over the value node's chance parents
    Distribution joint = enumerate_posterior(slice, ev, {"App", "NSAP"});
    const auto& loss = *slice.node("Util").loss;
    // loss rows over (App, NSAP, Treat), Treat fastest
    double expect_wait = 0.0, expect_operate = 0.0;
    for (int app = 0; app < 2; ++app)
        for (int nsap = 0; nsap < 2; ++nsap) {
            Assignment key{{"App", app ? "present" : "absent"},
                           {"NSAP", nsap ? "present" : "absent"}};
            double p = joint.at(key);
            expect_wait += p * loss[(app * 2 + nsap) * 2 + 0];
            expect_operate += p * loss[(app * 2 + nsap) * 2 + 1];
        }
    CHECK(out.expected_loss[0] ==
          doctest::Approx(expect_wait).epsilon(1e-9));
    CHECK(out.expected_loss[1] ==
          doctest::Approx(expect_operate).epsilon(1e-9));
    CHECK(out.chosen ==
          (expect_operate < expect_wait ? 1 : 0));
}

TEST_CASE("decision argmin is invariant under affine positive loss changes") {
    Network net = aap::mini_network();
    Evidence ev;
    ev.set("V", "yes");
    ev.set("N", "yes");
    DecisionOutcome base = evaluate_decision(net, ev);

    Network scaled = net;
    auto loss = *scaled.node("Util").loss;
    for (double& x : loss) x = 3.5 * x + 11.0;
    scaled.set_loss("Util", loss);
    DecisionOutcome changed = evaluate_decision(scaled, ev);
    CHECK(base.chosen == changed.chosen);
}
