#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "doctest.h"
#include "tr/lang/parser.hpp"
#include "tr/netcomp/netcomp.hpp"

using namespace tr;
using namespace tr::netcomp;
using analysis::FeatureSet;

namespace {

std::string read_file(const std::string& rel) {
    std::ifstream in(std::string(TR_DATA_DIR) + "/" + rel);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Compiled {
    lang::ProgramLibrary lib;
    FeatureSet features;
    ThresholdNet net;

    const lang::TRProgram& program() const { return lib.programs.begin()->second; }
};

Compiled build(const std::string& src, std::vector<std::string> features) {
    Compiled c{lang::parse(src), FeatureSet(std::move(features)), {}};
    c.net = compile(c.program(), c.features);
    return c;
}

std::string action_at(const ThresholdNet& net, std::vector<bool> x) {
    auto k = forward(net, x);
    return k ? net.action_names[*k] : "NONE";
}

NetErrorKind error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const NetError& e) {
        return e.kind();
    }
    FAIL("expected NetError");
    return NetErrorKind::InvalidNet;
}

}  // namespace

TEST_CASE("hand-applied construction") {
    Compiled c = build("prog p() { x1 and x2 -> b1; x1 -> b2; T -> b1; }", {"x1", "x2"});
    const ThresholdNet& net = c.net;
    REQUIRE(net.layer1.size() == 3);
    CHECK(net.layer1[0] == Unit{{1, 1}, 2});
    CHECK(net.layer1[1] == Unit{{1, 0}, 1});
    CHECK(net.layer1[2] == Unit{{0, 0}, 0});
    CHECK(net.layer2[0] == Unit{{1, 0, 0}, 1});
    CHECK(net.layer2[1] == Unit{{-1, 1, 0}, 1});
    CHECK(net.layer2[2] == Unit{{-1, -1, 1}, 1});
    CHECK(net.action_names == std::vector<std::string>{"b1", "b2"});
    CHECK(net.layer3[0] == Unit{{1, 0, 1}, 1});
    CHECK(net.layer3[1] == Unit{{0, 1, 0}, 1});

    CHECK(layer2_outputs(net, {true, true}) == std::vector<double>{1, 0, 0});
    CHECK(action_at(net, {true, true}) == "b1");
    CHECK(action_at(net, {true, false}) == "b2");
    CHECK(action_at(net, {false, false}) == "b1");
    CHECK(action_at(net, {false, true}) == "b1");
    CHECK(verify_equivalence(net, c.program(), c.features).equivalent);
}

TEST_CASE("single TRUE rule always fires") {
    Compiled c = build("prog p() { T -> b1; }", {"x1", "x2"});
    for (std::uint32_t s = 0; s < 4; ++s) CHECK(action_at(c.net, input_of(s, 2)) == "b1");
}

TEST_CASE("negative literal") {
    Compiled c = build("prog p() { x1 and not x2 -> b; }", {"x1", "x2"});
    CHECK(c.net.layer1[0] == Unit{{1, -1}, 1});
    CHECK(layer1_outputs(c.net, {false, false}) == std::vector<double>{0});
    CHECK(layer1_outputs(c.net, {true, false}) == std::vector<double>{1});
    CHECK(layer1_outputs(c.net, {false, true}) == std::vector<double>{0});
    CHECK(layer1_outputs(c.net, {true, true}) == std::vector<double>{0});
    // Not complete: no associator fires where the interpreter has no rule.
    CHECK(action_at(c.net, {false, false}) == "NONE");
    CHECK(verify_equivalence(c.net, c.program(), c.features).equivalent);
}

TEST_CASE("fault injection yields a counterexample") {
    Compiled c = build("prog p() { x1 and x2 -> b1; x1 -> b2; T -> b1; }", {"x1", "x2"});
    ThresholdNet bad = c.net;
    bad.layer2[1].weights[0] = 0.0;  // rule 2 no longer inhibited by rule 1
    VerifyResult r = verify_equivalence(bad, c.program(), c.features);
    CHECK(!r.equivalent);
    REQUIRE(r.counterexample);
    CHECK(*r.counterexample == 0b11u);
    CHECK(r.interpreter_action == "b1");
    CHECK(r.net_action == "b1+b2");
    CHECK(error_of([&] { forward(bad, {true, true}); }) == NetErrorKind::InvalidNet);

    ThresholdNet bad2 = c.net;
    bad2.layer1[1].threshold = 0.0;
    CHECK(!verify_equivalence(bad2, c.program(), c.features).equivalent);
}

TEST_CASE("random sequences compile to equivalent nets") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 1 + rng() % 8;
        std::size_t m = 1 + rng() % 10;
        std::size_t k = 1 + rng() % 4;
        std::vector<std::string> features;
        for (std::size_t i = 0; i < n; ++i) features.push_back("x" + std::to_string(i));
        bool ends_true = rng() % 2;
        std::string src = "prog p() {\n";
        for (std::size_t r = 0; r < m; ++r) {
            std::string cond;
            if (!(ends_true && r + 1 == m)) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (rng() % 3 != 0) continue;
                    if (!cond.empty()) cond += " and ";
                    cond += (rng() % 2 ? "not " : "") + features[i];
                }
            }
            std::size_t a = rng() % (k + 1);
            std::string action = a == k ? "nil" : "b" + std::to_string(a);
            src += "  " + (cond.empty() ? std::string("T") : cond) + " -> " + action + ";\n";
        }
        src += "}\n";
        CAPTURE(src);
        Compiled c = build(src, features);

        VerifyResult r = verify_equivalence(c.net, c.program(), c.features);
        CHECK(r.equivalent);

        bool last_true = c.program().rules.back().condition->node.index() == 0;
        for (std::uint32_t s = 0; s < (1U << n); ++s) {
            auto l2 = layer2_outputs(c.net, input_of(s, n));
            double firing = std::count(l2.begin(), l2.end(), 1.0);
            CHECK(firing <= 1);
            if (last_true) CHECK(firing == 1);
        }
        // Associator rows partition the AND units.
        for (std::size_t i = 0; i < m; ++i) {
            int owners = 0;
            for (const auto& b : c.net.layer3) {
                CHECK((b.weights[i] == 0.0 || b.weights[i] == 1.0));
                owners += b.weights[i] == 1.0;
            }
            CHECK(owners == 1);
        }
    }
}

TEST_CASE("shipped abstractions compile and verify") {
    Compiled g = build(read_file("programs/goto_abstract.tr"), {"at-loc", "aligned"});
    CHECK(verify_equivalence(g.net, g.program(), g.features).equivalent);
    CHECK(g.net.action_names == std::vector<std::string>{"nil", "move", "rotate"});
    Compiled b = build(read_file("programs/bar_grab_abstract.tr"),
                       {"is-grabbing", "at-bar-center", "facing-bar", "on-bar-midline", "facing-midline-zone"});
    CHECK(verify_equivalence(b.net, b.program(), b.features).equivalent);
}

TEST_CASE("errors") {
    Compiled c = build("prog p() { x1 -> b; T -> nil; }", {"x1"});
    CHECK(error_of([&] { forward(c.net, {true, false}); }) == NetErrorKind::DimensionMismatch);
    CHECK(error_of([&] { build("prog p() { x1 or x2 -> b; }", {"x1", "x2"}); }) == NetErrorKind::NonConjunctive);
    std::vector<std::string> many;
    for (int i = 0; i < 17; ++i) many.push_back("f" + std::to_string(i));
    Compiled big = build("prog p() { T -> b; }", many);
    CHECK(error_of([&] { verify_equivalence(big.net, big.program(), big.features); }) == NetErrorKind::TooLarge);
    CHECK(error_of([&] { from_json("{}"); }) == NetErrorKind::InvalidNet);
}

TEST_CASE("JSON round trip") {
    Compiled c = build("prog p() { x1 and not x2 -> b1; x1 -> b2; T -> nil; }", {"x1", "x2"});
    CHECK(from_json(to_json(c.net)) == c.net);
}
