#include <sstream>
#include <thread>

#include "doctest.h"
#include "tr/service/scenario.hpp"
#include "tr/service/server.hpp"
#include "tr/service/simulation.hpp"
#include "ws_client.hpp"

using namespace tr;
using namespace tr::service;
using nlohmann::json;
using tr::test::WsClient;

namespace {

const std::string kData = TR_DATA_DIR;

ServerOptions options() {
    ServerOptions o;
    o.base_dir = kData;
    return o;
}

std::vector<json> snapshots(const std::vector<json>& msgs) {
    std::vector<json> out;
    for (const auto& m : msgs) {
        if (m["type"] == "snapshot") out.push_back(m);
    }
    return out;
}

/// Headless records for a scenario file, optionally with extra events.
std::vector<json> headless(const std::string& file, const std::vector<botworld::Event>& events, std::uint64_t ticks) {
    Scenario s = load_scenario(kData + "/" + file);
    s.ticks = ticks;
    s.events.insert(s.events.end(), events.begin(), events.end());
    Simulation sim(s);
    std::ostringstream out;
    run_headless(sim, out);
    std::vector<json> recs;
    std::istringstream in(out.str());
    std::string line;
    while (std::getline(in, line)) recs.push_back(json::parse(line));
    return recs;
}

}  // namespace

TEST_CASE("every message gets one reply and snapshots are tick-ordered") {
    ControlServer server(options());
    server.start();
    WsClient c(server.port());

    json err = c.request({{"type", "start"}});
    CHECK(err["type"] == "error");
    c.send_text("this is not json");
    auto bad = c.next();
    REQUIRE(bad);
    CHECK((*bad)["type"] == "error");
    CHECK((*bad)["id"].is_null());
    CHECK(c.request({{"type", "warp"}})["type"] == "error");

    json loaded = c.request({{"type", "load"}, {"path", "scenarios/goto.json"}});
    CHECK(loaded["type"] == "ack");
    const json& rules = loaded["programs"]["goto"]["rules"];
    REQUIRE(rules.size() == 3);
    CHECK(rules[0]["action"] == "nil");
    CHECK(rules[1]["action"] == "move");
    CHECK(rules[2]["condition"] == "T");
    CHECK(c.request({{"type", "subscribe"}, {"decimation", 1}})["type"] == "ack");
    std::vector<json> seen;
    json ack = c.request({{"type", "step"}, {"n", 5}}, &seen);
    CHECK(ack["type"] == "ack");
    CHECK(ack["tick"] == 5);
    auto snaps = snapshots(seen);
    REQUIRE(snaps.size() == 5);
    for (std::size_t i = 0; i < snaps.size(); ++i) CHECK(snaps[i]["record"]["tick"] == i);
    CHECK(snaps[0].contains("world"));
    CHECK_FALSE(snaps[1].contains("world"));

    // Running: ticks keep increasing; pause stops the clock.
    seen.clear();
    CHECK(c.request({{"type", "set_rate"}, {"rate", 400}})["type"] == "ack");
    CHECK(c.request({{"type", "start"}})["type"] == "ack");
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    json paused = c.request({{"type", "pause"}}, &seen);
    const std::uint64_t at_pause = paused["tick"];
    CHECK(at_pause > 5);
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    json again = c.request({{"type", "pause"}}, &seen);
    CHECK(again["tick"] == at_pause);
    snaps = snapshots(seen);
    REQUIRE(!snaps.empty());
    std::uint64_t prev = 4;
    for (const auto& s : snaps) {
        const std::uint64_t t = s["record"]["tick"];
        CHECK(t == prev + 1);
        prev = t;
    }
    CHECK(prev + 1 == at_pause);
    server.stop();
}

TEST_CASE("an injected removal shows in the next snapshot and collapses the activation") {
    ControlServer server(options());
    server.start();
    WsClient c(server.port());
    REQUIRE(c.request({{"type", "load"}, {"path", "scenarios/amble.json"}})["type"] == "ack");
    REQUIRE(c.request({{"type", "subscribe"}})["type"] == "ack");
    std::vector<json> seen;
    c.request({{"type", "step"}, {"n", 200}}, &seen);
    REQUIRE(snapshots(seen).back()["record"]["robots"][0]["activation"].size() == 3);

    json ack = c.request({{"type", "inject"}, {"event", {{"type", "remove_object"}, {"id", "O1"}}}});
    CHECK(ack["type"] == "ack");
    CHECK(c.request({{"type", "inject"}, {"event", {{"type", "remove_object"}, {"id", "nope"}}}})["type"] == "error");
    CHECK(c.request({{"type", "inject"}, {"event", {{"type", "remove_object"}, {"id", "O1"}, {"at_tick", 3}}}})["type"] ==
          "error");

    seen.clear();
    c.request({{"type", "step"}, {"n", 2}}, &seen);
    auto snaps = snapshots(seen);
    REQUIRE(snaps.size() == 2);
    const json& applied = snaps[0]["record"]["events_applied"];
    REQUIRE(applied.size() == 1);
    CHECK(applied[0]["type"] == "remove_object");
    CHECK(snaps[0]["record"]["world_delta"]["removed"] == json::array({"O1"}));
    const json& levels = snaps[1]["record"]["robots"][0]["activation"];
    REQUIRE(levels.size() == 2);
    CHECK(levels[1]["callee"] == "goto");
    server.stop();
}

TEST_CASE("subscribers at different decimations see consistent prefixes") {
    ControlServer server(options());
    server.start();
    WsClient fine(server.port());
    WsClient coarse(server.port());
    REQUIRE(fine.request({{"type", "load"}, {"path", "scenarios/amble.json"}})["type"] == "ack");
    REQUIRE(fine.request({{"type", "subscribe"}, {"decimation", 1}})["type"] == "ack");
    REQUIRE(coarse.request({{"type", "subscribe"}, {"decimation", 10}})["type"] == "ack");
    std::vector<json> f, g;
    fine.request({{"type", "step"}, {"n", 100}}, &f);
    // The coarse client's snapshots were produced before the ack to the fine one.
    coarse.request({{"type", "pause"}}, &g);
    auto fs = snapshots(f), gs = snapshots(g);
    REQUIRE(fs.size() == 100);
    REQUIRE(gs.size() == 10);
    for (std::size_t i = 0; i < gs.size(); ++i) {
        const std::uint64_t t = gs[i]["record"]["tick"];
        CHECK(t == 10 * i + 9);
        CHECK(gs[i]["record"] == fs[t]["record"]);
    }
    server.stop();
}

TEST_CASE("the service reproduces the headless run") {
    const botworld::Event removal{300, botworld::event::RemoveObject{"O1"}};
    const auto expected = headless("scenarios/amble.json", {removal}, 600);

    ControlServer server(options());
    server.start();
    WsClient c(server.port());
    REQUIRE(c.request({{"type", "load"}, {"path", "scenarios/amble.json"}, {"ticks", 600}})["type"] == "ack");
    REQUIRE(c.request({{"type", "subscribe"}})["type"] == "ack");
    REQUIRE(c.request({{"type", "inject"}, {"event", {{"type", "remove_object"}, {"id", "O1"}, {"at_tick", 300}}}})["type"] ==
            "ack");
    std::vector<json> seen;
    CHECK(c.request({{"type", "set_rate"}, {"rate", 0}})["type"] == "ack");
    CHECK(c.request({{"type", "start"}})["type"] == "ack");
    for (;;) {
        auto m = c.next();
        REQUIRE(m);
        if ((*m)["type"] == "finished") {
            CHECK((*m)["reason"] == "ticks");
            break;
        }
        seen.push_back(*m);
    }
    auto snaps = snapshots(seen);
    REQUIRE(snaps.size() == expected.size());
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        CHECK(snaps[i]["record"]["robots"][0]["activation"] == expected[i]["robots"][0]["activation"]);
        CHECK(snaps[i]["record"] == expected[i]);
    }
    CHECK(c.request({{"type", "start"}})["type"] == "error");
    server.stop();
}

TEST_CASE("a client that never reads does not stall the loop") {
    ServerOptions o = options();
    o.queue_limit = 8;
    ControlServer server(o);
    server.start();

    json world = {{"robots", {{{"id", "r1"}, {"position", {0, 0}}, {"heading", 0}}}}};
    for (int i = 0; i < 300; ++i) {
        world["obstacles"].push_back({{"id", "far" + std::to_string(i)}, {"center", {1000 + i, 1000}}, {"radius", 0.5}});
    }
    json scenario = {{"world", world},
                     {"program_file", "programs/navigation.tr"},
                     {"entry", "goto(point(10, 10))"},
                     {"ticks", 3000}};

    WsClient fast(server.port());
    REQUIRE(fast.request({{"type", "load"}, {"scenario", scenario}})["type"] == "ack");
    WsClient slow(server.port(), false);
    slow.send(json{{"type", "subscribe"}, {"full_every", 1}});
    // Connections are not ordered against each other; give the subscribe time to land.
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    const auto begin = std::chrono::steady_clock::now();
    json ack = fast.request({{"type", "step"}, {"n", 3000}});
    CHECK_MESSAGE(ack["type"] == "ack", ack.dump());
    CHECK(ack["tick"] == 3000);
    CHECK(std::chrono::steady_clock::now() - begin < std::chrono::seconds(30));

    slow.start_reading();
    std::vector<std::uint64_t> ticks;
    for (;;) {
        auto m = slow.next(std::chrono::seconds(5));
        if (!m) break;
        if ((*m)["type"] == "snapshot") ticks.push_back((*m)["record"]["tick"]);
        if ((*m)["type"] == "finished") break;
    }
    REQUIRE(!ticks.empty());
    CHECK(ticks.size() < 3000);
    for (std::size_t i = 1; i < ticks.size(); ++i) CHECK(ticks[i] > ticks[i - 1]);
    CHECK(ticks.back() == 2999);
    server.stop();
}

TEST_CASE("records that applied events are sent regardless of decimation") {
    ControlServer server(options());
    server.start();
    WsClient c(server.port());
    REQUIRE(c.request({{"type", "load"}, {"path", "scenarios/amble.json"}})["type"] == "ack");
    REQUIRE(c.request({{"type", "subscribe"}, {"decimation", 10}, {"full_every", 100}})["type"] == "ack");
    std::vector<json> seen;
    c.request({{"type", "step"}, {"n", 3}}, &seen);
    REQUIRE(c.request({{"type", "inject"}, {"event", {{"type", "remove_object"}, {"id", "O1"}}}})["type"] == "ack");
    c.request({{"type", "step"}, {"n", 17}}, &seen);
    auto snaps = snapshots(seen);
    REQUIRE(snaps.size() == 3);
    CHECK(snaps[0]["record"]["tick"] == 3);
    CHECK(snaps[0]["record"]["events_applied"].size() == 1);
    CHECK(snaps[0].contains("world"));
    CHECK(snaps[1]["record"]["tick"] == 9);
    CHECK_FALSE(snaps[1].contains("world"));
    CHECK(snaps[2]["record"]["tick"] == 19);
    server.stop();
}
