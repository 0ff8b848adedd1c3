// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tr/analysis/analysis.hpp"
#include "tr/lang/parser.hpp"
#include "tr/netcomp/netcomp.hpp"
#include "tr/runtime/machine.hpp"
#include "tr/runtime/prop_env.hpp"
#include "tr/service/scenario.hpp"
#include "tr/service/server.hpp"
#include "tr/service/simulation.hpp"
#include "ws_client.hpp"

using namespace tr;
using namespace tr::service;
using nlohmann::json;

namespace {

const std::string kData = TR_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string read_file(const std::string& rel) { return read_text_file(kData + "/" + rel); }

json nav_doc(const std::string& entry, std::uint64_t ticks, std::uint64_t seed = 0) {
    return {{"world", {{"robots", {{{"id", "r1"}, {"position", {0, 0}}, {"heading", 0}}}}}},
            {"program_file", "programs/navigation.tr"},
            {"entry", entry},
            {"ticks", ticks},
            {"seed", seed}};
}

double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Ticks until the root selects its first rule, or nullopt within the budget.
std::optional<std::uint64_t> ticks_to_goal(Simulation& sim) {
    while (!sim.finished()) {
        TraceRecord r = sim.step();
        if (r.robots[0].activation.levels[0].selected == 0) return r.tick;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- dynamics

Outcome goto_convergence() {
    Scenario s = scenario_from_json(nav_doc("goto(point(10, 10))", 2000), kData);
    const double eps = s.runtime.tolerances.point.enter;
    const double step = s.world.params.v * s.world.params.dt;
    const Vec2 goal{10, 10};
    Simulation sim(s);
    Vec2 prev = sim.world().robots[0].position;
    std::optional<std::uint64_t> reached, aligned;
    std::size_t checked = 0, violations = 0;
    double min_drop = 1e9;
    while (!sim.finished()) {
        TraceRecord r = sim.step();
        const RobotRecord& rb = r.robots[0];
        if (rb.activation.levels[0].selected == 0) {
            reached = r.tick;
            break;
        }
        const bool moving = rb.action.name == "move";
        if (moving && !aligned) aligned = r.tick;
        const double before = dist(prev, goal);
        if (aligned && moving && before > eps) {
            const double drop = before - dist(rb.position, goal);
            min_drop = std::min(min_drop, drop);
            ++checked;
            if (drop < 0.9 * step) ++violations;
        }
        prev = rb.position;
    }
    Outcome o;
    o.pass = reached && aligned && checked > 0 && violations == 0;
    o.detail = fmt("goal rule at tick %lld, first aligned move %lld, %zu move ticks, min decrease %.4f (need %.4f)",
                   reached ? static_cast<long long>(*reached) : -1LL,
                   aligned ? static_cast<long long>(*aligned) : -1LL, checked, min_drop, 0.9 * step);
    return o;
}

Outcome amble_detour() {
    Scenario s = load_scenario(kData + "/scenarios/amble.json");
    s.ticks = 4000;
    std::optional<std::uint64_t> reached;
    std::size_t max_depth = 0;
    {
        Simulation sim(s);
        while (!sim.finished()) {
            TraceRecord r = sim.step();
            max_depth = std::max(max_depth, r.robots[0].activation.depth());
            if (r.robots[0].activation.levels[0].selected == 0) {
                reached = r.tick;
                break;
            }
        }
    }

    // Mid-detour removal: wait until the robot is inside a detour, remove the obstacle at that tick.
    Simulation sim(s);
    TraceRecord r;
    while (!sim.finished()) {
        r = sim.step();
        if (r.robots[0].activation.depth() >= 3 && r.tick >= 100) break;
    }
    const std::size_t depth_before = r.robots[0].activation.depth();
    sim.inject({sim.tick(), botworld::event::RemoveObject{"O1"}});
    TraceRecord with_event = sim.step();
    TraceRecord next = sim.step();
    const auto& levels = next.robots[0].activation.levels;
    const auto& frames = sim.machine("r1").frames();
    const bool collapsed = levels.size() == 2 && levels[1].callee == "goto" && frames.size() == 2 &&
                           std::get<Vec2>(frames[1].bindings.at(0)) == Vec2{10, 10};

    Outcome o;
    o.pass = reached && max_depth >= 2 && depth_before >= 3 && with_event.events_applied.size() == 1 && collapsed;
    o.detail = fmt("goal at tick %lld, max depth %zu; removal at tick %llu from depth %zu, next record depth %zu %s",
                   reached ? static_cast<long long>(*reached) : -1LL, max_depth,
                   static_cast<unsigned long long>(with_event.tick), depth_before, levels.size(),
                   collapsed ? "in goto(point(10, 10))" : "not collapsed into goto(point(10, 10))");
    return o;
}

Scenario bar_scenario(Vec2 position, double heading) {
    Scenario s = load_scenario(kData + "/scenarios/bar_grab.json");
    s.world.robots[0].position = position;
    s.world.robots[0].heading = heading;
    s.ticks = 6000;
    return s;
}

std::optional<std::uint64_t> ticks_to_grab(Simulation& sim, std::uint64_t budget) {
    const std::uint64_t start = sim.tick();
    while (!sim.finished() && sim.tick() - start < budget) {
        TraceRecord r = sim.step();
        if (r.robots[0].holding == std::optional<std::string>("A")) return sim.tick() - start;
    }
    return std::nullopt;
}

Outcome bar_grab() {
    // Random poses in the 20x20 arena, clear of bar A from (-1, 0) to (1, 0).
    std::size_t ok = 0;
    std::uint64_t worst = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> coord(-10, 10), angle(-std::numbers::pi, std::numbers::pi);
        Vec2 p;
        for (;;) {
            p = {coord(rng), coord(rng)};
            const double cx = std::clamp(p.x, -1.0, 1.0);
            if (std::hypot(p.x - cx, p.y) > 0.65) break;
        }
        Simulation sim(bar_scenario(p, angle(rng)));
        if (auto t = ticks_to_grab(sim, 6000)) {
            ++ok;
            worst = std::max(worst, *t);
        }
    }

    // Serendipity: a teleport to a grab-ready pose skips the approach.
    Simulation sim(bar_scenario({-6, -4}, 1.2));
    for (int i = 0; i < 50; ++i) sim.step();
    const std::size_t rule_before = sim.machine("r1").frames()[0].selected.value_or(99);
    sim.inject({sim.tick(), botworld::event::TeleportRobot{"r1", {0, -0.8}, std::numbers::pi / 2}});
    sim.step();
    TraceRecord after = sim.step();
    const std::size_t rule_after = after.robots[0].activation.levels[0].selected;
    const bool serendipity = rule_before > 1 && rule_after == 1 && after.robots[0].action.name == "grab-bar";

    // Homeostasis: knock the bar away after success.
    auto first = ticks_to_grab(sim, 6000);
    bool homeostasis = false;
    std::optional<std::uint64_t> regrab;
    std::size_t reactivated_rule = 0;
    if (first) {
        sim.inject({sim.tick(), botworld::event::ForceRelease{"r1"}});
        sim.inject({sim.tick(), botworld::event::MoveObject{"A", {6, 5}, 0.7}});
        sim.step();
        TraceRecord r = sim.step();
        reactivated_rule = r.robots[0].activation.levels[0].selected;
        regrab = ticks_to_grab(sim, 6000);
        homeostasis = reactivated_rule != 0 && regrab.has_value();
    }

    Outcome o;
    o.pass = ok == 20 && serendipity && homeostasis;
    o.detail = fmt("%zu/20 random poses grabbed (worst %llu ticks); teleport: rule %zu -> %zu; "
                   "knocked away: rule %zu, re-grabbed after %lld ticks",
                   ok, static_cast<unsigned long long>(worst), rule_before + 1, rule_after + 1,
                   reactivated_rule + 1, regrab ? static_cast<long long>(*regrab) : -1LL);
    return o;
}

Outcome noise_robustness() {
    Simulation clean(scenario_from_json(nav_doc("goto(point(10, 10))", 2000), kData));
    const auto base = ticks_to_goal(clean);
    if (!base) return {false, "noise-free run never reached the goal"};
    const std::uint64_t budget = 5 * *base;
    std::size_t ok = 0;
    std::uint64_t worst = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        json doc = nav_doc("goto(point(10, 10))", budget + 1, seed);
        doc["noise"] = {{"exec_p", 0.1}};
        Simulation sim(scenario_from_json(doc, kData));
        if (auto t = ticks_to_goal(sim)) {
            ++ok;
            worst = std::max(worst, *t);
        }
    }
    return {ok >= 99, fmt("%zu/100 seeds within %llu ticks (noise-free %llu, worst %llu)", ok,
                          static_cast<unsigned long long>(budget), static_cast<unsigned long long>(*base),
                          static_cast<unsigned long long>(worst))};
}

std::size_t switches_after_alignment(double exit_band, std::uint64_t seed) {
    json doc = nav_doc("goto(point(10, 10))", 3000, seed);
    doc["noise"] = {{"sense_sigma", 0.02}, {"heading_sigma", 0.02}};
    Scenario s = scenario_from_json(doc, kData);
    const double in = 3 * botworld::kDeg;
    s.runtime.tolerances.angle = {in, exit_band * in};
    Simulation sim(s);
    std::size_t switches = 0;
    bool aligned = false;
    std::string prev;
    while (!sim.finished()) {
        const std::string action = sim.step().robots[0].action.name;
        if (aligned && action != prev) ++switches;
        aligned = aligned || action == "move";
        prev = action;
    }
    return switches;
}

Outcome hysteresis() {
    std::size_t better = 0;
    std::string pairs;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t flat = switches_after_alignment(1.0, seed);
        const std::size_t band = switches_after_alignment(2.0, seed);
        better += band < flat;
        if (seed < 5) pairs += fmt("%s%zu/%zu", seed ? " " : "", flat, band);
    }
    return {better == 20, fmt("band has fewer switches in %zu/20 seeds (no band/band: %s ...)", better, pairs.c_str())};
}

// ---------------------------------------------------------------- analysis

using analysis::ActionModel;
using analysis::PropCondition;
using analysis::PropSequence;

/// Condition as explicit literals; the oracles below never touch the bit masks.
std::vector<std::pair<std::size_t, bool>> literals(const PropCondition& c, std::size_t n) {
    std::vector<std::pair<std::size_t, bool>> out;
    for (std::size_t i = 0; i < n; ++i) {
        if ((c.pos >> i) & 1U) out.emplace_back(i, true);
        if ((c.neg >> i) & 1U) out.emplace_back(i, false);
    }
    return out;
}

bool satisfies(const std::vector<bool>& state, const PropCondition& c, std::size_t n) {
    for (auto [i, positive] : literals(c, n)) {
        if (state[i] != positive) return false;
    }
    return true;
}

std::vector<bool> state_of(std::uint32_t s, std::size_t n) {
    std::vector<bool> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (s >> i) & 1U;
    return v;
}

PropCondition random_condition(std::mt19937& rng, std::size_t n, double density) {
    PropCondition c;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::bernoulli_distribution(density)(rng)) (rng() % 2 ? c.pos : c.neg) |= 1U << i;
    }
    return c;
}

PropSequence abstract_program(const std::string& file, const std::string& name, const analysis::FeatureSet& f) {
    lang::ProgramLibrary lib = lang::parse(read_file(file));
    return analysis::to_propositional(*lib.find_program(name), f);
}

/// Verifies the sequence, then every adjacent swap: each must fail, and only at a swapped rule.
std::string mutation_report(const PropSequence& seq, const analysis::ModelSet& models, bool& ok) {
    ok = analysis::check_universal(seq, models).universal;
    std::size_t caught = 0;
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        PropSequence s = seq;
        std::swap(s[i], s[i + 1]);
        auto verdicts = analysis::check_regression_property(s, models);
        std::set<std::size_t> failing;
        for (const auto& v : verdicts) {
            if (!v.passes) failing.insert(v.index);
        }
        const bool identified = !failing.empty() && std::all_of(failing.begin(), failing.end(), [&](std::size_t k) {
            return k == i || k == i + 1;
        });
        caught += identified && !analysis::check_universal(s, models).universal;
    }
    ok = ok && caught == seq.size() - 1;
    return fmt("%zu/%zu swaps caught", caught, seq.size() - 1);
}

Outcome static_analysis() {
    analysis::ModelSet goto_models = analysis::models_from_json(read_file("models/goto.json"));
    analysis::ModelSet bar_models = analysis::models_from_json(read_file("models/bar_grab.json"));
    bool goto_ok = false, bar_ok = false;
    const std::string g = mutation_report(
        abstract_program("programs/goto_abstract.tr", "goto-abstract", goto_models.features), goto_models, goto_ok);
    const std::string b = mutation_report(
        abstract_program("programs/bar_grab_abstract.tr", "grab-abstract", bar_models.features), bar_models, bar_ok);

    std::mt19937 rng(606);
    std::size_t agree = 0, incomplete = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        PropSequence seq;
        for (std::size_t i = 1 + rng() % 8; i > 0; --i) seq.push_back({random_condition(rng, n, 0.25), "a"});
        bool oracle = true;
        for (std::uint32_t s = 0; s < (1U << n) && oracle; ++s) {
            const auto st = state_of(s, n);
            oracle = std::any_of(seq.begin(), seq.end(), [&](const auto& r) { return satisfies(st, r.condition, n); });
        }
        analysis::AnalysisReport rep = analysis::check_completeness(seq, n);
        bool witness_ok = true;
        if (rep.counterexample) {
            const auto st = state_of(*rep.counterexample, n);
            for (const auto& r : seq) witness_ok = witness_ok && !satisfies(st, r.condition, n);
        }
        agree += rep.complete == oracle && witness_ok && rep.complete != rep.counterexample.has_value();
        incomplete += !oracle;
    }
    return {goto_ok && bar_ok && agree == 500,
            fmt("goto: %s, %s; bar-grab: %s, %s; completeness %zu/500 agree (%zu incomplete)",
                goto_ok ? "universal" : "NOT universal", g.c_str(), bar_ok ? "universal" : "NOT universal", b.c_str(),
                agree, incomplete)};
}

Outcome regression_soundness() {
    std::mt19937 rng(707);
    std::size_t pairs = 0, bad = 0, bottoms = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        ActionModel a;
        a.pre = random_condition(rng, n, 0.3);
        for (std::size_t i = 0; i < n; ++i) {
            switch (rng() % 4) {
                case 0: a.add |= 1U << i; break;
                case 1: a.del |= 1U << i; break;
                default: break;
            }
        }
        // Every goal conjunction over n features: each feature absent, positive or negative.
        std::size_t goals = 1;
        for (std::size_t i = 0; i < n; ++i) goals *= 3;
        for (std::size_t code = 0; code < goals; ++code) {
            PropCondition goal;
            for (std::size_t i = 0, c = code; i < n; ++i, c /= 3) {
                if (c % 3 == 1) goal.pos |= 1U << i;
                if (c % 3 == 2) goal.neg |= 1U << i;
            }
            const auto r = analysis::regress(goal, a);
            ++pairs;
            bottoms += !r;
            bool ok = true, any = false;
            for (std::uint32_t s = 0; s < (1U << n); ++s) {
                const auto before = state_of(s, n);
                std::vector<bool> after = before;
                for (std::size_t i = 0; i < n; ++i) {
                    if ((a.del >> i) & 1U) after[i] = false;
                    if ((a.add >> i) & 1U) after[i] = true;
                }
                const bool achieves = satisfies(before, a.pre, n) && satisfies(after, goal, n);
                any = any || achieves;
                if (r && satisfies(before, *r, n) != achieves) ok = false;
            }
            if (r.has_value() != any) ok = false;
            bad += !ok;
        }
    }
    return {bad == 0, fmt("%zu (goal, model) pairs over 200 models, %zu mismatches, %zu BOTTOM", pairs, bad, bottoms)};
}

Outcome net_equivalence() {
    std::mt19937 rng(808);
    std::size_t equivalent = 0, inputs = 0, and_violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 8, m = 1 + rng() % 10, k = 1 + rng() % 4;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
        std::string src = "prog p() {\n";
        for (std::size_t r = 0; r < m; ++r) {
            std::string cond;
            if (r + 1 < m) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (rng() % 3 != 0) continue;
                    cond += (cond.empty() ? "" : " and ") + std::string(rng() % 2 ? "not " : "") + names[i];
                }
            }
            const std::size_t a = rng() % (k + 1);
            src += "  " + (cond.empty() ? std::string("T") : cond) + " -> " +
                   (a == k ? std::string("nil") : "b" + std::to_string(a)) + ";\n";
        }
        src += "}\n";
        lang::ProgramLibrary lib = lang::parse(src);
        const lang::TRProgram& prog = *lib.find_program("p");
        analysis::FeatureSet features(names);
        netcomp::ThresholdNet net = netcomp::compile(prog, features);
        equivalent += netcomp::verify_equivalence(net, prog, features).equivalent;
        for (std::uint32_t s = 0; s < (1U << n); ++s, ++inputs) {
            const auto l2 = netcomp::layer2_outputs(net, netcomp::input_of(s, n));
            and_violations += std::count(l2.begin(), l2.end(), 1.0) != 1;
        }
    }
    return {equivalent == 100 && and_violations == 0,
            fmt("%zu/100 nets equivalent; %zu inputs, %zu with other than one AND unit firing", equivalent, inputs,
                and_violations)};
}

Outcome tree_selection() {
    std::mt19937 rng(909);
    std::size_t checks = 0, mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 15;
        std::vector<std::size_t> parent(n, 0);
        std::vector<double> cost(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            parent[i] = rng() % i;
            cost[i] = (rng() % 3 == 0) ? 1.0 : static_cast<double>(rng() % 9) * 0.5;
        }
        std::vector<std::size_t> order(n);  // declaration slot -> node
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        lang::TRTree tree;
        for (std::size_t d = 0; d < n; ++d) {
            const std::size_t k = order[d];
            lang::TreeNode node;
            node.id = k == 0 ? lang::kRootId : "n" + std::to_string(k);
            if (k != 0) node.parent = parent[k] == 0 ? lang::kRootId : "n" + std::to_string(parent[k]);
            node.arc_cost = cost[k];
            node.decl_index = d;
            tree.nodes.push_back(node);
        }
        // Brute force: walk every node's path to the root.
        std::vector<double> to_root(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = k; j != 0; j = parent[j]) to_root[k] += cost[j];
        }
        for (int assign = 0; assign < 25; ++assign) {
            std::vector<bool> truth(n);
            for (std::size_t d = 0; d < n; ++d) truth[d] = rng() % 2;
            std::optional<std::size_t> best;
            for (std::size_t d = 0; d < n; ++d) {
                if (!truth[d]) continue;
                if (!best || to_root[order[d]] < to_root[order[*best]]) best = d;
            }
            ++checks;
            mismatches += runtime::select_tree_node(tree, truth) != best;
        }
    }

    // Single-path trees against their sequence form.
    std::size_t paths = 0, path_mismatches = 0;
    for (std::size_t len = 1; len <= 8; ++len) {
        std::string decl = "sense", seq = "prog s() { k0 -> nil;", tree = "tree t() { root: k0;";
        std::vector<std::string> features;
        for (std::size_t i = 0; i < len; ++i) {
            features.push_back("k" + std::to_string(i));
            decl += (i ? ", k" : " k") + std::to_string(i) + "/0";
        }
        decl += "; primitive a/0, b/0, c/0;";
        for (std::size_t i = 1; i < len; ++i) {
            const std::string action(1, static_cast<char>('a' + i % 3));
            const std::string up = i == 1 ? "root" : "n" + std::to_string(i - 1);
            seq += " k" + std::to_string(i) + " -> " + action + ";";
            tree += " node n" + std::to_string(i) + ": k" + std::to_string(i) + ", " + action + " => " + up + ";";
        }
        auto lib = std::make_shared<const lang::ProgramLibrary>(lang::parse(decl + seq + " } " + tree + " }"));
        runtime::PropositionalEnv env(features);
        for (std::uint64_t mask = 0; mask < (1ULL << len); ++mask) {
            env.set(mask);
            auto run = [&](const char* entry) -> std::string {
                runtime::Machine m = runtime::Machine::init(lib, lang::parse_action(entry, *lib));
                try {
                    return runtime::to_string(m.tick(env).command);
                } catch (const runtime::RuntimeError& e) {
                    return runtime::to_string(e.kind());
                }
            };
            ++paths;
            path_mismatches += run("s()") != run("t()");
        }
    }
    return {mismatches == 0 && path_mismatches == 0,
            fmt("%zu/%zu random selections match; %zu/%zu single-path assignments match", checks - mismatches, checks,
                paths - path_mismatches, paths)};
}

// ---------------------------------------------------------------- engine

Outcome engine_hygiene() {
    Scenario s = load_scenario(kData + "/scenarios/amble.json");
    Simulation sim(s);
    std::optional<runtime::ActivationTrace> prev;
    std::set<std::uint64_t> seen;
    std::size_t ticks = 0, retained = 0, fresh = 0, violations = 0;
    std::uint64_t root = 0;
    while (!sim.finished()) {
        const runtime::ActivationTrace cur = sim.step().robots[0].activation;
        const auto& frames = sim.machine("r1").frames();
        ++ticks;
        // Live frames are exactly the reported path.
        if (frames.size() > cur.depth()) ++violations;
        for (std::size_t i = 0; i < std::min(frames.size(), cur.depth()); ++i) {
            if (frames[i].instance_id != cur.levels[i].instance_id) ++violations;
        }
        if (!prev) root = cur.levels[0].instance_id;
        if (cur.levels[0].instance_id != root) ++violations;
        for (std::size_t i = 0; prev && i + 1 < cur.depth(); ++i) {
            if (i + 1 >= prev->depth() || prev->levels[i].instance_id != cur.levels[i].instance_id) continue;
            if (prev->levels[i].selected == cur.levels[i].selected) {
                ++retained;
                if (cur.levels[i + 1].instance_id != prev->levels[i + 1].instance_id) ++violations;
            } else {
                ++fresh;
                if (seen.count(cur.levels[i + 1].instance_id)) ++violations;
            }
        }
        for (const auto& l : cur.levels) seen.insert(l.instance_id);
        prev = cur;
    }

    // Reruns and replay, with noise so the seed matters.
    Scenario noisy = s;
    noisy.noise.exec_p = 0.1;
    noisy.noise.sense_sigma = 0.02;
    auto run = [](const Scenario& sc) {
        Simulation sim(sc);
        std::ostringstream out;
        run_headless(sim, out);
        return out.str();
    };
    const std::string a = run(noisy), b = run(noisy);
    std::istringstream in(a);
    ReplayResult rep = replay(noisy, in);
    return {violations == 0 && a == b && rep.matches,
            fmt("%zu ticks, %zu retained and %zu fresh children, %zu violations; reruns %s; replay %s (%zu records)",
                ticks, retained, fresh, violations, a == b ? "byte-identical" : "DIFFER",
                rep.matches ? "matches" : "MISMATCH", rep.records)};
}

// ---------------------------------------------------------------- service

/// Exactly one highlighted rule per level, consistent with the truth row.
bool one_highlight(const json& activation) {
    for (const auto& level : activation) {
        const std::string truth = level["truth"];
        const std::size_t sel = level["selected"];
        if (sel >= truth.size() || truth[sel] != '1') return false;
        if (level["tree"].get<bool>()) continue;
        for (std::size_t j = 0; j < sel; ++j) {
            if (truth[j] != '0') return false;
        }
        for (std::size_t j = sel + 1; j < truth.size(); ++j) {
            if (truth[j] != '-') return false;
        }
    }
    return true;
}

Outcome service_protocol() {
    ServerOptions opts;
    opts.base_dir = kData;
    ControlServer server(opts);
    server.start();
    test::WsClient c(server.port());
    if (c.request({{"type", "load"}, {"path", "scenarios/amble.json"}})["type"] != "ack") return {false, "load failed"};
    c.request({{"type", "subscribe"}, {"decimation", 2}});
    c.request({{"type", "start"}});

    std::vector<json> snaps;
    bool highlights = true;
    auto take = [&](const json& m) {
        if (m["type"] != "snapshot") return;
        snaps.push_back(m);
        highlights = highlights && one_highlight(m["record"]["robots"][0]["activation"]);
    };
    const auto begin = std::chrono::steady_clock::now();
    while (std::chrono::steady_clock::now() - begin < std::chrono::seconds(2)) {
        if (auto m = c.next(std::chrono::milliseconds(500))) take(*m);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    const double rate = snaps.size() / secs;
    const std::size_t depth_before = snaps.empty() ? 0 : snaps.back()["record"]["robots"][0]["activation"].size();

    std::vector<json> seen;
    c.request({{"type", "inject"}, {"event", {{"type", "remove_object"}, {"id", "O1"}}}}, &seen);
    for (const auto& m : seen) take(m);
    const std::size_t before_inject = snaps.size();
    while (snaps.size() < before_inject + 2) {
        auto m = c.next();
        if (!m) break;
        take(*m);
    }
    c.request({{"type", "pause"}});
    server.stop();
    if (snaps.size() < before_inject + 2) return {false, "no snapshots after the inject"};
    const json& first = snaps[before_inject]["record"];
    const json& second = snaps[before_inject + 1]["record"];
    const bool event_shown =
        first["events_applied"].size() == 1 && first["events_applied"][0]["type"] == "remove_object";
    const auto& levels = second["robots"][0]["activation"];
    const bool collapsed = levels.size() == 2 && levels[1]["callee"] == "goto";
    return {rate >= 10 && depth_before >= 3 && event_shown && collapsed && highlights,
            fmt("%.1f snapshots/s at decimation 2; inject %s in the next snapshot; depth %zu -> %zu; %s", rate,
                event_shown ? "shown" : "NOT shown", depth_before, levels.size(),
                highlights ? "one highlight per level" : "highlight violation")};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int number;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "goto convergence", goto_convergence},
        {2, "amble detour and subgoal abandonment", amble_detour},
        {3, "bar grab, serendipity, homeostasis", bar_grab},
        {4, "robustness under execution noise", noise_robustness},
        {5, "hysteresis against hunting", hysteresis},
        {6, "static analysis", static_analysis},
        {7, "regression soundness", regression_soundness},
        {8, "threshold net equivalence", net_equivalence},
        {9, "tree selection", tree_selection},
        {10, "engine hygiene", engine_hygiene},
        {11, "control service (server side)", service_protocol},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.number)) continue;
        const auto begin = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        failures += !o.pass;
        std::printf("criterion %2d %s  %s: %s [%.2f s]\n", c.number, o.pass ? "PASS" : "FAIL", c.name,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
