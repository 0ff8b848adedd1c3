#include "tr/service/simulation.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "tr/botworld/env.hpp"
#include "tr/botworld/io.hpp"
#include "tr/lang/parser.hpp"

namespace tr::service {

using nlohmann::json;

SimulationError::SimulationError(std::uint64_t tick, std::string robot, std::string kind, const std::string& message)
    : std::runtime_error(message), tick_(tick), robot_(std::move(robot)), kind_(std::move(kind)) {}

json SimulationError::to_json() const {
    json e{{"tick", tick_}, {"kind", kind_}, {"message", what()}};
    e["robot"] = robot_.empty() ? json(nullptr) : json(robot_);
    return {{"error", e}};
}

json activation_to_json(const runtime::ActivationTrace& t) {
    json levels = json::array();
    for (const auto& l : t.levels) {
        levels.push_back({{"callee", l.callee},
                          {"instance_id", l.instance_id},
                          {"tree", l.is_tree},
                          {"selected", l.selected},
                          {"truth", l.truth_string()}});
    }
    return levels;
}

json to_json(const TraceRecord& r) {
    json robots = json::array();
    for (const auto& rr : r.robots) {
        robots.push_back({{"id", rr.id},
                          {"pose", {{"x", rr.position.x}, {"y", rr.position.y}, {"heading", rr.heading}}},
                          {"holding", rr.holding ? json(*rr.holding) : json(nullptr)},
                          {"action", runtime::to_string(rr.action)},
                          {"activation", activation_to_json(rr.activation)}});
    }
    json events = json::array();
    for (const auto& e : r.events_applied) events.push_back(botworld::event_to_json(e));
    return {{"tick", r.tick},           {"time", r.time},     {"robots", robots},
            {"world_delta", r.world_delta}, {"events_applied", events}, {"notes", r.notes}};
}

namespace {

/// Bars and obstacles that differ between two worlds, plus removed ids.
json world_delta(const botworld::World& before, const botworld::World& after) {
    json bars = json::array(), obstacles = json::array(), removed = json::array();
    for (const auto& b : after.bars) {
        const botworld::Bar* old = before.find_bar(b.id);
        if (!old || !(*old == b)) bars.push_back(botworld::bar_to_json(b));
    }
    for (const auto& o : after.obstacles) {
        const botworld::Obstacle* old = before.find_obstacle(o.id);
        if (!old || !(*old == o)) obstacles.push_back(botworld::obstacle_to_json(o));
    }
    for (const auto& b : before.bars) {
        if (!after.find_bar(b.id)) removed.push_back(b.id);
    }
    for (const auto& o : before.obstacles) {
        if (!after.find_obstacle(o.id)) removed.push_back(o.id);
    }
    return {{"bars", bars}, {"obstacles", obstacles}, {"removed", removed}};
}

}  // namespace

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)), world_(scenario_.world), rng_(scenario_.seed) {
    for (const auto& r : world_.robots) {
        lang::ActionTerm entry = lang::parse_action(scenario_.entries.at(r.id), *scenario_.library);
        machines_.emplace(r.id, runtime::Machine::init(scenario_.library, std::move(entry), scenario_.runtime));
    }
    for (const auto& e : scenario_.events) {
        if (const auto* s = std::get_if<botworld::event::SetEntryArg>(&e.body)) {
            auto it = machines_.find(s->robot);
            if (it == machines_.end()) throw ScenarioError("set_entry_arg: unknown robot '" + s->robot + "'");
            if (s->index >= it->second.entry().args.size()) throw ScenarioError("set_entry_arg: index out of range");
            try {
                (void)lang::parse_expr(s->value);
            } catch (const lang::ParseError& err) {
                throw ScenarioError(std::string("set_entry_arg: ") + err.what());
            }
        }
        pending_.push_back(e);
    }
}

void Simulation::inject(botworld::Event e) {
    if (e.at_tick < world_.tick) {
        throw InjectError("at_tick " + std::to_string(e.at_tick) + " is before the current tick " +
                          std::to_string(world_.tick));
    }
    std::visit(
        [&](const auto& b) {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, botworld::event::MoveObject> ||
                          std::is_same_v<B, botworld::event::RemoveObject>) {
                if (!world_.has_object(b.id)) throw InjectError("unknown object '" + b.id + "'");
            } else if constexpr (std::is_same_v<B, botworld::event::AddObstacle>) {
                if (world_.has_object(b.obstacle.id)) throw InjectError("object '" + b.obstacle.id + "' exists");
                if (!(b.obstacle.radius > 0)) throw InjectError("obstacle radius must be > 0");
            } else if constexpr (std::is_same_v<B, botworld::event::TeleportRobot>) {
                if (!machines_.count(b.id)) throw InjectError("unknown robot '" + b.id + "'");
            } else if constexpr (std::is_same_v<B, botworld::event::ForceRelease>) {
                if (!machines_.count(b.robot)) throw InjectError("unknown robot '" + b.robot + "'");
            } else {
                auto it = machines_.find(b.robot);
                if (it == machines_.end()) throw InjectError("unknown robot '" + b.robot + "'");
                if (b.index >= it->second.entry().args.size()) throw InjectError("entry argument index out of range");
                try {
                    (void)lang::parse_expr(b.value);
                } catch (const lang::ParseError& err) {
                    throw InjectError(std::string("entry argument: ") + err.what());
                }
            }
        },
        e.body);
    pending_.push_back(std::move(e));
}

TraceRecord Simulation::step() {
    const std::uint64_t k = world_.tick;
    TraceRecord rec;
    rec.tick = k;

    // Machines and rng are copied so a failure leaves the simulation untouched.
    std::map<std::string, runtime::Machine> machines = machines_;
    botworld::Rng rng = rng_;
    std::map<std::string, runtime::ActionCommand> commands;
    for (const auto& r : world_.robots) {
        botworld::RobotEnv env = botworld::RobotEnv::sense(world_, r.id, scenario_.noise, rng);
        try {
            runtime::TickResult res = machines.at(r.id).tick(env);
            commands[r.id] = res.command;
            RobotRecord rr;
            rr.id = r.id;
            rr.action = res.command;
            rr.activation = std::move(res.trace);
            rec.robots.push_back(std::move(rr));
        } catch (const runtime::RuntimeError& e) {
            throw SimulationError(k, r.id, runtime::to_string(e.kind()), e.what());
        } catch (const botworld::WorldError& e) {
            throw SimulationError(k, r.id, botworld::to_string(e.kind()), e.what());
        }
    }

    std::vector<botworld::Event> due;
    std::vector<botworld::Event> later;
    for (auto& e : pending_) (e.at_tick == k ? due : later).push_back(e);

    botworld::World next = world_;
    botworld::StepLog log;
    try {
        log = botworld::world_step(next, commands, due, scenario_.noise, rng);
    } catch (const botworld::WorldError& e) {
        throw SimulationError(k, "", botworld::to_string(e.kind()), e.what());
    }
    for (const auto& e : due) {
        if (const auto* s = std::get_if<botworld::event::SetEntryArg>(&e.body)) {
            machines.at(s->robot).set_entry_arg(s->index, lang::parse_expr(s->value));
        }
    }

    rec.time = static_cast<double>(k + 1) * next.params.dt;
    for (auto& rr : rec.robots) {
        const botworld::Robot& r = next.robot(rr.id);
        rr.position = r.position;
        rr.heading = r.heading;
        rr.holding = r.holding();
    }
    rec.world_delta = world_delta(world_, next);
    rec.events_applied = std::move(log.events_applied);
    rec.notes = std::move(log.notes);

    world_ = std::move(next);
    machines_ = std::move(machines);
    rng_ = rng;
    pending_ = std::move(later);
    return rec;
}

int run_headless(Simulation& sim, std::ostream& out) {
    while (!sim.finished()) {
        try {
            out << to_json(sim.step()).dump() << '\n';
        } catch (const SimulationError& e) {
            out << e.to_json().dump() << '\n';
            return 2;
        }
    }
    return 0;
}

ReplayResult replay(Scenario scenario, std::istream& trace) {
    Simulation sim(std::move(scenario));
    ReplayResult r;
    std::string line;
    bool ended = false;
    while (std::getline(trace, line)) {
        if (line.empty()) continue;
        if (ended || sim.finished()) {
            r.detail = "trace has more records than the run";
            return r;
        }
        std::string fresh;
        try {
            fresh = to_json(sim.step()).dump();
        } catch (const SimulationError& e) {
            fresh = e.to_json().dump();
            ended = true;
        }
        if (fresh != line) {
            r.detail = "record " + std::to_string(r.records) + " differs\n  trace: " + line + "\n  run:   " + fresh;
            return r;
        }
        ++r.records;
    }
    if (!ended && !sim.finished()) {
        r.detail = "trace ends at record " + std::to_string(r.records) + " before the run does";
        return r;
    }
    r.matches = true;
    return r;
}

}  // namespace tr::service
