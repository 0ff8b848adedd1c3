#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tr/service/scenario.hpp"

namespace tr::service {

struct RobotRecord {
    std::string id;
    Vec2 position;
    double heading = 0.0;
    std::optional<std::string> holding;
    runtime::ActionCommand action;
    runtime::ActivationTrace activation;
};

/// Everything that happened in one tick: activations sensed on the world
/// before the step, poses after it, and the events applied at its end.
struct TraceRecord {
    std::uint64_t tick = 0;
    double time = 0.0;  // seconds at the end of the tick
    std::vector<RobotRecord> robots;
    nlohmann::json world_delta;  // {"bars": [...], "obstacles": [...], "removed": [...]}; changed objects only
    std::vector<botworld::Event> events_applied;
    std::vector<std::string> notes;
};

nlohmann::json to_json(const TraceRecord& r);
nlohmann::json activation_to_json(const runtime::ActivationTrace& t);

/// A machine or an event failed during the tick. The tick had no effect.
class SimulationError : public std::runtime_error {
  public:
    SimulationError(std::uint64_t tick, std::string robot, std::string kind, const std::string& message);
    std::uint64_t tick() const { return tick_; }
    const std::string& robot() const { return robot_; }  // empty for event failures
    const std::string& kind() const { return kind_; }     // e.g. "NoApplicableRule", "UnknownObject"
    nlohmann::json to_json() const;                       // the final trace line

  private:
    std::uint64_t tick_;
    std::string robot_;
    std::string kind_;
};

/// Bad injected event (unknown object, tick in the past, bad entry value).
class InjectError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One World plus one Machine per robot, stepped in lock-step.
class Simulation {
  public:
    explicit Simulation(Scenario scenario);

    /// Senses and ticks every machine in robot-id order on the current world,
    /// applies the increments, then the events due at this tick.
    TraceRecord step();

    /// Queues an event for the end of tick `e.at_tick`, which must not be in
    /// the past. Objects and robots must exist now (AddObstacle ids must not).
    void inject(botworld::Event e);

    std::uint64_t tick() const { return world_.tick; }
    bool finished() const { return world_.tick >= scenario_.ticks; }
    const botworld::World& world() const { return world_; }
    const Scenario& scenario() const { return scenario_; }
    const runtime::Machine& machine(const std::string& robot) const { return machines_.at(robot); }

  private:
    Scenario scenario_;
    botworld::World world_;
    std::map<std::string, runtime::Machine> machines_;
    std::vector<botworld::Event> pending_;  // injection order
    botworld::Rng rng_;
};

/// Runs the scenario to completion, one JSON record per line. Returns 0, or
/// 2 after writing the error record as the last line.
int run_headless(Simulation& sim, std::ostream& out);

struct ReplayResult {
    bool matches = false;
    std::size_t records = 0;  // records compared
    std::string detail;       // first difference
};

/// Re-runs the scenario and compares every line of `trace` with the fresh record.
ReplayResult replay(Scenario scenario, std::istream& trace);

}  // namespace tr::service
