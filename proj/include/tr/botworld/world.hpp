#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tr/botworld/geometry.hpp"
#include "tr/lang/ast.hpp"
#include "tr/runtime/machine.hpp"

namespace tr::botworld {

enum class WorldErrorKind { UnknownRobot, UnknownObject, InvalidWorld, DegenerateCourse, NoBlocker };

const char* to_string(WorldErrorKind kind);

class WorldError : public std::runtime_error {
  public:
    WorldError(WorldErrorKind kind, const std::string& message);
    WorldErrorKind kind() const noexcept { return kind_; }

  private:
    WorldErrorKind kind_;
};

inline constexpr double kDeg = 0.017453292519943295;

struct Params {
    double v = 1.0;             // units/s
    double omega = 90 * kDeg;   // rad/s, counter-clockwise
    double dt = 0.05;           // s
    double reach = 1.0;         // units
    double clearance = 0.5;     // delta, added around obstacles when planning paths
    lang::Tolerance facing{3 * kDeg, 6 * kDeg};     // heading bands of facing-bar and facing-midline-zone
    lang::Tolerance midline{0.2, 0.4};              // distance to the bar's bisector
    lang::Tolerance center{0.9, 1.1};               // fractions of reach
    double zone_min = 2.0;      // midline zone, distance from the bar center
    double zone_max = 6.0;

    bool operator==(const Params&) const = default;
};

/// Bar endpoints in the holder's body frame, fixed at grab time.
struct Grip {
    std::string bar;
    Vec2 local_p;
    Vec2 local_q;
    bool operator==(const Grip&) const = default;
};

struct Robot {
    std::string id;
    Vec2 position;
    double heading = 0.0;  // (-pi, pi]
    double radius = 0.5;
    std::optional<Grip> grip;

    std::optional<std::string> holding() const {
        return grip ? std::optional<std::string>(grip->bar) : std::nullopt;
    }
    bool operator==(const Robot&) const = default;
};

struct Bar {
    std::string id;
    Vec2 p;
    Vec2 q;
    double half_width = 0.1;

    Vec2 center() const { return 0.5 * (p + q); }
    Capsule capsule() const { return {p, q, half_width}; }
    bool operator==(const Bar&) const = default;
};

struct Obstacle {
    std::string id;
    Vec2 center;
    double radius = 1.0;

    Capsule capsule() const { return {center, center, radius}; }
    bool operator==(const Obstacle&) const = default;
};

namespace event {
struct MoveObject {
    std::string id;
    Vec2 position;                  // obstacle center or bar center
    std::optional<double> heading;  // bar orientation p->q; kept when absent
};
struct AddObstacle { Obstacle obstacle; };
struct RemoveObject { std::string id; };
struct TeleportRobot {
    std::string id;
    Vec2 position;
    double heading = 0.0;
};
/// Rebinds an entry argument of a robot's machine; handled by the simulation.
struct SetEntryArg {
    std::string robot;
    std::size_t index = 0;
    std::string value;  // expression source, e.g. "point(3, 4)"
};
struct ForceRelease { std::string robot; };
}  // namespace event

using EventBody = std::variant<event::MoveObject, event::AddObstacle, event::RemoveObject, event::TeleportRobot,
                               event::SetEntryArg, event::ForceRelease>;

struct Event {
    std::uint64_t at_tick = 0;
    EventBody body;
};

struct NoiseConfig {
    double exec_p = 0.0;       // chance an increment is replaced by a random one of equal size
    double sense_sigma = 0.0;  // std dev of sensed position, units
    std::optional<double> heading_sigma;  // radians; defaults to sense_sigma

    double heading_sigma_or_default() const { return heading_sigma.value_or(sense_sigma); }
};

using Rng = std::mt19937_64;

class World {
  public:
    Params params;
    std::vector<Robot> robots;  // kept sorted by id
    std::vector<Bar> bars;
    std::vector<Obstacle> obstacles;
    std::uint64_t tick = 0;

    /// Throws InvalidWorld on bad parameters, radii or duplicate ids.
    void validate() const;

    Robot& robot(const std::string& id);
    const Robot& robot(const std::string& id) const;
    Bar& bar(const std::string& id);
    const Bar& bar(const std::string& id) const;
    const Bar* find_bar(const std::string& id) const;
    const Obstacle* find_obstacle(const std::string& id) const;
    std::optional<std::string> holder_of(const std::string& bar) const;
    bool has_object(const std::string& id) const;

    /// Grip for `bar` at the robot's current pose.
    static Grip grip_of(const Robot& r, const Bar& bar);
    /// Releases the robot's bar, if any.
    void release(Robot& r);
    /// Recomputes a held bar's endpoints from its holder's pose.
    void carry(const Robot& r);
    void sort_robots();

    bool operator==(const World&) const = default;
};

/// Applies one event (SetEntryArg is ignored here). Throws UnknownObject /
/// UnknownRobot.
void apply_event(World& w, const EventBody& e);

struct StepLog {
    std::vector<std::string> notes;          // e.g. "grab-failed r1 A: out of reach"
    std::vector<Event> events_applied;
};

/// One increment per robot in id order, then the due events in order.
/// Commands for unknown robots raise UnknownRobot.
StepLog world_step(World& w, const std::map<std::string, runtime::ActionCommand>& commands,
                   std::span<const Event> due_events, const NoiseConfig& noise, Rng& rng);

/// Largest fraction of `delta` the robot can travel before touching an
/// obstacle or a bar it does not hold. Moving away from something already
/// touched is allowed; moving further into it is not.
double admissible_fraction(const World& w, const Robot& r, Vec2 delta);

/// Heading of p1 -> p2; DegenerateCourse when the points coincide.
double course(Vec2 p1, Vec2 p2);

/// True iff a robot of radius rho can follow p1 -> p2 keeping `clearance`
/// from every obstacle and unheld bar. Objects the endpoints are already
/// closer to than that margin only block if the path gets closer still.
bool clear_path(const World& w, Vec2 p1, Vec2 p2, double rho);

/// A waypoint beside the first blocker along p1 -> p2; NoBlocker when the
/// path is clear. The result is either reachable in a clear line from p1 or
/// strictly closer to p1 than the blocked point of the segment.
Vec2 new_point(const World& w, Vec2 p1, Vec2 p2, double rho);

}  // namespace tr::botworld
