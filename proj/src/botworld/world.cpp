#include "tr/botworld/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace tr::botworld {

const char* to_string(WorldErrorKind kind) {
    switch (kind) {
        case WorldErrorKind::UnknownRobot: return "UnknownRobot";
        case WorldErrorKind::UnknownObject: return "UnknownObject";
        case WorldErrorKind::InvalidWorld: return "InvalidWorld";
        case WorldErrorKind::DegenerateCourse: return "DegenerateCourse";
        case WorldErrorKind::NoBlocker: return "NoBlocker";
    }
    return "Unknown";
}

WorldError::WorldError(WorldErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw WorldError(WorldErrorKind::InvalidWorld, what); }

void check_band(const lang::Tolerance& t, const char* name) {
    if (!(t.enter > 0 && t.exit >= t.enter)) invalid(std::string(name) + " band needs 0 < enter <= exit");
}

Vec2 rotate(Vec2 v, double a) {
    double c = std::cos(a);
    double s = std::sin(a);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace

void World::validate() const {
    const Params& p = params;
    if (!(p.dt > 0)) invalid("dt must be > 0");
    if (!(p.v >= 0)) invalid("v must be >= 0");
    if (!(p.omega > 0)) invalid("omega must be > 0");
    if (!(p.reach > 0)) invalid("reach must be > 0");
    if (!(p.clearance >= 0)) invalid("clearance must be >= 0");
    if (!(0 <= p.zone_min && p.zone_min < p.zone_max)) invalid("need 0 <= zone_min < zone_max");
    check_band(p.facing, "facing");
    check_band(p.midline, "midline");
    check_band(p.center, "center");

    std::set<std::string> ids;
    auto unique = [&](const std::string& id) {
        if (id.empty()) invalid("object with empty id");
        if (!ids.insert(id).second) invalid("duplicate id '" + id + "'");
    };
    std::set<std::string> held;
    for (const auto& r : robots) {
        unique(r.id);
        if (!(r.radius > 0)) invalid("robot '" + r.id + "' radius must be > 0");
        if (r.grip) {
            if (!find_bar(r.grip->bar)) invalid("robot '" + r.id + "' holds unknown bar '" + r.grip->bar + "'");
            if (!held.insert(r.grip->bar).second) invalid("bar '" + r.grip->bar + "' held twice");
        }
    }
    for (const auto& b : bars) {
        unique(b.id);
        if (!(b.half_width > 0)) invalid("bar '" + b.id + "' half_width must be > 0");
    }
    for (const auto& o : obstacles) {
        unique(o.id);
        if (!(o.radius > 0)) invalid("obstacle '" + o.id + "' radius must be > 0");
    }
}

Robot& World::robot(const std::string& id) {
    for (auto& r : robots) {
        if (r.id == id) return r;
    }
    throw WorldError(WorldErrorKind::UnknownRobot, "'" + id + "'");
}

const Robot& World::robot(const std::string& id) const { return const_cast<World*>(this)->robot(id); }

Bar& World::bar(const std::string& id) {
    for (auto& b : bars) {
        if (b.id == id) return b;
    }
    throw WorldError(WorldErrorKind::UnknownObject, "no bar '" + id + "'");
}

const Bar& World::bar(const std::string& id) const { return const_cast<World*>(this)->bar(id); }

const Bar* World::find_bar(const std::string& id) const {
    for (const auto& b : bars) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

const Obstacle* World::find_obstacle(const std::string& id) const {
    for (const auto& o : obstacles) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

std::optional<std::string> World::holder_of(const std::string& bar) const {
    for (const auto& r : robots) {
        if (r.grip && r.grip->bar == bar) return r.id;
    }
    return std::nullopt;
}

bool World::has_object(const std::string& id) const {
    return find_bar(id) || find_obstacle(id) ||
           std::any_of(robots.begin(), robots.end(), [&](const Robot& r) { return r.id == id; });
}

Grip World::grip_of(const Robot& r, const Bar& bar) {
    return Grip{bar.id, rotate(bar.p - r.position, -r.heading), rotate(bar.q - r.position, -r.heading)};
}

void World::release(Robot& r) { r.grip.reset(); }

void World::carry(const Robot& r) {
    if (!r.grip) return;
    Bar& b = bar(r.grip->bar);
    b.p = r.position + rotate(r.grip->local_p, r.heading);
    b.q = r.position + rotate(r.grip->local_q, r.heading);
}

void World::sort_robots() {
    std::sort(robots.begin(), robots.end(), [](const Robot& a, const Robot& b) { return a.id < b.id; });
}

void apply_event(World& w, const EventBody& body) {
    auto release_holder = [&](const std::string& bar) {
        if (auto h = w.holder_of(bar)) w.release(w.robot(*h));
    };
    std::visit(
        [&](const auto& e) {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, event::MoveObject>) {
                for (auto& o : w.obstacles) {
                    if (o.id == e.id) {
                        o.center = e.position;
                        return;
                    }
                }
                for (auto& b : w.bars) {
                    if (b.id == e.id) {
                        release_holder(b.id);
                        Vec2 half = 0.5 * (b.q - b.p);
                        if (e.heading) half = norm(half) * from_angle(*e.heading);
                        b.p = e.position - half;
                        b.q = e.position + half;
                        return;
                    }
                }
                throw WorldError(WorldErrorKind::UnknownObject, "cannot move '" + e.id + "'");
            } else if constexpr (std::is_same_v<E, event::AddObstacle>) {
                if (w.has_object(e.obstacle.id)) invalid("duplicate id '" + e.obstacle.id + "'");
                if (!(e.obstacle.radius > 0)) invalid("obstacle radius must be > 0");
                w.obstacles.push_back(e.obstacle);
            } else if constexpr (std::is_same_v<E, event::RemoveObject>) {
                auto o = std::find_if(w.obstacles.begin(), w.obstacles.end(),
                                      [&](const Obstacle& x) { return x.id == e.id; });
                if (o != w.obstacles.end()) {
                    w.obstacles.erase(o);
                    return;
                }
                auto b = std::find_if(w.bars.begin(), w.bars.end(), [&](const Bar& x) { return x.id == e.id; });
                if (b == w.bars.end()) throw WorldError(WorldErrorKind::UnknownObject, "cannot remove '" + e.id + "'");
                release_holder(e.id);
                w.bars.erase(b);
            } else if constexpr (std::is_same_v<E, event::TeleportRobot>) {
                Robot& r = w.robot(e.id);
                r.position = e.position;
                r.heading = lang::normalize_angle(e.heading);
                w.carry(r);
            } else if constexpr (std::is_same_v<E, event::ForceRelease>) {
                w.release(w.robot(e.robot));
            } else {
                (void)w.robot(e.robot);  // SetEntryArg: the world only checks the robot exists
            }
        },
        body);
}

double admissible_fraction(const World& w, const Robot& r, Vec2 delta) {
    double t = 1.0;
    const Vec2 from = r.position;
    const Vec2 to = from + delta;
    auto limit = [&](const Capsule& c) {
        const double contact = c.radius + r.radius;
        const double d0 = c.distance_to_core(from);
        if (d0 < contact) {
            if (c.distance_to_core(to) < d0) t = 0.0;
            return;
        }
        t = std::min(t, first_entry(from, to, c, contact));
    };
    for (const auto& o : w.obstacles) limit(o.capsule());
    for (const auto& b : w.bars) {
        if (!(r.grip && r.grip->bar == b.id)) limit(b.capsule());
    }
    return t;
}

namespace {

void grab(World& w, Robot& r, const runtime::ActionCommand& cmd, StepLog& log) {
    auto fail = [&](const std::string& why) { log.notes.push_back("grab-failed " + r.id + ": " + why); };
    const auto* ref = cmd.args.size() == 1 ? std::get_if<runtime::ObjectRef>(&cmd.args[0]) : nullptr;
    if (!ref) return fail("grab-bar takes one bar reference");
    const Bar* b = w.find_bar(ref->id);
    if (!b) return fail("no bar '" + ref->id + "'");
    if (r.grip) return fail(r.grip->bar == b->id ? "already holding " + b->id : "hands full");
    if (auto h = w.holder_of(b->id)) return fail(b->id + " is held by " + *h);
    const Vec2 c = b->center();
    if (distance(r.position, c) > w.params.reach) return fail(b->id + " out of reach");
    if (distance(r.position, c) > 1e-9) {
        double off = std::abs(lang::normalize_angle(r.heading - std::atan2(c.y - r.position.y, c.x - r.position.x)));
        if (off > w.params.facing.exit) return fail("not facing " + b->id);
    }
    r.grip = World::grip_of(r, *b);
}

}  // namespace

StepLog world_step(World& w, const std::map<std::string, runtime::ActionCommand>& commands,
                   std::span<const Event> due_events, const NoiseConfig& noise, Rng& rng) {
    for (const auto& [id, _] : commands) (void)w.robot(id);
    StepLog log;
    std::uniform_real_distribution<double> unit01(0.0, 1.0);
    std::uniform_real_distribution<double> any_angle(-std::numbers::pi, std::numbers::pi);
    for (auto& r : w.robots) {
        // Two draws per robot every tick keep the stream aligned across outcomes.
        const bool perturbed = unit01(rng) < noise.exec_p;
        const double random_direction = any_angle(rng);
        auto it = commands.find(r.id);
        if (it == commands.end() || it->second.is_nil()) continue;
        const runtime::ActionCommand& cmd = it->second;
        if (cmd.name == "move") {
            double dir = perturbed ? random_direction : r.heading;
            Vec2 delta = w.params.v * w.params.dt * from_angle(dir);
            double t = admissible_fraction(w, r, delta);
            if (t < 1.0) log.notes.push_back("blocked " + r.id);
            r.position = r.position + t * delta;
        } else if (cmd.name == "rotate") {
            double step = w.params.omega * w.params.dt;
            if (perturbed && random_direction < 0) step = -step;
            r.heading = lang::normalize_angle(r.heading + step);
        } else if (cmd.name == "grab-bar") {
            grab(w, r, cmd, log);
        } else if (cmd.name == "release-bar") {
            w.release(r);
        } else {
            log.notes.push_back("ignored " + r.id + ": unknown action " + cmd.name);
        }
        w.carry(r);
    }
    for (const auto& e : due_events) {
        apply_event(w, e.body);
        log.events_applied.push_back(e);
    }
    ++w.tick;
    return log;
}

double course(Vec2 p1, Vec2 p2) {
    if (distance(p1, p2) <= 1e-9) throw WorldError(WorldErrorKind::DegenerateCourse, "course of a point to itself");
    return lang::normalize_angle(std::atan2(p2.y - p1.y, p2.x - p1.x));
}

namespace {

struct Blocker {
    Capsule capsule;
    double threshold;  // the path may not get closer than this
};

/// Obstacles and unheld bars that the path p1 -> p2 passes too close to.
std::vector<Blocker> blockers(const World& w, Vec2 p1, Vec2 p2, double rho) {
    std::vector<Capsule> candidates;
    for (const auto& o : w.obstacles) candidates.push_back(o.capsule());
    for (const auto& b : w.bars) {
        if (!w.holder_of(b.id)) candidates.push_back(b.capsule());
    }
    std::vector<Blocker> out;
    for (const auto& c : candidates) {
        double threshold = std::min({c.radius + rho + w.params.clearance, c.distance_to_core(p1), c.distance_to_core(p2)});
        if (segment_segment_distance(p1, p2, c.a, c.b) < threshold - 1e-9) out.push_back({c, threshold});
    }
    return out;
}

}  // namespace

bool clear_path(const World& w, Vec2 p1, Vec2 p2, double rho) { return blockers(w, p1, p2, rho).empty(); }

Vec2 new_point(const World& w, Vec2 p1, Vec2 p2, double rho) {
    std::vector<Blocker> bs = blockers(w, p1, p2, rho);
    if (bs.empty()) throw WorldError(WorldErrorKind::NoBlocker, "the path is clear");
    const Blocker* first = nullptr;
    double first_t = 2.0;
    for (const auto& b : bs) {
        double t = first_entry(p1, p2, b.capsule, b.threshold);
        if (t < first_t) {
            first_t = t;
            first = &b;
        }
    }
    const Capsule& cap = first->capsule;
    const Vec2 dir = unit(p2 - p1);
    auto [c, center] = closest_points(p1, p2, cap.a, cap.b);
    const double side = cross(dir, center - p1);
    const Vec2 u = side > 1e-12 ? -1.0 * perp(dir) : perp(dir);
    const double k = cap.radius + rho + 2 * w.params.clearance;

    const double blocked_at = distance(p1, c);
    auto acceptable = [&](Vec2 x) { return clear_path(w, p1, x, rho) || distance(p1, x) < blocked_at; };

    Vec2 waypoint = center + k * u;
    if (acceptable(waypoint)) return waypoint;

    // Tangent to the k-circle on the same side.
    const double l = distance(p1, center);
    if (l > k) {
        Vec2 base = unit(center - p1);
        double a = std::asin(k / l) * (cross(base, u) > 0 ? 1.0 : -1.0);
        Vec2 tangent = p1 + std::sqrt(l * l - k * k) * rotate(base, a);
        if (acceptable(tangent)) return tangent;
    }
    Vec2 sidestep = p1 + k * u;
    if (acceptable(sidestep)) return sidestep;
    return 0.5 * (p1 + c);
}

}  // namespace tr::botworld
