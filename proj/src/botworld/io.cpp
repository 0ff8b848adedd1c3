#include "tr/botworld/io.hpp"

namespace tr::botworld {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& what) { throw WorldError(WorldErrorKind::InvalidWorld, what); }

Vec2 point(const json& j) {
    if (!j.is_array() || j.size() != 2) schema("expected a point [x, y], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

json point(Vec2 p) { return json::array({p.x, p.y}); }

lang::Tolerance band(const json& j, lang::Tolerance fallback) {
    if (j.is_null()) return fallback;
    if (!j.is_array() || j.size() != 2) schema("expected a band [enter, exit], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

json band(const lang::Tolerance& t) { return json::array({t.enter, t.exit}); }

json get(const json& j, const char* key) {
    if (!j.contains(key)) return nullptr;
    return j.at(key);
}

template <typename F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        schema(e.what());
    }
}

}  // namespace

World world_from_json(const json& j) {
    return guarded([&] {
        World w;
        const json p = j.value("params", json::object());
        const Params d;
        w.params.v = p.value("v", d.v);
        w.params.omega = p.value("omega", d.omega);
        w.params.dt = p.value("dt", d.dt);
        w.params.reach = p.value("reach", d.reach);
        w.params.clearance = p.value("clearance", d.clearance);
        w.params.facing = band(get(p, "facing"), d.facing);
        w.params.midline = band(get(p, "midline"), d.midline);
        w.params.center = band(get(p, "center"), d.center);
        w.params.zone_min = p.value("zone_min", d.zone_min);
        w.params.zone_max = p.value("zone_max", d.zone_max);

        for (const auto& b : j.value("bars", json::array())) {
            w.bars.push_back(Bar{b.at("id").get<std::string>(), point(b.at("p")), point(b.at("q")),
                                 b.value("half_width", 0.1)});
        }
        for (const auto& o : j.value("obstacles", json::array())) {
            w.obstacles.push_back(
                Obstacle{o.at("id").get<std::string>(), point(o.at("center")), o.at("radius").get<double>()});
        }
        std::vector<std::pair<std::size_t, std::string>> holds;
        for (const auto& r : j.value("robots", json::array())) {
            Robot robot;
            robot.id = r.at("id").get<std::string>();
            robot.position = point(r.at("position"));
            robot.heading = lang::normalize_angle(r.value("heading", 0.0));
            robot.radius = r.value("radius", 0.5);
            if (r.contains("holding") && !r.at("holding").is_null()) {
                const std::string bar = r.at("holding").get<std::string>();
                if (!w.find_bar(bar)) schema("robot '" + robot.id + "' holds unknown bar '" + bar + "'");
                robot.grip = World::grip_of(robot, *w.find_bar(bar));
            }
            w.robots.push_back(robot);
        }
        w.sort_robots();
        w.tick = j.value("tick", std::uint64_t{0});
        w.validate();
        return w;
    });
}

json robot_to_json(const Robot& r) {
    json h = r.grip ? json(r.grip->bar) : json(nullptr);
    return {{"id", r.id}, {"position", point(r.position)}, {"heading", r.heading}, {"radius", r.radius}, {"holding", h}};
}

json bar_to_json(const Bar& b) {
    return {{"id", b.id}, {"p", point(b.p)}, {"q", point(b.q)}, {"half_width", b.half_width}};
}

json obstacle_to_json(const Obstacle& o) {
    return {{"id", o.id}, {"center", point(o.center)}, {"radius", o.radius}};
}

json world_to_json(const World& w) {
    const Params& p = w.params;
    json out;
    out["params"] = {{"v", p.v},
                     {"omega", p.omega},
                     {"dt", p.dt},
                     {"reach", p.reach},
                     {"clearance", p.clearance},
                     {"facing", band(p.facing)},
                     {"midline", band(p.midline)},
                     {"center", band(p.center)},
                     {"zone_min", p.zone_min},
                     {"zone_max", p.zone_max}};
    out["tick"] = w.tick;
    out["robots"] = json::array();
    for (const auto& r : w.robots) out["robots"].push_back(robot_to_json(r));
    out["bars"] = json::array();
    for (const auto& b : w.bars) out["bars"].push_back(bar_to_json(b));
    out["obstacles"] = json::array();
    for (const auto& o : w.obstacles) out["obstacles"].push_back(obstacle_to_json(o));
    return out;
}

Event event_from_json(const json& j) {
    return guarded([&] {
        Event e;
        e.at_tick = j.value("at_tick", std::uint64_t{0});
        const std::string type = j.at("type").get<std::string>();
        if (type == "move_object") {
            event::MoveObject m{j.at("id").get<std::string>(), point(j.at("position")), std::nullopt};
            if (j.contains("heading")) m.heading = j.at("heading").get<double>();
            e.body = m;
        } else if (type == "add_obstacle") {
            e.body = event::AddObstacle{
                Obstacle{j.at("id").get<std::string>(), point(j.at("center")), j.at("radius").get<double>()}};
        } else if (type == "remove_object") {
            e.body = event::RemoveObject{j.at("id").get<std::string>()};
        } else if (type == "teleport_robot") {
            e.body = event::TeleportRobot{j.at("id").get<std::string>(), point(j.at("position")),
                                          j.value("heading", 0.0)};
        } else if (type == "set_entry_arg") {
            e.body = event::SetEntryArg{j.at("robot").get<std::string>(), j.at("index").get<std::size_t>(),
                                        j.at("value").get<std::string>()};
        } else if (type == "force_release") {
            e.body = event::ForceRelease{j.at("robot").get<std::string>()};
        } else {
            schema("unknown event type '" + type + "'");
        }
        return e;
    });
}

json event_to_json(const Event& e) {
    json out = std::visit(
        [](const auto& b) -> json {
            using B = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<B, event::MoveObject>) {
                json j{{"type", "move_object"}, {"id", b.id}, {"position", point(b.position)}};
                if (b.heading) j["heading"] = *b.heading;
                return j;
            } else if constexpr (std::is_same_v<B, event::AddObstacle>) {
                return {{"type", "add_obstacle"},
                        {"id", b.obstacle.id},
                        {"center", point(b.obstacle.center)},
                        {"radius", b.obstacle.radius}};
            } else if constexpr (std::is_same_v<B, event::RemoveObject>) {
                return {{"type", "remove_object"}, {"id", b.id}};
            } else if constexpr (std::is_same_v<B, event::TeleportRobot>) {
                return {{"type", "teleport_robot"}, {"id", b.id}, {"position", point(b.position)}, {"heading", b.heading}};
            } else if constexpr (std::is_same_v<B, event::SetEntryArg>) {
                return {{"type", "set_entry_arg"}, {"robot", b.robot}, {"index", b.index}, {"value", b.value}};
            } else {
                return {{"type", "force_release"}, {"robot", b.robot}};
            }
        },
        e.body);
    out["at_tick"] = e.at_tick;
    return out;
}

NoiseConfig noise_from_json(const json& j) {
    return guarded([&] {
        NoiseConfig n;
        if (j.is_null()) return n;
        n.exec_p = j.value("exec_p", 0.0);
        n.sense_sigma = j.value("sense_sigma", 0.0);
        if (j.contains("heading_sigma")) n.heading_sigma = j.at("heading_sigma").get<double>();
        if (!(n.exec_p >= 0 && n.exec_p <= 1)) schema("exec_p must be in [0, 1]");
        if (!(n.sense_sigma >= 0) || n.heading_sigma_or_default() < 0) schema("noise sigmas must be >= 0");
        return n;
    });
}

json noise_to_json(const NoiseConfig& n) {
    json j{{"exec_p", n.exec_p}, {"sense_sigma", n.sense_sigma}};
    if (n.heading_sigma) j["heading_sigma"] = *n.heading_sigma;
    return j;
}

}  // namespace tr::botworld
