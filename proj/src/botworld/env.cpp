#include "tr/botworld/env.hpp"

#include <cmath>

namespace tr::botworld {

using runtime::ErrorKind;
using runtime::RuntimeError;
using runtime::Sensed;
using runtime::Value;

double facing_measure(Vec2 position, double heading, const Bar& bar) {
    Vec2 c = bar.center();
    if (distance(position, c) <= 1e-9) return 0.0;
    return std::abs(lang::normalize_angle(heading - std::atan2(c.y - position.y, c.x - position.x)));
}

double midline_distance(Vec2 position, const Bar& bar) {
    Vec2 axis = bar.q - bar.p;
    if (norm(axis) == 0.0) return 0.0;
    return std::abs(dot(position - bar.center(), unit(axis)));
}

namespace {

/// Unit normal of the bar pointing to the side `position` is on (left if on the line).
Vec2 side_normal(Vec2 position, const Bar& bar) {
    Vec2 n = perp(unit(bar.q - bar.p));
    return dot(position - bar.center(), n) < 0 ? -1.0 * n : n;
}

}  // namespace

double zone_measure(Vec2 position, double heading, const Bar& bar, const Params& params) {
    const Vec2 n = side_normal(position, bar);
    const Vec2 z1 = bar.center() + params.zone_min * n;
    const Vec2 z2 = bar.center() + params.zone_max * n;
    if (point_segment_distance(position, z1, z2) <= 1e-9) return 0.0;
    const double a1 = std::atan2(z1.y - position.y, z1.x - position.x);
    const double a2 = std::atan2(z2.y - position.y, z2.x - position.x);
    const double span = lang::normalize_angle(a2 - a1);
    const double h = lang::normalize_angle(heading - a1);
    const bool inside = span >= 0 ? (h >= 0 && h <= span) : (h <= 0 && h >= span);
    if (inside) return 0.0;
    return std::min(std::abs(h), std::abs(lang::normalize_angle(heading - a2)));
}

RobotEnv::RobotEnv(const World& world, std::string robot, Vec2 position, double heading)
    : world_(world), robot_(std::move(robot)), position_(position), heading_(lang::normalize_angle(heading)) {}

RobotEnv RobotEnv::sense(const World& world, const std::string& robot, const NoiseConfig& noise, Rng& rng) {
    const Robot& r = world.robot(robot);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double nx = gauss(rng);
    const double ny = gauss(rng);
    const double nh = gauss(rng);
    Vec2 p = r.position + noise.sense_sigma * Vec2{nx, ny};
    return RobotEnv(world, robot, p, r.heading + noise.heading_sigma_or_default() * nh);
}

const runtime::SymbolTable& sensed_symbols() {
    static const runtime::SymbolTable table = {
        {"position", 0},      {"heading", 0},          {"course", 2},         {"clear-path", 2},
        {"new-point", 2},     {"is-grabbing", 1},      {"facing-bar", 1},     {"at-bar-center", 1},
        {"on-bar-midline", 1}, {"facing-midline-zone", 1},
    };
    return table;
}

const runtime::SymbolTable& primitive_actions() {
    static const runtime::SymbolTable table = {{"move", 0}, {"rotate", 0}, {"grab-bar", 1}, {"release-bar", 0}};
    return table;
}

void declare_builtins(lang::ProgramLibrary& lib) {
    for (const auto& [name, arity] : sensed_symbols()) lib.declare_env(name, arity);
    for (const auto& [name, arity] : primitive_actions()) lib.declare_primitive(name, arity);
}

const runtime::SymbolTable& RobotEnv::symbols() const { return sensed_symbols(); }

namespace {

[[noreturn]] void env_error(std::string_view symbol, const std::string& why) {
    throw RuntimeError(ErrorKind::EnvError, std::string(symbol) + ": " + why);
}

Vec2 point_arg(std::string_view symbol, std::span<const Value> args, std::size_t i) {
    if (const auto* p = std::get_if<Vec2>(&args[i])) return *p;
    env_error(symbol, "argument " + std::to_string(i + 1) + " must be a Point, got " + runtime::kind_name(args[i]));
}

}  // namespace

Sensed RobotEnv::resolve(std::string_view symbol, std::span<const Value> args) {
    auto it = sensed_symbols().find(symbol);
    if (it == sensed_symbols().end()) env_error(symbol, "unknown symbol");
    if (args.size() != it->second) {
        env_error(symbol, "takes " + std::to_string(it->second) + " argument(s), got " + std::to_string(args.size()));
    }
    const Params& params = world_.params;
    const double rho = world_.robot(robot_).radius;
    try {
        if (symbol == "position") return Value{position_};
        if (symbol == "heading") return Value{runtime::Angle{heading_}};
        if (symbol == "course") return Value{runtime::Angle{course(point_arg(symbol, args, 0), point_arg(symbol, args, 1))}};
        if (symbol == "clear-path") return Value{clear_path(world_, point_arg(symbol, args, 0), point_arg(symbol, args, 1), rho)};
        if (symbol == "new-point") return Value{new_point(world_, point_arg(symbol, args, 0), point_arg(symbol, args, 1), rho)};
    } catch (const WorldError& e) {
        env_error(symbol, e.what());
    }

    // The remaining symbols are predicates about one bar.
    const auto* ref = std::get_if<runtime::ObjectRef>(&args[0]);
    if (!ref) env_error(symbol, std::string("argument must be a bar reference, got ") + runtime::kind_name(args[0]));
    const Bar* bar = world_.find_bar(ref->id);
    if (!bar) env_error(symbol, "UnknownObject: no bar '" + ref->id + "'");

    if (symbol == "is-grabbing") return Value{world_.holder_of(bar->id) == robot_};
    if (symbol == "facing-bar") return runtime::Graded{facing_measure(position_, heading_, *bar), params.facing};
    if (symbol == "at-bar-center") {
        return runtime::Graded{distance(position_, bar->center()),
                               {params.center.enter * params.reach, params.center.exit * params.reach}};
    }
    if (symbol == "on-bar-midline") return runtime::Graded{midline_distance(position_, *bar), params.midline};
    return runtime::Graded{zone_measure(position_, heading_, *bar, params), params.facing};
}

}  // namespace tr::botworld
