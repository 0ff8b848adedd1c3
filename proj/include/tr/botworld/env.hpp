#pragma once

#include <string>

#include "tr/botworld/world.hpp"
#include "tr/runtime/value.hpp"

namespace tr::botworld {

/// |heading - course(position, bar center)|, in (0, pi].
double facing_measure(Vec2 position, double heading, const Bar& bar);

/// Distance from `position` to the bar's perpendicular bisector.
double midline_distance(Vec2 position, const Bar& bar);

/// Angular distance from the heading ray to the zone on the robot's side of
/// the bar: the bisector points between zone_min and zone_max from the
/// center. Zero when the ray hits the zone.
double zone_measure(Vec2 position, double heading, const Bar& bar, const Params& params);

/// One robot's view of the world for a single tick. Position and heading
/// carry the sense noise drawn at construction; everything else is exact.
class RobotEnv : public runtime::EnvProvider {
  public:
    RobotEnv(const World& world, std::string robot, Vec2 position, double heading);

    /// Draws three normals (x, y, heading) from `rng`, even when the sigmas are 0.
    static RobotEnv sense(const World& world, const std::string& robot, const NoiseConfig& noise, Rng& rng);

    const runtime::SymbolTable& symbols() const override;
    runtime::Sensed resolve(std::string_view symbol, std::span<const runtime::Value> args) override;

    Vec2 position() const { return position_; }
    double heading() const { return heading_; }

  private:
    const World& world_;
    std::string robot_;
    Vec2 position_;
    double heading_;
};

/// Sensed symbols and primitives this world understands, with arities.
const runtime::SymbolTable& sensed_symbols();
const runtime::SymbolTable& primitive_actions();

/// Adds the world's sense and primitive declarations to `lib` (existing
/// declarations with the same name are replaced).
void declare_builtins(lang::ProgramLibrary& lib);

}  // namespace tr::botworld
