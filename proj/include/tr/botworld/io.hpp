#pragma once

#include "json.hpp"
#include "tr/botworld/world.hpp"

namespace tr::botworld {

/// World document: {params, robots[], bars[], obstacles[]}; angles in radians,
/// points as [x, y]. Throws InvalidWorld on schema errors.
World world_from_json(const nlohmann::json& j);
nlohmann::json world_to_json(const World& w);

nlohmann::json robot_to_json(const Robot& r);
nlohmann::json bar_to_json(const Bar& b);
nlohmann::json obstacle_to_json(const Obstacle& o);

/// {"at_tick": N, "type": "remove_object", "id": "O1"} and friends.
Event event_from_json(const nlohmann::json& j);
nlohmann::json event_to_json(const Event& e);

NoiseConfig noise_from_json(const nlohmann::json& j);
nlohmann::json noise_to_json(const NoiseConfig& n);

}  // namespace tr::botworld
