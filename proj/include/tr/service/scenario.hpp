#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tr/botworld/world.hpp"
#include "tr/lang/ast.hpp"
#include "tr/runtime/machine.hpp"

namespace tr::service {

/// File, schema or program errors in a scenario (exit status 1).
class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Scenario {
    botworld::World world;
    std::shared_ptr<const lang::ProgramLibrary> library;
    std::string program_source;
    std::map<std::string, std::string> entries;  // robot id -> entry action source
    std::uint64_t ticks = 1000;
    std::uint64_t seed = 0;
    botworld::NoiseConfig noise;
    std::vector<botworld::Event> events;
    runtime::MachineConfig runtime;
};

/// Scenario document:
///   {"world": {...} | "world_file": "w.json",
///    "program_file": "prog.tr" | "program_source": "...",
///    "entry": "goto(point(10, 10))" | {"r1": "...", ...},
///    "ticks": N, "seed": N, "noise": {"exec_p", "sense_sigma", "heading_sigma"},
///    "events": [...], "runtime": {"max_depth": N, "tolerances": {"angle": [in, out], ...}}}
/// Relative paths resolve against `base_dir`.
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& file);

/// Parses, declares the world's builtins and validates; ScenarioError with
/// every diagnostic on failure.
std::shared_ptr<const lang::ProgramLibrary> load_library(const std::string& source, const std::string& origin);

std::string read_text_file(const std::filesystem::path& file);

}  // namespace tr::service
