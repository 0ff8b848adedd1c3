#include "tr/service/scenario.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "tr/botworld/env.hpp"
#include "tr/botworld/io.hpp"
#include "tr/lang/parser.hpp"

namespace tr::service {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ScenarioError("cannot read '" + file.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::shared_ptr<const lang::ProgramLibrary> load_library(const std::string& source, const std::string& origin) {
    lang::ProgramLibrary lib;
    try {
        lib = lang::parse(source);
    } catch (const lang::ParseError& e) {
        throw ScenarioError(origin + ": parse failed\n" + lang::format(e.diagnostics()));
    }
    botworld::declare_builtins(lib);
    lang::Diagnostics diags = lang::validate(lib);
    if (!diags.empty()) {
        throw ScenarioError(origin + ": invalid program\n" + lang::format(diags));
    }
    return std::make_shared<const lang::ProgramLibrary>(std::move(lib));
}

namespace {

lang::Tolerance band(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ScenarioError("tolerance must be [enter, exit], got " + j.dump());
    lang::Tolerance t{j[0].get<double>(), j[1].get<double>()};
    if (!(t.enter > 0 && t.exit >= t.enter)) throw ScenarioError("tolerance needs 0 < enter <= exit");
    return t;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir) {
    Scenario s;
    try {
        if (doc.contains("world_file")) {
            s.world = botworld::world_from_json(
                json::parse(read_text_file(resolve(base_dir, doc.at("world_file").get<std::string>()))));
        } else {
            s.world = botworld::world_from_json(doc.at("world"));
        }
        if (s.world.robots.empty()) throw ScenarioError("the world has no robots");

        std::string origin = "program_source";
        if (doc.contains("program_file")) {
            origin = doc.at("program_file").get<std::string>();
            s.program_source = read_text_file(resolve(base_dir, origin));
        } else {
            s.program_source = doc.at("program_source").get<std::string>();
        }
        s.library = load_library(s.program_source, origin);

        const json& entry = doc.at("entry");
        if (entry.is_string()) {
            for (const auto& r : s.world.robots) s.entries[r.id] = entry.get<std::string>();
        } else {
            for (const auto& [robot, e] : entry.items()) {
                (void)s.world.robot(robot);
                s.entries[robot] = e.get<std::string>();
            }
            for (const auto& r : s.world.robots) {
                if (!s.entries.count(r.id)) throw ScenarioError("robot '" + r.id + "' has no entry");
            }
        }
        for (const auto& [robot, e] : s.entries) {
            lang::ActionTerm a = lang::parse_action(e, *s.library);
            if (a.kind != lang::ActionTerm::Kind::ProgramCall) {
                throw ScenarioError("entry '" + e + "' of robot '" + robot + "' is not a program or tree");
            }
            try {
                (void)runtime::Machine::init(s.library, std::move(a));
            } catch (const runtime::RuntimeError& err) {
                throw ScenarioError("entry '" + e + "': " + err.what());
            }
        }

        s.ticks = doc.value("ticks", s.ticks);
        s.seed = doc.value("seed", s.seed);
        s.noise = botworld::noise_from_json(doc.value("noise", json()));
        for (const auto& e : doc.value("events", json::array())) s.events.push_back(botworld::event_from_json(e));

        const json rt = doc.value("runtime", json::object());
        s.runtime.max_depth = rt.value("max_depth", s.runtime.max_depth);
        if (s.runtime.max_depth == 0) throw ScenarioError("max_depth must be >= 1");
        const json tol = rt.value("tolerances", json::object());
        if (tol.contains("angle")) s.runtime.tolerances.angle = band(tol.at("angle"));
        if (tol.contains("point")) s.runtime.tolerances.point = band(tol.at("point"));
        if (tol.contains("scalar")) s.runtime.tolerances.scalar = band(tol.at("scalar"));

        // rotate only turns one way: a band no wider than half a step can be skipped over forever.
        const double half_step = s.world.params.omega * s.world.params.dt / 2;
        if (s.runtime.tolerances.angle.enter <= half_step || s.world.params.facing.enter <= half_step) {
            spdlog::warn("angle tolerance {:.4f} rad does not exceed half a rotate step ({:.4f} rad)",
                         std::min(s.runtime.tolerances.angle.enter, s.world.params.facing.enter), half_step);
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario schema: ") + e.what());
    } catch (const botworld::WorldError& e) {
        throw ScenarioError(e.what());
    } catch (const lang::ParseError& e) {
        throw ScenarioError(std::string("entry: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    json doc;
    try {
        doc = json::parse(read_text_file(file));
    } catch (const json::exception& e) {
        throw ScenarioError(file.string() + ": " + e.what());
    }
    return scenario_from_json(doc, file.parent_path());
}

}  // namespace tr::service
