#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tr/analysis/analysis.hpp"
#include "tr/lang/parser.hpp"
#include "tr/netcomp/netcomp.hpp"
#include "tr/service/scenario.hpp"
#include "tr/service/server.hpp"
#include "tr/service/simulation.hpp"

using namespace tr;
using nlohmann::json;

namespace {

// 0 ok, 1 bad input, 2 runtime error in a run, 3 a checked property fails.
constexpr int kBadInput = 1;
constexpr int kFails = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("tr");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("TR_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

lang::ProgramLibrary parse_file(const std::string& path) {
    const std::string src = service::read_text_file(path);
    try {
        return lang::parse(src);
    } catch (const lang::ParseError& e) {
        throw service::ScenarioError(path + ": parse failed\n" + lang::format(e.diagnostics()));
    }
}

/// The named program/tree, or the only one in the file.
std::string pick(const lang::ProgramLibrary& lib, const std::string& wanted) {
    if (!wanted.empty()) {
        if (!lib.has_callable(wanted)) throw service::ScenarioError("no program or tree named '" + wanted + "'");
        return wanted;
    }
    if (lib.programs.size() + lib.trees.size() != 1) {
        throw service::ScenarioError("the file defines several programs; choose one with --program");
    }
    return lib.programs.empty() ? lib.trees.begin()->first : lib.programs.begin()->first;
}

json report_json(const analysis::AnalysisReport& r, const analysis::FeatureSet& f) {
    json verdicts = json::array();
    for (const auto& v : r.verdicts) {
        json j{{"rule", v.index}, {"passes", v.passes}, {"detail", v.detail}};
        j["regresses_from"] = v.regresses_from ? json(*v.regresses_from) : json(nullptr);
        j["model"] = v.model ? json(*v.model) : json(nullptr);
        verdicts.push_back(j);
    }
    json out{{"universal", r.universal}, {"complete", r.complete}, {"rules", verdicts}};
    out["counterexample"] = r.counterexample ? json(analysis::format_state(*r.counterexample, f)) : json(nullptr);
    return out;
}

int cmd_check(const std::string& program_file, const std::string& models_file, const std::string& name,
              bool as_json) {
    const lang::ProgramLibrary lib = parse_file(program_file);
    const analysis::ModelSet models = analysis::models_from_json(service::read_text_file(models_file));
    const std::string target = pick(lib, name);
    analysis::AnalysisReport report;
    if (const auto* p = lib.find_program(target)) {
        report = analysis::check_universal(analysis::to_propositional(*p, models.features), models);
    } else {
        report = analysis::check_tree(analysis::to_propositional(*lib.find_tree(target), models.features), models);
    }
    if (as_json) {
        json out = report_json(report, models.features);
        out["program"] = target;
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << target << "\n" << analysis::format_report(report, models.features);
    }
    return report.universal ? 0 : kFails;
}

int cmd_compile_net(const std::string& program_file, const std::string& out_file, const std::string& name,
                    bool verify) {
    const lang::ProgramLibrary lib = parse_file(program_file);
    const std::string target = pick(lib, name);
    const lang::TRProgram* p = lib.find_program(target);
    if (!p) throw netcomp::NetError(netcomp::NetErrorKind::NonConjunctive, "'" + target + "' is a tree");
    const analysis::FeatureSet features = analysis::features_of(*p);
    const netcomp::ThresholdNet net = netcomp::compile(*p, features);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw service::ScenarioError("cannot write '" + out_file + "'");
    out << netcomp::to_json(net) << '\n';
    std::cout << target << ": n=" << net.n << " m=" << net.layer2.size() << " k=" << net.layer3.size() << '\n';
    if (!verify) return 0;
    const netcomp::VerifyResult v = netcomp::verify_equivalence(net, *p, features);
    if (v.equivalent) {
        std::cout << "verify: PASS (" << (1U << net.n) << " inputs)\n";
        return 0;
    }
    std::cout << "verify: FAIL at " << analysis::format_state(*v.counterexample, features) << ": net "
              << v.net_action << ", interpreter " << v.interpreter_action << '\n';
    return kFails;
}

service::Scenario scenario_with(const std::string& file, std::optional<std::uint64_t> seed,
                                std::optional<std::uint64_t> ticks) {
    service::Scenario s = service::load_scenario(file);
    if (seed) s.seed = *seed;
    if (ticks) s.ticks = *ticks;
    return s;
}

int cmd_run(const service::Scenario& s, const std::string& trace_file) {
    service::Simulation sim(s);
    int status;
    if (trace_file == "-") {
        status = service::run_headless(sim, std::cout);
    } else {
        std::ofstream out(trace_file, std::ios::binary);
        if (!out) throw service::ScenarioError("cannot write '" + trace_file + "'");
        status = service::run_headless(sim, out);
    }
    if (status != 0) spdlog::error("run stopped by a runtime error at tick {}", sim.tick());
    return status;
}

int cmd_replay(const service::Scenario& s, const std::string& trace_file) {
    std::ifstream in(trace_file, std::ios::binary);
    if (!in) throw service::ScenarioError("cannot read '" + trace_file + "'");
    const service::ReplayResult r = service::replay(s, in);
    if (r.matches) {
        std::cout << "replay: MATCH (" << r.records << " records)\n";
        return 0;
    }
    std::cout << "replay: MISMATCH after " << r.records << " records\n" << r.detail << '\n';
    return kFails;
}

int cmd_serve(std::uint16_t port, const std::string& scenario_file, double rate) {
    service::ServerOptions opts;
    opts.port = port;
    opts.rate = rate;
    std::optional<service::Scenario> initial;
    if (!scenario_file.empty()) {
        initial = service::load_scenario(scenario_file);
        opts.base_dir = std::filesystem::path(scenario_file).parent_path();
    }
    service::ControlServer server(opts, std::move(initial));
    server.start();
    std::cout << "listening on ws://127.0.0.1:" << server.port() << std::endl;
    boost::asio::io_context ioc;
    boost::asio::signal_set signals(ioc, SIGINT, SIGTERM);
    signals.async_wait([](const boost::system::error_code&, int) {});
    ioc.run();
    server.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Teleo-reactive programs: check, compile, simulate, serve"};
    app.require_subcommand(1);

    std::string program_file, models_file, name, out_file, scenario_file, trace_file;
    bool as_json = false, verify = false;
    std::optional<std::uint64_t> seed, ticks;
    std::uint16_t port = 8080;
    double rate = 50.0;

    auto* check = app.add_subcommand("check", "Check the regression property and completeness");
    check->add_option("file", program_file, "Program file (.tr)")->required();
    check->add_option("--models", models_file, "Action models (JSON)")->required();
    check->add_option("--program", name, "Program or tree name");
    check->add_flag("--json", as_json, "Print the report as JSON");

    auto* net = app.add_subcommand("compile-net", "Compile a propositional program to a threshold network");
    net->add_option("file", program_file, "Program file (.tr)")->required();
    net->add_option("-o,--output", out_file, "Net JSON output")->required();
    net->add_option("--program", name, "Program name");
    net->add_flag("--verify", verify, "Compare with the interpreter on every input");

    auto* run = app.add_subcommand("run", "Run a scenario headless and write a JSONL trace");
    run->add_option("scenario", scenario_file, "Scenario file (JSON)")->required();
    run->add_option("--trace", trace_file, "Trace output, - for stdout")->required();
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--ticks", ticks, "Override the tick count");

    auto* rep = app.add_subcommand("replay", "Re-run a scenario and compare with a recorded trace");
    rep->add_option("scenario", scenario_file, "Scenario file (JSON)")->required();
    rep->add_option("--trace", trace_file, "Recorded trace")->required();
    rep->add_option("--seed", seed, "Override the scenario seed");
    rep->add_option("--ticks", ticks, "Override the tick count");

    auto* serve = app.add_subcommand("serve", "Serve the control protocol over WebSocket");
    serve->add_option("--port", port, "TCP port");
    serve->add_option("--scenario", scenario_file, "Scenario to load at startup");
    serve->add_option("--rate", rate, "Ticks per second while running");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*check) return cmd_check(program_file, models_file, name, as_json);
        if (*net) return cmd_compile_net(program_file, out_file, name, verify);
        if (*run) return cmd_run(scenario_with(scenario_file, seed, ticks), trace_file);
        if (*rep) return cmd_replay(scenario_with(scenario_file, seed, ticks), trace_file);
        if (*serve) return cmd_serve(port, scenario_file, rate);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    }
    return 0;
}
