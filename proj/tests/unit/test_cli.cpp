#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = TR_DATA_DIR;
const std::string kTool = TR_CLI;

struct Result {
    int status = -1;
    std::string out;
};

Result tr(const std::string& args) {
    const std::string command = kTool + " " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

fs::path scratch() {
    fs::path dir = fs::temp_directory_path() / "tr_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("check") {
    Result ok = tr("check " + kData + "/programs/goto_abstract.tr --models " + kData + "/models/goto.json");
    CHECK(ok.status == 0);

    const fs::path swapped = scratch() / "swapped.tr";
    std::ofstream(swapped) << "prog goto-abstract() {\n    at-loc -> nil;\n    T -> rotate;\n    aligned -> move;\n}\n";
    Result bad = tr("check " + swapped.string() + " --models " + kData + "/models/goto.json --json");
    CHECK(bad.status == 3);
    const json report = json::parse(bad.out);
    CHECK(report["universal"] == false);
    CHECK(report["rules"][1]["passes"] == false);  // T -> rotate regresses to nothing above it
    CHECK(report["rules"][2]["passes"] == true);

    CHECK(tr("check " + kData + "/programs/goto_abstract.tr --models " + kData + "/models/none.json").status == 1);
    CHECK(tr("check " + kData + "/programs/bar_grab_abstract.tr --models " + kData + "/models/bar_grab.json").status == 0);
    CHECK(tr("check " + kData + "/programs/goto_tree.tr --models " + kData + "/models/goto.json").status == 0);
}

TEST_CASE("compile-net") {
    const fs::path out = scratch() / "net.json";
    Result r = tr("compile-net " + kData + "/programs/net_example.tr -o " + out.string() + " --verify");
    CHECK(r.status == 0);
    CHECK(r.out.find("verify: PASS") != std::string::npos);
    const json net = json::parse(slurp(out));
    CHECK(net["layer2"].size() == 3);
    CHECK(net["layer3"].size() == 2);

    CHECK(tr("compile-net " + kData + "/programs/navigation.tr --program goto -o " + out.string()).status == 1);
}

TEST_CASE("run and replay") {
    const fs::path a = scratch() / "a.jsonl";
    const fs::path b = scratch() / "b.jsonl";
    CHECK(tr("run " + kData + "/scenarios/goto.json --trace " + a.string()).status == 0);
    CHECK(tr("run " + kData + "/scenarios/goto.json --trace " + b.string()).status == 0);
    const std::string text = slurp(a);
    CHECK(!text.empty());
    CHECK(text == slurp(b));

    std::istringstream lines(text);
    std::string line, last;
    while (std::getline(lines, line)) last = line;
    const json rec = json::parse(last);
    CHECK(rec["robots"][0]["activation"][0]["selected"] == 0);

    Result rep = tr("replay " + kData + "/scenarios/goto.json --trace " + a.string());
    CHECK(rep.status == 0);
    CHECK(rep.out.find("MATCH") != std::string::npos);
    CHECK(tr("replay " + kData + "/scenarios/goto.json --seed 9 --ticks 10 --trace " + a.string()).status == 3);

    const fs::path broken = scratch() / "broken.json";
    std::ofstream(broken) << R"({"world": {"robots": [{"id": "r1", "position": [0, 0]}]},
        "program_file": ")" << kData << R"x(/programs/navigation.tr", "entry": "wander(point(1, 1))"})x";
    CHECK(tr("run " + broken.string() + " --trace " + (scratch() / "c.jsonl").string()).status == 1);
    CHECK(tr("run " + (scratch() / "absent.json").string() + " --trace -").status == 1);
}
