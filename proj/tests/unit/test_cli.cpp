#include <doctest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" STOKOLMO_CLI "' " + args;
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string model(const std::string& name) { return std::string("'" STOKOLMO_MODELS_DIR "/") + name + ".json'"; }

}  // namespace

TEST_CASE("classify prints a persistent verdict") {
    const Run r = run_cli("classify " + model("lv_coexist"));
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["verdict"]["kind"] == "Persistent");
    CHECK(j["command"] == "classify");
    CHECK(j["model"]["n"] == 2);
}

TEST_CASE("check reports failed tightness without failing") {
    const Run r = run_cli("check " + model("coop_blowup"));
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["assumptions"]["tightness"]["status"] == "fail");
}

TEST_CASE("input errors exit with 2 and one JSON diagnostic") {
    const Run r = run_cli("classify /nonexistent/missing.json 2>&1 >/dev/null");
    CHECK(r.code == 2);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["error"] == "file");

    const Run bad = run_cli("simulate " + model("lv_coexist") + " --x0 1,2,3 2>&1 >/dev/null");
    CHECK(bad.code == 2);
    CHECK(nlohmann::json::parse(bad.out)["error"] == "argument");

    CHECK(run_cli("frobnicate 2>/dev/null").code == 2);
}

TEST_CASE("inconclusive verdicts exit with 1") {
    char path[] = "/tmp/stokolmo-cli-XXXXXX";
    const int fd = mkstemp(path);
    REQUIRE(fd >= 0);
    const std::string text =
        R"({"n": 2, "lv": {"a": [0.5, 3], "B": [[-2, -1], [-1, -2]], "g": [1, 1]}, "sigma": [[1,0],[0,1]]})";
    REQUIRE(write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size()));
    close(fd);
    CHECK(run_cli(std::string("classify ") + path + " >/dev/null").code == 1);
    std::remove(path);
}

TEST_CASE("simulate writes CSV") {
    const Run r = run_cli("simulate " + model("logistic") + " --t 1 --dt 0.01 --format csv");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("t,x1,flags\n", 0) == 0);
}

TEST_CASE("verify output does not depend on the thread count") {
    const std::string args = "verify " + model("lv_extinction") + " --t 20 --dt 0.01 --paths 16 --seed 9";
    const Run one = run_cli(args, "STOKOLMO_THREADS=1");
    const Run four = run_cli(args, "STOKOLMO_THREADS=4");
    CHECK(one.code == 0);
    CHECK(one.out == four.out);
    CHECK(nlohmann::json::parse(one.out)["verification"]["status"] == "PASSED");
}

TEST_CASE("food chain comparison") {
    const Run r = run_cli("foodchain " + model("food_chain_apex_extinct") + " --compare");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["verdict"]["kind"] == "Extinction");
}
