#include <doctest.h>

#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "loadgen/cli.hpp"
#include "loadgen/http_api.hpp"
#include "loadgen/json_codec.hpp"
#include "loadgen/service.hpp"

using namespace loadgen;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "loadgen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("loadgen-cli-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

const std::vector<std::string> kShortFrames{"--load", "25", "--frame-size", "60", "--duration", "20ms", "--rate", "100M"};
const std::vector<std::string> kLongFrames{"--load", "25", "--frame-size", "1514", "--frames", "40", "--rate", "100M"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// A TCP port that was free a moment ago.
int free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ::close(fd);
    return ntohs(addr.sin_port);
}

// The real binary, for behavior that needs its own process.
struct ServeProcess {
    pid_t pid = -1;
    ServeProcess(const std::string& config, const std::string& log) {
        pid = ::fork();
        if (pid == 0) {
            if (!std::freopen(log.c_str(), "w", stderr)) std::_Exit(127);
            ::execl(LOADGEN_BIN, LOADGEN_BIN, "serve", "--config", config.c_str(), static_cast<char*>(nullptr));
            std::_Exit(127);
        }
    }
    int wait_exit(std::chrono::seconds limit = std::chrono::seconds(10)) {
        const auto deadline = std::chrono::steady_clock::now() + limit;
        int status = 0;
        while (std::chrono::steady_clock::now() < deadline) {
            if (::waitpid(pid, &status, WNOHANG) == pid) {
                pid = -1;
                return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        return -1;
    }
    ~ServeProcess() {
        if (pid > 0) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
        }
    }
};

bool wait_healthy(int port) {
    httplib::Client cli("127.0.0.1", port);
    for (int i = 0; i < 300; ++i) {
        if (auto res = cli.Get("/api/health"); res && res->status == 200) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return false;
}

std::string write_config(const TempDir& dir, int port) {
    const auto path = dir.file("config.json");
    std::ofstream(path) << Json{{"listen", "127.0.0.1:" + std::to_string(port)}, {"data_dir", dir.file("data")}}.dump();
    return path;
}

}  // namespace

TEST_CASE("plan prints the long-frame numbers") {
    const auto r = run(concat({"plan"}, kLongFrames));
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("4626 B") != std::string::npos);
    CHECK(r.out.find("492.16us") != std::string::npos);
    CHECK(r.out.find("19.6864ms") != std::string::npos);
}

TEST_CASE("plan prints the short-frame numbers") {
    const auto r = run(concat({"plan"}, kShortFrames));
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("744") != std::string::npos);
    CHECK(r.out.find("1.28us") != std::string::npos);
    const auto j = Json::parse(run(concat({"--format", "json", "plan"}, kShortFrames)).out);
    CHECK(j["frames_total"] == 744);
    CHECK(j["time_deficit_ns"] == 1280);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({"plan", "--load", "0", "--frames", "1"}).code == kExitUsage);
    CHECK(run({"plan", "--load", "25", "--frames", "1", "--duration", "1ms"}).code == kExitUsage);
    CHECK(run({"plan", "--load", "25", "--frames", "1", "--bogus"}).code == kExitUsage);
    CHECK(run({"plan", "--load", "25", "--frame-size", "59", "--frames", "1"}).code == kExitUsage);
    CHECK(run({"plan", "--load", "25"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"--format", "xml", "plan", "--load", "25", "--frames", "1"}).code == kExitUsage);
}

TEST_CASE("plan JSON is byte-identical to the service plan") {
    TempDir dir;
    RunManager runs(dir.path);
    const std::vector<std::pair<std::vector<std::string>, const char*>> cases{
        {kShortFrames, R"({"load_percent":25,"frame_len_p":60,"line_rate":"100M","feature":{"type":"duration","duration":"20ms"}})"},
        {kLongFrames, R"({"load_percent":25,"frame_len_p":1514,"feature":{"type":"frames","frames":40}})"},
        {{"--load", "50", "--frame-size", "1020", "--vlan", "0.0.1", "--bursts", "20", "--burst-interval", "1s",
          "--sleep-interval", "1s"},
         R"({"load_percent":50,"frame_len_p":1020,"vlan":{"pcp":0,"cfi":0,"vid":1},
             "feature":{"type":"burst","bursts":20,"burst_interval":"1s","sleep_interval":"1s"}})"},
    };
    for (const auto& [flags, json] : cases) {
        const auto service_plan = plan_to_json(runs.create_run(Json::parse(json)).plan).dump() + "\n";
        const auto from_flags = run(concat({"--format", "json", "plan"}, flags));
        REQUIRE(from_flags.code == kExitOk);
        CHECK(from_flags.out == service_plan);
        const auto spec_path = dir.file("spec.json");
        std::ofstream(spec_path) << json;
        const auto from_file = run({"--format", "json", "plan", "--spec", spec_path});
        REQUIRE(from_file.code == kExitOk);
        CHECK(from_file.out == service_plan);
    }
}

TEST_CASE("generate sim summarizes the long-frame run") {
    const auto r = run(concat({"--format", "json", "generate", "--mode", "sim"}, kLongFrames));
    CHECK(r.code == kExitOk);
    const auto j = Json::parse(r.out);
    CHECK(j["report"]["frame_count"] == 40);
    CHECK(j["verdict"]["pass"] == true);
}

TEST_CASE("generate pcap writes every burst frame") {
    TempDir dir;
    const auto out = dir.file("bursts.pcap");
    const auto r = run({"generate", "--mode", "pcap", "--out", out, "--load", "50", "--frame-size", "1020", "--vlan", "0.0.1",
                        "--bursts", "20", "--burst-interval", "1s", "--sleep-interval", "1s"});
    CHECK(r.code == kExitOk);
    CHECK(read_pcap_file(out).size() == 119260);
    CHECK(fs::file_size(out) == 24 + 119260ull * (16 + 1024));
    CHECK(run(concat({"generate", "--mode", "pcap"}, kLongFrames)).code == kExitUsage);
}

TEST_CASE("generate live") {
    CHECK(run(concat({"generate", "--mode", "live", "--port", "missing0"}, kShortFrames)).code == kExitPort);
    CHECK(run(concat({"generate", "--mode", "live"}, kShortFrames)).code == kExitUsage);
    const auto r = run(concat({"--format", "json", "generate", "--mode", "live", "--port", "virtual:cli"}, kShortFrames));
    CHECK(r.code == kExitOk);
    CHECK(Json::parse(r.out)["frames_sent"] == 744);
}

TEST_CASE("analyze verdicts and malformed files") {
    TempDir dir;
    const auto pcap = dir.file("short.pcap");
    REQUIRE(run(concat({"generate", "--mode", "pcap", "--out", pcap}, kShortFrames)).code == kExitOk);

    CHECK(run(concat({"analyze", "--pcap", pcap, "--expect"}, kShortFrames)).code == kExitOk);
    auto wrong = kShortFrames;
    wrong[1] = "50";
    const auto fail = run(concat({"analyze", "--pcap", pcap, "--expect"}, wrong));
    CHECK(fail.code == kExitVerifyFailed);
    CHECK(fail.out.find("FAIL") != std::string::npos);

    const auto plain = run({"--format", "json", "analyze", "--pcap", pcap});
    CHECK(plain.code == kExitOk);
    CHECK(Json::parse(plain.out)["report"]["frame_count"] == 744);

    const auto corrupt = dir.file("corrupt.pcap");
    std::ofstream(corrupt) << "this is not a capture file at all";
    CHECK(run({"analyze", "--pcap", corrupt}).code == kExitUsage);
    const auto truncated = dir.file("truncated.pcap");
    {
        std::ifstream in(pcap, std::ios::binary);
        std::string data((std::istreambuf_iterator<char>(in)), {});
        std::ofstream(truncated, std::ios::binary) << data.substr(0, data.size() - 7);
    }
    const auto t = run({"analyze", "--pcap", truncated});
    CHECK(t.code == kExitUsage);
    CHECK(t.err.find("record 743") != std::string::npos);
    CHECK(run({"analyze", "--pcap", dir.file("missing.pcap")}).code == kExitUsage);
}

TEST_CASE("generate is deterministic") {
    TempDir dir;
    const auto a = dir.file("a.pcap"), b = dir.file("b.pcap");
    run(concat({"generate", "--mode", "pcap", "--fill", "random:7", "--out", a}, kLongFrames));
    run(concat({"generate", "--mode", "pcap", "--fill", "random:7", "--out", b}, kLongFrames));
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    CHECK(std::string(std::istreambuf_iterator<char>(fa), {}) == std::string(std::istreambuf_iterator<char>(fb), {}));
}

TEST_CASE("serve answers the short-frame spec and exits cleanly on SIGINT") {
    TempDir dir;
    const int port = free_port();
    ServeProcess proc(write_config(dir, port), dir.file("serve.log"));
    REQUIRE(wait_healthy(port));

    httplib::Client cli("127.0.0.1", port);
    const auto spec = R"({"load_percent":25,"frame_len_p":60,"feature":{"type":"duration","duration_ns":20000000}})";
    auto res = cli.Post("/api/runs", spec, "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    const auto created = Json::parse(res->body);
    CHECK(created["plan"]["frames_total"] == 744);
    const std::string id = created["run_id"];
    CHECK(cli.Post("/api/runs/" + id + "/start?mode=simulate")->status == 200);

    ::kill(proc.pid, SIGINT);
    CHECK(proc.wait_exit() == kExitOk);

    // Everything acknowledged before the signal is on disk.
    RunManager reloaded(dir.path / "data");
    const auto r = reloaded.get_run(id);
    CHECK(r.state == RunState::completed);
    CHECK(r.frames_sent == 744);
}

TEST_CASE("serve on an occupied port exits 4") {
    TempDir dir;
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    REQUIRE(::listen(fd, 1) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ServeProcess proc(write_config(dir, ntohs(addr.sin_port)), dir.file("serve.log"));
    CHECK(proc.wait_exit() == kExitBind);
    ::close(fd);
}
