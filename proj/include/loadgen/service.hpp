#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "loadgen/analyzer.hpp"
#include "loadgen/json_codec.hpp"
#include "loadgen/load_engine.hpp"
#include "loadgen/wire_sim.hpp"

namespace loadgen {

enum class RunState { planned, running, completed, failed, stopped };
enum class RunMode { simulate, pcap, live };

std::string_view to_string(RunState state) noexcept;
std::string_view to_string(RunMode mode) noexcept;
RunState parse_run_state(std::string_view text);
RunMode parse_run_mode(std::string_view text);

struct RunRecord {
    std::string run_id;
    LoadSpec spec;
    TransmissionPlan plan;
    RunState state = RunState::planned;
    std::optional<RunMode> mode;
    std::int64_t frames_sent = 0;
    std::int64_t elapsed_ns = 0;
    std::string created_at;
    std::optional<std::string> started_at;
    std::optional<std::string> ended_at;
    /// Capture report with its verdict, once a run has finished.
    std::optional<Json> report;
    std::string error;
};

Json record_to_json(const RunRecord& record);
RunRecord record_from_json(const Json& json);

struct ServiceConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    std::filesystem::path data_dir = "loadgen-data";
    std::string auth_token;
    /// Relative period and load tolerance used to verify live runs.
    double live_period_fraction = 0.05;

    /// Reads a JSON config file (keys: listen, data_dir, auth_token,
    /// live_period_fraction), then applies LOADGEN_LISTEN, LOADGEN_DATA_DIR
    /// and LOADGEN_AUTH_TOKEN from the environment.
    static ServiceConfig load(const std::optional<std::filesystem::path>& file);
};

/// Owns every run from planning to its journaled final state.
///
/// Records are appended to `<data_dir>/runs.jsonl` on every state change;
/// the last line per run id wins on reload. Captures for pcap-mode runs are
/// kept under `<data_dir>/captures/`.
class RunManager {
public:
    explicit RunManager(std::filesystem::path data_dir, double live_period_fraction = 0.05);
    ~RunManager();

    RunManager(const RunManager&) = delete;
    RunManager& operator=(const RunManager&) = delete;

    RunRecord create_run(const Json& spec_json);
    RunRecord start_run(const std::string& run_id, RunMode mode);
    RunRecord get_run(const std::string& run_id) const;
    std::vector<RunRecord> list_runs() const;
    RunRecord stop_run(const std::string& run_id);

    /// Blocks until the run leaves the running state.
    RunRecord wait_run(const std::string& run_id);

    std::optional<std::filesystem::path> capture_path(const std::string& run_id) const;
    const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

    /// Stops live runs and waits for their final records to be journaled.
    void shutdown();

private:
    struct Entry {
        RunRecord record;
        std::unique_ptr<LiveRun> live;
        std::shared_future<void> finished;
    };

    void load_journal();
    void append_journal(const RunRecord& record);
    std::shared_ptr<Entry> find(const std::string& run_id) const;
    RunRecord snapshot(const Entry& entry) const;
    void acquire_port(const std::string& port, const std::string& run_id);
    void run_offline(const std::shared_ptr<Entry>& entry, RunMode mode);
    void finalize_live(const std::shared_ptr<Entry>& entry);

    std::filesystem::path data_dir_;
    double live_period_fraction_;
    mutable std::mutex mu_;
    std::mutex journal_mu_;
    std::map<std::string, std::shared_ptr<Entry>> runs_;
    std::vector<std::string> order_;
    std::map<std::string, std::string> port_owner_;
    std::vector<std::thread> watchers_;
};

std::string utc_timestamp();

}  // namespace loadgen
