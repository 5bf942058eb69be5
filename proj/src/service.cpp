#include "loadgen/service.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>

#include "loadgen/error.hpp"

namespace loadgen {

std::string_view to_string(RunState state) noexcept {
    switch (state) {
        case RunState::planned: return "planned";
        case RunState::running: return "running";
        case RunState::completed: return "completed";
        case RunState::failed: return "failed";
        case RunState::stopped: return "stopped";
    }
    return "unknown";
}

std::string_view to_string(RunMode mode) noexcept {
    switch (mode) {
        case RunMode::simulate: return "simulate";
        case RunMode::pcap: return "pcap";
        case RunMode::live: return "live";
    }
    return "unknown";
}

RunState parse_run_state(std::string_view text) {
    for (auto s : {RunState::planned, RunState::running, RunState::completed, RunState::failed, RunState::stopped}) {
        if (to_string(s) == text) return s;
    }
    throw Error(ErrorCode::validation_error, "unknown run state '" + std::string(text) + "'", "state");
}

RunMode parse_run_mode(std::string_view text) {
    if (text == "sim") return RunMode::simulate;
    for (auto m : {RunMode::simulate, RunMode::pcap, RunMode::live}) {
        if (to_string(m) == text) return m;
    }
    throw Error(ErrorCode::validation_error, "mode must be simulate, pcap or live", "mode");
}

std::string utc_timestamp() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto secs = system_clock::to_time_t(now);
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    const auto n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char frac[8];
    std::snprintf(frac, sizeof frac, ".%03dZ", static_cast<int>(ms));
    return std::string(buf, n) + frac;
}

namespace {

std::string new_run_id() {
    thread_local std::mt19937_64 gen{std::random_device{}()};
    using namespace std::chrono;
    const auto secs = system_clock::to_time_t(system_clock::now());
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d%02d%02dT%02d%02d%02dZ-%08llx", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<unsigned long long>(gen() & 0xFFFFFFFFu));
    return buf;
}

Json optional_text(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<std::string> text_or_null(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

Json finished_report(const CaptureReport& report, const Verdict& verdict) {
    auto j = report_to_json(report);
    j["verdict"] = verdict_to_json(verdict);
    return j;
}

}  // namespace

Json record_to_json(const RunRecord& r) {
    Json j;
    j["run_id"] = r.run_id;
    j["state"] = to_string(r.state);
    j["mode"] = r.mode ? Json(std::string(to_string(*r.mode))) : Json(nullptr);
    j["spec"] = spec_to_json(r.spec);
    j["plan"] = plan_to_json(r.plan);
    j["frames_sent"] = r.frames_sent;
    j["elapsed_ns"] = r.elapsed_ns;
    j["created_at"] = r.created_at;
    j["started_at"] = optional_text(r.started_at);
    j["ended_at"] = optional_text(r.ended_at);
    j["report"] = r.report ? *r.report : Json(nullptr);
    j["error"] = r.error;
    return j;
}

RunRecord record_from_json(const Json& j) {
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.state = parse_run_state(j.at("state").get<std::string>());
    if (!j.at("mode").is_null()) r.mode = parse_run_mode(j.at("mode").get<std::string>());
    r.spec = spec_from_json(j.at("spec"));
    r.plan = make_plan(r.spec);
    r.frames_sent = j.at("frames_sent").get<std::int64_t>();
    r.elapsed_ns = j.value("elapsed_ns", std::int64_t{0});
    r.created_at = j.value("created_at", std::string{});
    r.started_at = text_or_null(j, "started_at");
    r.ended_at = text_or_null(j, "ended_at");
    if (j.contains("report") && !j.at("report").is_null()) r.report = j.at("report");
    r.error = j.value("error", std::string{});
    return r;
}

ServiceConfig ServiceConfig::load(const std::optional<std::filesystem::path>& file) {
    ServiceConfig cfg;
    auto apply_listen = [&](const std::string& listen) {
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) {
            throw Error(ErrorCode::invalid_argument, "listen must be host:port, got '" + listen + "'", "listen");
        }
        cfg.listen_host = listen.substr(0, colon);
        try {
            cfg.listen_port = std::stoi(listen.substr(colon + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_argument, "invalid listen port in '" + listen + "'", "listen");
        }
    };
    if (file) {
        std::ifstream in(*file);
        if (!in) throw Error(ErrorCode::invalid_argument, "cannot read config '" + file->string() + "'");
        Json j;
        try {
            j = Json::parse(in);
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::invalid_argument, "config '" + file->string() + "': " + e.what());
        }
        if (j.contains("listen")) apply_listen(j.at("listen").get<std::string>());
        if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
        if (j.contains("auth_token")) cfg.auth_token = j.at("auth_token").get<std::string>();
        if (j.contains("live_period_fraction")) cfg.live_period_fraction = j.at("live_period_fraction").get<double>();
    }
    if (const char* v = std::getenv("LOADGEN_LISTEN")) apply_listen(v);
    if (const char* v = std::getenv("LOADGEN_DATA_DIR")) cfg.data_dir = v;
    if (const char* v = std::getenv("LOADGEN_AUTH_TOKEN")) cfg.auth_token = v;
    return cfg;
}

// ---------------------------------------------------------------------------

RunManager::RunManager(std::filesystem::path data_dir, double live_period_fraction)
    : data_dir_(std::move(data_dir)), live_period_fraction_(live_period_fraction) {
    std::filesystem::create_directories(data_dir_ / "captures");
    load_journal();
}

RunManager::~RunManager() { shutdown(); }

void RunManager::shutdown() {
    std::vector<std::shared_future<void>> pending;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, entry] : runs_) {
            if (entry->live && entry->record.state == RunState::running) {
                entry->live->request_stop();
                pending.push_back(entry->finished);
            }
        }
    }
    for (auto& f : pending) f.wait();
    std::vector<std::thread> watchers;
    {
        std::lock_guard lock(mu_);
        watchers.swap(watchers_);
    }
    for (auto& t : watchers) {
        if (t.joinable()) t.join();
    }
}

void RunManager::load_journal() {
    std::ifstream in(data_dir_ / "runs.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RunRecord record;
        try {
            record = record_from_json(Json::parse(line));
        } catch (const std::exception&) {
            continue;  // torn trailing write
        }
        auto& slot = runs_[record.run_id];
        if (!slot) {
            slot = std::make_shared<Entry>();
            order_.push_back(record.run_id);
        }
        slot->record = std::move(record);
    }
    for (auto& id : order_) {
        auto& rec = runs_[id]->record;
        if (rec.state == RunState::running) {
            rec.state = RunState::failed;
            rec.error = "service restarted while the run was active";
            rec.ended_at = utc_timestamp();
            append_journal(rec);
        }
    }
}

void RunManager::append_journal(const RunRecord& record) {
    const auto line = record_to_json(record).dump();
    std::lock_guard lock(journal_mu_);
    std::ofstream out(data_dir_ / "runs.jsonl", std::ios::app);
    out << line << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::sink_write, "failed appending to run journal");
}

std::shared_ptr<RunManager::Entry> RunManager::find(const std::string& run_id) const {
    std::lock_guard lock(mu_);
    const auto it = runs_.find(run_id);
    if (it == runs_.end()) throw Error(ErrorCode::unknown_run, "no run with id '" + run_id + "'", "run_id");
    return it->second;
}

RunRecord RunManager::snapshot(const Entry& entry) const {
    RunRecord r = entry.record;
    if (entry.live && r.state == RunState::running) {
        const auto p = entry.live->progress();
        r.frames_sent = p.frames_sent;
        r.elapsed_ns = p.elapsed_ns;
    }
    return r;
}

RunRecord RunManager::create_run(const Json& spec_json) {
    auto entry = std::make_shared<Entry>();
    auto& r = entry->record;
    r.spec = spec_from_json(spec_json);
    r.plan = make_plan(r.spec);
    r.created_at = utc_timestamp();
    {
        std::lock_guard lock(mu_);
        do {
            r.run_id = new_run_id();
        } while (runs_.count(r.run_id));
        runs_[r.run_id] = entry;
        order_.push_back(r.run_id);
    }
    append_journal(r);
    return r;
}

void RunManager::acquire_port(const std::string& port, const std::string& run_id) {
    const auto it = port_owner_.find(port);
    if (it != port_owner_.end()) {
        throw Error(ErrorCode::port_busy, "port '" + port + "' is in use by run " + it->second, "port");
    }
    port_owner_[port] = run_id;
}

RunRecord RunManager::start_run(const std::string& run_id, RunMode mode) {
    auto entry = find(run_id);
    RunRecord started;
    {
        std::lock_guard lock(mu_);
        auto& r = entry->record;
        if (r.state != RunState::planned) {
            throw Error(ErrorCode::invalid_state, "run " + run_id + " is " + std::string(to_string(r.state)));
        }
        acquire_port(r.spec.port, run_id);
        if (mode == RunMode::live) {
            try {
                entry->live = transmit(r.plan, r.spec.frame, open_port(r.spec.port));
            } catch (...) {
                port_owner_.erase(r.spec.port);
                throw;
            }
            std::promise<void> done;
            entry->finished = done.get_future().share();
            watchers_.emplace_back([this, entry, done = std::move(done)]() mutable {
                finalize_live(entry);
                done.set_value();
            });
        }
        r.state = RunState::running;
        r.mode = mode;
        r.started_at = utc_timestamp();
        started = r;
    }
    append_journal(started);
    if (mode != RunMode::live) run_offline(entry, mode);
    return get_run(run_id);
}

void RunManager::run_offline(const std::shared_ptr<Entry>& entry, RunMode mode) {
    // Record and plan are immutable while running, so no lock is needed to read them.
    const auto& spec = entry->record.spec;
    const auto& plan = entry->record.plan;
    std::optional<Json> report;
    std::string error;
    try {
        const auto trace = execute(plan, spec.frame, 0);
        if (mode == RunMode::pcap) {
            write_pcap_file(trace, (data_dir_ / "captures" / (entry->record.run_id + ".pcap")).string());
        }
        const auto observations = observe(trace);
        const auto measured = measure(observations, plan.rate, burst_split_threshold(plan));
        report = finished_report(measured, verify(measured, plan));
    } catch (const std::exception& e) {
        error = e.what();
    }
    RunRecord done;
    {
        std::lock_guard lock(mu_);
        auto& r = entry->record;
        r.state = error.empty() ? RunState::completed : RunState::failed;
        r.frames_sent = error.empty() ? plan.frames_total : 0;
        r.elapsed_ns = error.empty() ? plan.elapsed_ns : 0;
        r.report = std::move(report);
        r.error = std::move(error);
        r.ended_at = utc_timestamp();
        port_owner_.erase(r.spec.port);
        done = r;
    }
    append_journal(done);
}

void RunManager::finalize_live(const std::shared_ptr<Entry>& entry) {
    const auto progress = entry->live->wait();
    const auto& plan = entry->live->plan();
    std::optional<Json> report;
    if (progress.frames_sent > 0) {
        try {
            const auto observations = observe(*entry->live);
            const auto measured = measure(observations, plan.rate, live_split_threshold(plan));
            const Tolerance tol{live_period_fraction_ * static_cast<double>(plan.period_ns),
                                live_period_fraction_ * plan.achieved_load.to_double()};
            report = finished_report(measured, verify(measured, plan, tol));
        } catch (const std::exception&) {
            report.reset();
        }
    }
    RunRecord done;
    {
        std::lock_guard lock(mu_);
        auto& r = entry->record;
        switch (progress.outcome) {
            case RunOutcome::completed: r.state = RunState::completed; break;
            case RunOutcome::stopped: r.state = RunState::stopped; break;
            default: r.state = RunState::failed; break;
        }
        r.frames_sent = progress.frames_sent;
        r.elapsed_ns = progress.elapsed_ns;
        r.error = progress.error;
        r.report = std::move(report);
        r.ended_at = utc_timestamp();
        port_owner_.erase(r.spec.port);
        done = r;
    }
    try {
        append_journal(done);
    } catch (const Error&) {
        // The in-memory record stays authoritative; the next change retries.
    }
}

RunRecord RunManager::get_run(const std::string& run_id) const {
    auto entry = find(run_id);
    std::lock_guard lock(mu_);
    return snapshot(*entry);
}

std::vector<RunRecord> RunManager::list_runs() const {
    std::lock_guard lock(mu_);
    std::vector<RunRecord> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(snapshot(*runs_.at(id)));
    return out;
}

RunRecord RunManager::stop_run(const std::string& run_id) {
    auto entry = find(run_id);
    std::shared_future<void> finished;
    {
        std::lock_guard lock(mu_);
        if (entry->record.state != RunState::running || !entry->live) {
            throw Error(ErrorCode::not_running, "run " + run_id + " is " + std::string(to_string(entry->record.state)));
        }
        entry->live->request_stop();
        finished = entry->finished;
    }
    finished.wait();
    return get_run(run_id);
}

RunRecord RunManager::wait_run(const std::string& run_id) {
    auto entry = find(run_id);
    std::shared_future<void> finished;
    {
        std::lock_guard lock(mu_);
        if (entry->live) finished = entry->finished;
    }
    if (finished.valid()) finished.wait();
    return get_run(run_id);
}

std::optional<std::filesystem::path> RunManager::capture_path(const std::string& run_id) const {
    auto entry = find(run_id);
    auto path = data_dir_ / "captures" / (run_id + ".pcap");
    if (std::filesystem::exists(path)) return path;
    return std::nullopt;
}

}  // namespace loadgen
