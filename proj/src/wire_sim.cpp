#include "loadgen/wire_sim.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <ostream>

#include "loadgen/error.hpp"

namespace loadgen {

Trace execute(const TransmissionPlan& plan, const FrameSpec& frame, std::int64_t t0_ns) {
    Trace trace{plan, frame, t0_ns, {}};
    trace.events.reserve(static_cast<std::size_t>(plan.frames_total));
    std::uint32_t seq = 0;
    for (std::size_t b = 0; b < plan.bursts.size(); ++b) {
        const auto& burst = plan.bursts[b];
        const auto base = t0_ns + burst.start_offset_ns;
        for (std::int64_t j = 0; j < burst.frames; ++j) {
            const auto start = base + j * plan.period_ns;
            trace.events.push_back({seq++, start, start + plan.occupancy_ns, static_cast<std::uint32_t>(b)});
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------

namespace {

void le32(std::uint8_t* out, std::uint32_t v) noexcept {
    for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void le16(std::uint8_t* out, std::uint16_t v) noexcept {
    out[0] = static_cast<std::uint8_t>(v);
    out[1] = static_cast<std::uint8_t>(v >> 8);
}

}  // namespace

PcapWriter::PcapWriter(std::ostream& sink) : sink_(sink) {
    std::uint8_t hdr[kPcapGlobalHeaderBytes]{};
    le32(hdr, kPcapMagicNano);
    le16(hdr + 4, 2);
    le16(hdr + 6, 4);
    // thiszone, sigfigs = 0
    le32(hdr + 16, 65535);  // snaplen
    le32(hdr + 20, 1);      // LINKTYPE_ETHERNET
    put(hdr, sizeof hdr);
}

void PcapWriter::put(const void* data, std::size_t n) {
    sink_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!sink_) throw Error(ErrorCode::sink_write, "failed writing pcap output");
    bytes_ += n;
}

void PcapWriter::write(std::int64_t timestamp_ns, std::span<const std::uint8_t> frame) {
    if (timestamp_ns < 0) throw Error(ErrorCode::invalid_argument, "negative pcap timestamp");
    std::uint8_t rec[kPcapRecordHeaderBytes];
    le32(rec, static_cast<std::uint32_t>(timestamp_ns / 1'000'000'000));
    le32(rec + 4, static_cast<std::uint32_t>(timestamp_ns % 1'000'000'000));
    le32(rec + 8, static_cast<std::uint32_t>(frame.size()));
    le32(rec + 12, static_cast<std::uint32_t>(frame.size()));
    put(rec, sizeof rec);
    put(frame.data(), frame.size());
}

std::uint64_t write_pcap(const Trace& trace, std::ostream& sink) {
    PcapWriter writer(sink);
    for (const auto& ev : trace.events) {
        writer.write(ev.start_ns, trace.wire_bytes(ev));
    }
    sink.flush();
    if (!sink) throw Error(ErrorCode::sink_write, "failed flushing pcap output");
    return writer.bytes_written();
}

std::uint64_t write_pcap_file(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::sink_write, "cannot open '" + path + "' for writing");
    return write_pcap(trace, out);
}

// ---------------------------------------------------------------------------

void wait_until(SteadyClock::time_point deadline) {
    using namespace std::chrono_literals;
    constexpr auto spin_window = 200us;
    auto now = SteadyClock::now();
    if (deadline - now > spin_window) std::this_thread::sleep_until(deadline - spin_window);
    while (SteadyClock::now() < deadline) {
    }
}

VirtualPort::VirtualPort(std::string id) : id_(std::move(id)) {}

void VirtualPort::send(std::span<const std::uint8_t> frame, SteadyClock::time_point not_before) {
    if (!open_.load()) throw Error(ErrorCode::send_failure, "port " + id_ + " is closed");
    wait_until(not_before);
    const auto now = SteadyClock::now();
    std::lock_guard lock(mu_);
    times_.push_back(now);
    if (keep_frames_) frames_.emplace_back(frame.begin(), frame.end());
}

std::size_t VirtualPort::frames_received() const {
    std::lock_guard lock(mu_);
    return times_.size();
}

std::vector<SteadyClock::time_point> VirtualPort::send_times() const {
    std::lock_guard lock(mu_);
    return times_;
}

std::vector<std::vector<std::uint8_t>> VirtualPort::frames() const {
    std::lock_guard lock(mu_);
    return frames_;
}

std::string_view to_string(RunOutcome outcome) noexcept {
    switch (outcome) {
        case RunOutcome::running: return "running";
        case RunOutcome::completed: return "completed";
        case RunOutcome::failed: return "failed";
        case RunOutcome::stopped: return "stopped";
    }
    return "unknown";
}

LiveRun::LiveRun(TransmissionPlan plan, FrameSpec frame, std::shared_ptr<TransmitPort> port)
    : plan_(std::move(plan)), frame_(std::move(frame)), port_(std::move(port)) {
    if (!port_ || !port_->is_open()) {
        throw Error(ErrorCode::port_unavailable, "transmit port is not open");
    }
    offsets_.reserve(static_cast<std::size_t>(std::min<std::int64_t>(plan_.frames_total, 1 << 20)));
    started_ = SteadyClock::now();
    thread_ = std::thread([this] { worker(); });
}

LiveRun::~LiveRun() {
    request_stop();
    if (thread_.joinable()) thread_.join();
}

LiveProgress LiveRun::progress() const {
    std::lock_guard lock(mu_);
    auto snapshot = progress_;
    if (snapshot.outcome == RunOutcome::running) {
        snapshot.elapsed_ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(SteadyClock::now() - started_).count();
    }
    return snapshot;
}

LiveProgress LiveRun::wait() {
    if (thread_.joinable()) thread_.join();
    return progress();
}

std::vector<std::int64_t> LiveRun::send_offsets_ns() const {
    std::lock_guard lock(mu_);
    return offsets_;
}

void LiveRun::worker() {
    using namespace std::chrono;
    auto finish = [this](RunOutcome outcome, std::string error = {}) {
        std::lock_guard lock(mu_);
        progress_.outcome = outcome;
        progress_.error = std::move(error);
        progress_.elapsed_ns = duration_cast<nanoseconds>(SteadyClock::now() - started_).count();
    };

    std::uint32_t seq = 0;
    for (const auto& burst : plan_.bursts) {
        for (std::int64_t j = 0; j < burst.frames; ++j, ++seq) {
            const auto deadline = started_ + nanoseconds(burst.start_offset_ns + j * plan_.period_ns);
            // Long sleeps between bursts stay responsive to stop requests.
            while (deadline - SteadyClock::now() > milliseconds(5)) {
                if (stop_.load()) return finish(RunOutcome::stopped);
                std::this_thread::sleep_for(milliseconds(2));
            }
            if (stop_.load()) return finish(RunOutcome::stopped);
            try {
                const auto bytes = build_frame(frame_, seq);
                port_->send(bytes, deadline);
            } catch (const Error& e) {
                return finish(RunOutcome::failed, std::string(error_name(e.code())) + ": " + e.what());
            }
            const auto offset = duration_cast<nanoseconds>(SteadyClock::now() - started_).count();
            std::lock_guard lock(mu_);
            offsets_.push_back(offset);
            ++progress_.frames_sent;
            progress_.elapsed_ns = offset;
        }
    }
    finish(RunOutcome::completed);
}

std::unique_ptr<LiveRun> transmit(const TransmissionPlan& plan, const FrameSpec& frame,
                                  std::shared_ptr<TransmitPort> port) {
    return std::make_unique<LiveRun>(plan, frame, std::move(port));
}

}  // namespace loadgen
