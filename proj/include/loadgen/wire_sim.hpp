#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "loadgen/frame_model.hpp"
#include "loadgen/load_engine.hpp"

namespace loadgen {

/// One frame on the virtual wire. Timestamps mark the first preamble byte.
struct FrameEvent {
    std::uint32_t seq = 0;
    std::int64_t start_ns = 0;
    std::int64_t end_ns = 0;  // start_ns + E_R
    std::uint32_t burst_index = 0;

    friend bool operator==(const FrameEvent&, const FrameEvent&) = default;
};

/// Result of executing a plan. Frame bytes are regenerated on demand from
/// `frame` and the event's sequence number, so large traces stay small.
struct Trace {
    TransmissionPlan plan;
    FrameSpec frame;
    std::int64_t t0_ns = 0;
    std::vector<FrameEvent> events;

    LineRate rate() const noexcept { return plan.rate; }
    std::vector<std::uint8_t> wire_bytes(const FrameEvent& event) const { return build_frame(frame, event.seq); }
};

/// Lays the plan out on an idealized full-duplex wire starting at t0.
Trace execute(const TransmissionPlan& plan, const FrameSpec& frame, std::int64_t t0_ns = 0);

// ---------------------------------------------------------------------------
// pcap output (nanosecond resolution, little-endian, LINKTYPE_ETHERNET)

inline constexpr std::uint32_t kPcapMagicMicro = 0xA1B2C3D4;
inline constexpr std::uint32_t kPcapMagicNano = 0xA1B23C4D;
inline constexpr std::size_t kPcapGlobalHeaderBytes = 24;
inline constexpr std::size_t kPcapRecordHeaderBytes = 16;

class PcapWriter {
public:
    explicit PcapWriter(std::ostream& sink);

    void write(std::int64_t timestamp_ns, std::span<const std::uint8_t> frame);
    std::uint64_t bytes_written() const noexcept { return bytes_; }

private:
    void put(const void* data, std::size_t n);

    std::ostream& sink_;
    std::uint64_t bytes_ = 0;
};

/// Writes one record per event, timestamped at the event start. Returns the
/// number of bytes written.
std::uint64_t write_pcap(const Trace& trace, std::ostream& sink);
std::uint64_t write_pcap_file(const Trace& trace, const std::string& path);

// ---------------------------------------------------------------------------
// transmit ports

using SteadyClock = std::chrono::steady_clock;

/// Adapter contract for anything that can put frames on a wire.
class TransmitPort {
public:
    virtual ~TransmitPort() = default;

    virtual const std::string& id() const noexcept = 0;
    /// Hands one frame to the port no earlier than `not_before`.
    /// Throws Error(send_failure) if the port cannot send.
    virtual void send(std::span<const std::uint8_t> frame, SteadyClock::time_point not_before) = 0;
    virtual void close() = 0;
    virtual bool is_open() const noexcept = 0;
};

/// Paced in-process port that records when each frame was accepted.
/// Port ids of the form `virtual:<name>`.
class VirtualPort : public TransmitPort {
public:
    explicit VirtualPort(std::string id);

    const std::string& id() const noexcept override { return id_; }
    void send(std::span<const std::uint8_t> frame, SteadyClock::time_point not_before) override;
    void close() override { open_.store(false); }
    bool is_open() const noexcept override { return open_.load(); }

    std::size_t frames_received() const;
    std::vector<SteadyClock::time_point> send_times() const;
    std::vector<std::vector<std::uint8_t>> frames() const;

    /// When set, frame bodies are retained (memory grows with the run).
    void keep_frames(bool keep) { keep_frames_ = keep; }

private:
    std::string id_;
    std::atomic<bool> open_{true};
    bool keep_frames_ = false;
    mutable std::mutex mu_;
    std::vector<SteadyClock::time_point> times_;
    std::vector<std::vector<std::uint8_t>> frames_;
};

/// Opens `virtual:<name>` as a VirtualPort, anything else as a Linux
/// AF_PACKET socket bound to that interface. Throws port_unavailable.
std::shared_ptr<TransmitPort> open_port(const std::string& port_id);

/// Waits until `deadline`: coarse sleep, then spin for the last stretch.
void wait_until(SteadyClock::time_point deadline);

enum class RunOutcome { running, completed, failed, stopped };

std::string_view to_string(RunOutcome outcome) noexcept;

struct LiveProgress {
    RunOutcome outcome = RunOutcome::running;
    std::int64_t frames_sent = 0;
    std::int64_t elapsed_ns = 0;
    std::string error;
};

/// A transmission in flight on a real or virtual port. Owns its worker
/// thread; destruction requests a stop and joins.
class LiveRun {
public:
    LiveRun(TransmissionPlan plan, FrameSpec frame, std::shared_ptr<TransmitPort> port);
    ~LiveRun();

    LiveRun(const LiveRun&) = delete;
    LiveRun& operator=(const LiveRun&) = delete;

    LiveProgress progress() const;
    void request_stop() noexcept { stop_.store(true); }
    /// Blocks until the worker finishes and returns the final snapshot.
    LiveProgress wait();

    /// Offsets from the run start at which each frame was handed over.
    std::vector<std::int64_t> send_offsets_ns() const;

    const TransmissionPlan& plan() const noexcept { return plan_; }
    const FrameSpec& frame() const noexcept { return frame_; }

private:
    void worker();

    TransmissionPlan plan_;
    FrameSpec frame_;
    std::shared_ptr<TransmitPort> port_;
    std::atomic<bool> stop_{false};
    mutable std::mutex mu_;
    LiveProgress progress_;
    std::vector<std::int64_t> offsets_;
    SteadyClock::time_point started_;
    std::thread thread_;
};

/// Starts transmitting `plan` on `port` following the simulated schedule.
std::unique_ptr<LiveRun> transmit(const TransmissionPlan& plan, const FrameSpec& frame,
                                  std::shared_ptr<TransmitPort> port);

}  // namespace loadgen
