#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadgen/frame_model.hpp"
#include "loadgen/load_engine.hpp"
#include "loadgen/rational.hpp"
#include "loadgen/wire_sim.hpp"

namespace loadgen {

struct CapturedFrame {
    std::int64_t timestamp_ns = 0;
    std::vector<std::uint8_t> bytes;
    std::uint32_t original_len = 0;

    friend bool operator==(const CapturedFrame&, const CapturedFrame&) = default;
};

/// Reads classic pcap with microsecond or nanosecond magic in either byte
/// order. Timestamps are normalized to nanoseconds.
std::vector<CapturedFrame> read_pcap(std::istream& source);
std::vector<CapturedFrame> read_pcap_file(const std::string& path);

/// What the analyzer needs to know about one frame on the wire.
struct FrameObservation {
    std::int64_t start_ns = 0;
    std::uint32_t frame_len = 0;  // serialized length, without preamble/FCS
    bool vlan = false;
    std::optional<std::uint32_t> seq;
};

std::vector<FrameObservation> observe(const Trace& trace);
std::vector<FrameObservation> observe(std::span<const CapturedFrame> frames);
/// Observations for a live run, one per frame actually handed to the port.
std::vector<FrameObservation> observe(const LiveRun& run);

struct GapStats {
    std::int64_t min_ns = 0;
    std::int64_t max_ns = 0;
    double mean_ns = 0;
    double stddev_ns = 0;
};

struct BurstSegment {
    std::int64_t first_start_ns = 0;
    std::int64_t last_start_ns = 0;
    std::int64_t frames = 0;
};

struct SequenceCheck {
    bool present = false;  // every frame carried a readable sequence number
    std::uint32_t first_seq = 0;
    std::int64_t missing = 0;
    std::int64_t reordered = 0;
};

struct CaptureReport {
    LineRate rate = LineRate::fast_ethernet;
    std::int64_t frame_count = 0;
    /// First frame start to the end of the last frame's slot; the slot is the
    /// measured period when one exists, otherwise the frame's own occupancy.
    std::int64_t elapsed_ns = 0;
    std::optional<GapStats> gaps;
    /// Mean start-to-start delta inside bursts; absent with no such delta.
    std::optional<Rational> measured_period_ns;
    /// Slot bytes on the wire over the summed burst spans.
    Rational measured_load;
    std::int64_t split_threshold_ns = 0;
    std::vector<BurstSegment> bursts;
    SequenceCheck sequence;
};

/// Start-to-start delta above which a new burst begins for this plan (2 x E_L).
std::int64_t burst_split_threshold(const TransmissionPlan& plan) noexcept;

/// Threshold for jittery live captures: midway between E_L and the smallest
/// planned inter-burst gap (never below 2 x E_L); unbounded for single-burst
/// plans.
std::int64_t live_split_threshold(const TransmissionPlan& plan) noexcept;

/// Without an explicit threshold, bursts split on deltas above twice the
/// median delta. Throws empty_capture or non_monotone_timestamps.
CaptureReport measure(std::span<const FrameObservation> frames, LineRate rate,
                      std::optional<std::int64_t> split_threshold_ns = std::nullopt);

/// Exact wire occupancy inside [window_start, window_start + width): the
/// fraction of the window covered by frame slots.
Rational window_load(const Trace& trace, std::int64_t window_start_ns, std::int64_t width_ns);

struct Tolerance {
    double period_ns = 0;
    double load = 0;
};

struct MetricCheck {
    std::string name;
    bool pass = false;
    std::string expected;
    std::string measured;
};

struct Verdict {
    bool pass = false;
    std::vector<MetricCheck> checks;
};

/// Compares a report with the plan it should realize. A zero tolerance
/// compares exactly.
Verdict verify(const CaptureReport& report, const TransmissionPlan& plan, const Tolerance& tol = {});

}  // namespace loadgen
