#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "loadgen/frame_model.hpp"
#include "loadgen/rational.hpp"

namespace loadgen {

/// Requested share of the line rate, exact, in (0, 1].
class LoadFraction {
public:
    LoadFraction() = default;
    explicit LoadFraction(Rational value);

    /// "25" -> 1/4, "12.5" -> 1/8.
    static LoadFraction from_percent(std::string_view percent);

    const Rational& value() const noexcept { return value_; }
    Rational percent() const { return value_ * Rational(100); }

    friend bool operator==(const LoadFraction&, const LoadFraction&) = default;

private:
    Rational value_{1};
};

struct FramesFeature {
    std::int64_t count = 1;
    friend bool operator==(const FramesFeature&, const FramesFeature&) = default;
};

struct DurationFeature {
    std::int64_t duration_ns = 0;
    friend bool operator==(const DurationFeature&, const DurationFeature&) = default;
};

struct BurstFeature {
    std::int64_t burst_count = 1;
    std::int64_t burst_interval_ns = 0;
    std::int64_t sleep_interval_ns = 0;
    friend bool operator==(const BurstFeature&, const BurstFeature&) = default;
};

/// Exactly one generation feature per run.
using Feature = std::variant<FramesFeature, DurationFeature, BurstFeature>;

std::string_view feature_name(const Feature& feature) noexcept;

struct LoadSpec {
    FrameSpec frame;
    LineRate rate = LineRate::fast_ethernet;
    LoadFraction load;
    Feature feature = FramesFeature{};
    std::string port = "virtual:0";

    void validate() const;

    friend bool operator==(const LoadSpec&, const LoadSpec&) = default;
};

struct BurstLayout {
    std::int64_t frames = 0;
    std::int64_t start_offset_ns = 0;

    friend bool operator==(const BurstLayout&, const BurstLayout&) = default;
};

/// Everything needed to lay out a run on the wire. All times are integer
/// nanoseconds; loads are exact rationals.
struct TransmissionPlan {
    Feature feature;
    LineRate rate = LineRate::fast_ethernet;
    LoadFraction requested_load;
    WireSlot slot;
    std::int64_t extra_gap_bytes = 0;   // I_L
    std::int64_t total_gap_bytes = 0;   // I = 12 + I_L
    std::int64_t frames_total = 0;      // F
    std::int64_t occupancy_ns = 0;      // E_R
    std::int64_t period_ns = 0;         // E_L
    std::int64_t elapsed_ns = 0;        // T'
    std::optional<std::int64_t> time_deficit_ns;  // TD, duration plans only
    /// Burst plans: burst_count x burst_interval + (burst_count - 1) x sleep.
    /// Other plans: equal to elapsed_ns.
    std::int64_t nominal_span_ns = 0;
    std::vector<BurstLayout> bursts;
    Rational achieved_load;

    friend bool operator==(const TransmissionPlan&, const TransmissionPlan&) = default;
};

/// I_L = ceil(S x (1/L - 1)): the smallest extra gap that keeps the load at
/// or below L.
std::int64_t extra_gap(std::int64_t slot_bytes, const LoadFraction& load);

/// I = 12 + I_L.
std::int64_t total_gap(std::int64_t extra_gap_bytes);

/// E_R = S x 8 / R.
std::int64_t occupancy(std::int64_t slot_bytes, LineRate rate);

/// E_L = (S + I_L) x byte time.
std::int64_t period(std::int64_t slot_bytes, std::int64_t extra_gap_bytes, LineRate rate);

/// F = floor(R / (S x 8) x L x T).
std::int64_t frames_for_duration(LineRate rate, std::int64_t slot_bytes, const Rational& load, std::int64_t duration_ns);

/// T' = F x E_L.
std::int64_t elapsed(std::int64_t frames, std::int64_t period_ns);

/// TD = T - T'. Throws overshoot_violation when one more period would still
/// fit inside T, or when T' already exceeds T.
std::int64_t time_deficit(std::int64_t duration_ns, std::int64_t elapsed_ns, std::int64_t period_ns);

TransmissionPlan make_plan(const LoadSpec& spec);

/// Accepts h, min, s, ms, us (or µs) and ns suffixes, with an optional
/// decimal fraction; the result must be a whole number of nanoseconds.
/// A bare integer is taken as nanoseconds.
std::int64_t parse_duration(std::string_view text);

/// Shortest exact rendering, e.g. 19998720 -> "19.99872ms".
std::string format_duration(std::int64_t ns);

}  // namespace loadgen
