#include "loadgen/load_engine.hpp"

#include <array>
#include <utility>

#include "loadgen/error.hpp"

namespace loadgen {

LoadFraction::LoadFraction(Rational value) : value_(value) {
    if (value_ <= Rational(0) || value_ > Rational(1)) {
        throw Error(ErrorCode::validation_error, "load must be in (0, 100] percent, got " +
                                                     (value_ * Rational(100)).to_string() + "%",
                    "load_percent");
    }
}

LoadFraction LoadFraction::from_percent(std::string_view percent) {
    Rational pct;
    try {
        pct = Rational::parse_decimal(std::string(percent));
    } catch (const Error&) {
        throw Error(ErrorCode::validation_error, "load percent is not a number: '" + std::string(percent) + "'",
                    "load_percent");
    }
    return LoadFraction(pct / Rational(100));
}

std::string_view feature_name(const Feature& feature) noexcept {
    switch (feature.index()) {
        case 0: return "frames";
        case 1: return "duration";
        default: return "burst";
    }
}

void LoadSpec::validate() const {
    try {
        frame.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::validation_error, e.what(), e.field());
    }
    if (load.value() <= Rational(0) || load.value() > Rational(1)) {
        throw Error(ErrorCode::validation_error, "load must be in (0, 100] percent", "load_percent");
    }
    std::visit(
        [](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, FramesFeature>) {
                if (f.count < 1) throw Error(ErrorCode::validation_error, "frame count must be >= 1", "feature.frames");
            } else if constexpr (std::is_same_v<T, DurationFeature>) {
                if (f.duration_ns < 0) {
                    throw Error(ErrorCode::validation_error, "duration must be >= 0", "feature.duration");
                }
            } else {
                if (f.burst_count < 1) {
                    throw Error(ErrorCode::validation_error, "burst count must be >= 1", "feature.bursts");
                }
                if (f.burst_interval_ns < 0) {
                    throw Error(ErrorCode::validation_error, "burst interval must be >= 0", "feature.burst_interval");
                }
                if (f.sleep_interval_ns < 0) {
                    throw Error(ErrorCode::validation_error, "sleep interval must be >= 0", "feature.sleep_interval");
                }
            }
        },
        feature);
    if (port.empty()) throw Error(ErrorCode::validation_error, "port must not be empty", "port");
}

std::int64_t extra_gap(std::int64_t slot_bytes, const LoadFraction& load) {
    if (slot_bytes < kMinFrameLen + kBaseOverheadBytes) {
        throw Error(ErrorCode::invalid_argument, "slot size below 84 bytes");
    }
    // S x (1/L - 1) = S x (den - num) / num
    const auto& l = load.value();
    return (Rational(slot_bytes) * Rational(l.den() - l.num(), l.num())).ceil();
}

std::int64_t total_gap(std::int64_t extra_gap_bytes) {
    if (extra_gap_bytes < 0) throw Error(ErrorCode::invalid_argument, "negative extra gap");
    return kMinInterframeGapBytes + extra_gap_bytes;
}

std::int64_t occupancy(std::int64_t slot_bytes, LineRate rate) { return slot_bytes * byte_time_ns(rate); }

std::int64_t period(std::int64_t slot_bytes, std::int64_t extra_gap_bytes, LineRate rate) {
    return (slot_bytes + extra_gap_bytes) * byte_time_ns(rate);
}

std::int64_t frames_for_duration(LineRate rate, std::int64_t slot_bytes, const Rational& load,
                                 std::int64_t duration_ns) {
    if (duration_ns < 0) throw Error(ErrorCode::invalid_argument, "negative duration");
    // R / (S x 8) x L x T with T in ns  ==  T x L / (S x byte_time)
    return (Rational(duration_ns) * load / Rational(slot_bytes * byte_time_ns(rate))).floor();
}

std::int64_t elapsed(std::int64_t frames, std::int64_t period_ns) {
    if (frames < 0) throw Error(ErrorCode::invalid_argument, "negative frame count");
    return frames * period_ns;
}

std::int64_t time_deficit(std::int64_t duration_ns, std::int64_t elapsed_ns, std::int64_t period_ns) {
    if (elapsed_ns > duration_ns) {
        throw Error(ErrorCode::overshoot_violation, "elapsed " + std::to_string(elapsed_ns) +
                                                        " ns exceeds requested " + std::to_string(duration_ns) + " ns");
    }
    if (elapsed_ns + period_ns <= duration_ns) {
        throw Error(ErrorCode::overshoot_violation, "another frame fits before " + std::to_string(duration_ns) +
                                                        " ns; frame count was under-computed");
    }
    return duration_ns - elapsed_ns;
}

TransmissionPlan make_plan(const LoadSpec& spec) {
    spec.validate();

    TransmissionPlan plan;
    plan.feature = spec.feature;
    plan.rate = spec.rate;
    plan.requested_load = spec.load;
    plan.slot = slot_size(spec.frame);

    const std::int64_t s = plan.slot.slot_bytes;
    plan.extra_gap_bytes = extra_gap(s, spec.load);
    plan.total_gap_bytes = total_gap(plan.extra_gap_bytes);
    plan.occupancy_ns = occupancy(s, spec.rate);
    plan.period_ns = period(s, plan.extra_gap_bytes, spec.rate);
    plan.achieved_load = Rational(s, s + plan.extra_gap_bytes);

    // Frame counts use the achieved load so the schedule built from the
    // rounded gap still fits the requested window. For loads whose gap is
    // integral the two are identical.
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, FramesFeature>) {
                plan.frames_total = f.count;
                plan.elapsed_ns = elapsed(f.count, plan.period_ns);
                plan.nominal_span_ns = plan.elapsed_ns;
                plan.bursts = {{f.count, 0}};
            } else if constexpr (std::is_same_v<T, DurationFeature>) {
                plan.frames_total = frames_for_duration(spec.rate, s, plan.achieved_load, f.duration_ns);
                if (plan.frames_total == 0) {
                    throw Error(ErrorCode::empty_plan, "no frame fits in " + format_duration(f.duration_ns) +
                                                           " at period " + format_duration(plan.period_ns));
                }
                plan.elapsed_ns = elapsed(plan.frames_total, plan.period_ns);
                plan.time_deficit_ns = time_deficit(f.duration_ns, plan.elapsed_ns, plan.period_ns);
                plan.nominal_span_ns = plan.elapsed_ns;
                plan.bursts = {{plan.frames_total, 0}};
            } else {
                const auto per_burst = frames_for_duration(spec.rate, s, plan.achieved_load, f.burst_interval_ns);
                if (per_burst == 0) {
                    throw Error(ErrorCode::empty_plan, "no frame fits in a burst interval of " +
                                                           format_duration(f.burst_interval_ns));
                }
                const auto stride = f.burst_interval_ns + f.sleep_interval_ns;
                plan.bursts.reserve(static_cast<std::size_t>(f.burst_count));
                for (std::int64_t k = 0; k < f.burst_count; ++k) {
                    plan.bursts.push_back({per_burst, k * stride});
                }
                plan.frames_total = per_burst * f.burst_count;
                plan.elapsed_ns = (f.burst_count - 1) * stride + elapsed(per_burst, plan.period_ns);
                plan.nominal_span_ns = f.burst_count * f.burst_interval_ns + (f.burst_count - 1) * f.sleep_interval_ns;
            }
        },
        spec.feature);
    return plan;
}

namespace {

struct Unit {
    std::string_view suffix;
    std::int64_t ns;
};

constexpr std::array<Unit, 7> kUnits{{
    {"min", 60'000'000'000},
    {"ms", 1'000'000},
    {"us", 1'000},
    {"\xC2\xB5s", 1'000},
    {"ns", 1},
    {"h", 3'600'000'000'000},
    {"s", 1'000'000'000},
}};

}  // namespace

std::int64_t parse_duration(std::string_view text) {
    std::int64_t unit_ns = 1;
    std::string_view number = text;
    for (const auto& u : kUnits) {
        if (text.size() > u.suffix.size() && text.ends_with(u.suffix)) {
            unit_ns = u.ns;
            number = text.substr(0, text.size() - u.suffix.size());
            break;
        }
    }
    Rational value;
    try {
        value = Rational::parse_decimal(std::string(number)) * Rational(unit_ns);
    } catch (const Error&) {
        throw Error(ErrorCode::invalid_argument, "invalid duration: '" + std::string(text) + "'", "duration");
    }
    if (value.den() != 1 || value.num() < 0) {
        throw Error(ErrorCode::invalid_argument,
                    "duration must be a non-negative whole number of ns: '" + std::string(text) + "'", "duration");
    }
    return value.num();
}

std::string format_duration(std::int64_t ns) {
    constexpr std::array<std::pair<std::int64_t, const char*>, 4> units{
        {{1'000'000'000, "s"}, {1'000'000, "ms"}, {1'000, "us"}, {1, "ns"}}};
    const bool negative = ns < 0;
    const std::int64_t mag = negative ? -ns : ns;
    for (const auto& [scale, name] : units) {
        if (mag >= scale || scale == 1) {
            std::string out = std::to_string(mag / scale);
            auto frac = mag % scale;
            if (frac != 0) {
                std::string digits = std::to_string(scale + frac).substr(1);
                while (!digits.empty() && digits.back() == '0') digits.pop_back();
                out += "." + digits;
            }
            return (negative ? "-" : "") + out + name;
        }
    }
    return "0ns";
}

}  // namespace loadgen
