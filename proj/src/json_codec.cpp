#include "loadgen/json_codec.hpp"

#include <array>

#include "loadgen/error.hpp"

namespace loadgen {

namespace {

Json rational_json(const Rational& r) { return r.to_string(); }

// Wraps parse failures from lower layers into field-tagged validation errors.
template <typename F>
auto field_guard(const char* field, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::feature_conflict) throw;
        throw Error(ErrorCode::validation_error, e.what(), e.field().empty() ? field : e.field());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::validation_error, std::string("bad value: ") + e.what(), field);
    }
}

std::string text_of(const Json& v, const char* field) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw Error(ErrorCode::validation_error, "expected a string or number", field);
}

std::int64_t integer_of(const Json& v, const char* field) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const auto d = v.get<double>();
        if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    }
    throw Error(ErrorCode::validation_error, "expected an integer", field);
}

// Accepts integer nanoseconds or a string with a unit suffix.
std::int64_t duration_of(const Json& v, const char* field) {
    if (v.is_number()) return integer_of(v, field);
    return field_guard(field, [&] { return parse_duration(text_of(v, field)); });
}

constexpr std::array<const char*, 2> kFramesKeys{"frames", "count"};
constexpr std::array<const char*, 2> kDurationKeys{"duration", "duration_ns"};
constexpr std::array<const char*, 5> kBurstKeys{"bursts", "burst_interval", "burst_interval_ns", "sleep_interval",
                                                "sleep_interval_ns"};

template <std::size_t N>
bool has_any(const Json& j, const std::array<const char*, N>& keys) {
    for (const auto* k : keys) {
        if (j.contains(k)) return true;
    }
    return false;
}

}  // namespace

Json feature_to_json(const Feature& feature) {
    return std::visit(
        [](const auto& f) -> Json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, FramesFeature>) {
                return {{"type", "frames"}, {"frames", f.count}};
            } else if constexpr (std::is_same_v<T, DurationFeature>) {
                return {{"type", "duration"}, {"duration_ns", f.duration_ns}};
            } else {
                return {{"type", "burst"},
                        {"bursts", f.burst_count},
                        {"burst_interval_ns", f.burst_interval_ns},
                        {"sleep_interval_ns", f.sleep_interval_ns}};
            }
        },
        feature);
}

Feature feature_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::validation_error, "feature must be an object", "feature");
    const bool frames = has_any(j, kFramesKeys);
    const bool duration = has_any(j, kDurationKeys);
    const bool burst = has_any(j, kBurstKeys);
    if (int(frames) + int(duration) + int(burst) > 1) {
        throw Error(ErrorCode::feature_conflict, "only one of frames, duration or burst may be set", "feature");
    }
    std::string type;
    if (j.contains("type")) {
        type = field_guard("feature.type", [&] { return j.at("type").get<std::string>(); });
        if (type == "frame" || type == "frames") {
            type = "frames";
        } else if (type == "time" || type == "duration") {
            type = "duration";
        } else if (type == "burst" || type == "bursts") {
            type = "burst";
        } else {
            throw Error(ErrorCode::validation_error, "unknown feature type '" + type + "'", "feature.type");
        }
        const bool mismatch = (frames && type != "frames") || (duration && type != "duration") ||
                              (burst && type != "burst");
        if (mismatch) {
            throw Error(ErrorCode::feature_conflict, "feature type '" + type + "' conflicts with its fields", "feature");
        }
    } else if (frames) {
        type = "frames";
    } else if (duration) {
        type = "duration";
    } else if (burst) {
        type = "burst";
    } else {
        throw Error(ErrorCode::validation_error, "a feature (frames, duration or burst) is required", "feature");
    }

    if (type == "frames") {
        const auto& v = j.contains("frames") ? j.at("frames") : j.contains("count") ? j.at("count") : Json();
        if (v.is_null()) throw Error(ErrorCode::validation_error, "frame count is required", "feature.frames");
        return FramesFeature{integer_of(v, "feature.frames")};
    }
    if (type == "duration") {
        if (j.contains("duration_ns")) return DurationFeature{duration_of(j.at("duration_ns"), "feature.duration")};
        if (j.contains("duration")) return DurationFeature{duration_of(j.at("duration"), "feature.duration")};
        throw Error(ErrorCode::validation_error, "duration is required", "feature.duration");
    }
    BurstFeature b;
    if (!j.contains("bursts")) throw Error(ErrorCode::validation_error, "burst count is required", "feature.bursts");
    b.burst_count = integer_of(j.at("bursts"), "feature.bursts");
    auto interval = [&](const char* plain, const char* ns, const char* field) -> std::int64_t {
        if (j.contains(ns)) return duration_of(j.at(ns), field);
        if (j.contains(plain)) return duration_of(j.at(plain), field);
        throw Error(ErrorCode::validation_error, std::string(plain) + " is required", field);
    };
    b.burst_interval_ns = interval("burst_interval", "burst_interval_ns", "feature.burst_interval");
    b.sleep_interval_ns = interval("sleep_interval", "sleep_interval_ns", "feature.sleep_interval");
    return b;
}

Json spec_to_json(const LoadSpec& spec) {
    Json j;
    j["load_percent"] = spec.load.percent().to_double();
    j["src_mac"] = spec.frame.src.to_string();
    j["dst_mac"] = spec.frame.dst.to_string();
    j["ethertype"] = ethertype_to_string(spec.frame.ethertype);
    if (spec.frame.vlan) {
        j["vlan"] = {{"pcp", spec.frame.vlan->priority}, {"cfi", spec.frame.vlan->cfi}, {"vid", spec.frame.vlan->vid}};
    } else {
        j["vlan"] = nullptr;
    }
    j["frame_len_p"] = spec.frame.frame_len_p;
    j["payload_fill"] = spec.frame.payload_fill.to_string();
    j["line_rate"] = to_string(spec.rate);
    j["port"] = spec.port;
    j["feature"] = feature_to_json(spec.feature);
    return j;
}

LoadSpec spec_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::validation_error, "request body must be a JSON object");
    LoadSpec spec;

    if (!j.contains("load_percent")) throw Error(ErrorCode::validation_error, "load_percent is required", "load_percent");
    spec.load = field_guard("load_percent",
                            [&] { return LoadFraction::from_percent(text_of(j.at("load_percent"), "load_percent")); });

    if (j.contains("src_mac")) {
        spec.frame.src = field_guard("src_mac", [&] { return MacAddress::parse(j.at("src_mac").get<std::string>()); });
    }
    if (j.contains("dst_mac")) {
        spec.frame.dst = field_guard("dst_mac", [&] { return MacAddress::parse(j.at("dst_mac").get<std::string>()); });
    }
    if (j.contains("ethertype")) {
        spec.frame.ethertype = field_guard("ethertype", [&] {
            const auto& v = j.at("ethertype");
            return v.is_number() ? static_cast<std::uint16_t>(integer_of(v, "ethertype"))
                                 : parse_ethertype(v.get<std::string>());
        });
    }
    if (j.contains("vlan") && !j.at("vlan").is_null()) {
        spec.frame.vlan = field_guard("vlan", [&] {
            const auto& v = j.at("vlan");
            if (v.is_string()) return VlanTag::parse(v.get<std::string>());
            const auto pcp = integer_of(v.value("pcp", Json(0)), "vlan.pcp");
            const auto cfi = integer_of(v.value("cfi", Json(0)), "vlan.cfi");
            const auto vid = integer_of(v.value("vid", Json(0)), "vlan.vid");
            if (pcp < 0 || pcp > 7) throw Error(ErrorCode::validation_error, "vlan pcp must be in [0,7]", "vlan.pcp");
            if (cfi < 0 || cfi > 1) throw Error(ErrorCode::validation_error, "vlan cfi must be 0 or 1", "vlan.cfi");
            if (vid < 0 || vid > 4094) {
                throw Error(ErrorCode::validation_error, "vlan vid must be in [0,4094]", "vlan.vid");
            }
            return VlanTag{static_cast<std::uint8_t>(pcp), static_cast<std::uint8_t>(cfi),
                           static_cast<std::uint16_t>(vid)};
        });
    }
    if (!j.contains("frame_len_p")) throw Error(ErrorCode::validation_error, "frame_len_p is required", "frame_len_p");
    {
        const auto len = integer_of(j.at("frame_len_p"), "frame_len_p");
        if (len < kMinFrameLen || len > kMaxFrameLen) {
            throw Error(ErrorCode::validation_error, "frame_len_p must be in [60, 1514]", "frame_len_p");
        }
        spec.frame.frame_len_p = static_cast<std::uint32_t>(len);
    }
    if (j.contains("payload_fill")) {
        spec.frame.payload_fill =
            field_guard("payload_fill", [&] { return PayloadFill::parse(j.at("payload_fill").get<std::string>()); });
    }
    if (j.contains("line_rate")) {
        spec.rate = field_guard("line_rate", [&] { return parse_line_rate(text_of(j.at("line_rate"), "line_rate")); });
    }
    if (j.contains("port")) {
        spec.port = field_guard("port", [&] { return j.at("port").get<std::string>(); });
    }
    if (!j.contains("feature")) {
        throw Error(ErrorCode::validation_error, "a feature (frames, duration or burst) is required", "feature");
    }
    spec.feature = feature_from_json(j.at("feature"));
    spec.validate();
    return spec;
}

Json plan_to_json(const TransmissionPlan& plan) {
    Json j;
    j["feature"] = feature_to_json(plan.feature);
    j["line_rate"] = to_string(plan.rate);
    j["requested_load"] = rational_json(plan.requested_load.value());
    j["slot"] = {{"p_bytes", plan.slot.p_bytes},
                 {"overhead_bytes", plan.slot.overhead_bytes},
                 {"slot_bytes", plan.slot.slot_bytes}};
    j["extra_gap_bytes"] = plan.extra_gap_bytes;
    j["total_gap_bytes"] = plan.total_gap_bytes;
    j["frames_total"] = plan.frames_total;
    j["occupancy_ns"] = plan.occupancy_ns;
    j["period_ns"] = plan.period_ns;
    j["elapsed_ns"] = plan.elapsed_ns;
    j["time_deficit_ns"] = plan.time_deficit_ns ? Json(*plan.time_deficit_ns) : Json(nullptr);
    j["nominal_span_ns"] = plan.nominal_span_ns;
    Json bursts = Json::array();
    for (const auto& b : plan.bursts) bursts.push_back({{"frames", b.frames}, {"start_offset_ns", b.start_offset_ns}});
    j["bursts"] = std::move(bursts);
    j["achieved_load"] = rational_json(plan.achieved_load);
    j["achieved_load_percent"] = (plan.achieved_load * Rational(100)).to_double();
    return j;
}

Json report_to_json(const CaptureReport& r) {
    Json j;
    j["line_rate"] = to_string(r.rate);
    j["frame_count"] = r.frame_count;
    j["elapsed_ns"] = r.elapsed_ns;
    if (r.gaps) {
        j["gaps"] = {{"min_ns", r.gaps->min_ns},
                     {"max_ns", r.gaps->max_ns},
                     {"mean_ns", r.gaps->mean_ns},
                     {"stddev_ns", r.gaps->stddev_ns}};
    } else {
        j["gaps"] = nullptr;
    }
    if (r.measured_period_ns) {
        j["measured_period_ns"] = r.measured_period_ns->to_double();
        j["measured_period_exact"] = rational_json(*r.measured_period_ns);
    } else {
        j["measured_period_ns"] = nullptr;
        j["measured_period_exact"] = nullptr;
    }
    j["measured_load"] = rational_json(r.measured_load);
    j["measured_load_percent"] = (r.measured_load * Rational(100)).to_double();
    j["split_threshold_ns"] = r.split_threshold_ns;
    Json bursts = Json::array();
    for (const auto& b : r.bursts) {
        bursts.push_back({{"first_start_ns", b.first_start_ns}, {"last_start_ns", b.last_start_ns}, {"frames", b.frames}});
    }
    j["burst_count"] = r.bursts.size();
    j["bursts"] = std::move(bursts);
    j["sequence"] = {{"present", r.sequence.present},
                     {"first_seq", r.sequence.first_seq},
                     {"missing", r.sequence.missing},
                     {"reordered", r.sequence.reordered}};
    return j;
}

Json verdict_to_json(const Verdict& v) {
    Json checks = Json::array();
    for (const auto& c : v.checks) {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"expected", c.expected}, {"measured", c.measured}});
    }
    return {{"pass", v.pass}, {"checks", std::move(checks)}};
}

}  // namespace loadgen
