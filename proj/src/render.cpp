#include "loadgen/render.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace loadgen {

namespace {

void row(std::ostream& out, const char* label, const std::string& value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-26s ", label);
    out << buf << value << '\n';
}

std::string bytes(std::int64_t n) { return std::to_string(n) + " B"; }

std::string percent(const Rational& r) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g%%", (r * Rational(100)).to_double());
    return std::string(buf) + " (" + r.to_string() + ")";
}

std::string feature_text(const Feature& f) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FramesFeature>) {
                return "frames " + std::to_string(v.count);
            } else if constexpr (std::is_same_v<T, DurationFeature>) {
                return "duration " + format_duration(v.duration_ns);
            } else {
                return std::to_string(v.burst_count) + " bursts of " + format_duration(v.burst_interval_ns) +
                       ", sleep " + format_duration(v.sleep_interval_ns);
            }
        },
        f);
}

}  // namespace

void render_plan(std::ostream& out, const TransmissionPlan& plan) {
    out << "transmission plan\n";
    row(out, "feature", feature_text(plan.feature));
    row(out, "line rate", to_string(plan.rate));
    row(out, "requested load", percent(plan.requested_load.value()));
    row(out, "P (frame)", bytes(plan.slot.p_bytes));
    row(out, "O (overhead)", bytes(plan.slot.overhead_bytes));
    row(out, "S (slot)", bytes(plan.slot.slot_bytes));
    row(out, "I_L (extra gap)", bytes(plan.extra_gap_bytes));
    row(out, "I (total gap)", bytes(plan.total_gap_bytes));
    row(out, "F (frames)", std::to_string(plan.frames_total));
    row(out, "E_R (occupancy)", format_duration(plan.occupancy_ns));
    row(out, "E_L (period)", format_duration(plan.period_ns));
    row(out, "T' (elapsed)", format_duration(plan.elapsed_ns));
    row(out, "TD (deficit)", plan.time_deficit_ns ? format_duration(*plan.time_deficit_ns) : "-");
    if (plan.bursts.size() > 1) {
        row(out, "bursts", std::to_string(plan.bursts.size()) + " x " + std::to_string(plan.bursts.front().frames) +
                               " frames");
        row(out, "schedule span", format_duration(plan.nominal_span_ns));
    }
    row(out, "achieved load", percent(plan.achieved_load));
}

void render_report(std::ostream& out, const CaptureReport& r) {
    out << "capture report\n";
    row(out, "frames", std::to_string(r.frame_count));
    row(out, "elapsed", format_duration(r.elapsed_ns));
    if (r.measured_period_ns) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.3f ns", r.measured_period_ns->to_double());
        row(out, "E_L (measured period)", buf);
    } else {
        row(out, "E_L (measured period)", "-");
    }
    if (r.gaps) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "min %lld  max %lld  mean %.3f  sd %.3f ns", static_cast<long long>(r.gaps->min_ns),
                      static_cast<long long>(r.gaps->max_ns), r.gaps->mean_ns, r.gaps->stddev_ns);
        row(out, "start deltas", buf);
    }
    row(out, "measured load", percent(r.measured_load));
    row(out, "bursts", std::to_string(r.bursts.size()));
    if (r.sequence.present) {
        row(out, "sequence", "missing " + std::to_string(r.sequence.missing) + ", reordered " +
                                 std::to_string(r.sequence.reordered));
    }
}

void render_verdict(std::ostream& out, const Verdict& v) {
    out << "verdict: " << (v.pass ? "PASS" : "FAIL") << '\n';
    for (const auto& c : v.checks) {
        out << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << ": expected " << c.expected << ", measured "
            << c.measured << '\n';
    }
}

}  // namespace loadgen
