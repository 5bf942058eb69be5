#include "loadgen/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "loadgen/error.hpp"

namespace loadgen {

// ---------------------------------------------------------------------------
// pcap input

namespace {

std::uint32_t load32(const std::uint8_t* p, bool big_endian) noexcept {
    if (big_endian) {
        return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
               (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
    }
    return (static_cast<std::uint32_t>(p[3]) << 24) | (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[1]) << 8) | p[0];
}

bool read_exact(std::istream& in, std::uint8_t* out, std::size_t n) {
    in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

}  // namespace

std::vector<CapturedFrame> read_pcap(std::istream& source) {
    std::uint8_t hdr[kPcapGlobalHeaderBytes];
    if (!read_exact(source, hdr, sizeof hdr)) {
        throw Error(ErrorCode::bad_magic, "file too short for a pcap header");
    }
    // Try both byte orders against both magics.
    bool big_endian = false;
    bool nanosecond = false;
    const auto le = load32(hdr, false);
    const auto be = load32(hdr, true);
    if (le == kPcapMagicMicro || le == kPcapMagicNano) {
        nanosecond = le == kPcapMagicNano;
    } else if (be == kPcapMagicMicro || be == kPcapMagicNano) {
        big_endian = true;
        nanosecond = be == kPcapMagicNano;
    } else {
        std::ostringstream msg;
        msg << "unrecognized pcap magic 0x" << std::hex << le;
        throw Error(ErrorCode::bad_magic, msg.str());
    }
    const std::int64_t frac_scale = nanosecond ? 1 : 1000;

    std::vector<CapturedFrame> frames;
    for (std::size_t index = 0;; ++index) {
        std::uint8_t rec[kPcapRecordHeaderBytes];
        source.read(reinterpret_cast<char*>(rec), sizeof rec);
        const auto got = static_cast<std::size_t>(source.gcount());
        if (got == 0) break;
        if (got != sizeof rec) {
            throw Error(ErrorCode::truncated_record, "record " + std::to_string(index) + " has a truncated header");
        }
        const auto sec = load32(rec, big_endian);
        const auto frac = load32(rec + 4, big_endian);
        const auto incl = load32(rec + 8, big_endian);
        const auto orig = load32(rec + 12, big_endian);
        if (incl > 262144) {
            throw Error(ErrorCode::truncated_record,
                        "record " + std::to_string(index) + " claims " + std::to_string(incl) + " bytes");
        }
        CapturedFrame frame;
        frame.timestamp_ns = static_cast<std::int64_t>(sec) * 1'000'000'000 + static_cast<std::int64_t>(frac) * frac_scale;
        frame.bytes.resize(incl);
        frame.original_len = orig;
        if (!read_exact(source, frame.bytes.data(), incl)) {
            throw Error(ErrorCode::truncated_record, "record " + std::to_string(index) + " is truncated");
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

std::vector<CapturedFrame> read_pcap_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot open '" + path + "'");
    return read_pcap(in);
}

// ---------------------------------------------------------------------------
// observations

std::vector<FrameObservation> observe(const Trace& trace) {
    std::vector<FrameObservation> out;
    out.reserve(trace.events.size());
    for (const auto& ev : trace.events) {
        const auto parsed = parse_frame(trace.wire_bytes(ev));
        out.push_back({ev.start_ns, parsed.spec.serialized_len(), parsed.spec.vlan.has_value(), parsed.seq});
    }
    return out;
}

std::vector<FrameObservation> observe(std::span<const CapturedFrame> frames) {
    std::vector<FrameObservation> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        FrameObservation obs;
        obs.start_ns = f.timestamp_ns;
        obs.frame_len = std::max<std::uint32_t>(f.original_len, static_cast<std::uint32_t>(f.bytes.size()));
        const auto& b = f.bytes;
        std::size_t type_off = 12;
        if (b.size() >= 18 && b[12] == (kVlanTpid >> 8) && b[13] == (kVlanTpid & 0xFF)) {
            obs.vlan = true;
            type_off = 16;
        }
        const auto seq_off = type_off + 2;
        if (b.size() >= seq_off + kSequenceBytes) {
            obs.seq = (static_cast<std::uint32_t>(b[seq_off]) << 24) | (static_cast<std::uint32_t>(b[seq_off + 1]) << 16) |
                      (static_cast<std::uint32_t>(b[seq_off + 2]) << 8) | b[seq_off + 3];
        }
        out.push_back(obs);
    }
    return out;
}

std::vector<FrameObservation> observe(const LiveRun& run) {
    const auto offsets = run.send_offsets_ns();
    const auto len = run.frame().serialized_len();
    const bool vlan = run.frame().vlan.has_value();
    std::vector<FrameObservation> out;
    out.reserve(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        out.push_back({offsets[i], len, vlan, static_cast<std::uint32_t>(i)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// measurement

namespace {

std::int64_t slot_bytes_of(const FrameObservation& obs) noexcept {
    const std::int64_t p = obs.frame_len - (obs.vlan ? kVlanTagBytes : 0);
    return p + overhead_bytes(obs.vlan);
}

std::int64_t median(std::vector<std::int64_t> values) {
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

}  // namespace

std::int64_t burst_split_threshold(const TransmissionPlan& plan) noexcept { return 2 * plan.period_ns; }

std::int64_t live_split_threshold(const TransmissionPlan& plan) noexcept {
    if (plan.bursts.size() < 2) return std::numeric_limits<std::int64_t>::max();
    std::int64_t min_gap = std::numeric_limits<std::int64_t>::max();
    for (std::size_t k = 1; k < plan.bursts.size(); ++k) {
        const auto& prev = plan.bursts[k - 1];
        const auto last_start = prev.start_offset_ns + (prev.frames - 1) * plan.period_ns;
        min_gap = std::min(min_gap, plan.bursts[k].start_offset_ns - last_start);
    }
    return std::max(2 * plan.period_ns, (plan.period_ns + min_gap) / 2);
}

CaptureReport measure(std::span<const FrameObservation> frames, LineRate rate,
                      std::optional<std::int64_t> split_threshold_ns) {
    if (frames.empty()) throw Error(ErrorCode::empty_capture, "capture contains no frames");

    CaptureReport report;
    report.rate = rate;
    report.frame_count = static_cast<std::int64_t>(frames.size());
    const auto bt = byte_time_ns(rate);

    std::vector<std::int64_t> deltas;
    deltas.reserve(frames.size());
    for (std::size_t i = 1; i < frames.size(); ++i) {
        const auto d = frames[i].start_ns - frames[i - 1].start_ns;
        if (d < 0) {
            throw Error(ErrorCode::non_monotone_timestamps,
                        "frame " + std::to_string(i) + " starts before frame " + std::to_string(i - 1));
        }
        deltas.push_back(d);
    }

    if (!deltas.empty()) {
        GapStats g;
        g.min_ns = *std::min_element(deltas.begin(), deltas.end());
        g.max_ns = *std::max_element(deltas.begin(), deltas.end());
        double sum = 0;
        for (auto d : deltas) sum += static_cast<double>(d);
        g.mean_ns = sum / static_cast<double>(deltas.size());
        double var = 0;
        for (auto d : deltas) var += (static_cast<double>(d) - g.mean_ns) * (static_cast<double>(d) - g.mean_ns);
        g.stddev_ns = std::sqrt(var / static_cast<double>(deltas.size()));
        report.gaps = g;
    }
    report.split_threshold_ns =
        split_threshold_ns.value_or(deltas.empty() ? 0 : 2 * median(deltas));

    // Burst segmentation and intra-burst period.
    std::int64_t intra_sum = 0;
    std::int64_t intra_count = 0;
    BurstSegment current{frames[0].start_ns, frames[0].start_ns, 1};
    for (std::size_t i = 1; i < frames.size(); ++i) {
        const auto d = deltas[i - 1];
        if (d > report.split_threshold_ns) {
            report.bursts.push_back(current);
            current = {frames[i].start_ns, frames[i].start_ns, 1};
        } else {
            intra_sum += d;
            ++intra_count;
            current.last_start_ns = frames[i].start_ns;
            ++current.frames;
        }
    }
    report.bursts.push_back(current);
    if (intra_count > 0) report.measured_period_ns = Rational(intra_sum, intra_count);

    // Load: slot time on the wire over the time the bursts occupy. Each burst
    // owns its frames' periods; without a period the last slot stands alone.
    std::int64_t slot_bytes_total = 0;
    for (const auto& f : frames) slot_bytes_total += slot_bytes_of(f);
    const Rational trailing =
        report.measured_period_ns ? *report.measured_period_ns : Rational(slot_bytes_of(frames.back()) * bt);
    Rational active(0);
    for (const auto& b : report.bursts) active = active + Rational(b.last_start_ns - b.first_start_ns) + trailing;
    report.measured_load = Rational(slot_bytes_total * bt) / active;

    const Rational span = Rational(frames.back().start_ns - frames.front().start_ns) + trailing;
    report.elapsed_ns = (span + Rational(1, 2)).floor();

    // Sequence continuity.
    auto& sc = report.sequence;
    sc.present = std::all_of(frames.begin(), frames.end(), [](const auto& f) { return f.seq.has_value(); });
    if (sc.present) {
        sc.first_seq = *frames[0].seq;
        auto prev = static_cast<std::int64_t>(*frames[0].seq);
        for (std::size_t i = 1; i < frames.size(); ++i) {
            const auto s = static_cast<std::int64_t>(*frames[i].seq);
            if (s > prev + 1) sc.missing += s - prev - 1;
            if (s <= prev) {
                ++sc.reordered;
                continue;
            }
            prev = s;
        }
    }
    return report;
}

Rational window_load(const Trace& trace, std::int64_t window_start_ns, std::int64_t width_ns) {
    if (width_ns <= 0) throw Error(ErrorCode::invalid_argument, "window width must be positive");
    const auto window_end = window_start_ns + width_ns;
    const auto& ev = trace.events;
    // First event that could overlap: its end lies after the window start.
    auto it = std::partition_point(ev.begin(), ev.end(), [&](const FrameEvent& e) { return e.end_ns <= window_start_ns; });
    std::int64_t covered = 0;
    for (; it != ev.end() && it->start_ns < window_end; ++it) {
        covered += std::min(it->end_ns, window_end) - std::max(it->start_ns, window_start_ns);
    }
    return Rational(covered, width_ns);
}

// ---------------------------------------------------------------------------
// verification

namespace {

bool within(const Rational& measured, const Rational& expected, double tol) {
    if (tol <= 0) return measured == expected;
    return std::abs(measured.to_double() - expected.to_double()) <= tol;
}

std::string join_counts(const std::vector<std::int64_t>& counts) {
    if (counts.empty()) return "[]";
    std::string out = "[";
    // Long uniform lists collapse to "n x k".
    const bool uniform = std::all_of(counts.begin(), counts.end(), [&](auto c) { return c == counts[0]; });
    if (uniform && counts.size() > 3) return std::to_string(counts.size()) + " x " + std::to_string(counts[0]);
    for (std::size_t i = 0; i < counts.size(); ++i) out += (i ? "," : "") + std::to_string(counts[i]);
    return out + "]";
}

std::vector<std::int64_t> expected_segments(const TransmissionPlan& plan) {
    const auto threshold = burst_split_threshold(plan);
    std::vector<std::int64_t> groups;
    std::int64_t prev_last_start = 0;
    for (const auto& b : plan.bursts) {
        if (b.frames == 0) continue;
        const auto first = b.start_offset_ns;
        if (!groups.empty() && first - prev_last_start <= threshold) {
            groups.back() += b.frames;
        } else {
            groups.push_back(b.frames);
        }
        prev_last_start = first + (b.frames - 1) * plan.period_ns;
    }
    return groups;
}

}  // namespace

Verdict verify(const CaptureReport& report, const TransmissionPlan& plan, const Tolerance& tol) {
    Verdict v;
    auto add = [&](std::string name, bool pass, std::string expected, std::string measured) {
        v.checks.push_back({std::move(name), pass, std::move(expected), std::move(measured)});
    };

    add("frame_count", report.frame_count == plan.frames_total, std::to_string(plan.frames_total),
        std::to_string(report.frame_count));

    const bool periodic = std::any_of(plan.bursts.begin(), plan.bursts.end(), [](const auto& b) { return b.frames > 1; });
    if (periodic) {
        const auto& mp = report.measured_period_ns;
        add("period_ns", mp && within(*mp, Rational(plan.period_ns), tol.period_ns), std::to_string(plan.period_ns),
            mp ? mp->to_string() : "absent");
        add("load", within(report.measured_load, plan.achieved_load, tol.load), plan.achieved_load.to_string(),
            report.measured_load.to_string());
    } else {
        add("period_ns", true, "n/a", report.measured_period_ns ? report.measured_period_ns->to_string() : "absent");
        add("load", true, "n/a", report.measured_load.to_string());
    }

    std::vector<std::int64_t> measured_groups;
    for (const auto& b : report.bursts) measured_groups.push_back(b.frames);
    const auto expected_groups = expected_segments(plan);
    add("bursts", measured_groups == expected_groups, join_counts(expected_groups), join_counts(measured_groups));

    const auto& sc = report.sequence;
    if (sc.present) {
        add("sequence", sc.first_seq == 0 && sc.missing == 0 && sc.reordered == 0, "contiguous from 0",
            "first=" + std::to_string(sc.first_seq) + " missing=" + std::to_string(sc.missing) +
                " reordered=" + std::to_string(sc.reordered));
    }

    v.pass = std::all_of(v.checks.begin(), v.checks.end(), [](const auto& c) { return c.pass; });
    return v;
}

}  // namespace loadgen
