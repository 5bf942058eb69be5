#include "loadgen/frame_model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <random>

#include "loadgen/error.hpp"

namespace loadgen {

namespace {

int hex_digit(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

template <typename T>
T parse_unsigned(std::string_view text, int base, const char* what) {
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value, base);
    if (text.empty() || ec != std::errc{} || ptr != last) {
        throw Error(ErrorCode::invalid_argument, std::string("invalid ") + what + ": '" + std::string(text) + "'");
    }
    return value;
}

void put_be16(std::uint8_t* out, std::uint16_t v) noexcept {
    out[0] = static_cast<std::uint8_t>(v >> 8);
    out[1] = static_cast<std::uint8_t>(v & 0xFF);
}

void put_be32(std::uint8_t* out, std::uint32_t v) noexcept {
    out[0] = static_cast<std::uint8_t>(v >> 24);
    out[1] = static_cast<std::uint8_t>(v >> 16);
    out[2] = static_cast<std::uint8_t>(v >> 8);
    out[3] = static_cast<std::uint8_t>(v);
}

std::uint16_t get_be16(const std::uint8_t* in) noexcept {
    return static_cast<std::uint16_t>((in[0] << 8) | in[1]);
}

std::uint32_t get_be32(const std::uint8_t* in) noexcept {
    return (static_cast<std::uint32_t>(in[0]) << 24) | (static_cast<std::uint32_t>(in[1]) << 16) |
           (static_cast<std::uint32_t>(in[2]) << 8) | static_cast<std::uint32_t>(in[3]);
}

// Pseudo-random payloads carry their seed right after the sequence number so
// that a parser can regenerate and recognize the stream.
void fill_pseudo_random(std::span<std::uint8_t> out, std::uint32_t seed, std::uint32_t seq) {
    std::mt19937 gen(seed ^ (seq * 0x9E3779B9u));
    for (auto& b : out) b = static_cast<std::uint8_t>(gen() & 0xFF);
}

void fill_payload(std::span<std::uint8_t> tail, const PayloadFill& fill, std::uint32_t seq) {
    switch (fill.kind) {
        case PayloadFill::Kind::constant:
            std::fill(tail.begin(), tail.end(), static_cast<std::uint8_t>(fill.value));
            break;
        case PayloadFill::Kind::incrementing:
            for (std::size_t k = 0; k < tail.size(); ++k) tail[k] = static_cast<std::uint8_t>(k & 0xFF);
            break;
        case PayloadFill::Kind::pseudo_random:
            put_be32(tail.data(), fill.value);
            fill_pseudo_random(tail.subspan(4), fill.value, seq);
            break;
    }
}

PayloadFill detect_fill(std::span<const std::uint8_t> tail) {
    if (std::all_of(tail.begin(), tail.end(), [&](std::uint8_t b) { return b == tail[0]; })) {
        return {PayloadFill::Kind::constant, tail[0]};
    }
    bool incrementing = true;
    for (std::size_t k = 0; k < tail.size() && incrementing; ++k) {
        incrementing = tail[k] == static_cast<std::uint8_t>(k & 0xFF);
    }
    if (incrementing) return {PayloadFill::Kind::incrementing, 0};
    return {PayloadFill::Kind::pseudo_random, get_be32(tail.data())};
}

}  // namespace

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_frame_length: return "invalid-frame-length";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::truncated_frame: return "truncated-frame";
        case ErrorCode::overshoot_violation: return "overshoot-violation";
        case ErrorCode::empty_plan: return "empty-plan";
        case ErrorCode::empty_capture: return "empty-capture";
        case ErrorCode::non_monotone_timestamps: return "non-monotone-timestamps";
        case ErrorCode::bad_magic: return "bad-magic";
        case ErrorCode::truncated_record: return "truncated-record";
        case ErrorCode::sink_write: return "sink-write";
        case ErrorCode::port_unavailable: return "port-unavailable";
        case ErrorCode::port_busy: return "port-busy";
        case ErrorCode::send_failure: return "send-failure";
        case ErrorCode::validation_error: return "validation-error";
        case ErrorCode::feature_conflict: return "feature-conflict";
        case ErrorCode::unknown_run: return "unknown-run";
        case ErrorCode::not_running: return "not-running";
        case ErrorCode::invalid_state: return "invalid-state";
        case ErrorCode::unauthorized: return "unauthorized";
    }
    return "unknown";
}

MacAddress MacAddress::parse(std::string_view text) {
    std::array<std::uint8_t, 6> octets{};
    if (text.size() != 17) {
        throw Error(ErrorCode::invalid_argument, "invalid MAC address: '" + std::string(text) + "'");
    }
    for (std::size_t i = 0; i < 6; ++i) {
        const auto hi = hex_digit(text[i * 3]);
        const auto lo = hex_digit(text[i * 3 + 1]);
        const bool sep_ok = i == 5 || text[i * 3 + 2] == ':' || text[i * 3 + 2] == '-';
        if (hi < 0 || lo < 0 || !sep_ok) {
            throw Error(ErrorCode::invalid_argument, "invalid MAC address: '" + std::string(text) + "'");
        }
        octets[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return MacAddress(octets);
}

std::string MacAddress::to_string() const {
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets_[0], octets_[1], octets_[2], octets_[3],
                  octets_[4], octets_[5]);
    return buf;
}

void VlanTag::validate() const {
    if (priority > 7) throw Error(ErrorCode::invalid_argument, "vlan priority must be in [0,7]", "vlan.pcp");
    if (cfi > 1) throw Error(ErrorCode::invalid_argument, "vlan cfi must be 0 or 1", "vlan.cfi");
    if (vid > 4094) throw Error(ErrorCode::invalid_argument, "vlan id must be in [0,4094]", "vlan.vid");
}

std::array<std::uint8_t, 4> VlanTag::serialize() const {
    validate();
    const auto tci = static_cast<std::uint16_t>((priority << 13) | (cfi << 12) | vid);
    return {static_cast<std::uint8_t>(kVlanTpid >> 8), static_cast<std::uint8_t>(kVlanTpid & 0xFF),
            static_cast<std::uint8_t>(tci >> 8), static_cast<std::uint8_t>(tci & 0xFF)};
}

VlanTag VlanTag::deserialize(std::span<const std::uint8_t, 4> bytes) {
    const auto tci = get_be16(bytes.data() + 2);
    return {static_cast<std::uint8_t>(tci >> 13), static_cast<std::uint8_t>((tci >> 12) & 1),
            static_cast<std::uint16_t>(tci & 0x0FFF)};
}

VlanTag VlanTag::parse(std::string_view text) {
    const auto d1 = text.find('.');
    const auto d2 = d1 == std::string_view::npos ? d1 : text.find('.', d1 + 1);
    if (d2 == std::string_view::npos) {
        throw Error(ErrorCode::invalid_argument, "vlan must be 'pcp.cfi.vid': '" + std::string(text) + "'", "vlan");
    }
    VlanTag tag{parse_unsigned<std::uint8_t>(text.substr(0, d1), 10, "vlan pcp"),
                parse_unsigned<std::uint8_t>(text.substr(d1 + 1, d2 - d1 - 1), 10, "vlan cfi"),
                parse_unsigned<std::uint16_t>(text.substr(d2 + 1), 10, "vlan vid")};
    tag.validate();
    return tag;
}

std::string VlanTag::to_string() const {
    return std::to_string(priority) + "." + std::to_string(cfi) + "." + std::to_string(vid);
}

PayloadFill PayloadFill::parse(std::string_view text) {
    if (text == "inc" || text == "incrementing") return {Kind::incrementing, 0};
    if (text.starts_with("const:")) {
        auto v = text.substr(6);
        const int base = (v.starts_with("0x") || v.starts_with("0X")) ? 16 : 10;
        if (base == 16) v.remove_prefix(2);
        return {Kind::constant, parse_unsigned<std::uint8_t>(v, base, "fill byte")};
    }
    if (text.starts_with("random:")) {
        return {Kind::pseudo_random, parse_unsigned<std::uint32_t>(text.substr(7), 10, "fill seed")};
    }
    throw Error(ErrorCode::invalid_argument, "fill must be const:0xNN, inc or random:SEED", "payload_fill");
}

std::string PayloadFill::to_string() const {
    switch (kind) {
        case Kind::constant: {
            char buf[16];
            std::snprintf(buf, sizeof buf, "const:0x%02x", value & 0xFF);
            return buf;
        }
        case Kind::incrementing: return "inc";
        case Kind::pseudo_random: return "random:" + std::to_string(value);
    }
    return {};
}

void FrameSpec::validate() const {
    if (frame_len_p < kMinFrameLen || frame_len_p > kMaxFrameLen) {
        throw Error(ErrorCode::invalid_frame_length,
                    "frame length " + std::to_string(frame_len_p) + " outside [60, 1514]", "frame_len_p");
    }
    if (vlan) vlan->validate();
    if (ethertype == kVlanTpid) {
        throw Error(ErrorCode::invalid_argument, "ethertype 0x8100 is reserved for the VLAN tag", "ethertype");
    }
    if (payload_fill.kind == PayloadFill::Kind::constant && payload_fill.value > 0xFF) {
        throw Error(ErrorCode::invalid_argument, "constant fill byte must be <= 0xff", "payload_fill");
    }
}

std::int64_t bits_per_second(LineRate rate) noexcept {
    return rate == LineRate::gigabit ? 1'000'000'000 : 100'000'000;
}

std::int64_t byte_time_ns(LineRate rate) noexcept { return rate == LineRate::gigabit ? 8 : 80; }

LineRate parse_line_rate(std::string_view text) {
    if (text == "100M" || text == "100Mbps" || text == "100m" || text == "100000000") return LineRate::fast_ethernet;
    if (text == "1G" || text == "1Gbps" || text == "1g" || text == "1000M" || text == "1000Mbps" ||
        text == "1000000000") {
        return LineRate::gigabit;
    }
    throw Error(ErrorCode::invalid_argument, "line rate must be 100M or 1G: '" + std::string(text) + "'",
                "line_rate");
}

std::string to_string(LineRate rate) { return rate == LineRate::gigabit ? "1G" : "100M"; }

std::uint32_t overhead_bytes(bool vlan) noexcept { return kBaseOverheadBytes + (vlan ? kVlanTagBytes : 0); }

WireSlot slot_size(const FrameSpec& spec) {
    spec.validate();
    const auto o = overhead_bytes(spec.vlan.has_value());
    return {spec.frame_len_p, o, spec.frame_len_p + o};
}

std::vector<std::uint8_t> build_frame(const FrameSpec& spec, std::uint32_t seq) {
    spec.validate();
    std::vector<std::uint8_t> out(spec.serialized_len());
    auto* p = out.data();
    std::copy_n(spec.dst.octets().data(), 6, p);
    std::copy_n(spec.src.octets().data(), 6, p + 6);
    std::size_t off = 12;
    if (spec.vlan) {
        const auto tag = spec.vlan->serialize();
        std::copy(tag.begin(), tag.end(), p + off);
        off += kVlanTagBytes;
    }
    put_be16(p + off, spec.ethertype);
    off += 2;
    put_be32(p + off, seq);
    off += kSequenceBytes;
    fill_payload(std::span<std::uint8_t>(out).subspan(off), spec.payload_fill, seq);
    return out;
}

ParsedFrame parse_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMinFrameLen) {
        throw Error(ErrorCode::truncated_frame, "frame of " + std::to_string(bytes.size()) + " bytes is truncated");
    }
    ParsedFrame parsed;
    auto& spec = parsed.spec;
    std::array<std::uint8_t, 6> mac{};
    std::copy_n(bytes.data(), 6, mac.begin());
    spec.dst = MacAddress(mac);
    std::copy_n(bytes.data() + 6, 6, mac.begin());
    spec.src = MacAddress(mac);

    std::size_t off = 12;
    if (get_be16(bytes.data() + 12) == kVlanTpid) {
        if (bytes.size() < kMinFrameLen + kVlanTagBytes) {
            throw Error(ErrorCode::truncated_frame,
                        "tagged frame of " + std::to_string(bytes.size()) + " bytes is truncated");
        }
        spec.vlan = VlanTag::deserialize(bytes.subspan<12, 4>());
        off += kVlanTagBytes;
    }
    spec.ethertype = get_be16(bytes.data() + off);
    off += 2;
    spec.frame_len_p = static_cast<std::uint32_t>(bytes.size() - (spec.vlan ? kVlanTagBytes : 0));
    if (spec.frame_len_p > kMaxFrameLen) {
        throw Error(ErrorCode::invalid_frame_length,
                    "frame length " + std::to_string(spec.frame_len_p) + " exceeds 1514", "frame_len_p");
    }
    parsed.seq = get_be32(bytes.data() + off);
    off += kSequenceBytes;
    spec.payload_fill = detect_fill(bytes.subspan(off));
    return parsed;
}

std::string ethertype_to_string(std::uint16_t ethertype) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04x", ethertype);
    return buf;
}

std::uint16_t parse_ethertype(std::string_view text) {
    if (text.starts_with("0x") || text.starts_with("0X")) {
        return parse_unsigned<std::uint16_t>(text.substr(2), 16, "ethertype");
    }
    return parse_unsigned<std::uint16_t>(text, 10, "ethertype");
}

}  // namespace loadgen
