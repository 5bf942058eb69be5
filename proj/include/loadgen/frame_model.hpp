#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace loadgen {

inline constexpr std::uint16_t kProfinetEthertype = 0x8892;
inline constexpr std::uint16_t kVlanTpid = 0x8100;

inline constexpr std::uint32_t kMinFrameLen = 60;
inline constexpr std::uint32_t kMaxFrameLen = 1514;

// Fixed per-frame wire overhead, in bytes.
inline constexpr std::uint32_t kPreambleBytes = 7;
inline constexpr std::uint32_t kStartDelimiterBytes = 1;
inline constexpr std::uint32_t kFcsBytes = 4;
inline constexpr std::uint32_t kMinInterframeGapBytes = 12;
inline constexpr std::uint32_t kVlanTagBytes = 4;
inline constexpr std::uint32_t kBaseOverheadBytes =
    kPreambleBytes + kStartDelimiterBytes + kFcsBytes + kMinInterframeGapBytes;

inline constexpr std::uint32_t kEthernetHeaderBytes = 14;
inline constexpr std::uint32_t kSequenceBytes = 4;

/// Frame sizes offered as presets by the CLI and HMI.
inline constexpr std::array<std::uint32_t, 6> kFrameSizePresets{60, 128, 256, 512, 1020, 1514};

class MacAddress {
public:
    constexpr MacAddress() = default;
    constexpr explicit MacAddress(std::array<std::uint8_t, 6> octets) : octets_(octets) {}

    /// Accepts `aa:bb:cc:dd:ee:ff` (either case, ':' or '-' separators).
    static MacAddress parse(std::string_view text);
    /// Lowercase colon-separated form.
    std::string to_string() const;

    constexpr const std::array<std::uint8_t, 6>& octets() const noexcept { return octets_; }

    friend constexpr bool operator==(const MacAddress&, const MacAddress&) = default;

private:
    std::array<std::uint8_t, 6> octets_{};
};

/// 802.1Q tag. Serialized as TPID 0x8100 then PCP(3)|CFI(1)|VID(12), big-endian.
struct VlanTag {
    std::uint8_t priority = 0;
    std::uint8_t cfi = 0;
    std::uint16_t vid = 0;

    void validate() const;
    std::array<std::uint8_t, 4> serialize() const;
    /// Reads the 4 tag bytes starting at the TPID.
    static VlanTag deserialize(std::span<const std::uint8_t, 4> bytes);

    /// `pcp.cfi.vid` textual form.
    static VlanTag parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const VlanTag&, const VlanTag&) = default;
};

/// Payload bytes following the 4-byte sequence number.
struct PayloadFill {
    enum class Kind { constant, incrementing, pseudo_random };

    Kind kind = Kind::constant;
    /// Fill byte for `constant`, seed for `pseudo_random`; unused otherwise.
    std::uint32_t value = 0;

    /// `const:0xNN`, `inc`, or `random:SEED`.
    static PayloadFill parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const PayloadFill&, const PayloadFill&) = default;
};

/// User-facing frame definition.
///
/// `frame_len_p` counts destination MAC through the end of the payload with
/// the FCS excluded, and never includes a VLAN tag. A tag is accounted as wire
/// overhead, so a tagged frame serializes to `frame_len_p + 4` bytes while
/// its slot is `frame_len_p + 28`.
struct FrameSpec {
    MacAddress src{{0x02, 0x00, 0x00, 0x00, 0x00, 0x01}};
    MacAddress dst{{0x02, 0x00, 0x00, 0x00, 0x00, 0x02}};
    std::uint16_t ethertype = kProfinetEthertype;
    std::optional<VlanTag> vlan;
    std::uint32_t frame_len_p = kMinFrameLen;
    PayloadFill payload_fill;

    /// Throws Error(invalid_frame_length) or Error(invalid_argument).
    void validate() const;

    /// Length of the serialized frame (P plus the tag when present).
    std::uint32_t serialized_len() const noexcept { return frame_len_p + (vlan ? kVlanTagBytes : 0); }

    friend bool operator==(const FrameSpec&, const FrameSpec&) = default;
};

/// On-wire accounting for one frame: slot = P + overhead, where overhead
/// is the per-frame wire cost outside P, VLAN tag included.
struct WireSlot {
    std::uint32_t p_bytes = 0;
    std::uint32_t overhead_bytes = 0;
    std::uint32_t slot_bytes = 0;

    friend bool operator==(const WireSlot&, const WireSlot&) = default;
};

enum class LineRate { fast_ethernet, gigabit };

std::int64_t bits_per_second(LineRate rate) noexcept;
/// Exact nanoseconds per byte: 80 at 100 Mbps, 8 at 1 Gbps.
std::int64_t byte_time_ns(LineRate rate) noexcept;
/// Accepts "100M", "100Mbps", "1G", "1Gbps", "1000M".
LineRate parse_line_rate(std::string_view text);
std::string to_string(LineRate rate);

std::uint32_t overhead_bytes(bool vlan) noexcept;

WireSlot slot_size(const FrameSpec& spec);

std::vector<std::uint8_t> build_frame(const FrameSpec& spec, std::uint32_t seq);

struct ParsedFrame {
    FrameSpec spec;
    std::uint32_t seq = 0;
};

/// Inverse of build_frame. Frames whose TPID is not 0x8100 are treated as
/// untagged; payloads that match no known fill pattern are reported as
/// pseudo_random with the seed read from the payload.
ParsedFrame parse_frame(std::span<const std::uint8_t> bytes);

/// Ethertype as `0xNNNN`.
std::string ethertype_to_string(std::uint16_t ethertype);
std::uint16_t parse_ethertype(std::string_view text);

}  // namespace loadgen
