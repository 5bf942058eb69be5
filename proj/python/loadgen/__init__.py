"""Deterministic Ethernet load planning and capture analysis."""

from ._loadgen import (
    LoadgenError,
    analyze_pcap,
    build_frame,
    elapsed,
    extra_gap,
    format_duration,
    frames_for_duration,
    make_plan,
    occupancy,
    parse_duration,
    parse_frame,
    period,
    simulate,
    slot_size,
    time_deficit,
    total_gap,
    write_pcap,
)

__all__ = [
    "LoadgenError",
    "analyze_pcap",
    "build_frame",
    "elapsed",
    "extra_gap",
    "format_duration",
    "frames_for_duration",
    "make_plan",
    "occupancy",
    "parse_duration",
    "parse_frame",
    "period",
    "simulate",
    "slot_size",
    "time_deficit",
    "total_gap",
    "write_pcap",
]
