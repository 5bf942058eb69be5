#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "loadgen/error.hpp"
#include "loadgen/wire_sim.hpp"
#include "oracles.hpp"

using namespace loadgen;

namespace {

constexpr std::int64_t kMs = 1'000'000;

LoadSpec spec_of(std::uint32_t p, const char* load, Feature feature) {
    LoadSpec spec;
    spec.frame.frame_len_p = p;
    spec.load = LoadFraction::from_percent(load);
    spec.feature = feature;
    return spec;
}

// Mean start-to-start period of a live run, from the port's own clock.
double mean_period_ns(const std::vector<SteadyClock::time_point>& times) {
    REQUIRE(times.size() >= 2);
    return double(std::chrono::duration_cast<std::chrono::nanoseconds>(times.back() - times.front()).count()) /
           double(times.size() - 1);
}

struct FailingBuf : std::streambuf {
    int overflow(int) override { return traits_type::eof(); }
};

}  // namespace

TEST_CASE("long-frame trace has exact spacing") {
    const auto spec = spec_of(1514, "25", FramesFeature{40});
    const auto trace = execute(make_plan(spec), spec.frame, 1000);
    REQUIRE(trace.events.size() == 40);
    CHECK(trace.events.front().start_ns == 1000);
    for (std::size_t i = 1; i < trace.events.size(); ++i) {
        CHECK(trace.events[i].start_ns - trace.events[i - 1].start_ns == 492160);
        CHECK(trace.events[i].seq == i);
    }
    for (const auto& ev : trace.events) CHECK(ev.end_ns - ev.start_ns == 123040);
}

TEST_CASE("short-frame trace ends inside the duration") {
    const auto spec = spec_of(60, "25", DurationFeature{20 * kMs});
    const auto trace = execute(make_plan(spec), spec.frame);
    REQUIRE(trace.events.size() == 744);
    // The slot of the last frame closes at T'.
    const auto& last = trace.events.back();
    CHECK(last.start_ns + trace.plan.period_ns == 19998720);
    CHECK(last.end_ns <= 20 * kMs);
}

TEST_CASE("single frame lands at t0") {
    const auto spec = spec_of(60, "100", FramesFeature{1});
    const auto trace = execute(make_plan(spec), spec.frame, 77);
    REQUIRE(trace.events.size() == 1);
    CHECK(trace.events[0].start_ns == 77);
}

TEST_CASE("burst events follow the burst offsets") {
    const auto spec = spec_of(128, "40", BurstFeature{4, 2 * kMs, 3 * kMs});
    const auto plan = make_plan(spec);
    const auto trace = execute(plan, spec.frame);
    std::size_t i = 0;
    for (std::size_t k = 0; k < plan.bursts.size(); ++k) {
        for (std::int64_t j = 0; j < plan.bursts[k].frames; ++j, ++i) {
            CHECK(trace.events[i].burst_index == k);
            CHECK(trace.events[i].start_ns == std::int64_t(k) * 5 * kMs + j * plan.period_ns);
        }
    }
    CHECK(i == trace.events.size());
}

TEST_CASE("random plans keep slots disjoint and inside the schedule") {
    auto rng = oracle::rng();
    for (int c = 0; c < oracle::kCases; ++c) {
        LoadSpec spec = spec_of(std::uint32_t(60 + rng() % 1455), std::to_string(1 + rng() % 100).c_str(),
                                FramesFeature{1 + std::int64_t(rng() % 300)});
        if (rng() % 2) spec.frame.vlan = VlanTag{};
        const auto plan = make_plan(spec);
        const auto trace = execute(plan, spec.frame);
        REQUIRE(std::int64_t(trace.events.size()) == plan.frames_total);
        for (std::size_t i = 1; i < trace.events.size(); ++i) {
            if (trace.events[i].start_ns < trace.events[i - 1].start_ns + plan.period_ns) FAIL("overlap in case " << c);
        }
        CHECK(trace.events.back().start_ns + plan.period_ns == plan.elapsed_ns);
    }
}

TEST_CASE("pcap of an empty trace is the global header") {
    const auto spec = spec_of(60, "25", FramesFeature{1});
    auto trace = execute(make_plan(spec), spec.frame);
    trace.events.clear();
    std::ostringstream out;
    CHECK(write_pcap(trace, out) == 24);
    const auto data = out.str();
    REQUIRE(data.size() == 24);
    const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
    CHECK(oracle::read_le32(p) == 0xA1B23C4D);
    CHECK(oracle::read_le16(p + 4) == 2);
    CHECK(oracle::read_le16(p + 6) == 4);
    CHECK(oracle::read_le32(p + 16) >= 1518);
    CHECK(oracle::read_le32(p + 20) == 1);
}

TEST_CASE("pcap size is header plus records") {
    auto spec = spec_of(1514, "25", FramesFeature{40});
    spec.frame.vlan = VlanTag{1, 0, 5};
    const auto trace = execute(make_plan(spec), spec.frame);
    std::ostringstream out;
    const auto n = write_pcap(trace, out);
    std::uint64_t expect = 24;
    for (const auto& ev : trace.events) expect += 16 + trace.wire_bytes(ev).size();
    CHECK(n == expect);
    CHECK(out.str().size() == expect);
    // Walk the records independently.
    const auto data = out.str();
    const auto* p = reinterpret_cast<const std::uint8_t*>(data.data()) + 24;
    for (const auto& ev : trace.events) {
        const auto ts = std::int64_t(oracle::read_le32(p)) * 1'000'000'000 + oracle::read_le32(p + 4);
        CHECK(ts == ev.start_ns);
        CHECK(oracle::read_le32(p + 8) == 1518);
        CHECK(oracle::read_le32(p + 12) == 1518);
        p += 16 + 1518;
    }
}

TEST_CASE("sink failure is reported") {
    const auto spec = spec_of(60, "25", FramesFeature{3});
    const auto trace = execute(make_plan(spec), spec.frame);
    FailingBuf buf;
    std::ostream sink(&buf);
    try {
        write_pcap(trace, sink);
        FAIL("expected sink-write");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::sink_write);
    }
    CHECK_THROWS_AS(write_pcap_file(trace, "/nonexistent-dir/x.pcap"), Error);
}

TEST_CASE("virtual port counts every frame of the short-frame run") {
    const auto spec = spec_of(60, "25", DurationFeature{20 * kMs});
    const auto plan = make_plan(spec);
    auto port = std::make_shared<VirtualPort>("virtual:count");
    auto run = transmit(plan, spec.frame, port);
    const auto done = run->wait();
    CHECK(done.outcome == RunOutcome::completed);
    CHECK(done.frames_sent == 744);
    CHECK(port->frames_received() == 744);
}

TEST_CASE("closing the port mid-run fails the run early") {
    const auto spec = spec_of(60, "1", DurationFeature{500 * kMs});
    const auto plan = make_plan(spec);
    auto port = std::make_shared<VirtualPort>("virtual:close");
    auto run = transmit(plan, spec.frame, port);
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    port->close();
    const auto done = run->wait();
    CHECK(done.outcome == RunOutcome::failed);
    CHECK(done.frames_sent < plan.frames_total);
    CHECK(done.error.rfind("send-failure", 0) == 0);
}

TEST_CASE("stop request ends the run with the frames sent so far") {
    const auto spec = spec_of(60, "1", DurationFeature{2'000 * kMs});
    const auto plan = make_plan(spec);
    auto port = std::make_shared<VirtualPort>("virtual:stop");
    auto run = transmit(plan, spec.frame, port);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    run->request_stop();
    const auto done = run->wait();
    CHECK(done.outcome == RunOutcome::stopped);
    CHECK(done.frames_sent < plan.frames_total);
    CHECK(std::int64_t(port->frames_received()) == done.frames_sent);
}

TEST_CASE("virtual port pacing stays within 5% of the period") {
    // Frames 1 ms apart: long enough for the host timer, short enough to be quick.
    const auto spec = spec_of(1514, "12.3", FramesFeature{200});
    const auto plan = make_plan(spec);
    auto port = std::make_shared<VirtualPort>("virtual:pace");
    auto run = transmit(plan, spec.frame, port);
    REQUIRE(run->wait().outcome == RunOutcome::completed);
    const double mean = mean_period_ns(port->send_times());
    MESSAGE("mean period " << mean << " ns, planned " << plan.period_ns << " ns");
    CHECK(std::abs(mean - double(plan.period_ns)) <= 0.05 * double(plan.period_ns));
}

TEST_CASE("loopback interface accepts the short-frame run") {
    std::shared_ptr<TransmitPort> port;
    try {
        port = open_port("lo");
    } catch (const Error& e) {
        MESSAGE("loopback raw socket unavailable here: " << e.what());
        return;
    }
    const auto spec = spec_of(60, "25", DurationFeature{20 * kMs});
    auto run = transmit(make_plan(spec), spec.frame, port);
    const auto done = run->wait();
    CHECK(done.outcome == RunOutcome::completed);
    CHECK(done.frames_sent == 744);
}

TEST_CASE("missing interface is port-unavailable") {
    try {
        open_port("missing0");
        FAIL("expected port-unavailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::port_unavailable);
    }
}
