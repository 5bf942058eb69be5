#include <doctest.h>

#include "loadgen/error.hpp"
#include "loadgen/load_engine.hpp"
#include "oracles.hpp"

using namespace loadgen;

namespace {

LoadFraction pct(const char* text) { return LoadFraction::from_percent(text); }

LoadSpec case_spec(std::uint32_t p, const char* load, Feature feature, bool vlan = false) {
    LoadSpec spec;
    spec.frame.frame_len_p = p;
    if (vlan) spec.frame.vlan = VlanTag{};
    spec.load = pct(load);
    spec.feature = feature;
    return spec;
}

constexpr std::int64_t kMs = 1'000'000;
constexpr std::int64_t kSec = 1'000'000'000;

}  // namespace

TEST_CASE("extra gap examples") {
    CHECK(extra_gap(1538, pct("25")) == 4614);
    CHECK(extra_gap(84, pct("25")) == 252);
    CHECK(extra_gap(84, pct("100")) == 0);
    CHECK(extra_gap(1538, pct("100")) == 0);
}

TEST_CASE("extra gap at 30% matches a brute-force scan") {
    const auto scanned = oracle::extra_gap_scan(84, 30, 100, 1000);
    CHECK(scanned == 196);
    CHECK(extra_gap(84, pct("30")) == scanned);
}

TEST_CASE("extra gap agrees with the scan over a grid") {
    for (std::int64_t s : {84, 88, 152, 280, 536, 1044, 1048, 1538, 1542}) {
        for (int tenth = 1; tenth <= 1000; tenth += 7) {
            const auto load = LoadFraction(Rational(tenth, 1000));
            const auto expect = oracle::extra_gap_scan(s, tenth, 1000, 2'000'000);
            if (extra_gap(s, load) != expect) FAIL("S=" << s << " L=" << tenth << "/1000");
        }
    }
}

TEST_CASE("total gap adds the minimum gap") {
    CHECK(total_gap(4614) == 4626);
    CHECK(total_gap(252) == 264);
    CHECK(total_gap(0) == 12);
}

TEST_CASE("occupancy and period") {
    CHECK(occupancy(1538, LineRate::fast_ethernet) == 123040);
    CHECK(occupancy(84, LineRate::fast_ethernet) == 6720);
    CHECK(occupancy(84, LineRate::gigabit) == 672);
    CHECK(period(1538, 4614, LineRate::fast_ethernet) == 492160);
    CHECK(period(84, 252, LineRate::fast_ethernet) == 26880);
    CHECK(period(84, 0, LineRate::fast_ethernet) == occupancy(84, LineRate::fast_ethernet));
}

TEST_CASE("frames for a duration") {
    CHECK(frames_for_duration(LineRate::fast_ethernet, 84, Rational(1, 4), 20 * kMs) == 744);
    CHECK(frames_for_duration(LineRate::fast_ethernet, 1048, Rational(1, 2), kSec) == 5963);
    CHECK(frames_for_duration(LineRate::fast_ethernet, 84, Rational(1, 4), 0) == 0);
    CHECK(oracle::frames_scan(20 * kMs, 84 + 252, 80) == 744);
    CHECK(oracle::frames_scan(kSec, 1048 + 1048, 80) == 5963);
}

TEST_CASE("elapsed and deficit") {
    CHECK(elapsed(744, 26880) == 19998720);
    CHECK(elapsed(0, 26880) == 0);
    CHECK(elapsed(40, 492160) == 19686400);
    CHECK(time_deficit(20 * kMs, 19998720, 26880) == 1280);
    CHECK(time_deficit(19998720, 19998720, 26880) == 0);
    CHECK(time_deficit(20 * kMs, 19998720, 26880) < 26880);
}

TEST_CASE("plan for 40 long frames") {
    const auto plan = make_plan(case_spec(1514, "25", FramesFeature{40}));
    CHECK(plan.slot.slot_bytes == 1538);
    CHECK(plan.total_gap_bytes == 4626);
    CHECK(plan.period_ns == 492160);
    CHECK(plan.elapsed_ns == 19686400);
    CHECK_FALSE(plan.time_deficit_ns.has_value());
    CHECK(plan.achieved_load == Rational(1, 4));
}

TEST_CASE("plan for 20 ms of short frames") {
    const auto plan = make_plan(case_spec(60, "25", DurationFeature{20 * kMs}));
    CHECK(plan.frames_total == 744);
    CHECK(plan.elapsed_ns == 19998720);
    REQUIRE(plan.time_deficit_ns.has_value());
    CHECK(*plan.time_deficit_ns == 1280);
    // A 745th frame would not finish inside the duration.
    CHECK(plan.elapsed_ns + plan.occupancy_ns > 20 * kMs);
}

TEST_CASE("plan for 20 bursts of tagged frames") {
    const auto plan = make_plan(case_spec(1020, "50", BurstFeature{20, kSec, kSec}, true));
    CHECK(plan.slot.slot_bytes == 1048);
    REQUIRE(plan.bursts.size() == 20);
    for (std::size_t k = 0; k < plan.bursts.size(); ++k) {
        CHECK(plan.bursts[k].frames == 5963);
        CHECK(plan.bursts[k].start_offset_ns == std::int64_t(k) * 2 * kSec);
    }
    CHECK(plan.frames_total == 119260);
    CHECK(plan.nominal_span_ns == 39 * kSec);
    CHECK(plan.elapsed_ns < 39 * kSec);
}

TEST_CASE("invalid loads and features") {
    CHECK_THROWS_AS(pct("0"), Error);
    CHECK_THROWS_AS(pct("100.5"), Error);
    CHECK_THROWS_AS(pct("-3"), Error);
    CHECK(pct("12.5").value() == Rational(1, 8));
    CHECK_THROWS_AS(make_plan(case_spec(60, "25", FramesFeature{0})), Error);
    CHECK_THROWS_AS(make_plan(case_spec(60, "25", BurstFeature{0, kSec, kSec})), Error);
    try {
        make_plan(case_spec(60, "25", DurationFeature{1000}));
        FAIL("expected empty plan");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_plan);
    }
}

TEST_CASE("achieved load is bounded by and tight against the request") {
    auto rng = oracle::rng();
    int tested = 0;
    while (tested < oracle::kCases) {
        const std::int64_t s = 84 + std::int64_t(rng() % (1542 - 84 + 1));
        const std::int64_t den = 1 + std::int64_t(rng() % 10000);
        const std::int64_t num = 1 + std::int64_t(rng() % den);
        const Rational l(num, den);
        const auto gap = extra_gap(s, LoadFraction(l));
        if (gap == 0) continue;
        const Rational achieved(s, s + gap);
        const Rational looser(s, s + gap - 1);
        if (!(achieved <= l && l < looser)) FAIL("S=" << s << " L=" << l.to_string() << " gap=" << gap);
        ++tested;
    }
    CHECK(tested == oracle::kCases);
}

TEST_CASE("extra gap is monotone in load") {
    auto rng = oracle::rng();
    for (int i = 0; i < oracle::kCases; ++i) {
        const std::int64_t s = 84 + std::int64_t(rng() % 1459);
        const std::int64_t a = 1 + std::int64_t(rng() % 1000);
        const std::int64_t b = 1 + std::int64_t(rng() % 1000);
        const auto lo = std::min(a, b), hi = std::max(a, b);
        CHECK(extra_gap(s, LoadFraction(Rational(lo, 1000))) >= extra_gap(s, LoadFraction(Rational(hi, 1000))));
    }
}

TEST_CASE("duration plans never overrun and leave no room for another frame") {
    auto rng = oracle::rng();
    for (int i = 0; i < oracle::kCases; ++i) {
        const auto p = std::uint32_t(60 + rng() % 1455);
        const auto percent = std::to_string(1 + rng() % 100);
        const auto spec0 = case_spec(p, percent.c_str(), FramesFeature{1}, rng() % 2);
        const auto probe = make_plan(spec0);
        const std::int64_t t = probe.period_ns + std::int64_t(rng() % (50 * kMs));
        auto spec = spec0;
        spec.feature = DurationFeature{t};
        spec.rate = rng() % 2 ? LineRate::gigabit : LineRate::fast_ethernet;
        const auto plan = make_plan(spec);
        if (!(plan.elapsed_ns <= t && t < plan.elapsed_ns + plan.period_ns)) FAIL("case " << i);
        const auto bt = byte_time_ns(spec.rate);
        CHECK(plan.frames_total == oracle::frames_scan(t, plan.slot.slot_bytes + plan.extra_gap_bytes, bt));
        CHECK(*plan.time_deficit_ns == t - plan.elapsed_ns);
    }
}

TEST_CASE("planning is deterministic") {
    const auto spec = case_spec(1020, "33.3", BurstFeature{7, 3 * kMs, 2 * kMs}, true);
    CHECK(make_plan(spec) == make_plan(spec));
}

TEST_CASE("duration text") {
    CHECK(parse_duration("20ms") == 20 * kMs);
    CHECK(parse_duration("1s") == kSec);
    CHECK(parse_duration("2min") == 120 * kSec);
    CHECK(parse_duration("1h") == 3600 * kSec);
    CHECK(parse_duration("15us") == 15000);
    CHECK(parse_duration("15\xC2\xB5s") == 15000);
    CHECK(parse_duration("1.5ms") == 1'500'000);
    CHECK(parse_duration("250ns") == 250);
    CHECK(parse_duration("250") == 250);
    CHECK_THROWS_AS(parse_duration("1.5ns"), Error);
    CHECK_THROWS_AS(parse_duration("fast"), Error);
    CHECK(format_duration(19998720) == "19.99872ms");
    CHECK(format_duration(492160) == "492.16us");
    CHECK(format_duration(39 * kSec) == "39s");
}
