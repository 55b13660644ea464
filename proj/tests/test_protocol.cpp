#include <mpqkd/math.hpp>
#include <mpqkd/protocol.hpp>

#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <string>

using namespace mpqkd;

TEST_CASE("default parameters are valid") {
    ProtocolParams p;
    CHECK(validate(p).empty());
    CHECK(p.p_vacuum() == doctest::Approx(0.6));
    p.n_qkd_rounds = 1000;
    CHECK(p.n_pairs_denominator() == 500);
}

TEST_CASE("validation aggregates every violated constraint") {
    ProtocolParams p;
    p.nu = 0.5;
    p.mu = 0.4;           // nu >= mu
    p.phase_slices = 15;  // odd
    p.l_min = 10;
    p.l_max = 5;  // inverted bounds
    const auto errs = validate(p);
    REQUIRE(errs.size() == 3);
    const auto has = [&](const std::string& needle) {
        return std::any_of(errs.begin(), errs.end(), [&](const std::string& e) {
            return e.find(needle) != std::string::npos;
        });
    };
    CHECK(has("0 <= nu < mu < 1"));
    CHECK(has("even"));
    CHECK(has("l_min"));
    CHECK_THROWS_AS(ensure_valid(p), std::invalid_argument);
}

TEST_CASE("probability and bound edges are rejected") {
    ProtocolParams p;
    p.p_mu = 0.7;
    p.p_nu = 0.4;
    CHECK(!validate(p).empty());
    p = ProtocolParams{};
    p.l_min = 0;
    CHECK(!validate(p).empty());
    p = ProtocolParams{};
    p.epsilon = 0.0;
    CHECK(!validate(p).empty());
    p = ProtocolParams{};
    p.f_ec = 0.9;
    CHECK(!validate(p).empty());
    p = ProtocolParams{};
    p.frame = {0, 0, 0};
    CHECK(!validate(p).empty());
}

TEST_CASE("phase grid and intensity lookup") {
    ProtocolParams p;
    REQUIRE(p.phase_slices == 16);
    CHECK(p.phase_of(0) == 0.0);
    CHECK(p.phase_of(4) == doctest::Approx(pi / 2.0));
    CHECK(p.phase_of(8) == doctest::Approx(pi));
    CHECK(p.phase_of(15) == doctest::Approx(two_pi * 15.0 / 16.0));
    CHECK(p.intensity_of(IntensityLabel::Vacuum) == 0.0);
    CHECK(p.intensity_of(IntensityLabel::Decoy) == p.nu);
    CHECK(p.intensity_of(IntensityLabel::Signal) == p.mu);
    CHECK_THROWS_AS(p.intensity_of(IntensityLabel::Strong), std::invalid_argument);
}

TEST_CASE("one full default cycle lays out 62500 slots in region order") {
    FrameLayout frame;  // 16097 + 1920 + 44483
    const Schedule s = build_schedule(frame, frame.n_qkd);
    CHECK(s.total_slots == 62500);
    std::uint64_t counts[3] = {0, 0, 0};
    for (std::uint64_t slot = 0; slot < s.total_slots; ++slot)
        ++counts[static_cast<int>(s.region_of(slot))];
    CHECK(counts[0] == 16097);
    CHECK(counts[1] == 1920);
    CHECK(counts[2] == 44483);
    CHECK(s.reference_slot_count() == 16097);
    // regions appear in order within the cycle
    CHECK(s.region_of(0) == SlotRegion::Reference);
    CHECK(s.region_of(16096) == SlotRegion::Reference);
    CHECK(s.region_of(16097) == SlotRegion::Recovery);
    CHECK(s.region_of(18016) == SlotRegion::Recovery);
    CHECK(s.region_of(18017) == SlotRegion::Qkd);
    CHECK(s.region_of(62499) == SlotRegion::Qkd);
}

TEST_CASE("minimal frames unroll slot by slot") {
    const Schedule s = build_schedule({1, 0, 1}, 2);
    CHECK(s.total_slots == 4);
    CHECK(s.region_of(0) == SlotRegion::Reference);
    CHECK(s.region_of(1) == SlotRegion::Qkd);
    CHECK(s.region_of(2) == SlotRegion::Reference);
    CHECK(s.region_of(3) == SlotRegion::Qkd);

    const Schedule t = build_schedule({2, 1, 3}, 3);
    CHECK(t.total_slots == 6);
    const SlotRegion want[6] = {SlotRegion::Reference, SlotRegion::Reference,
                               SlotRegion::Recovery,  SlotRegion::Qkd,
                               SlotRegion::Qkd,       SlotRegion::Qkd};
    for (int i = 0; i < 6; ++i) CHECK(t.region_of(i) == want[i]);
}

TEST_CASE("the final cycle is cut at its last needed QKD slot") {
    const Schedule s = build_schedule({2, 1, 3}, 4);
    // one full cycle of 6, then 2 + 1 + 1 slots of the second
    CHECK(s.total_slots == 10);
    CHECK(s.n_qkd_rounds == 4);
    CHECK(s.reference_slot_count() == 4);
    const auto segments = s.qkd_segments();
    REQUIRE(segments.size() == 2);
    CHECK(segments[0] == std::pair<std::uint64_t, std::uint64_t>{3, 6});
    CHECK(segments[1] == std::pair<std::uint64_t, std::uint64_t>{9, 10});
    std::uint64_t n_qkd = 0;
    for (const auto& [b, e] : segments) {
        for (std::uint64_t slot = b; slot < e; ++slot) {
            CHECK(s.region_of(slot) == SlotRegion::Qkd);
            ++n_qkd;
        }
    }
    CHECK(n_qkd == 4);
}

TEST_CASE("region counts are exact for arbitrary layouts") {
    const FrameLayout layouts[] = {{5, 3, 11}, {1, 1, 1}, {100, 0, 7}};
    const std::uint64_t sessions[] = {1, 7, 23, 40};
    for (const FrameLayout& frame : layouts)
        for (std::uint64_t n : sessions) {
            const Schedule s = build_schedule(frame, n);
            std::uint64_t counts[3] = {0, 0, 0};
            for (std::uint64_t slot = 0; slot < s.total_slots; ++slot)
                ++counts[static_cast<int>(s.region_of(slot))];
            CHECK(counts[2] == n);
            CHECK(counts[0] == s.reference_slot_count());
            // every slot belongs to exactly one region and QKD segments
            // enumerate exactly the QKD slots
            std::uint64_t seg_total = 0;
            for (const auto& [b, e] : s.qkd_segments()) seg_total += e - b;
            CHECK(seg_total == n);
        }
}

TEST_CASE("degenerate schedules are rejected") {
    CHECK_THROWS_AS(build_schedule({1, 0, 0}, 5), std::invalid_argument);
    CHECK_THROWS_AS(build_schedule({1, 0, 1}, 0), std::invalid_argument);
}
