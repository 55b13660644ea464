#pragma once

#include <mpqkd/channel.hpp>
#include <mpqkd/protocol.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace mpqkd {

// Two valid clicks joined into one logical signal. The pairing length is
// counted in slot indices, so the bounds guard real elapsed time.
struct PairRecord {
    ClickEvent front;
    ClickEvent rear;

    std::uint64_t length() const { return rear.slot - front.slot; }
    // 1 when the two rounds fired different detectors.
    std::uint8_t outcome_parity() const { return front.outcome ^ rear.outcome; }
};

struct PairingStats {
    std::uint64_t n_clicks = 0;
    std::uint64_t n_pairs = 0;
    std::uint64_t n_dropped_short = 0;  // candidate gap below the minimum
    std::uint64_t n_dropped_long = 0;   // candidate gap above the maximum
    std::uint64_t n_tail_unpaired = 0;  // fronts stranded at segment ends
    std::uint64_t min_length = 0;
    std::uint64_t max_length = 0;
    // Pair lengths bucketed into four equal intervals spanning [l_min, l_max].
    std::array<std::uint64_t, 4> length_hist{};
    double sum_length = 0.0;

    double mean_length() const { return n_pairs ? sum_length / static_cast<double>(n_pairs) : 0.0; }
    double empirical_rate(std::uint64_t n_rounds) const {
        return n_rounds ? static_cast<double>(n_pairs) / static_cast<double>(n_rounds) : 0.0;
    }
};

struct PairingResult {
    std::vector<PairRecord> pairs;
    PairingStats stats;
};

// Sequential pairing scan. Clicks must be sorted by slot. The first unpaired
// click becomes the front; the next becomes the rear; if the gap lies in
// [l_min, l_max] the pair is emitted and the scan clears, otherwise the rear
// click replaces the front. With a schedule, only QKD clicks participate and
// the scan restarts at every contiguous QKD segment, so no pair spans a
// reference or recovery region. Without one the whole stream is one segment.
PairingResult pair_clicks(const std::vector<ClickEvent>& clicks, std::uint64_t l_min,
                          std::uint64_t l_max, const Schedule* schedule = nullptr);

// Expected pairs per round for i.i.d. clicks of probability p per round:
//   r_p = [ 1/(p((1-p)^(l_min-1) - (1-p)^l_max)) + 1/p ]^-1
// The first term is the mean wait for a partner landing inside the window,
// the second the mean wait for the front click itself.
double pairing_rate(double p, std::uint64_t l_min, std::uint64_t l_max);

// Saturation indicator p * l_max: how many candidate partners a front click
// sees before aging out. Values well above 1 mean pairing is not the
// bottleneck.
double expected_pairs_heuristic(double p, std::uint64_t l_max);

}  // namespace mpqkd
