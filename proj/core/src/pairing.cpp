#include <mpqkd/pairing.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpqkd {

namespace {

void record_pair(PairingResult& out, const ClickEvent& front, const ClickEvent& rear,
                 std::uint64_t l_min, std::uint64_t l_max) {
    out.pairs.push_back(PairRecord{front, rear});
    PairingStats& st = out.stats;
    const std::uint64_t l = rear.slot - front.slot;
    if (st.n_pairs == 0) {
        st.min_length = st.max_length = l;
    } else {
        st.min_length = std::min(st.min_length, l);
        st.max_length = std::max(st.max_length, l);
    }
    ++st.n_pairs;
    st.sum_length += static_cast<double>(l);
    const std::uint64_t span = l_max - l_min + 1;
    std::uint64_t bin = (l - l_min) * 4 / span;
    st.length_hist[bin > 3 ? 3 : static_cast<std::size_t>(bin)]++;
}

// One contiguous segment: the core Algorithm scan.
template <typename Iter>
void scan_segment(PairingResult& out, Iter first, Iter last, std::uint64_t l_min,
                  std::uint64_t l_max) {
    const ClickEvent* front = nullptr;
    for (Iter it = first; it != last; ++it) {
        out.stats.n_clicks++;
        if (front == nullptr) {
            front = &*it;
            continue;
        }
        const std::uint64_t l = it->slot - front->slot;
        if (l < l_min) {
            out.stats.n_dropped_short++;
            front = &*it;
        } else if (l > l_max) {
            out.stats.n_dropped_long++;
            front = &*it;
        } else {
            record_pair(out, *front, *it, l_min, l_max);
            front = nullptr;
        }
    }
    if (front != nullptr) out.stats.n_tail_unpaired++;
}

}  // namespace

PairingResult pair_clicks(const std::vector<ClickEvent>& clicks, std::uint64_t l_min,
                          std::uint64_t l_max, const Schedule* schedule) {
    if (l_min < 1 || l_max < l_min)
        throw std::invalid_argument("pairing bounds must satisfy 1 <= l_min <= l_max");
    for (std::size_t i = 1; i < clicks.size(); ++i)
        if (clicks[i].slot <= clicks[i - 1].slot)
            throw std::invalid_argument("clicks must be strictly ordered by slot");

    PairingResult out;
    if (schedule == nullptr) {
        scan_segment(out, clicks.begin(), clicks.end(), l_min, l_max);
        return out;
    }

    // Walk the QKD segments and the click stream together; clicks outside
    // QKD regions (strong-pulse clicks) are simply not part of this scan.
    auto it = clicks.begin();
    for (const auto& [begin_slot, end_slot] : schedule->qkd_segments()) {
        while (it != clicks.end() && it->slot < begin_slot) ++it;
        auto seg_end = it;
        while (seg_end != clicks.end() && seg_end->slot < end_slot) ++seg_end;
        scan_segment(out, it, seg_end, l_min, l_max);
        it = seg_end;
    }
    return out;
}

double pairing_rate(double p, std::uint64_t l_min, std::uint64_t l_max) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("click probability must lie in [0, 1]");
    if (l_min < 1 || l_max < l_min)
        throw std::invalid_argument("pairing bounds must satisfy 1 <= l_min <= l_max");
    if (p == 0.0) return 0.0;
    const double q = 1.0 - p;
    const double window = std::pow(q, static_cast<double>(l_min - 1)) -
                          std::pow(q, static_cast<double>(l_max));
    if (window <= 0.0)
        throw std::invalid_argument("degenerate pairing window: no partner can ever qualify");
    return 1.0 / (1.0 / (p * window) + 1.0 / p);
}

double expected_pairs_heuristic(double p, std::uint64_t l_max) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("click probability must lie in [0, 1]");
    return p * static_cast<double>(l_max);
}

}  // namespace mpqkd
