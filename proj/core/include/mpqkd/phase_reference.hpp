#pragma once

#include <mpqkd/channel.hpp>
#include <mpqkd/protocol.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace mpqkd {

// Probability that two strong-pulse clicks land on the same (P0) or
// different (P1) detector, given the drift phase accumulated between them.
std::pair<double, double> pairwise_outcome_probability(double delta_theta);

// A batch of strong-pulse clicks treated as sharing one frequency offset.
// Members never span more than one reference block, so the time span stays
// far below the millisecond over which the offset is treated as constant.
struct EstimationGroup {
    struct Member {
        std::uint64_t slot = 0;
        std::uint8_t outcome = 0;
    };
    std::vector<Member> members;
    std::uint64_t start_slot = 0;
    std::uint64_t end_slot = 0;

    double mid_time(double tau) const {
        return 0.5 * static_cast<double>(start_slot + end_slot) * tau;
    }
};

// Chunks the reference-region clicks of a session into groups of exactly
// group_size consecutive clicks. Groups never cross a reference-block
// boundary; per-block remainders smaller than group_size are dropped.
std::vector<EstimationGroup> assemble_groups(const std::vector<ClickEvent>& clicks,
                                             const Schedule& schedule,
                                             std::size_t group_size = 500);

struct FrequencySearch {
    double omega_lo = 0.0;  // rad/s, may be negative
    double omega_hi = 0.0;
    // 0 selects the anti-aliasing bound pi/(8 * tau * max_gap) automatically;
    // an explicit value is additionally capped by that bound.
    double coarse_step = 0.0;
};

struct MleResult {
    double omega_hat = 0.0;
    double log_likelihood = 0.0;
    std::uint64_t n_pairs = 0;
    std::uint64_t max_gap = 0;
    double coarse_step = 0.0;
    // The likelihood is even in omega, so when the search interval straddles
    // zero the sign of the estimate is not identifiable.
    bool ambiguous_sign = false;
};

// Maximum-likelihood frequency offset from one group: maximizes
//   f(w) = sum over all click pairs (i,j) of
//          ln(1/2 + cos(w * tau * gap) / 4)   if outcomes match
//          ln(1/2 - cos(w * tau * gap) / 4)   otherwise
// over the search interval. Pairs enter through a gap histogram, scanned by
// a coarse-to-fine grid (short gaps first, then the full histogram on the
// narrowed interval) and polished by golden-section search to 1e-6 of the
// interval width.
MleResult mle_delta_omega(const EstimationGroup& group, double tau,
                          const FrequencySearch& search);

// Piecewise-linear model of the frequency offset over time, least-squares
// fitted per window of consecutive group estimates.
struct FrequencyTrack {
    struct Segment {
        double t_begin = 0.0;
        double t_end = 0.0;
        double intercept = 0.0;
        double slope = 0.0;
    };
    std::vector<Segment> segments;  // contiguous, covering [domain_lo, domain_hi]
    double domain_lo = 0.0;
    double domain_hi = 0.0;

    double evaluate(double t) const;
};

// Disjoint windows of window_size consecutive estimates (the last may be
// shorter); a window with fewer than two distinct points degenerates to a
// constant. Edge segments extend to the requested domain bounds, which
// default to the estimate span when domain_hi < domain_lo.
FrequencyTrack fit_frequency_track(const std::vector<std::pair<double, double>>& estimates,
                                   std::size_t window_size = 200, double domain_lo = 0.0,
                                   double domain_hi = -1.0);

// Exact integral of the track over [t_i, t_j]: the phase the frequency
// offset accumulates between two paired rounds.
double compensation_phase(double t_i, double t_j, const FrequencyTrack& track);

// Mismatch rate of strong-pulse pairs against the compensated prediction,
// bucketed by pairing length. Every qualifying (front, rear) pair within one
// reference block counts, with clicks reused across pairs. A pair counts as
// an error when the observed same/different-detector outcome disagrees with
// the sign of cos of the compensated phase.
struct LengthBinStats {
    std::uint64_t length_lo = 0;  // inclusive
    std::uint64_t length_hi = 0;  // exclusive
    std::uint64_t total = 0;
    std::uint64_t mismatches = 0;

    double rate() const {
        return total ? static_cast<double>(mismatches) / static_cast<double>(total) : 0.0;
    }
};

std::vector<LengthBinStats> reference_error_by_length(const std::vector<ClickEvent>& clicks,
                                                      const Schedule& schedule,
                                                      const FrequencyTrack& track, double tau,
                                                      const std::vector<std::uint64_t>& bin_edges);

}  // namespace mpqkd
