#pragma once

#include <mpqkd/counts.hpp>
#include <mpqkd/pairing.hpp>
#include <mpqkd/protocol.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mpqkd {

// Per-side basis of a pair, from the two intensity choices of that side.
enum class SideLabel { Zero, Z, X, Discard };

// Joint classification after both sides announce their labels.
enum class PairClass { ZeroPair, ZPair, XPair, Discard };

std::string to_string(SideLabel label);
std::string to_string(PairClass cls);

// Basis table per side: two vacuums form the '0' label, vacuum plus any
// signal forms Z, twice the same non-vacuum intensity forms X, and mixed
// non-vacuum intensities are discarded. Strong pulses never reach sifting.
SideLabel assign_side_basis(IntensityLabel i, IntensityLabel j);

// Two-side sifting table: '0' pairs with anything Z-like stays Z, with
// anything X-like stays X; Z against X is discarded.
PairClass sift_pair(SideLabel a, SideLabel b);

struct SiftedPair {
    PairRecord pair;
    SideLabel label_a = SideLabel::Discard;
    SideLabel label_b = SideLabel::Discard;
    PairClass pair_class = PairClass::Discard;
    // Summed-intensity code per side: 0 = vacuum, 1 = nu (2nu in X),
    // 2 = mu (2mu in X). Valid only for non-discarded pairs.
    int sum_code_a = -1;
    int sum_code_b = -1;

    // Key material, defined once map_keys ran (mapped = true).
    std::uint8_t chi_a = 0;
    std::uint8_t chi_b = 0;
    // Announced phase differences in units of pi/D, in [0, D).
    int theta_units_a = -1;
    int theta_units_b = -1;
    std::uint8_t parity = 0;      // detectors differed between the rounds
    double delta_theta_est = 0.0; // compensation phase used
    bool kept = false;            // X-pair phase sieve verdict
    bool mapped = false;
};

// Classifies one pair: side labels, joint class, and summed-intensity codes.
SiftedPair classify_pair(const PairRecord& pair);

// Z bits from intensity positions only. Alice's bit is 0 when her front
// round was vacuum and 1 when her rear round was; Bob uses the inverted
// convention, so a physically consistent pair yields equal bits.
std::pair<std::uint8_t, std::uint8_t> z_bits(IntensityLabel a_i, IntensityLabel a_j,
                                             IntensityLabel b_i, IntensityLabel b_j);

// X bit and announced remainder from one side's phase indices only:
//   chi = floor(((phi_j - phi_i)/pi) mod 2), theta = (phi_j - phi_i) mod pi,
// returned as (chi, theta in units of pi/D).
std::pair<std::uint8_t, int> x_bit_theta(std::uint8_t phase_i, std::uint8_t phase_j, int d_slices);

// Fills in key bits and, for X pairs, runs the phase sieve: the pair is kept
// when (theta_b - theta_a) + delta_theta lands within pi/D (closed bounds)
// of either interference branch, 0 or pi, on the full circle. The branch
// parity folds into Bob's bit so a correct pair always satisfies
// chi_a ^ chi_b ^ parity = 0. ZeroPair and Discard are left unmapped.
void map_keys(SiftedPair& pair, double delta_theta, int d_slices);

// Aggregates mapped pairs into the per-class count table. X classes with
// both sides non-vacuum admit only sieve-kept pairs; one-sided-vacuum X
// classes have no meaningful sieve and count every pair. Vacuum-vacuum
// pairs carry no correlation and count as all-error. Sent columns hold the
// multinomial expectation n_pairs * P(class) from the sending probabilities.
CountTable tally_counts(const std::vector<SiftedPair>& pairs, const ProtocolParams& params,
                        std::uint64_t n_qkd_rounds);

}  // namespace mpqkd
