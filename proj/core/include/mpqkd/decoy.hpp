#pragma once

#include <mpqkd/counts.hpp>
#include <mpqkd/protocol.hpp>

#include <cstdint>

namespace mpqkd {

// Two-sided Chernoff-Hoeffding interval for the expectation behind an
// observed count chi, each side failing with probability at most epsilon/2.
struct ChernoffBounds {
    double lower = 0.0;
    double upper = 0.0;
    double delta_lower = 0.0;
    double delta_upper = 0.0;
};

// Solves, by bracketed bisection to 1e-10 relative tolerance,
//   (chi/(1+d)) * (d - (1+d)ln(1+d)) = ln(eps/2)   for delta_lower
//   (chi/(1-d)) * (-d - (1-d)ln(1-d)) = ln(eps/2)  for delta_upper in (0,1)
// and returns lower = chi/(1+delta_lower), upper = chi/(1-delta_upper).
// chi = 0 degenerates to lower = 0 and upper = ln(2/eps).
ChernoffBounds chernoff_bounds(double chi, double epsilon);

// Lower bound on the number of Z-pairs where both sides emitted exactly one
// photon, from the nine Z-class counts via a vacuum + weak-decoy argument.
//
// Each side of a pair emits a Poisson photon number with the pair's summed
// intensity, so per-class gains Q_ab expand in the joint yields Y_nm. With
// two non-vacuum settings the standard two-intensity elimination gives
//
//   Y_11 >= [ mu^3 * H_nu - nu^3 * H_mu ] / ( mu^2 nu^2 (mu - nu) )
//   H_s  =  e^{2s} Q_ss - e^s (Q_s0 + Q_0s) + Q_00
//
// with every gain replaced by the Chernoff bound of the favorable direction.
// The count bound scales by the signal-pair Poisson weight:
//   M_11 = Sent_mumu * (mu e^{-mu})^2 * Y_11.
struct M11Result {
    double m11_lower = 0.0;
    double y11_lower = 0.0;
    bool clamped = false;  // raw bound was negative
    int chernoff_calls = 0;
    double epsilon = 0.0;
};

M11Result estimate_M11_Z(const CountTable& table, const ProtocolParams& params, double epsilon);

// Upper bound on the phase-error rate of single-photon Z-pairs, estimated
// from the (2nu,2nu) X-pair errors. Writing s = 2nu for the per-side summed
// intensity and kappa = 2/D for the phase-sieve acceptance,
//
//   e_11 <= [ e^{2s} T_ss - (kappa/2)(e^s Q_0s + e^s Q_s0 - Q_00) ]
//           / ( s^2 kappa Y_11 )
//
// where T_ss is the sieved error gain of the (2nu,2nu) class and the
// subtracted bracket removes the vacuum-driven events that enter the sieve
// at rate kappa and err half the time. Q_0s, Q_s0 are the unsieved gains of
// the one-sided-vacuum X classes, Q_00 the vacuum-pair gain.
struct EphaseResult {
    double e11_upper = 0.5;
    bool aborted = false;        // no X (2nu,2nu) statistics at all
    bool clamped = false;        // raw bound left [0, 1]
    bool uninformative = false;  // bound at or above 1/2: no key survives
    int chernoff_calls = 0;
    double epsilon = 0.0;

    // The estimate as it enters key distillation; anything above 1/2
    // already zeroes the single-photon term.
    double capped_at_half() const { return e11_upper < 0.5 ? e11_upper : 0.5; }
};

EphaseResult estimate_ephase(const CountTable& table, const M11Result& m11,
                             const ProtocolParams& params, double epsilon);

// Final key accounting:
//   K = max(0, M_11 * [1 - h(e_11)] - f * M_mumu * h(E_mumu)),  R = K / N_pair.
// An e_11 at or above 1/2 zeroes the first term outright.
struct KeyLengthResult {
    double key_bits = 0.0;
    double rate = 0.0;
    bool clamped = false;  // raw length was negative
};

KeyLengthResult key_length(double m11_lower, double e11_upper, double m_mumu, double e_mumu,
                           double f_ec, double n_pairs);

}  // namespace mpqkd
