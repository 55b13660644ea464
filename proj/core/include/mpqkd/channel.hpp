#pragma once

#include <mpqkd/protocol.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpqkd {

// Physical model of the two optical links and the middle measurement node.
//
// Both parties send phase-encoded coherent pulses; the fields interfere on a
// balanced beam splitter and feed two threshold detectors L and R. With
// one-side mean photon numbers lambda_x = transmittance_x * intensity_x at
// the beam splitter and total phase difference dphi, the port means are
//
//   n_L = (lambda_a + lambda_b + 2*sqrt(lambda_a*lambda_b)*cos(dphi)) / 2
//   n_R = (lambda_a + lambda_b - 2*sqrt(lambda_a*lambda_b)*cos(dphi)) / 2
//
// and each detector clicks with 1 - (1 - dark) * exp(-eta_d * n_X).
// n_L + n_R always equals lambda_a + lambda_b.
struct ChannelParams {
    // Source to beam splitter, excluding the detector efficiency.
    double transmittance_a = 1.0;
    double transmittance_b = 1.0;
    double detector_efficiency = 1.0;
    // Per slot, per detector.
    double dark_count_prob = 0.0;
    // Residual intensity of a Vacuum round relative to mu. Finite pulse
    // carving leaves this floor; 0 means ideal vacuum.
    double extinction_ratio = 0.0;
    // Source intensity of Strong reference pulses, in the same units as mu.
    // Calibrated together with the frame so a 500-click estimation group
    // accumulates well within 1 ms.
    double strong_intensity = 30.0;

    // Laser frequency difference omega_b - omega_a and its drift model:
    // a random walk of variance freq_walk_rate per second, reflected at
    // delta_omega0 +/- freq_walk_bound.
    double delta_omega0_rad_s = 0.0;
    double freq_walk_rate = 0.0;   // (rad/s)^2 per second
    double freq_walk_bound_rad_s = 0.0;
    // Fiber phase wander, variance per second of a Wiener term.
    double fiber_phase_rate = 0.0;  // rad^2 per second
    // Combined laser linewidth; adds white phase diffusion of variance
    // 2*pi*linewidth per second on top of the fiber term.
    double linewidth_hz = 0.0;
};

std::vector<std::string> validate(const ChannelParams& params);
void ensure_valid(const ChannelParams& params);

struct ClickProbabilities {
    double p_l = 0.0;
    double p_r = 0.0;
};

// Port means before detector efficiency, see ChannelParams.
std::pair<double, double> port_means(const ChannelParams& ch, double mu_a, double mu_b,
                                     double delta_phi);

// Probability that each detector clicks in one slot, given the two source
// intensities and the total phase difference (encoding plus drift).
ClickProbabilities click_probabilities(const ChannelParams& ch, double mu_a, double mu_b,
                                       double delta_phi);

// Relative-phase path sampled once per slot. delta_theta[s] is the total
// drift theta_b - theta_a at the start of slot s; delta_omega[s] the
// instantaneous frequency difference. Advancing uses the left endpoint:
// theta[s+1] = theta[s] + omega[s]*tau + phase noise.
struct PhaseTrajectory {
    double theta0 = 0.0;
    std::vector<double> delta_theta;
    std::vector<double> delta_omega;
};

PhaseTrajectory phase_difference_trajectory(const ChannelParams& ch, std::uint64_t n_slots,
                                            double slot_seconds, std::uint64_t seed);

// One valid click together with everything post-processing may need about
// that round. theta_true is the drift phase of the slot wrapped to [0, 2pi);
// differences of wrapped values are exact modulo 2pi, which is all the
// consumers use. Photon tags: src = photons leaving the source, arr = photons
// surviving to the beam splitter (src thinned by the link transmittance).
// Reference-pulse events carry zero photon tags; their detectors are sampled
// from the closed-form click probabilities directly.
struct ClickEvent {
    std::uint64_t slot = 0;
    float theta_true = 0.0f;
    std::uint8_t outcome = 0;  // 0 = L, 1 = R
    IntensityLabel a_intensity = IntensityLabel::Vacuum;
    IntensityLabel b_intensity = IntensityLabel::Vacuum;
    std::uint8_t a_phase_index = 0;
    std::uint8_t b_phase_index = 0;
    std::uint8_t src_photons_a = 0;
    std::uint8_t src_photons_b = 0;
    std::uint8_t arr_photons_a = 0;
    std::uint8_t arr_photons_b = 0;
};

// Photon-number bookkeeping accumulated over QKD rounds. Histograms bucket
// counts 0..15 with an overflow bucket at index 16.
struct GroundTruth {
    double theta0 = 0.0;
    std::array<std::uint64_t, 17> src_hist_a{};
    std::array<std::uint64_t, 17> src_hist_b{};
    std::array<std::uint64_t, 17> arr_hist_a{};
    std::array<std::uint64_t, 17> arr_hist_b{};

    // Filled only when the matching record option is set.
    std::vector<double> delta_theta;  // per slot
    std::vector<double> delta_omega;  // per slot
    std::vector<std::uint8_t> src_a, src_b, arr_a, arr_b;  // per slot
};

struct SimOptions {
    int threads = 0;  // 0 = hardware concurrency
    std::uint64_t block_slots = 1u << 16;
    bool record_rounds = false;      // per-slot RoundSpec and ClickRecord
    bool record_trajectory = false;  // per-slot phase path in GroundTruth
    bool record_tags = false;        // per-slot photon tags in GroundTruth
};

struct SessionData {
    Schedule schedule;
    ProtocolParams protocol;
    ChannelParams channel;
    std::uint64_t seed = 0;

    std::vector<ClickEvent> events;  // valid clicks, in slot order
    GroundTruth ground_truth;

    std::uint64_t n_valid = 0;
    std::uint64_t n_double = 0;
    std::uint64_t n_qkd_valid = 0;
    std::uint64_t n_strong_valid = 0;
    // Sent QKD rounds per intensity label, per side.
    std::array<std::uint64_t, 4> sent_a{};
    std::array<std::uint64_t, 4> sent_b{};

    // Only with record_rounds.
    std::vector<RoundSpec> rounds;
    std::vector<ClickRecord> clicks;

    double qkd_click_probability() const {
        return schedule.n_qkd_rounds ? static_cast<double>(n_qkd_valid) /
                                           static_cast<double>(schedule.n_qkd_rounds)
                                     : 0.0;
    }
};

// Runs a full session. Output is a pure function of (params, channel, seed)
// and in particular does not depend on the worker count: every block of
// slots consumes its own counter-derived random streams, and the phase path
// is carried across block boundaries by a cheap sequential pre-pass.
SessionData simulate_session(const ProtocolParams& params, const ChannelParams& channel,
                             std::uint64_t seed, const SimOptions& options = {});

}  // namespace mpqkd
