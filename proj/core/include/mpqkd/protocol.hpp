#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpqkd {

// Intensity setting of one emitted pulse. Vacuum/Decoy/Signal are the key
// distribution settings; Strong marks the bright unmodulated pulses used for
// frequency tracking. Hardware details behind these settings are out of
// scope; the label is the full description of a pulse apart from its phase.
enum class IntensityLabel : std::uint8_t {
    Vacuum = 0,
    Decoy = 1,   // nu
    Signal = 2,  // mu
    Strong = 3,
};

enum class SlotRegion : std::uint8_t {
    Reference = 0,  // strong pulses, phase index 0
    Recovery = 1,   // idle slots after the bright burst
    Qkd = 2,
};

// Per-cycle slot budget. A cycle is Reference then Recovery then Qkd,
// repeated back to back for the whole session.
struct FrameLayout {
    std::uint64_t n_reference = 16097;
    std::uint64_t n_recovery = 1920;
    std::uint64_t n_qkd = 44483;

    std::uint64_t cycle_slots() const { return n_reference + n_recovery + n_qkd; }
};

struct ProtocolParams {
    double mu = 0.309;      // signal intensity
    double nu = 0.032;      // decoy intensity
    double p_mu = 0.22;     // per-round probability of Signal
    double p_nu = 0.18;     // per-round probability of Decoy
    int phase_slices = 16;  // size D of the discrete phase grid
    std::uint64_t l_min = 63;
    std::uint64_t l_max = 500;
    double epsilon = 1e-10;  // failure probability per concentration bound
    double f_ec = 1.1;       // error-correction inefficiency
    double slot_seconds = 1.6e-9;
    FrameLayout frame;
    std::uint64_t n_qkd_rounds = 0;  // session size N, QKD rounds only

    double p_vacuum() const { return 1.0 - p_mu - p_nu; }
    std::uint64_t n_pairs_denominator() const { return n_qkd_rounds / 2; }
    double phase_of(int index) const;
    double intensity_of(IntensityLabel label) const;
};

// Returns a list of problems, empty when the parameters are usable.
std::vector<std::string> validate(const ProtocolParams& params);

// Throws std::invalid_argument listing every problem at once.
void ensure_valid(const ProtocolParams& params);

// One transmitted round as both parties know it after basis reconciliation.
struct RoundSpec {
    std::uint64_t slot = 0;
    SlotRegion region = SlotRegion::Qkd;
    IntensityLabel a_intensity = IntensityLabel::Vacuum;
    IntensityLabel b_intensity = IntensityLabel::Vacuum;
    std::uint8_t a_phase_index = 0;
    std::uint8_t b_phase_index = 0;
};

// One announced measurement outcome. `valid` means exactly one detector
// fired; `outcome` is meaningful only for valid records (0 = L, 1 = R).
struct ClickRecord {
    std::uint64_t slot = 0;
    std::uint8_t outcome = 0;
    bool valid = false;
};

// Slot bookkeeping for a session of whole cycles truncated to exactly
// `n_qkd_rounds` QKD slots.
struct Schedule {
    FrameLayout frame;
    std::uint64_t total_slots = 0;
    std::uint64_t n_qkd_rounds = 0;

    SlotRegion region_of(std::uint64_t slot) const;

    // Contiguous QKD slot ranges [begin, end); pairing never crosses them.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> qkd_segments() const;

    std::uint64_t reference_slot_count() const;
};

// Lays out enough cycles to contain `n_qkd_rounds` QKD slots, cutting the
// final cycle short at its last needed QKD slot.
Schedule build_schedule(const FrameLayout& frame, std::uint64_t n_qkd_rounds);

const char* to_string(IntensityLabel label);
const char* to_string(SlotRegion region);

}  // namespace mpqkd
