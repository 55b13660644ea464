#include <mpqkd/protocol.hpp>

#include <mpqkd/math.hpp>

#include <sstream>
#include <stdexcept>

namespace mpqkd {

double ProtocolParams::phase_of(int index) const {
    return two_pi * static_cast<double>(index) / static_cast<double>(phase_slices);
}

double ProtocolParams::intensity_of(IntensityLabel label) const {
    switch (label) {
        case IntensityLabel::Vacuum: return 0.0;
        case IntensityLabel::Decoy: return nu;
        case IntensityLabel::Signal: return mu;
        case IntensityLabel::Strong: break;
    }
    throw std::invalid_argument("intensity_of: Strong has no key-distribution intensity");
}

std::vector<std::string> validate(const ProtocolParams& p) {
    std::vector<std::string> errs;
    if (!(p.mu > 0.0 && p.mu < 1.0 && p.nu >= 0.0 && p.nu < p.mu))
        errs.push_back("intensities must satisfy 0 <= nu < mu < 1");
    if (!(p.p_mu >= 0.0 && p.p_nu >= 0.0)) errs.push_back("intensity probabilities must be non-negative");
    if (!(p.p_mu + p.p_nu <= 1.0)) errs.push_back("p_mu + p_nu must not exceed 1");
    if (p.phase_slices < 2 || p.phase_slices % 2 != 0 || p.phase_slices > 256)
        errs.push_back("phase_slices must be even, in [2, 256]");
    if (!(p.l_min >= 1)) errs.push_back("l_min must be at least 1");
    if (!(p.l_max >= p.l_min)) errs.push_back("l_max must be at least l_min");
    if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) errs.push_back("epsilon must lie in (0, 1)");
    if (!(p.f_ec >= 1.0)) errs.push_back("f_ec must be at least 1");
    if (!(p.slot_seconds > 0.0)) errs.push_back("slot_seconds must be positive");
    if (p.frame.cycle_slots() == 0) errs.push_back("frame must contain at least one slot per cycle");
    if (p.frame.n_qkd == 0) errs.push_back("frame must contain QKD slots");
    return errs;
}

void ensure_valid(const ProtocolParams& p) {
    auto errs = validate(p);
    if (errs.empty()) return;
    std::ostringstream os;
    os << "invalid protocol parameters:";
    for (const auto& e : errs) os << "\n  - " << e;
    throw std::invalid_argument(os.str());
}

SlotRegion Schedule::region_of(std::uint64_t slot) const {
    const std::uint64_t in_cycle = slot % frame.cycle_slots();
    if (in_cycle < frame.n_reference) return SlotRegion::Reference;
    if (in_cycle < frame.n_reference + frame.n_recovery) return SlotRegion::Recovery;
    return SlotRegion::Qkd;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> Schedule::qkd_segments() const {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> segments;
    const std::uint64_t cycle = frame.cycle_slots();
    const std::uint64_t head = frame.n_reference + frame.n_recovery;
    for (std::uint64_t begin = head; begin < total_slots; begin += cycle) {
        std::uint64_t end = begin - head + cycle;
        if (end > total_slots) end = total_slots;
        segments.emplace_back(begin, end);
    }
    return segments;
}

std::uint64_t Schedule::reference_slot_count() const {
    std::uint64_t n = 0;
    const std::uint64_t cycle = frame.cycle_slots();
    for (std::uint64_t begin = 0; begin < total_slots; begin += cycle) {
        std::uint64_t end = begin + frame.n_reference;
        if (end > total_slots) end = total_slots;
        n += end - begin;
    }
    return n;
}

Schedule build_schedule(const FrameLayout& frame, std::uint64_t n_qkd_rounds) {
    if (frame.n_qkd == 0) throw std::invalid_argument("build_schedule: frame has no QKD slots");
    if (n_qkd_rounds == 0) throw std::invalid_argument("build_schedule: empty session");
    Schedule s;
    s.frame = frame;
    s.n_qkd_rounds = n_qkd_rounds;
    const std::uint64_t full_cycles = n_qkd_rounds / frame.n_qkd;
    const std::uint64_t rest = n_qkd_rounds % frame.n_qkd;
    s.total_slots = full_cycles * frame.cycle_slots();
    if (rest > 0) s.total_slots += frame.n_reference + frame.n_recovery + rest;
    return s;
}

const char* to_string(IntensityLabel label) {
    switch (label) {
        case IntensityLabel::Vacuum: return "vacuum";
        case IntensityLabel::Decoy: return "decoy";
        case IntensityLabel::Signal: return "signal";
        case IntensityLabel::Strong: return "strong";
    }
    return "?";
}

const char* to_string(SlotRegion region) {
    switch (region) {
        case SlotRegion::Reference: return "reference";
        case SlotRegion::Recovery: return "recovery";
        case SlotRegion::Qkd: return "qkd";
    }
    return "?";
}

}  // namespace mpqkd
