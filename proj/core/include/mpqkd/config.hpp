#pragma once

#include <mpqkd/channel.hpp>
#include <mpqkd/protocol.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpqkd {

// Raised for unparseable or invalid configuration / table input. The CLI
// maps it to the validation exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CompensationMode { Track, Truth, Off };

std::string to_string(CompensationMode mode);

struct EstimationConfig {
    std::size_t group_size = 500;
    std::size_t track_window = 200;
    // Signed search interval for the frequency offset. Unset (lo == hi)
    // resolves to delta_omega0 +/- 2*pi*150 MHz at load time.
    double search_lo_rad_s = 0.0;
    double search_hi_rad_s = 0.0;
    double coarse_step_rad_s = 0.0;  // 0 = automatic anti-aliasing step
    CompensationMode compensation = CompensationMode::Track;
};

// Key-rate inputs taken verbatim, bypassing simulation and decoy estimation.
struct DirectInputs {
    bool present = false;
    double m11 = 0.0;
    double e11 = 0.0;
    double m_mumu = 0.0;
    double e_mumu = 0.0;
    double n_rounds = 0.0;
};

struct SweepConfig {
    bool present = false;
    double distance_lo_km = 50.0;
    double distance_hi_km = 450.0;
    int n_points = 9;
    // Overrides the modeled X error in the curve when non-negative.
    double x_error_override = -1.0;
};

struct PairingRatePoint {
    double p_click = 0.0;
    std::uint64_t l_min = 1;
    std::uint64_t l_max = 1;
};

// Fiber budget when transmittances are given as a distance. Total span is
// split evenly between the two sides; excess loss applies per side.
struct LinkBudget {
    bool by_distance = false;
    double distance_km = 0.0;
    double attenuation_db_per_km = 0.2;
    double excess_loss_db = 0.0;
};

struct RunConfig {
    std::string mode;  // optional default verb; the CLI verb wins
    std::uint64_t seed = 1;
    ProtocolParams protocol;
    ChannelParams channel;
    LinkBudget link;
    EstimationConfig estimation;
    DirectInputs direct;
    SweepConfig sweep;
    std::vector<PairingRatePoint> pairing_points;
};

// Parses and validates a JSON config. Unknown keys anywhere are rejected;
// all module-level invariants are checked here with aggregated messages.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

// One-side transmittance (excluding detector efficiency) for a link budget.
double side_transmittance(const LinkBudget& link, double distance_km);

}  // namespace mpqkd
