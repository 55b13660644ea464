#pragma once

#include <mpqkd/channel.hpp>
#include <mpqkd/config.hpp>
#include <mpqkd/counts.hpp>
#include <mpqkd/decoy.hpp>
#include <mpqkd/protocol.hpp>

#include <vector>

namespace mpqkd {

// Closed-form performance model: expected count table and key rate for one
// parameter point, without sampling. Click probabilities are averaged over
// the announced phase grid plus drift; pair-class frequencies follow from
// the label posterior of a detected round; the expected table then runs
// through the same finite-size estimators as measured data.
//
// Approximations, all second-order at QKD operating points:
//   - front and rear labels of a pair are treated as independent given that
//     both rounds clicked (pairing selects on click status only);
//   - frame segmentation is ignored in the pairing rate;
//   - phase compensation is ideal, so the sieved X error is the visibility
//     floor 1/2 - sin(pi/D)/(pi/D)/4 diluted by dark-driven clicks. An
//     explicit x_error_override models tracking residuals instead.
struct RateModelOptions {
    int phase_grid = 64;            // resolution of the phase average
    double x_error_override = -1.0; // sieved X error when >= 0
};

struct RatePoint {
    double distance_km = 0.0;
    double eta = 0.0;          // per-side transmittance times detector efficiency
    double rate = 0.0;         // key bits per possible pair, K / (N/2)
    double x_error = 0.0;      // sieved (2nu,2nu) error rate used
    double n_pairs = 0.0;      // expected formed pairs
    double key_bits = 0.0;
    double click_prob = 0.0;   // mean valid-click probability per QKD round
    double pair_rate = 0.0;    // expected pairs per QKD round
    double m11_lower = 0.0;
    double e11_upper = 0.5;
    double e_mumu = 0.0;
    CountTable table;
};

RatePoint model_rate_point(const ProtocolParams& protocol, const ChannelParams& channel,
                           double distance_km, const RateModelOptions& options = {});

// Evaluates the model on n_points distances evenly spaced over the sweep
// range, deriving per-side transmittance from the link budget at each point.
std::vector<RatePoint> sweep_distances(const RunConfig& config);

// Curve file with columns distance_km,eta,R,X_error,n_pairs.
std::string serialize_curve(const std::vector<RatePoint>& points);

}  // namespace mpqkd
