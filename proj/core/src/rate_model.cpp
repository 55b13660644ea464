#include <mpqkd/rate_model.hpp>

#include <mpqkd/math.hpp>
#include <mpqkd/pairing.hpp>
#include <mpqkd/sifting.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace mpqkd {

namespace {

// sum codes 0/1/2 as IntensityLabels, matching the sifting tables
constexpr std::array<IntensityLabel, 3> kLabels = {IntensityLabel::Vacuum, IntensityLabel::Decoy,
                                                   IntensityLabel::Signal};

struct ClickModel {
    // per joint label pair (a, b): valid-click probability, and the same
    // with dark counts switched off
    std::array<std::array<double, 3>, 3> p_click{};
    std::array<std::array<double, 3>, 3> p_click_nodark{};
    // label posterior of a detected QKD round
    std::array<std::array<double, 3>, 3> posterior{};
    double p_mean = 0.0;
};

double valid_click(const ChannelParams& ch, double ia, double ib, double grid) {
    // exactly-one-detector probability averaged over the phase difference
    double acc = 0.0;
    for (int k = 0; k < static_cast<int>(grid); ++k) {
        const double phi = two_pi * k / grid;
        const ClickProbabilities p = click_probabilities(ch, ia, ib, phi);
        acc += p.p_l + p.p_r - 2.0 * p.p_l * p.p_r;
    }
    return acc / grid;
}

ClickModel build_click_model(const ProtocolParams& protocol, const ChannelParams& channel,
                             int grid) {
    ClickModel m;
    ChannelParams nodark = channel;
    nodark.dark_count_prob = 0.0;
    const std::array<double, 3> intensity = {channel.extinction_ratio * protocol.mu, protocol.nu,
                                             protocol.mu};
    const std::array<double, 3> p_label = {protocol.p_vacuum(), protocol.p_nu, protocol.p_mu};
    const double g = static_cast<double>(grid);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            m.p_click[a][b] = valid_click(channel, intensity[a], intensity[b], g);
            m.p_click_nodark[a][b] = valid_click(nodark, intensity[a], intensity[b], g);
            m.p_mean += p_label[a] * p_label[b] * m.p_click[a][b];
        }
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            m.posterior[a][b] =
                m.p_mean > 0.0 ? p_label[a] * p_label[b] * m.p_click[a][b] / m.p_mean : 0.0;
    return m;
}

void fill_sent(CountTable& table, const ProtocolParams& protocol) {
    const double p0 = protocol.p_vacuum();
    const std::array<double, 3> z_side = {p0 * p0, 2.0 * p0 * protocol.p_nu,
                                          2.0 * p0 * protocol.p_mu};
    const std::array<double, 3> x_side = {p0 * p0, protocol.p_nu * protocol.p_nu,
                                          protocol.p_mu * protocol.p_mu};
    const double n_pairs = table.n_pairs();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            table.at(z_count_class(a, b)).sent = n_pairs * z_side[a] * z_side[b];
            if (a || b) table.at(x_count_class(a, b)).sent = n_pairs * x_side[a] * x_side[b];
        }
}

}  // namespace

RatePoint model_rate_point(const ProtocolParams& protocol, const ChannelParams& channel,
                           double distance_km, const RateModelOptions& options) {
    ensure_valid(protocol);
    ensure_valid(channel);
    if (options.phase_grid < 4) throw std::invalid_argument("phase_grid must be at least 4");
    if (protocol.n_qkd_rounds == 0)
        throw std::invalid_argument("rate model needs a session size (n_qkd_rounds)");

    RatePoint pt;
    pt.distance_km = distance_km;
    pt.eta = channel.transmittance_a * channel.detector_efficiency;

    const ClickModel m = build_click_model(protocol, channel, options.phase_grid);
    pt.click_prob = m.p_mean;
    pt.pair_rate = pairing_rate(m.p_mean, protocol.l_min, protocol.l_max);
    const double n_rounds = static_cast<double>(protocol.n_qkd_rounds);
    pt.n_pairs = pt.pair_rate * n_rounds;

    pt.table.n_rounds = n_rounds;
    const double kappa = 2.0 / protocol.phase_slices;
    const double half_visibility =
        std::sin(pi / protocol.phase_slices) / (pi / protocol.phase_slices) / 4.0;

    // all 81 (front labels, rear labels) patterns of a formed pair
    for (int ai = 0; ai < 3; ++ai)
        for (int aj = 0; aj < 3; ++aj)
            for (int bi = 0; bi < 3; ++bi)
                for (int bj = 0; bj < 3; ++bj) {
                    const double weight =
                        pt.n_pairs * m.posterior[ai][bi] * m.posterior[aj][bj];
                    if (weight == 0.0) continue;
                    const SideLabel la = assign_side_basis(kLabels[ai], kLabels[aj]);
                    const SideLabel lb = assign_side_basis(kLabels[bi], kLabels[bj]);
                    const PairClass cls = sift_pair(la, lb);
                    if (cls == PairClass::Discard) continue;
                    const int sum_a = la == SideLabel::Zero ? 0 : std::max(ai, aj);
                    const int sum_b = lb == SideLabel::Zero ? 0 : std::max(bi, bj);
                    if (cls == PairClass::XPair) {
                        ClassCounts& c = pt.table.at(x_count_class(sum_a, sum_b));
                        if (sum_a == 0 || sum_b == 0) {
                            // no sieve for one-sided vacuum: uncorrelated bits
                            c.total += weight;
                            c.error += weight / 2.0;
                        } else {
                            const double visible = (1.0 - (m.p_click[ai][bi] -
                                                           m.p_click_nodark[ai][bi]) /
                                                              m.p_click[ai][bi]) *
                                                   (1.0 - (m.p_click[aj][bj] -
                                                           m.p_click_nodark[aj][bj]) /
                                                              m.p_click[aj][bj]);
                            const double err = options.x_error_override >= 0.0
                                                   ? options.x_error_override
                                                   : 0.5 - visible * half_visibility;
                            c.total += kappa * weight;
                            c.error += kappa * weight * err;
                        }
                    } else {
                        // ZeroPair and ZPair: bits follow from label positions
                        const auto [chi_a, chi_b] =
                            z_bits(kLabels[ai], kLabels[aj], kLabels[bi], kLabels[bj]);
                        ClassCounts& c = pt.table.at(z_count_class(sum_a, sum_b));
                        c.total += weight;
                        if (chi_a != chi_b) c.error += weight;
                    }
                }

    fill_sent(pt.table, protocol);

    const ClassCounts& ss = pt.table.at(CountClass::X_A2nuB2nu);
    pt.x_error = ss.total > 0.0 ? ss.error / ss.total : 0.0;

    const M11Result m11 = estimate_M11_Z(pt.table, protocol, protocol.epsilon);
    const EphaseResult e11 = estimate_ephase(pt.table, m11, protocol, protocol.epsilon);
    const ClassCounts& zmm = pt.table.at(CountClass::Z_AmuBmu);
    pt.e_mumu = zmm.total > 0.0 ? zmm.error / zmm.total : 0.0;
    const KeyLengthResult key =
        key_length(m11.m11_lower, e11.capped_at_half(), zmm.total, pt.e_mumu, protocol.f_ec,
                   pt.table.n_pairs());
    pt.m11_lower = m11.m11_lower;
    pt.e11_upper = e11.e11_upper;
    pt.key_bits = key.key_bits;
    pt.rate = key.rate;
    return pt;
}

std::vector<RatePoint> sweep_distances(const RunConfig& config) {
    if (!config.sweep.present) throw ConfigError("config has no sweep section");
    if (!config.link.by_distance)
        throw ConfigError("sweep needs a channel specified by distance (link budget)");
    if (config.protocol.n_qkd_rounds == 0)
        throw ConfigError("sweep needs protocol.n_qkd_rounds > 0");

    RateModelOptions options;
    options.x_error_override = config.sweep.x_error_override;

    std::vector<RatePoint> points;
    const int n = config.sweep.n_points;
    for (int i = 0; i < n; ++i) {
        const double f = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        const double d =
            config.sweep.distance_lo_km + f * (config.sweep.distance_hi_km -
                                               config.sweep.distance_lo_km);
        ChannelParams ch = config.channel;
        ch.transmittance_a = ch.transmittance_b = side_transmittance(config.link, d);
        points.push_back(model_rate_point(config.protocol, ch, d, options));
    }
    return points;
}

std::string serialize_curve(const std::vector<RatePoint>& points) {
    std::ostringstream os;
    os << "distance_km,eta,R,X_error,n_pairs\n";
    char buf[160];
    for (const RatePoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.distance_km, p.eta,
                      p.rate, p.x_error, p.n_pairs);
        os << buf;
    }
    return os.str();
}

}  // namespace mpqkd
